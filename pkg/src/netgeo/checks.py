"""Numerical verification suites.

Each check returns a ``Check`` with a status of PASS, FAIL or WIDE. WIDE
means a statistical check was inconclusive: the error bars are larger than
the margin being tested, so the run neither supports nor contradicts the
claim. The CLI ``verify`` command and the acceptance tests both use these.
"""
from dataclasses import dataclass, replace
import math

import numpy as np

from . import fisher, linalg, lowdim, volume
from .graph import Network, Permutation, clique_network, permute_network

PASS, FAIL, WIDE = "PASS", "FAIL", "WIDE"

#: Seed offset separating "fresh" re-estimates from the calibration stream.
FRESH_SEED_OFFSET = 1_000_003


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    detail: str

    @property
    def ok(self):
        return self.status != FAIL

    def line(self):
        return f"{self.status:4s}  {self.name}: {self.detail}"


def _status(ok):
    return PASS if ok else FAIL


# ---------------------------------------------------------------------------
# random instances


def random_network(rng, n, p=0.5):
    a = np.triu((rng.random((n, n)) < p).astype(np.int8), 1)
    return Network(n, a + a.T)


def random_permutation(rng, n):
    return Permutation(tuple(int(x) + 1 for x in rng.permutation(n)))


def random_pd_point(rng, net, scale=3.0, max_tries=10_000):
    """theta with C(theta) positive definite, drawn as exponentials and retried."""
    for _ in range(max_tries):
        theta = rng.exponential(scale, size=net.n)
        if linalg.pd_test(fisher.covariance_at(net, theta)).is_pd:
            return theta
    raise RuntimeError("could not find a point inside the cone")


# ---------------------------------------------------------------------------
# metric identities


def check_closed_form_vs_expansion(per_n=500, ns=range(2, 7), seed=0, rtol=1e-9):
    """Closed-form metric against the three-term Gaussian-integral expansion."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        for _ in range(per_n):
            net = random_network(rng, n)
            c = fisher.covariance_at(net, random_pd_point(rng, net))
            g = fisher.fisher_matrix(c)
            h = fisher.fisher_matrix_lemma1(c)
            # per-entry scale sqrt(g_mm g_vv), which bounds |g_mv| from above
            diag = np.sqrt(np.diag(g))
            worst = max(worst, float(np.max(np.abs(g - h) / np.outer(diag, diag))))
    return Check(
        "metric closed form vs expansion",
        _status(worst <= rtol),
        f"{per_n} instances per n in {list(ns)}, worst entrywise relative deviation {worst:.2e} (tol {rtol:g})",
    )


def check_score_oracle(cases=20, samples=100_000, seed=2):
    """Closed-form metric entries against direct Monte Carlo score averages."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    for i in range(cases):
        n = int(rng.integers(1, 6))
        net = random_network(rng, n)
        theta = random_pd_point(rng, net, scale=2.0)
        mu, nu = (int(x) for x in rng.integers(1, n + 1, size=2))
        est, se = fisher.fisher_entry_mc_oracle(net, theta, mu, nu, samples, seed=seed * 1000 + i)
        exact = fisher.fisher_matrix(fisher.covariance_at(net, theta))[mu - 1, nu - 1]
        z = abs(est - exact) / se
        worst = max(worst, z)
        bad += z > 3.0
    return Check(
        "metric vs score-product Monte Carlo",
        _status(bad == 0),
        f"{cases} cases at {samples} samples, worst deviation {worst:.2f} stderr (limit 3)",
    )


def check_pointwise_invariance(trials=200, seed=2, tol=1e-12):
    """det G and Upsilon at theta vs the permuted network at the permuted theta."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        net = random_network(rng, n)
        p = random_permutation(rng, n)
        theta = random_pd_point(rng, net)
        c = fisher.covariance_at(net, theta)
        c2 = fisher.covariance_at(permute_network(net, p), p.apply(theta))
        pm = p.matrix()
        if not np.array_equal(c2, pm @ c @ pm.T):
            return Check("pointwise isomorphism invariance", FAIL, "C' != P C P^t")
        g, g2 = fisher.fisher_matrix(c), fisher.fisher_matrix(c2)
        equiv = np.max(np.abs(g2 - pm @ g @ pm.T)) / np.max(np.abs(g))
        dg, dg2 = np.linalg.det(g), np.linalg.det(g2)
        u, u2 = volume.upsilon(c, n, 0.0), volume.upsilon(c2, n, 0.0)
        worst = max(worst, equiv, abs(dg - dg2) / abs(dg), abs(u - u2) / abs(u))
    return Check(
        "pointwise isomorphism invariance",
        _status(worst <= tol),
        f"{trials} random (graph, permutation, theta), worst relative change {worst:.1e} (tol {tol:g})",
    )


# ---------------------------------------------------------------------------
# Monte Carlo volume checks


class KappaSource:
    """Calibrated kappa per n, shared between checks in one run."""

    def __init__(self, cfg, cache=None, recalibrate=False, threads=1):
        self.cfg = cfg
        self.cache = cache
        self.recalibrate = recalibrate
        self.threads = threads
        self._memo = {}

    def __call__(self, n):
        if n not in self._memo:
            self._memo[n] = volume.get_kappa(
                n, self.cfg, cache=self.cache, recalibrate=self.recalibrate, threads=self.threads
            )
        return self._memo[n]


def _within(a, b, sigmas=3.0):
    diff = a.value - b.value
    sig = math.hypot(a.stderr, b.stderr)
    return abs(diff) <= sigmas * sig, (abs(diff) / sig if sig > 0 else math.inf)


def check_calibration(kappas, ns=range(1, 7), threads=1):
    """Empty-graph volume re-estimated with a fresh seed must be 1 within 3 stderr."""
    parts, ok = [], True
    for n in ns:
        rec = kappas(n)
        cfg = replace(kappas.cfg, seed=kappas.cfg.seed + FRESH_SEED_OFFSET + n)
        est = volume.estimate_volume(Network.empty(n), rec.kappa, cfg, threads=threads)
        # the kappa estimate carries its own error; both enter the band
        sig = math.hypot(est.stderr, est.value * rec.kappa_stderr)
        good = abs(est.value - 1.0) <= 3.0 * sig
        ok &= good
        parts.append(f"n={n}: {est.value:.4f}+-{sig:.4f}")
    return Check("empty-graph normalization", _status(ok), "; ".join(parts))


def check_isomorphism_entropy(kappas, graphs=10, seed=3, threads=1, max_n=6):
    """Entropy of random graphs and of a relabelled copy, independent seeds."""
    rng = np.random.default_rng(seed)
    worst, ok, wide = 0.0, True, False
    for i in range(graphs):
        n = int(rng.integers(2, max_n + 1))
        net = random_network(rng, n)
        p = random_permutation(rng, n)
        kap = kappas(n).kappa
        cfg = kappas.cfg
        a = volume.estimate_volume(net, kap, replace(cfg, seed=cfg.seed + 7 * i + 1), threads=threads)
        b = volume.estimate_volume(permute_network(net, p), kap, replace(cfg, seed=cfg.seed + 7 * i + 2), threads=threads)
        if a.value <= 0.0 or b.value <= 0.0:
            wide = True
            continue
        sa, sb = volume.entropy(a), volume.entropy(b)
        sig = math.hypot(sa.entropy_stderr, sb.entropy_stderr)
        z = abs(sa.entropy - sb.entropy) / sig
        worst = max(worst, z)
        ok &= z <= 3.0
    status = FAIL if not ok else (WIDE if wide else PASS)
    return Check(
        "entropy invariance under relabelling",
        status,
        f"{graphs} random graphs (n <= {max_n}), worst disagreement {worst:.2f} sigma (limit 3)",
    )


def margin_status(pairs):
    """PASS if every margin > 3 sigma, FAIL if any is negative beyond 3 sigma."""
    if any(p.sigmas < -3.0 for p in pairs):
        return FAIL
    if all(p.sigmas > 3.0 for p in pairs):
        return PASS
    return WIDE


def check_monotonicity(kappas, ns=range(2, 7), threads=1):
    """Simplex volumes strictly decreasing in dimension, margins in combined sigma."""
    statuses, parts = [], []
    for n in ns:
        rows = volume.simplex_table(n, kappas.cfg, kappa=kappas(n), threads=threads)
        pairs = volume.monotonicity_check(n, kappas.cfg, rows=rows)
        statuses.append(margin_status(pairs))
        parts.append(f"n={n}: min {min(p.sigmas for p in pairs):.1f} sigma")
    status = FAIL if FAIL in statuses else (WIDE if WIDE in statuses else PASS)
    return Check("simplex volume decreases with dimension", status, "; ".join(parts))


# ---------------------------------------------------------------------------
# quadrature checks


def check_bessel_identity(ys=(0.1, 1.0, 10.0), tol=1e-8):
    res = [abs(2.0 * lowdim.bessel_k0(2.0 * math.sqrt(y)) - lowdim.bessel_integral(y).value) for y in ys]
    return Check(
        "Bessel integral identity",
        _status(max(res) < tol),
        ", ".join(f"y={y:g}: {r:.1e}" for y, r in zip(ys, res)) + f" (tol {tol:g})",
    )


def check_two_vertex_inequality():
    d = lowdim.v2_diag_quadrature()
    o = lowdim.v2_offdiag_quadrature()
    gap = d.value - o.value
    bound = d.abs_error_bound + o.abs_error_bound
    vi = lowdim.varphi_integral()
    chain, pointwise = lowdim.varphi_bound_chain()
    ok = gap - bound > 0 and vi.value - vi.abs_error_bound > 0 and chain.holds and pointwise
    return Check(
        "two-vertex volume inequality",
        _status(ok),
        f"V1-V2 (raw) = {gap:.6f} +- {bound:.1e}; y0 = {vi.root:.6f}; "
        f"Int phi = {vi.value:.6f}; bound chain {'holds' if chain.holds and pointwise else 'fails'}",
    )


def check_two_vertex_mc(kappas, threads=1):
    """Normalized quadrature volumes against Monte Carlo for n = 2."""
    rec = kappas(2)
    cfg = kappas.cfg
    parts, ok = [], True
    for name, net, quad in (
        ("empty", Network.empty(2), lowdim.v2_diag_quadrature(True, rec.kappa)),
        ("edge", clique_network(2, 2), lowdim.v2_offdiag_quadrature(True, rec.kappa)),
    ):
        est = volume.estimate_volume(net, rec.kappa, replace(cfg, seed=cfg.seed + FRESH_SEED_OFFSET + 101), threads=threads)
        # kappa uncertainty moves the normalized quadrature, not the MC row at fixed kappa
        sig = math.sqrt(est.stderr**2 + (quad.value * rec.kappa_stderr) ** 2 + quad.abs_error_bound**2)
        z = abs(est.value - quad.value) / sig
        ok &= z <= 3.0
        parts.append(f"{name}: MC {est.value:.4f} vs quad {quad.value:.4f} ({z:.2f} sigma)")
    return Check("two-vertex Monte Carlo vs quadrature", _status(ok), "; ".join(parts))


def check_remark4():
    rep = lowdim.remark4_check()
    ok = rep.value - rep.result.abs_error_bound > 0 and len(rep.negative_at) > 0
    inner1 = lowdim.remark4_inner(1.0).value
    return Check(
        "three-vertex double integral",
        _status(ok and inner1 > 0),
        f"value {rep.value:.6f} +- {rep.result.abs_error_bound:.1e}; inner(1) = {inner1:.4f}; "
        f"inner integral negative at theta3 = {', '.join(f'{t:g}' for t in rep.negative_at) or 'none'}",
    )


def run_all(cfg, cache=None, recalibrate=False, threads=1):
    kappas = KappaSource(cfg, cache=cache, recalibrate=recalibrate, threads=threads)
    yield check_closed_form_vs_expansion(per_n=100)
    yield check_score_oracle(cases=10, samples=max(1000, min(cfg.samples, 100_000)))
    yield check_pointwise_invariance()
    yield check_bessel_identity()
    yield check_two_vertex_inequality()
    yield check_remark4()
    yield check_calibration(kappas, threads=threads)
    yield check_two_vertex_mc(kappas, threads=threads)
    yield check_isomorphism_entropy(kappas, graphs=4, threads=threads)
    yield check_monotonicity(kappas, threads=threads)
