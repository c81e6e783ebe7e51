"""Regularized volume of the statistical manifold, its normalization and entropy.

The volume of a network is

    V = e^kappa * Int_Theta exp(-Tr C) log[1 + (det C)^n] sqrt(det G) dtheta.

Because the adjacency has a zero diagonal, Tr C = sum(theta) and exp(-Tr C)
is exactly the density of n independent unit exponentials. Drawing theta from
that density turns V into e^kappa times the plain mean of the integrand core
(zero wherever C(theta) is not positive definite), with no importance weights.

kappa(n) is fixed so that the empty network on n vertices has volume 1.

Work is split into fixed-size chunks. Each chunk seeds its own generator from
(seed, chunk index) and chunk statistics are merged in index order, so the
result is bit-identical for any number of worker threads.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
import logging
import math
import os
import warnings

import numpy as np
from scipy.stats import qmc

from .fisher import _core_batch
from .graph import Network, clique_network

log = logging.getLogger(__name__)

DEFAULT_CHUNK = 1 << 16
QMC_REPLICATIONS = 8


class Sampler(str, Enum):
    PSEUDO_RANDOM = "mc"
    LOW_DISCREPANCY = "qmc"


class LogBase(str, Enum):
    NATURAL = "e"
    BASE2 = "2"

    @property
    def ln_base(self):
        return 1.0 if self is LogBase.NATURAL else math.log(2.0)


class VolumeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class McConfig:
    samples: int = 20_000_000
    seed: int = 42
    chunk_size: int = DEFAULT_CHUNK
    sampler: Sampler = Sampler.PSEUDO_RANDOM

    def __post_init__(self):
        object.__setattr__(self, "sampler", Sampler(self.sampler))
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")
        if self.chunk_size > self.samples:
            object.__setattr__(self, "chunk_size", self.samples)


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    samples_total: int
    accepted_fraction: float
    kappa_used: float


@dataclass(frozen=True)
class EntropyResult:
    entropy: float
    entropy_stderr: float
    log_base: LogBase


@dataclass(frozen=True)
class KappaRecord:
    n: int
    kappa: float
    kappa_stderr: float
    samples: int
    seed: int


def upsilon(c, n, kappa):
    """exp[kappa - Tr C] * log[1 + (det C)^n], evaluated literally."""
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {c.shape}")
    det = np.linalg.det(c)
    return float(math.exp(kappa - np.trace(c)) * math.log1p(det**n))


# ---------------------------------------------------------------------------
# chunked estimation


@dataclass(frozen=True)
class _ChunkStats:
    count: int
    mean: float
    m2: float
    accepted: int


def _merge(a, b):
    # Chan et al. pairwise update; applied strictly left to right
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return _ChunkStats(n, mean, m2, a.accepted + b.accepted)


def _chunk_bounds(total, chunk):
    return [(s, min(chunk, total - s)) for s in range(0, total, chunk)]


def _evaluate(adjacency, thetas):
    out = np.empty(thetas.shape[0])
    accepted = _core_batch(adjacency, np.ascontiguousarray(thetas), out)
    m2 = float(((out - out.mean()) ** 2).sum())
    return _ChunkStats(len(out), float(out.mean()), m2, int(accepted))


def _mc_chunk(adjacency, seed, index, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    return _evaluate(adjacency, rng.exponential(size=(size, adjacency.shape[0])))


def _qmc_chunk(adjacency, seed, replication, start, size):
    n = adjacency.shape[0]
    engine = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(replication,))))
    if start:
        engine.fast_forward(start)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for non powers of two
        u = engine.random(size)
    return _evaluate(adjacency, -np.log1p(-u))


def _run(tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: t(), tasks))


def _reduce(stats):
    total = stats[0]
    for s in stats[1:]:
        total = _merge(total, s)
    return total


def estimate_volume(net: Network, kappa: float, cfg: McConfig, threads: int = 1) -> VolumeEstimate:
    """Monte Carlo estimate of the regularized volume of ``net``.

    Parameters
    ----------
    net : Network
    kappa : float
        Normalization constant; the estimate scales with exp(kappa).
    cfg : McConfig
        Sample count, seed, chunk size and sampler. With the low-discrepancy
        sampler the samples are split over 8 independently scrambled Sobol
        sequences and the standard error comes from the spread of their means.
    threads : int
        Worker threads. Does not change the result.
    """
    if not math.isfinite(kappa):
        raise ValueError("kappa must be finite")
    adjacency = net.adjacency.astype(np.float64)
    scale = math.exp(kappa)

    if cfg.sampler is Sampler.PSEUDO_RANDOM:
        bounds = _chunk_bounds(cfg.samples, cfg.chunk_size)
        tasks = [
            (lambda i=i, size=size: _mc_chunk(adjacency, cfg.seed, i, size))
            for i, (_, size) in enumerate(bounds)
        ]
        total = _reduce(_run(tasks, threads))
        stderr = math.sqrt(total.m2 / (total.count - 1) / total.count) if total.count > 1 else math.inf
        return VolumeEstimate(
            value=scale * total.mean,
            stderr=scale * stderr,
            samples_total=total.count,
            accepted_fraction=total.accepted / total.count,
            kappa_used=kappa,
        )

    per_rep = max(1, -(-cfg.samples // QMC_REPLICATIONS))
    chunk = min(cfg.chunk_size, per_rep)
    tasks, owner = [], []
    for r in range(QMC_REPLICATIONS):
        for start, size in _chunk_bounds(per_rep, chunk):
            tasks.append(lambda r=r, start=start, size=size: _qmc_chunk(adjacency, cfg.seed, r, start, size))
            owner.append(r)
    results = _run(tasks, threads)
    reps = [_reduce([s for s, o in zip(results, owner) if o == r]) for r in range(QMC_REPLICATIONS)]
    means = np.array([s.mean for s in reps])
    count = sum(s.count for s in reps)
    accepted = sum(s.accepted for s in reps)
    return VolumeEstimate(
        value=scale * float(means.mean()),
        stderr=scale * float(means.std(ddof=1) / math.sqrt(QMC_REPLICATIONS)),
        samples_total=count,
        accepted_fraction=accepted / count,
        kappa_used=kappa,
    )


# ---------------------------------------------------------------------------
# normalization


def calibrate_kappa(n: int, cfg: McConfig, threads: int = 1) -> KappaRecord:
    """kappa(n) = -ln I0(n), with I0 the kappa = 0 volume of the empty n-graph."""
    if n < 1:
        raise ValueError("n must be positive")
    est = estimate_volume(Network.empty(n), 0.0, cfg, threads=threads)
    if not est.value > 0.0:
        raise VolumeError(f"empty-graph integral estimated as {est.value}; too few samples")
    return KappaRecord(
        n=n,
        kappa=-math.log(est.value),
        kappa_stderr=est.stderr / est.value,
        samples=cfg.samples,
        seed=cfg.seed,
    )


class KappaCache:
    """Text cache of kappa records, one ``n kappa kappa_stderr samples seed`` per line.

    Only pseudo-random calibrations are cached. Lines that do not parse make
    the whole file untrusted: it is ignored and rewritten on the next store.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self.records = {}
        self.rejected = False
        self._load()

    def _load(self):
        if not os.path.exists(self.path):
            return
        try:
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    n, kappa, err, samples, seed = line.split()
                    rec = KappaRecord(int(n), float(kappa), float(err), int(samples), int(seed))
                    if not (rec.n >= 1 and math.isfinite(rec.kappa) and math.isfinite(rec.kappa_stderr)
                            and rec.kappa_stderr >= 0 and rec.samples >= 1):
                        raise ValueError(line)
                    self.records[(rec.n, rec.samples, rec.seed)] = rec
        except (ValueError, UnicodeDecodeError):
            log.warning("kappa cache %s is corrupt; ignoring it", self.path)
            self.records = {}
            self.rejected = True

    def get(self, n, samples, seed):
        return self.records.get((n, samples, seed))

    def put(self, rec):
        self.records[(rec.n, rec.samples, rec.seed)] = rec
        parent = os.path.dirname(self.path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for r in sorted(self.records.values(), key=lambda r: (r.n, r.samples, r.seed)):
                fh.write(f"{r.n} {r.kappa!r} {r.kappa_stderr!r} {r.samples} {r.seed}\n")
        os.replace(tmp, self.path)


def get_kappa(n, cfg, cache=None, recalibrate=False, threads=1):
    """Calibrated kappa(n), through ``cache`` when the sampler allows it."""
    cacheable = cache is not None and cfg.sampler is Sampler.PSEUDO_RANDOM
    if cacheable and not recalibrate:
        rec = cache.get(n, cfg.samples, cfg.seed)
        if rec is not None:
            return rec
    rec = calibrate_kappa(n, cfg, threads=threads)
    if cacheable:
        try:
            cache.put(rec)
        except OSError as exc:
            log.warning("could not write kappa cache %s: %s", cache.path, exc)
    return rec


# ---------------------------------------------------------------------------
# entropy and the simplex table


def entropy(v: VolumeEstimate, base=LogBase.BASE2) -> EntropyResult:
    """S = -log(V) in the requested base, with first-order error propagation."""
    base = LogBase(base)
    if not v.value > 0.0:
        raise VolumeError(f"entropy needs a positive volume, got {v.value}")
    ln_b = base.ln_base
    return EntropyResult(
        entropy=-math.log(v.value) / ln_b,
        entropy_stderr=v.stderr / (v.value * ln_b),
        log_base=base,
    )


def row_seed(seed, k):
    """Seed for table row ``k``, distinct from the calibration seed."""
    return int(np.random.SeedSequence([seed, k + 1]).generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class TableRow:
    k: int
    volume: VolumeEstimate
    entropy: EntropyResult


def simplex_table(n, cfg, base=LogBase.BASE2, kappa=None, threads=1):
    """Volume and entropy of the k-simplex (clique on k+1 vertices), k = 0..n-1.

    ``kappa`` is calibrated with ``cfg`` unless a record is supplied. Every
    row uses its own seed, so row 0 is an independent re-estimate of the
    empty network and should come out as 1 within its error bar.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if kappa is None:
        kappa = calibrate_kappa(n, cfg, threads=threads)
    rows = []
    for k in range(n):
        est = estimate_volume(clique_network(n, k + 1), kappa.kappa,
                              replace(cfg, seed=row_seed(cfg.seed, k)), threads=threads)
        rows.append(TableRow(k, est, entropy(est, base)))
    return rows


@dataclass(frozen=True)
class MonotonicityPair:
    k: int
    margin: float
    sigmas: float


def monotonicity_check(n, cfg, rows=None, threads=1):
    """V_k - V_{k+1} for consecutive simplex dimensions, in combined standard errors.

    The rows use independent seeds, so the combined error is the quadrature
    sum of the two row errors. The shared kappa scales both rows alike and
    cannot flip the sign of a difference, so it is left out.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if rows is None:
        rows = simplex_table(n, cfg, threads=threads)
    out = []
    for a, b in zip(rows, rows[1:]):
        margin = a.volume.value - b.volume.value
        sigma = math.hypot(a.volume.stderr, b.volume.stderr)
        out.append(MonotonicityPair(a.k, margin, margin / sigma if sigma > 0 else math.inf))
    return out
