import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from netgeo import volume
from netgeo.checks import random_network, random_pd_point, random_permutation
from netgeo.fisher import covariance_at
from netgeo.graph import Network, clique_network, permute_network
from netgeo.volume import (
    EntropyResult,
    KappaCache,
    KappaRecord,
    LogBase,
    McConfig,
    Sampler,
    VolumeEstimate,
)


def kappa1_quadrature():
    """-ln[(1/2)^(1/2) Int_0^inf e^-t log(1 + t) / t dt]."""
    f = lambda t: math.exp(-t) * math.log1p(t) / t
    a, _ = integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13)
    b, _ = integrate.quad(f, 1, math.inf, epsabs=1e-14, epsrel=1e-13)
    return -math.log(math.sqrt(0.5) * (a + b))


def est(value, stderr=0.0):
    return VolumeEstimate(value, stderr, 1000, 1.0, 0.0)


# --- regularizer ------------------------------------------------------------


def test_upsilon_example():
    assert volume.upsilon(np.eye(2), 2, 0.0) == pytest.approx(math.exp(-2) * math.log(2), rel=1e-15)
    assert volume.upsilon(np.eye(2), 2, 0.0) == pytest.approx(0.093807270, abs=1e-9)


def test_upsilon_vanishes_at_small_diagonal():
    vals = [volume.upsilon(t * np.eye(3), 3, 0.0) for t in (1e-1, 1e-2, 1e-3)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-15


def test_upsilon_kappa_shift_and_shape():
    c = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert volume.upsilon(c, 2, 1.5) == pytest.approx(math.exp(1.5) * volume.upsilon(c, 2, 0.0), rel=1e-14)
    with pytest.raises(ValueError):
        volume.upsilon(c, 3, 0.0)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_upsilon_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    p = random_permutation(rng, n)
    theta = random_pd_point(rng, net)
    u = volume.upsilon(covariance_at(net, theta), n, 0.3)
    u2 = volume.upsilon(covariance_at(permute_network(net, p), p.apply(theta)), n, 0.3)
    assert u2 == pytest.approx(u, rel=1e-12)


# --- configuration ----------------------------------------------------------


def test_config_validation():
    assert McConfig(samples=100, chunk_size=1000).chunk_size == 100
    assert McConfig(sampler="qmc").sampler is Sampler.LOW_DISCREPANCY
    with pytest.raises(ValueError):
        McConfig(samples=0)
    with pytest.raises(ValueError):
        McConfig(chunk_size=0)
    with pytest.raises(ValueError):
        McConfig(sampler="grid")


# --- chunk merging ----------------------------------------------------------


@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30), min_size=1, max_size=8))
def test_chunk_merge_matches_pooled_statistics(chunks):
    stats = [
        volume._ChunkStats(len(c), float(np.mean(c)), float(((np.array(c) - np.mean(c)) ** 2).sum()), 0)
        for c in chunks
    ]
    total = volume._reduce(stats)
    pooled = np.concatenate(chunks)
    assert total.count == pooled.size
    assert total.mean == pytest.approx(pooled.mean(), rel=1e-9, abs=1e-9)
    assert total.m2 == pytest.approx(((pooled - pooled.mean()) ** 2).sum(), rel=1e-8, abs=1e-6)


def test_estimate_equals_plain_sample_mean():
    # the chunked estimator reproduces a direct recomputation from the same streams
    cfg = McConfig(samples=5000, seed=9, chunk_size=1024)
    net = clique_network(3, 2)
    from netgeo.fisher import integrand_core

    values = []
    for i, (_, size) in enumerate(volume._chunk_bounds(cfg.samples, cfg.chunk_size)):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(i,)))
        values.extend(integrand_core(net, t).value for t in rng.exponential(size=(size, 3)))
    values = np.array(values)
    e = volume.estimate_volume(net, 0.25, cfg)
    assert e.value == pytest.approx(math.exp(0.25) * values.mean(), rel=1e-12)
    assert e.stderr == pytest.approx(math.exp(0.25) * values.std(ddof=1) / math.sqrt(values.size), rel=1e-9)
    # inside the cone the integrand can still underflow to zero, never the other way
    assert e.accepted_fraction >= np.mean(values > 0)


# --- estimator --------------------------------------------------------------


def test_estimate_rejects_bad_kappa():
    with pytest.raises(ValueError):
        volume.estimate_volume(Network.empty(2), math.nan, McConfig(samples=10))


def test_estimate_kappa_scales_value():
    cfg = McConfig(samples=20_000, seed=3)
    a = volume.estimate_volume(clique_network(3, 3), 0.0, cfg)
    b = volume.estimate_volume(clique_network(3, 3), 1.0, cfg)
    assert b.value == pytest.approx(math.e * a.value, rel=1e-14)
    assert b.stderr == pytest.approx(math.e * a.stderr, rel=1e-14)
    assert b.kappa_used == 1.0


@pytest.mark.parametrize("sampler", ["mc", "qmc"])
def test_thread_count_does_not_change_result(sampler):
    cfg = McConfig(samples=300_000, seed=17, chunk_size=20_000, sampler=sampler)
    net = clique_network(5, 3)
    one = volume.estimate_volume(net, 0.7, cfg, threads=1)
    many = volume.estimate_volume(net, 0.7, cfg, threads=8)
    assert one == many


def test_seed_changes_result():
    net = clique_network(4, 2)
    a = volume.estimate_volume(net, 0.0, McConfig(samples=10_000, seed=1))
    b = volume.estimate_volume(net, 0.0, McConfig(samples=10_000, seed=2))
    assert a.value != b.value


@pytest.mark.parametrize("n", range(2, 7))
def test_complete_graph_accepted_fraction_strictly_inside(n):
    e = volume.estimate_volume(clique_network(n, n), 0.0, McConfig(samples=200_000, seed=n))
    assert 0.0 < e.accepted_fraction < 1.0
    assert e.value >= 0.0 and e.stderr >= 0.0


def test_empty_graph_accepts_everything():
    e = volume.estimate_volume(Network.empty(4), 0.0, McConfig(samples=10_000))
    assert e.accepted_fraction == 1.0


def test_qmc_reports_sample_total():
    e = volume.estimate_volume(Network.empty(2), 0.0, McConfig(samples=8000, sampler="qmc"))
    assert e.samples_total == 8000


# --- calibration ------------------------------------------------------------


def test_kappa1_quadrature_oracle_value():
    # frozen value of the independent 1-D quadrature
    assert kappa1_quadrature() == pytest.approx(0.6406816568, abs=1e-9)


def test_kappa1_matches_quadrature():
    rec = volume.calibrate_kappa(1, McConfig(samples=4_000_000, seed=101))
    exact = kappa1_quadrature()
    assert abs(rec.kappa - exact) <= 3 * rec.kappa_stderr
    # three significant figures
    assert f"{rec.kappa:.3g}" == f"{exact:.3g}"


def test_kappa2_pseudo_random_vs_low_discrepancy():
    a = volume.calibrate_kappa(2, McConfig(samples=1_000_000, seed=5))
    b = volume.calibrate_kappa(2, McConfig(samples=1_000_000, seed=5, sampler="qmc"))
    assert abs(a.kappa - b.kappa) <= 3 * math.hypot(a.kappa_stderr, b.kappa_stderr)
    # the scrambled Sobol estimate is the tighter one
    assert b.kappa_stderr < a.kappa_stderr


@pytest.mark.parametrize("n", [1, 3, 6])
def test_calibration_self_consistency(n):
    cfg = McConfig(samples=400_000, seed=8)
    rec = volume.calibrate_kappa(n, cfg)
    assert rec.n == n and rec.samples == cfg.samples and rec.seed == cfg.seed
    assert volume.calibrate_kappa(n, cfg) == rec
    fresh = volume.estimate_volume(Network.empty(n), rec.kappa, replace(cfg, seed=999))
    sig = math.hypot(fresh.stderr, rec.kappa_stderr)
    assert abs(fresh.value - 1.0) <= 3 * sig


def test_calibrate_rejects_n0():
    with pytest.raises(ValueError):
        volume.calibrate_kappa(0, McConfig(samples=10))


# --- kappa cache ------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    path = tmp_path / "sub" / "kappa.txt"
    cache = KappaCache(path)
    rec = KappaRecord(3, 1.2345678901234567, 1e-4, 1000, 42)
    cache.put(rec)
    assert path.read_text() == "3 1.2345678901234567 0.0001 1000 42\n"
    again = KappaCache(path)
    assert again.get(3, 1000, 42) == rec
    assert again.get(3, 1000, 43) is None and not again.rejected


@pytest.mark.parametrize("content", ["3 1.0 0.1 100\n", "garbage\n", "3 nan 0.1 100 42\n", "3 1.0 -1 100 42\n"])
def test_corrupt_cache_is_rejected(tmp_path, content):
    path = tmp_path / "kappa.txt"
    path.write_text("2 0.5 0.01 100 42\n" + content)
    cache = KappaCache(path)
    assert cache.rejected and cache.records == {}


def test_get_kappa_uses_and_fills_cache(tmp_path):
    cache = KappaCache(tmp_path / "k.txt")
    cfg = McConfig(samples=5000, seed=4)
    rec = volume.get_kappa(2, cfg, cache)
    planted = replace(rec, kappa=123.0)
    cache.put(planted)
    assert volume.get_kappa(2, cfg, cache) == planted
    assert volume.get_kappa(2, cfg, cache, recalibrate=True) == rec
    assert KappaCache(tmp_path / "k.txt").get(2, 5000, 4) == rec


def test_get_kappa_recovers_from_corrupt_cache(tmp_path):
    path = tmp_path / "k.txt"
    path.write_text("not a record\n")
    cache = KappaCache(path)
    rec = volume.get_kappa(2, McConfig(samples=5000, seed=4), cache)
    assert KappaCache(path).get(2, 5000, 4) == rec


def test_low_discrepancy_kappa_is_not_cached(tmp_path):
    cache = KappaCache(tmp_path / "k.txt")
    volume.get_kappa(2, McConfig(samples=4000, sampler="qmc"), cache)
    assert cache.records == {}


# --- entropy ----------------------------------------------------------------


@pytest.mark.parametrize("value", [1.0, 0.67, 0.0592, 0.5])
def test_entropy_base2_is_minus_log2(value):
    assert volume.entropy(est(value)).entropy == pytest.approx(-math.log2(value), rel=1e-15, abs=0)


@pytest.mark.parametrize(
    "value, expected",
    # printed table pairs whose entropy is consistent with a 4-digit truncated volume
    [(0.6700, 0.5777), (0.2229, 2.1649), (0.1158, 3.1092), (0.0592, 4.0767)],
)
def test_entropy_base2_table_pairs(value, expected):
    lo = volume.entropy(est(value + 1e-4)).entropy
    hi = volume.entropy(est(value)).entropy
    assert lo - 5e-5 <= expected <= hi + 5e-5


def test_entropy_natural_base():
    r = volume.entropy(est(0.67, 0.01), "e")
    assert r.entropy == pytest.approx(-math.log(0.67)) and r.log_base is LogBase.NATURAL
    assert r.entropy == pytest.approx(0.4005, abs=1e-4)
    assert volume.entropy(est(1.0), LogBase.NATURAL).entropy == 0.0


@given(st.floats(1e-6, 10.0), st.floats(0.0, 1.0), st.sampled_from(list(LogBase)))
def test_entropy_error_propagation(value, stderr, base):
    r = volume.entropy(est(value, stderr), base)
    assert isinstance(r, EntropyResult)
    assert r.entropy_stderr * value * base.ln_base == pytest.approx(stderr, rel=1e-14, abs=1e-300)


def test_entropy_rejects_non_positive():
    with pytest.raises(volume.VolumeError):
        volume.entropy(est(0.0))


# --- simplex table and monotonicity ----------------------------------------


def test_row_seed():
    seeds = {volume.row_seed(42, k) for k in range(-1, 200)}
    assert len(seeds) == 201 and all(0 <= s < 2**63 for s in seeds)
    assert volume.row_seed(42, 3) == volume.row_seed(42, 3)


def test_simplex_table_two_vertices():
    cfg = McConfig(samples=400_000, seed=21)
    rows = volume.simplex_table(2, cfg)
    assert [r.k for r in rows] == [0, 1]
    v0, v1 = rows[0].volume, rows[1].volume
    assert abs(v0.value - 1.0) <= 3 * math.hypot(v0.stderr, v0.stderr)
    assert v1.value < 1.0
    pairs = volume.monotonicity_check(2, cfg, rows=rows)
    assert len(pairs) == 1 and pairs[0].margin > 0 and pairs[0].sigmas > 3


def test_monotonicity_three_vertices():
    pairs = volume.monotonicity_check(3, McConfig(samples=400_000, seed=22))
    assert [p.k for p in pairs] == [0, 1]
    assert all(p.margin > 0 and p.sigmas > 3 for p in pairs)


def test_monotonicity_needs_two_vertices():
    with pytest.raises(ValueError):
        volume.monotonicity_check(1, McConfig(samples=10))
