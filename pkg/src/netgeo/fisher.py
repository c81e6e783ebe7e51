"""Fisher-Rao metric of the zero-mean Gaussian model parametrized by variances.

For a network with 0/1 adjacency A the covariance is C(theta) = diag(theta) + A
and the parameter space is the open cone where C(theta) is positive definite.
The metric has the closed form

    g[mu, nu] = 1/2 * (C^-1[mu, nu])**2

which ``fisher_matrix`` evaluates through the adjugate. Two independent
routes are provided for checking it: the second-order differential-operator
expansion of the Gaussian integral (``fisher_matrix_lemma1``) and a direct
Monte Carlo average of score products (``fisher_entry_mc_oracle``).
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit

from . import linalg
from .graph import Network

# log1p(x)/x switches to a 4-term series below this value of x
SERIES_THRESHOLD = 1e-4
# relative slack (against the Hadamard bound) for clamping det(adj**2) < 0
NEGATIVE_DET_RTOL = 1e-12


class AdjugateSignError(ArithmeticError):
    """det of the squared adjugate came out clearly negative."""


@dataclass(frozen=True)
class MetricEvaluation:
    theta: np.ndarray
    c: np.ndarray
    det_c: float
    adj_c: np.ndarray
    g: np.ndarray
    in_domain: bool


@dataclass(frozen=True)
class IntegrandCore:
    value: float
    log_scale_ok: bool
    in_domain: bool


def _theta(net, theta):
    t = np.asarray(theta, dtype=np.float64)
    if t.shape != (net.n,):
        raise ValueError(f"theta must have length {net.n}, got shape {t.shape}")
    return t


def covariance_at(net: Network, theta) -> np.ndarray:
    """C(theta) = diag(theta) + adjacency."""
    t = _theta(net, theta)
    c = net.adjacency.astype(np.float64)
    c[np.diag_indices(net.n)] = t
    c.setflags(write=False)
    return c


def _require_pd(c):
    if not linalg.pd_test(c).is_pd:
        raise linalg.NotPositiveDefiniteError("covariance matrix is not positive definite")


def fisher_matrix(c) -> np.ndarray:
    """G[mu, nu] = (adj(C)[mu, nu] / det C)**2 / 2 for positive-definite C."""
    c = linalg.as_symmetric(c)
    _require_pd(c)
    det = linalg.determinant(c)
    adj = linalg.adjugate(c)
    g = 0.5 * (adj / det) ** 2
    g.setflags(write=False)
    return g


def fisher_matrix_lemma1(c) -> np.ndarray:
    """Metric from the three-term expansion f(0) + Df(0) + D^2 f(0) / 2.

    Each term is summed exactly as written, with no use of the identity
    sum_j c[i, j] c^-1[j, mu] = delta[i, mu]; the cancellation down to
    (c^-1[mu, nu])**2 / 2 is left to happen numerically. The inverse comes
    from a Cholesky solve rather than the adjugate so that this route shares
    nothing with ``fisher_matrix`` beyond the input.
    """
    c = linalg.as_symmetric(c)
    _require_pd(c)
    L = np.linalg.cholesky(c)
    a = np.linalg.solve(L.T, np.linalg.solve(L, np.eye(c.shape[0])))
    a = 0.5 * (a + a.T)
    d = np.diag(a)

    f0 = 0.25 * np.outer(d, d)

    # sum_ij c_ij a_i mu a_j mu, one value per mu
    q = np.einsum("ij,im,jm->m", c, a, a)
    d1 = -0.25 * (np.outer(q, d) + np.outer(d, q))

    es = lambda spec: np.einsum(spec, c, c, a, a, a, a, optimize="greedy")
    d2 = 0.125 * (
        es("ij,hk,im,jm,hv,kv->mv")
        + es("ij,hk,km,jm,hv,iv->mv")
        + es("ij,hk,hm,jm,kv,iv->mv")
        + es("ij,hk,km,im,hv,jv->mv")
        + es("ij,hk,hm,im,kv,jv->mv")
        + es("ij,hk,iv,jv,hm,km->mv")
    )
    return f0 + d1 + d2


def fisher_entry_mc_oracle(net, theta, mu, nu, samples, seed):
    """Monte Carlo estimate of E[d_mu log p * d_nu log p] under N(0, C(theta)).

    ``mu`` and ``nu`` are 1-based vertex indices. The score is
    d_mu log p = -(c^-1[mu, mu] - ((C^-1 x)[mu])**2) / 2.

    Returns
    -------
    (estimate, stderr)
    """
    if samples < 1000:
        raise ValueError("the oracle needs at least 1000 samples")
    c = covariance_at(net, theta)
    _require_pd(c)
    if not (1 <= mu <= net.n and 1 <= nu <= net.n):
        raise ValueError(f"indices must be in 1..{net.n}")
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(c)
    a = np.linalg.inv(c)
    x = rng.standard_normal((samples, net.n)) @ L.T
    ax = x @ a
    s_mu = -0.5 * (a[mu - 1, mu - 1] - ax[:, mu - 1] ** 2)
    s_nu = -0.5 * (a[nu - 1, nu - 1] - ax[:, nu - 1] ** 2)
    prod = s_mu * s_nu
    return float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(samples))


# ---------------------------------------------------------------------------
# integrand core: log[1 + (det C)^n] * sqrt(det G), evaluated without 1/det


@njit(cache=True, nogil=True)
def _log1p_over_x(x):
    if x < SERIES_THRESHOLD:
        return 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x))
    return math.log1p(x) / x


@njit(cache=True, nogil=True)
def _squared_adjugate_det(c, adj, work):
    """det(adj(C)**2) and the Hadamard bound prod_i adj[i, i]**2, adj overwritten."""
    n = c.shape[0]
    linalg._adjugate_into(c, True, adj, work)
    hadamard = 1.0
    for i in range(n):
        for j in range(n):
            adj[i, j] = adj[i, j] * adj[i, j]
        hadamard *= adj[i, i]
    dh = linalg._det_inplace(adj)
    if dh < 0.0:
        if dh >= -NEGATIVE_DET_RTOL * hadamard:
            dh = 0.0
        else:
            raise AdjugateSignError("det(adj(C)**2) is negative beyond rounding")
    return dh


@njit(cache=True, nogil=True)
def _core_scaled(c, w, adj, work):
    """Log-space evaluation for C so large that det C or adj(C)**2 overflow.

    With C = s C' (s the largest diagonal entry), det C = s^n det C' and
    det(adj(C)**2) = s^(2n(n-1)) det(adj(C')**2).
    """
    n = c.shape[0]
    s = 0.0
    for i in range(n):
        s = max(s, c[i, i])
    scaled = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            scaled[i, j] = c[i, j] / s
    det1 = linalg._pd_det_into(scaled, w)
    if det1 <= 0.0:
        return 0.0
    dh1 = _squared_adjugate_det(scaled, adj, work)
    if dh1 == 0.0:
        return 0.0
    ls = math.log(s)
    logx = n * (n * ls + math.log(det1))
    if logx > 700.0:
        loglog = math.log(logx)  # log(log1p(e^L)) = log L + O(e^-L / L)
    else:
        loglog = math.log(math.log1p(math.exp(logx)))
    return math.exp(
        loglog - logx - 0.5 * n * math.log(2.0) + 0.5 * math.log(dh1) + n * (n - 1) * ls
    )


@njit(cache=True, nogil=True)
def _core_kernel_into(c, w, adj, work):
    """Return (value, status): status 0 = outside the PD cone, 1 = ok,
    2 = ok but an intermediate overflowed and the value was taken in log space.

    ``w`` and ``adj`` are n x n scratch, ``work`` is (n-1) x (n-1) scratch.
    """
    n = c.shape[0]
    det = linalg._pd_det_into(c, w)
    if det <= 0.0:
        return 0.0, 0
    if math.isfinite(det):
        dh = _squared_adjugate_det(c, adj, work)
        x = det**n
        if math.isfinite(dh) and math.isfinite(x):
            return _log1p_over_x(x) * 0.5 ** (0.5 * n) * math.sqrt(dh), 1
    return _core_scaled(c, w, adj, work), 2


@njit(cache=True, nogil=True)
def _core_kernel(c):
    n = c.shape[0]
    k = max(n - 1, 1)
    return _core_kernel_into(c, np.empty((n, n)), np.empty((n, n)), np.empty((k, k)))


@njit(cache=True, nogil=True)
def _core_batch(adjacency, thetas, out):
    """Fill ``out`` with integrand values for each row of ``thetas``.

    Returns the number of rows inside the PD cone.
    """
    m, n = thetas.shape
    c = adjacency.copy()
    w = np.empty((n, n))
    adj = np.empty((n, n))
    k = max(n - 1, 1)
    work = np.empty((k, k))
    accepted = 0
    for s in range(m):
        for i in range(n):
            c[i, i] = thetas[s, i]
        v, status = _core_kernel_into(c, w, adj, work)
        out[s] = v
        if status > 0:
            accepted += 1
    return accepted


def integrand_core(net: Network, theta) -> IntegrandCore:
    """log[1 + (det C)^n] * sqrt(det G) at one point, zero outside the cone.

    Computed as (log1p(d^n) / d^n) * 2^(-n/2) * sqrt(det(adj(C)**2)) with
    d = det C, so the d^-n singularity of sqrt(det G) cancels analytically.
    """
    c = np.array(covariance_at(net, theta))
    value, status = _core_kernel(c)
    return IntegrandCore(value=float(value), log_scale_ok=status != 2, in_domain=status > 0)


def evaluate_metric(net: Network, theta) -> MetricEvaluation:
    t = _theta(net, theta)
    c = covariance_at(net, t)
    det = linalg.determinant(c)
    adj = linalg.adjugate(c)
    in_domain = linalg.pd_test(c).is_pd
    if in_domain:
        g = 0.5 * (adj / det) ** 2
    else:
        g = np.full_like(c, np.nan)
    return MetricEvaluation(theta=t, c=c, det_c=det, adj_c=adj, g=g, in_domain=in_domain)


def simplex_det_g(theta, k) -> float:
    """det G for a clique on the first k vertices, from its block structure.

    det G = 2^-n * det(Gamma_k**2) / (det C_k)^(2k) * prod_{i>k} theta_i^-2,
    where Gamma_k is the cofactor matrix of the clique block C_k and the
    square is taken entrywise. Used only as a cross-check of ``fisher_matrix``.
    """
    t = np.asarray(theta, dtype=np.float64)
    n = t.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}")
    ck = np.ones((k, k))
    ck[np.diag_indices(k)] = t[:k]
    gamma = linalg.adjugate(ck)
    det_ck = linalg.determinant(ck)
    rest = t[k:]
    return float(
        0.5**n * linalg.determinant(gamma**2) / det_ck ** (2 * k) * np.prod(rest**-2.0)
    )
