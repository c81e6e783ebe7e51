"""Small dense symmetric linear algebra.

Determinants, cofactor adjugates, pivot-based positive-definiteness tests and
inverses for the tiny matrices (n <= 8 or so) that appear as covariance
matrices of networks. The kernels are compiled with numba so the Monte Carlo
volume estimator can call them once per sample; the public functions below
wrap them with input validation.

Matrices are plain ``numpy.ndarray`` objects. ``as_symmetric`` is the single
entry point that checks exact symmetry and returns a read-only float64 copy.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit

#: Above this size ``inverse`` switches from adj/det to an LU solve.
COFACTOR_MAX_N = 6


class SingularMatrixError(ValueError):
    """Raised when a matrix has no inverse."""


class NotPositiveDefiniteError(ValueError):
    """Raised when an operation requires a positive-definite matrix."""


@dataclass(frozen=True)
class PDReport:
    is_pd: bool
    leading_minors: tuple


def as_symmetric(m) -> np.ndarray:
    """Validate ``m`` as a square, exactly symmetric matrix.

    Returns a read-only float64 copy. Symmetry is checked with zero tolerance.
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True, nogil=True)
def _det_inplace(a):
    # closed forms for n <= 3, otherwise partial-pivot LU that overwrites a
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if n == 3:
        return (
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    det = 1.0
    for k in range(n):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                p = i
        if best == 0.0:
            return 0.0
        if p != k:
            for j in range(n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            det = -det
        piv = a[k, k]
        det *= piv
        for i in range(k + 1, n):
            f = a[i, k] / piv
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return det


@njit(cache=True, nogil=True)
def _det(a):
    if a.shape[0] <= 3:
        return _det_inplace(a)
    return _det_inplace(a.copy())


@njit(cache=True, nogil=True)
def _minor_into(a, row, col, out):
    n = a.shape[0]
    r = 0
    for i in range(n):
        if i == row:
            continue
        c = 0
        for j in range(n):
            if j == col:
                continue
            out[r, c] = a[i, j]
            c += 1
        r += 1


@njit(cache=True, nogil=True)
def _adjugate_into(a, symmetric, adj, work):
    # work is (n-1)x(n-1) scratch
    n = a.shape[0]
    if n == 1:
        adj[0, 0] = 1.0
        return
    for i in range(n):
        j0 = i if symmetric else 0
        for j in range(j0, n):
            # adj[i, j] is the (j, i) cofactor
            _minor_into(a, j, i, work)
            v = _det_inplace(work)
            if (i + j) % 2 == 1:
                v = -v
            adj[i, j] = v
            if symmetric:
                adj[j, i] = v


@njit(cache=True, nogil=True)
def _adjugate(a, symmetric):
    n = a.shape[0]
    adj = np.empty((n, n))
    _adjugate_into(a, symmetric, adj, np.empty((max(n - 1, 1), max(n - 1, 1))))
    return adj


@njit(cache=True, nogil=True)
def _pivots(a):
    """Gaussian elimination without row exchanges.

    Returns (pivots, count) where count is the number of pivots produced
    before a zero pivot stopped the elimination.
    """
    n = a.shape[0]
    w = a.copy()
    piv = np.zeros(n)
    for k in range(n):
        p = w[k, k]
        piv[k] = p
        if p == 0.0:
            return piv, k
        for i in range(k + 1, n):
            f = w[i, k] / p
            if f != 0.0:
                for j in range(k + 1, n):
                    w[i, j] -= f * w[k, j]
    return piv, n


@njit(cache=True, nogil=True)
def _pd_det_into(a, w):
    """Return det(a) if every elimination pivot is strictly positive, else -1.

    ``w`` is n x n scratch.
    """
    n = a.shape[0]
    w[:, :] = a
    det = 1.0
    for k in range(n):
        p = w[k, k]
        if not p > 0.0:
            return -1.0
        det *= p
        for i in range(k + 1, n):
            f = w[i, k] / p
            if f != 0.0:
                for j in range(k + 1, n):
                    w[i, j] -= f * w[k, j]
    return det


@njit(cache=True, nogil=True)
def _pd_det(a):
    return _pd_det_into(a, np.empty_like(a))


# ---------------------------------------------------------------------------
# public API


def determinant(m) -> float:
    """Determinant; closed form for n <= 3, partial-pivot LU above."""
    a = as_symmetric(m)
    return float(_det(np.array(a)))


def adjugate(m) -> np.ndarray:
    """Adjugate via n^2 cofactor determinants.

    ``adj[i, j] = (-1)**(i+j) * det(m without row j and column i)``, so that
    ``m @ adj == det(m) * I``. Stays finite as det(m) -> 0.
    """
    a = as_symmetric(m)
    out = _adjugate(np.array(a), True)
    out.setflags(write=False)
    return out


def leading_minors(m) -> np.ndarray:
    """Leading principal minors, from pivot products where elimination allows."""
    a = np.array(as_symmetric(m))
    n = a.shape[0]
    piv, count = _pivots(a)
    minors = np.cumprod(piv[:count]) if count else np.empty(0)
    rest = [_det(np.array(a[:k, :k])) for k in range(count + 1, n + 1)]
    return np.concatenate([minors, np.asarray(rest, dtype=np.float64)])


def pd_test(m) -> PDReport:
    """Positive-definiteness by strict positivity of elimination pivots.

    No tolerance is applied: a zero pivot (a point on the boundary of the
    cone) is reported as not positive definite.
    """
    a = np.array(as_symmetric(m))
    piv, count = _pivots(a)
    is_pd = count == a.shape[0] and bool(np.all(piv > 0.0))
    return PDReport(is_pd=is_pd, leading_minors=tuple(float(x) for x in leading_minors(a)))


def inverse(m) -> np.ndarray:
    """Inverse as adj/det for n <= 6, LU solve above.

    Raises
    ------
    SingularMatrixError
        If the determinant is exactly zero or LU meets a zero pivot.
    """
    a = np.array(as_symmetric(m))
    n = a.shape[0]
    if n <= COFACTOR_MAX_N:
        det = _det(a)
        if det == 0.0:
            raise SingularMatrixError("matrix is singular")
        out = _adjugate(a, True) / det
    else:
        try:
            out = np.linalg.solve(a, np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError("matrix is singular") from exc
        out = 0.5 * (out + out.T)
    out.setflags(write=False)
    return out
