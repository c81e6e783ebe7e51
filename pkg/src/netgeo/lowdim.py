"""Quadrature cross-checks for two and three vertices.

For n = 2 the volume integral reduces, after the substitution
theta2 = y / theta1, to one-dimensional integrals against the modified
Bessel function K0:

    empty graph:  Int_0^inf 2 K0(2 sqrt y)   log(1 + y^2) / y dy
    single edge:  Int_0^inf 2 K0(2 sqrt(y+1)) sqrt(1 + 2/y) log(1 + y^2) / y dy

These "raw" integrals omit the common prefactor e^kappa * 2^(-n/2); the
normalized variants restore it so they can be compared with Monte Carlo
volumes. The inequality between the two is settled by the sign structure of

    phi(y) = log(1 + y^2) / y * (K0(2 sqrt y) - sqrt(1 + 2/y) K0(2 sqrt(y+1)))

which is negative on (0, y0) and positive beyond a single small root y0.
"""
from dataclasses import dataclass
import math

import numpy as np
from numba import njit
from scipy import integrate

EULER_GAMMA = 0.57721566490153286061
QUAD_LIMIT = 500


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_bound: float
    evaluations: int


# ---------------------------------------------------------------------------
# K0


@njit(cache=True)
def _k0(x):
    if x <= 2.0:
        # K0 = -(ln(x/2) + gamma) I0(x) + sum_k H_k (x^2/4)^k / (k!)^2
        q = 0.25 * x * x
        term = 1.0
        i0 = 1.0
        tail = 0.0
        harmonic = 0.0
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            harmonic += 1.0 / k
            i0 += term
            tail += harmonic * term
            if term < 1e-18 * i0:
                break
        return -(math.log(0.5 * x) + EULER_GAMMA) * i0 + tail
    # Steed's continued fraction (Temme's CF2) for order zero
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 100000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s


@njit(cache=True)
def _k0_array(xs, out):
    for i in range(xs.size):
        out.flat[i] = _k0(xs.flat[i])


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero.

    Power series for x <= 2, continued fraction above. Accepts scalars or
    arrays; every argument must be strictly positive.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if not x > 0.0:
            raise ValueError(f"K0 needs a positive argument, got {x}")
        return _k0(x)
    xs = np.asarray(x, dtype=np.float64)
    if not np.all(xs > 0.0):
        raise ValueError("K0 needs positive arguments")
    out = np.empty_like(xs)
    _k0_array(xs, out)
    return out


def bessel_integral(y):
    """Int_0^inf exp(-t - y/t) / t dt by quadrature; equals 2 K0(2 sqrt y)."""
    f = lambda t: math.exp(-t - y / t) / t
    peak = math.sqrt(y)
    return _quad_pieces(f, [0.0, peak, math.inf])


# ---------------------------------------------------------------------------
# quadrature helpers


def _quad(f, a, b):
    value, err, info, *msg = integrate.quad(
        f, a, b, limit=QUAD_LIMIT, epsabs=1e-14, epsrel=1e-12, full_output=1
    )
    # a message is also returned for benign roundoff; only a spent budget is fatal
    if msg and "subdivisions" in str(msg[0]):
        raise QuadratureError(f"no convergence on [{a}, {b}] within {QUAD_LIMIT} subintervals")
    return value, err, int(info["neval"])


def _quad_pieces(f, breaks):
    """Integrate over consecutive intervals of ``breaks``.

    A first interval starting at 0 is mapped through y = u^2, which removes
    the 1/sqrt(y) and log(y) behaviour the Bessel terms have at the origin.
    """
    total = err = 0.0
    nev = 0
    for a, b in zip(breaks, breaks[1:]):
        if not b > a:
            continue
        if a == 0.0 and math.isfinite(b):
            g = lambda u: 2.0 * u * f(u * u) if u > 0.0 else 0.0
            v, e, k = _quad(g, 0.0, math.sqrt(b))
        else:
            v, e, k = _quad(f, a, b)
        total += v
        err += e
        nev += k
    return QuadratureResult(total, err, nev)


# ---------------------------------------------------------------------------
# n = 2


def _diag_integrand(y):
    return 2.0 * _k0(2.0 * math.sqrt(y)) * math.log1p(y * y) / y


def _offdiag_integrand(y):
    return 2.0 * _k0(2.0 * math.sqrt(y + 1.0)) * math.sqrt(1.0 + 2.0 / y) * math.log1p(y * y) / y


def _normalize(res, normalized, kappa2):
    if not normalized:
        return res
    if kappa2 is None or not math.isfinite(kappa2):
        raise ValueError("normalized quadrature needs the calibrated kappa(2)")
    scale = math.exp(kappa2) * 0.5  # 2^(-n/2) with n = 2
    return QuadratureResult(res.value * scale, res.abs_error_bound * scale, res.evaluations)


def v2_diag_quadrature(normalized=False, kappa2=None):
    """Volume of the empty 2-vertex network as a 1-D Bessel integral."""
    res = _quad_pieces(_diag_integrand, [0.0, 1.0, 10.0, math.inf])
    return _normalize(res, normalized, kappa2)


def v2_offdiag_quadrature(normalized=False, kappa2=None):
    """Volume of the single-edge 2-vertex network as a 1-D Bessel integral."""
    res = _quad_pieces(_offdiag_integrand, [0.0, 1.0, 10.0, math.inf])
    return _normalize(res, normalized, kappa2)


def varphi(y):
    if not y > 0.0:
        raise ValueError(f"phi needs a positive argument, got {y}")
    return (math.log1p(y * y) / y) * (
        _k0(2.0 * math.sqrt(y)) - math.sqrt(1.0 + 2.0 / y) * _k0(2.0 * math.sqrt(y + 1.0))
    )


def varphi_root(lo=1e-6, hi=0.5, tol=1e-12):
    """Sign change of phi by bisection on [lo, hi]."""
    flo, fhi = varphi(lo), varphi(hi)
    if not (flo < 0.0 < fhi):
        raise ValueError(f"phi does not change sign on [{lo}, {hi}]")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = varphi(mid)
        if abs(fm) < tol or hi - lo <= 4 * math.ulp(mid):
            break
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return mid


@dataclass(frozen=True)
class VarphiIntegral:
    root: float
    negative_part: QuadratureResult
    positive_part: QuadratureResult

    @property
    def value(self):
        return self.negative_part.value + self.positive_part.value

    @property
    def abs_error_bound(self):
        return self.negative_part.abs_error_bound + self.positive_part.abs_error_bound


def varphi_integral():
    """Int_0^inf phi(y) dy split at the root of phi."""
    y0 = varphi_root()
    neg = _quad_pieces(varphi, [0.0, y0])
    pos = _quad_pieces(varphi, [y0, 1.0, 10.0, math.inf])
    return VarphiIntegral(y0, neg, pos)


@dataclass(frozen=True)
class BoundChain:
    """The four quantities of the lower-bound chain, in decreasing order."""

    positive_part: float
    exponential_bound: float
    k0_bound: float
    negative_part: float

    @property
    def holds(self):
        return self.positive_part > self.exponential_bound > self.k0_bound > self.negative_part


def varphi_bound_chain(grid_points=2000):
    """Check phi >= -K0(2)/(1+y^2) on (0, y0] and phi >= phi(1) e^(1-y) on [1, 60].

    Returns the chain of integrals and whether the pointwise bounds held on a
    grid. Beyond y = 60 both sides underflow to zero.
    """
    vi = varphi_integral()
    y0 = vi.root
    k02 = _k0(2.0)
    phi1 = varphi(1.0)
    left = np.geomspace(y0 * 1e-8, y0, grid_points)
    right = np.linspace(1.0, 60.0, grid_points)
    ok_left = all(varphi(y) >= -k02 / (1 + y * y) for y in left)
    ok_right = all(varphi(y) >= phi1 * math.exp(1.0 - y) for y in right)
    chain = BoundChain(
        positive_part=vi.positive_part.value,
        exponential_bound=phi1,  # Int_1^inf phi(1) e^(1-y) dy
        k0_bound=k02 * math.atan(y0),  # Int_0^y0 K0(2) / (1 + y^2) dy
        negative_part=-vi.negative_part.value,
    )
    return chain, ok_left and ok_right


# ---------------------------------------------------------------------------
# n = 3


def _kernel_k(y):
    return _k0(2.0 * math.sqrt(y)) - math.sqrt(1.0 + 2.0 / y) * _k0(2.0 * math.sqrt(y + 1.0))


def remark4_inner(theta3, y0=None):
    """Int_0^inf log(1 + (t y)^3) / (t y) * K(y) dy at t = theta3."""
    t = float(theta3)
    if not t > 0.0:
        raise ValueError("theta3 must be positive")
    if y0 is None:
        y0 = varphi_root()

    def f(y):
        ty = t * y
        return math.log1p(ty**3) / ty * _kernel_k(y)

    breaks = sorted({y0, 1.0 / t, 1.0, 10.0})
    return _quad_pieces(f, [0.0] + [b for b in breaks if b < 50.0] + [math.inf])


def default_theta3_grid():
    # dense where e^-theta matters, plus far points that expose the sign change
    return np.concatenate([np.geomspace(1e-4, 60.0, 321), [1e3, 1e4, 1e5]])


@dataclass(frozen=True)
class Remark4Report:
    result: QuadratureResult
    theta3: np.ndarray
    inner: np.ndarray
    negative_at: tuple

    @property
    def value(self):
        return self.result.value


def remark4_check(theta3_grid=None):
    """Double integral Int_0^inf e^-t [inner(t)] dt for three vertices.

    The inner integral is evaluated at every grid point. The outer integral
    is Simpson's rule in ln t over the grid; its error bound is the change
    against the rule on every other point, plus the small-t head (inner(t)
    grows like t^2 there) and the tail beyond the grid.
    """
    grid = np.unique(np.asarray(default_theta3_grid() if theta3_grid is None else theta3_grid, dtype=float))
    if grid.size < 5 or grid[0] <= 0.0:
        raise ValueError("need at least 5 positive grid points")
    y0 = varphi_root()
    inner_res = [remark4_inner(t, y0) for t in grid]
    inner = np.array([r.value for r in inner_res])
    nev = sum(r.evaluations for r in inner_res)

    s = np.log(grid)
    w = inner * np.exp(-grid) * grid
    fine = integrate.simpson(w, x=s)
    coarse = integrate.simpson(w[::2], x=s[::2])
    head = w[0] / 3.0  # Int_0^t0 c t^2 e^-t dt ~ t0^3 c / 3
    tail = abs(inner[-1]) * math.exp(-grid[-1])
    quad_err = sum(r.abs_error_bound * math.exp(-t) * t for r, t in zip(inner_res, grid)) * (s[-1] - s[0]) / len(grid)
    value = float(fine + head)
    bound = float(abs(fine - coarse) + abs(head) + tail + quad_err)
    negative = tuple(float(t) for t, v in zip(grid, inner) if v < 0.0)
    return Remark4Report(QuadratureResult(value, bound, nev), grid, inner, negative)
