"""Scalar root finding, bounded minimization and a tridiagonal eigensolver.

Everything here is derivative-free: the objectives that show up in the
capacity and transfer code are piecewise defined and only continuous.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import solve_banded

from .errors import BracketError, ConvergenceError

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule shared by the iterative kernels."""

    abs_tol: float = 1e-12
    rel_tol: float = 4 * _EPS
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def width(self, x):
        return self.abs_tol + self.rel_tol * abs(x)


DEFAULT_TOL = Tolerance()


def root_find_monotone(g, lo, hi, tol=DEFAULT_TOL):
    """Root of a monotone function on a sign-changing bracket.

    Regula falsi with the Illinois down-weighting, falling back to a
    bisection step whenever the bracket fails to halve.

    Parameters
    ----------
    g : callable
        Scalar function, monotone on ``[lo, hi]``.
    lo, hi : float
        Bracket ends; ``g(lo)`` and ``g(hi)`` must differ in sign.
    tol : Tolerance

    Returns
    -------
    float
        A point inside the bracket whose final bracket width is below
        ``tol.width``, or an exact zero of ``g``.

    Raises
    ------
    BracketError
        If there is no sign change on the bracket.
    ConvergenceError
        If ``tol.max_iter`` iterations are exhausted.
    """
    a, b = float(lo), float(hi)
    if a > b:
        a, b = b, a
    fa, fb = g(a), g(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if not (np.isfinite(fa) and np.isfinite(fb)) and (math.isnan(fa) or math.isnan(fb)):
        raise BracketError("function is NaN at a bracket end")
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: g = ({fa}, {fb})")

    side = 0
    last_width = b - a
    for _ in range(tol.max_iter):
        width = b - a
        if width <= tol.width(0.5 * (a + b)):
            return 0.5 * (a + b)
        x = None
        if np.isfinite(fa) and np.isfinite(fb):
            x = (a * fb - b * fa) / (fb - fa)
            if not (a < x < b):
                x = None
        # bisect if the last two steps did not halve the bracket
        if x is None or width > 0.5 * last_width:
            x = 0.5 * (a + b)
            side = 0
        last_width = width
        fx = g(x)
        if fx == 0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = x, fx
            if side == 1:
                fa *= 0.5
            side = 1
    raise ConvergenceError(f"root_find_monotone: no convergence in {tol.max_iter} iterations")


def minimize_scalar(h, lo, hi, tol=DEFAULT_TOL):
    """Brent's golden-section / parabolic minimizer on ``[lo, hi]``.

    Returns
    -------
    (argmin, min) : tuple of float
        A local minimizer within tolerance; global when ``h`` is unimodal.
    """
    a, b = float(lo), float(hi)
    if not a < b:
        raise ValueError("minimize_scalar needs lo < hi")
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = h(x)
    d = e = 0.0
    for _ in range(tol.max_iter):
        m = 0.5 * (a + b)
        tol1 = math.sqrt(_EPS) * abs(x) + tol.abs_tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            return x, fx
        parabolic = False
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                parabolic = True
        if not parabolic:
            e = (b - x) if x < m else (a - x)
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = h(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    raise ConvergenceError(f"minimize_scalar: no convergence in {tol.max_iter} iterations")


def minimize_scan(h, lo, hi, n_scan=64, tol=DEFAULT_TOL, log=False):
    """Coarse scan followed by Brent refinement around the best sample.

    Guards against the non-unimodal objectives that come out of the
    capacity formulas. With ``log=True`` the scan is geometric (``lo > 0``).
    """
    if log:
        xs = np.geomspace(lo, hi, n_scan)
    else:
        xs = np.linspace(lo, hi, n_scan)
    vals = np.array([h(x) for x in xs])
    vals = np.where(np.isnan(vals), np.inf, vals)
    j = int(np.argmin(vals))
    best = (float(xs[j]), float(vals[j]))
    a = xs[max(j - 1, 0)]
    b = xs[min(j + 1, n_scan - 1)]
    if a < b:
        x, fx = minimize_scalar(h, a, b, tol)
        if fx < best[1]:
            best = (x, fx)
    return best


def _sturm_count(diag, off2, shifts, pivmin):
    """Number of eigenvalues strictly below each shift."""
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    count = np.zeros(shifts.shape, dtype=int)
    q = diag[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count += q < 0
    for i in range(1, diag.size):
        q = diag[i] - shifts - off2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def eig_sym_tridiag(diag, offdiag, k, tol=None):
    """Lowest ``k`` eigenpairs of a real symmetric tridiagonal matrix.

    Eigenvalues come from bisection on Sturm counts, eigenvectors from
    inverse iteration with Gram-Schmidt inside clusters of close
    eigenvalues.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n - 1,)
    k : int
        Number of eigenpairs, ``1 <= k <= n``.

    Returns
    -------
    values : ndarray, shape (k,)
        Ascending.
    vectors : ndarray, shape (n, k)
        Euclidean-orthonormal columns.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.size
    if e.size != n - 1:
        raise ValueError("offdiag must have len(diag) - 1 entries")
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= len(diag)")
    if n == 1:
        return d.copy(), np.ones((1, 1))

    abs_e = np.abs(e)
    radius = np.zeros(n)
    radius[:-1] += abs_e
    radius[1:] += abs_e
    g_lo = float(np.min(d - radius))
    g_hi = float(np.max(d + radius))
    tnorm = max(abs(g_lo), abs(g_hi), _EPS)
    off2 = e * e
    pivmin = _EPS * max(1.0, float(np.max(off2)) if off2.size else 1.0) * 1e-8 + np.finfo(float).tiny
    atol = 2 * _EPS * tnorm if tol is None else tol

    lo = np.full(k, g_lo - atol)
    hi = np.full(k, g_hi + atol)
    target = np.arange(1, k + 1)
    for _ in range(200):
        active = (hi - lo) > atol + 2 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        c = _sturm_count(d, off2, mid, pivmin)
        above = c >= target
        hi = np.where(active & above, mid, hi)
        lo = np.where(active & ~above, mid, lo)
    else:
        raise ConvergenceError("eig_sym_tridiag: bisection did not converge")
    values = 0.5 * (lo + hi)

    vectors = np.empty((n, k))
    rng = np.random.default_rng(12345)
    cluster_gap = 1e-3 * tnorm
    band = np.zeros((3, n))
    band[0, 1:] = e
    band[2, :-1] = e
    start = 0
    for j in range(k):
        if j > 0 and values[j] - values[j - 1] > cluster_gap:
            start = j
        shift = values[j] + (2 * _EPS * tnorm) * (1 + (j - start))
        band[1] = d - shift
        y = rng.standard_normal(n)
        y /= np.linalg.norm(y)
        for _ in range(5):
            try:
                z = solve_banded((1, 1), band, y, check_finite=False)
            except np.linalg.LinAlgError:
                band[1] = d - shift * (1 + 16 * _EPS)
                z = solve_banded((1, 1), band, y, check_finite=False)
            for i in range(start, j):
                z -= (vectors[:, i] @ z) * vectors[:, i]
            nz = np.linalg.norm(z)
            if not np.isfinite(nz) or nz == 0:
                raise ConvergenceError("eig_sym_tridiag: inverse iteration broke down")
            z /= nz
            res = d * z
            res[:-1] += e * z[1:]
            res[1:] += e * z[:-1]
            res -= values[j] * z
            y = z
            if np.linalg.norm(res) <= 1e-10 * tnorm:
                break
        # deterministic sign: largest entry positive
        if y[np.argmax(np.abs(y))] < 0:
            y = -y
        vectors[:, j] = y
    return values, vectors
