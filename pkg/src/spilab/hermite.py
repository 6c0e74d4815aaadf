"""Hermite polynomials orthonormal for the standard Gaussian measure.

``H_n = He_n / sqrt(n!)``, evaluated by the normalized three-term
recurrence in a log-magnitude representation, so that values far out in
the exterior region (where ``|H_n|`` overflows a double) stay usable.
Also: the three-regime large-degree asymptotics around the turning
points ``+-N``, ``N = sqrt(4n + 2)``; ``L^p(gamma)`` norms; the audit of
the growth bound ``||H_n||_p <= C^n p^(3n/4)``; eigenspace counts for the
``d``-dimensional Ornstein-Uhlenbeck operator.
"""

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import comb, gammaln, roots_legendre

from .errors import ConvergenceError, SpiLabError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_GL_ORDER = 24
_GL_X, _GL_W = roots_legendre(_GL_ORDER)
_PANEL = 0.25
_RESCALE = 1e150


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_log(n, x):
    """``(log|H_n(x)|, sign H_n(x))`` by the normalized recurrence.

    ``H_{k+1} = (x H_k - sqrt(k) H_{k-1}) / sqrt(k + 1)``, with a running
    per-point rescaling that keeps the pair ``(H_{k-1}, H_k)`` in range.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n):
        nxt = (x * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            s = np.where(big, np.abs(cur), 1.0)
            prev = prev / s
            cur = cur / s
            log_scale = log_scale + np.log(s)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(cur)) + log_scale, np.sign(cur)


def eval_orthonormal(n, x):
    """``H_n(x)``; overflows to ``+-inf`` only where the value itself does."""
    logabs, sign = eval_log(n, x)
    with np.errstate(over="ignore"):
        return sign * np.exp(logabs)


@dataclass(frozen=True)
class HermiteBasis:
    """The orthonormal family ``H_0 .. H_max_degree``."""

    max_degree: int
    normalization: str = "L2(gamma)-orthonormal"

    def values(self, x):
        """Matrix of shape ``(max_degree + 1, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.max_degree + 1, x.size))
        out[0] = 1.0
        if self.max_degree >= 1:
            out[1] = x
        for k in range(1, self.max_degree):
            out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
        return out

    def gram(self, n_quad=None):
        """Gram matrix under the Gaussian by Gauss-Hermite quadrature
        (exact for the polynomial degrees involved)."""
        n_quad = n_quad or self.max_degree + 2
        t, w = hermegauss(n_quad)
        w = w / math.sqrt(2.0 * math.pi)
        v = self.values(t)
        return (v * w) @ v.T


# ---------------------------------------------------------------------------
# Plancherel-Rotach asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrRegime:
    """Which asymptotic regime a point falls in, with its local variable."""

    tag: str
    N: float
    phase: float
    a_n: float
    b_n: float
    d_n: float


def pr_coefficients(n):
    """``(a_n, b_n, d_n)``."""
    a = (2.0 / math.pi) ** 0.25 * n**-0.25
    b = (8.0 * math.pi) ** -0.25 * n**-0.25
    d = 3.0 ** (1.0 / 3.0) * (2.0 / math.pi**3) ** 0.25 * n ** (-1.0 / 12.0)
    return a, b, d


def airy_ai(z, rtol=1e-16, max_terms=400):
    """Airy function ``Ai`` from its Maclaurin series.

    Terms are added until two consecutive ones fall below ``rtol`` times
    the running sum. Meant for moderate ``|z|`` (the frontier band);
    cancellation grows like ``exp(|z|^(3/2))`` for large positive ``z``.
    """
    z = float(z)
    c1 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
    c2 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)
    f = tf = 1.0
    g = tg = z
    z3 = z**3
    small = 0
    for k in range(1, max_terms):
        tf *= z3 / ((3 * k - 1) * (3 * k))
        tg *= z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if abs(tf) <= rtol * abs(f) and abs(tg) <= rtol * max(abs(g), 1e-300):
            small += 1
            if small >= 2:
                return c1 * f - c2 * g
        else:
            small = 0
    raise ConvergenceError(f"Airy series did not converge at z = {z}")


def szego_airy(t):
    """``A(t) = pi 3^(-1/3) Ai(-3^(-1/3) t)``, the frontier profile."""
    return math.pi * 3.0 ** (-1.0 / 3.0) * airy_ai(-(3.0 ** (-1.0 / 3.0)) * t)


def classify(n, x):
    """Regime of ``x`` for degree ``n`` and its local variable."""
    if n < 10:
        raise ValueError("asymptotic regimes need n >= 10")
    N = math.sqrt(4 * n + 2)
    band = n ** (-1.0 / 6.0)
    if not N - band > 0:
        raise SpiLabError("degenerate frontier band")
    a, b, d = pr_coefficients(n)
    ax = abs(x)
    if ax <= N - band:
        return PrRegime("oscillating", N, math.asin(x / N), a, b, d)
    if ax >= N + band:
        return PrRegime("exterior", N, math.acosh(ax / N), a, b, d)
    t = (N - ax) * 3.0 ** (1.0 / 3.0) * n ** (1.0 / 6.0)
    return PrRegime("frontier", N, t, a, b, d)


def _pr_raw(n, x, reg):
    """Uncalibrated asymptotic value of ``exp(-x^2/4) H_n(x)``."""
    N = reg.N
    if reg.tag == "oscillating":
        phi = reg.phase
        phase = N * N / 8.0 * (2 * phi + math.sin(2 * phi)) - (n - 1) * math.pi / 2.0
        return reg.a_n / math.sqrt(math.cos(phi)) * math.sin(phase)
    parity = -1.0 if (x < 0 and n % 2 == 1) else 1.0
    if reg.tag == "exterior":
        phi = reg.phase
        return parity * reg.b_n / math.sqrt(math.sinh(phi)) * math.exp(N * N / 8.0 * (2 * phi - math.sinh(2 * phi)))
    return parity * reg.d_n * szego_airy(reg.phase)


def _error_scale(n, reg):
    if reg.tag == "oscillating":
        return 1.0 / (n * math.cos(reg.phase) ** 3)
    if reg.tag == "exterior":
        return 1.0 / (n * (math.sinh(reg.phase) * math.exp(-reg.phase)) ** 3)
    return n ** (-2.0 / 3.0)


def weighted_value(n, x):
    """``exp(-x^2/4) H_n(x)`` from the recurrence, in the same scaling as the asymptotics."""
    logabs, sign = eval_log(n, x)
    with np.errstate(over="ignore", under="ignore"):
        return sign * np.exp(logabs - np.asarray(x, dtype=float) ** 2 / 4.0)


def calibration(n):
    """Scalar matching the oscillating formula to the recurrence.

    The reference point is the extremum of the phase closest to ``x = 0``,
    where the sine is +-1 and the relative comparison is well conditioned.
    """
    N = math.sqrt(4 * n + 2)
    # extrema: N^2/8 (2 phi + sin 2 phi) = (n - 1) pi/2 + pi/2 + k pi; nearest phi = 0
    k = -round(n / 2.0)
    target = (n - 1) * math.pi / 2.0 + math.pi / 2.0 + k * math.pi
    phi = 2.0 * target / (N * N)
    for _ in range(3):
        g = N * N / 8.0 * (2 * phi + math.sin(2 * phi)) - target
        phi -= g / (N * N / 4.0 * (1 + math.cos(2 * phi)))
    x = N * math.sin(phi)
    raw = _pr_raw(n, x, classify(n, x))
    return float(weighted_value(n, np.array([x]))[0]) / raw


def pr_asymptotic(n, x, calibrate=True):
    """Asymptotic value of ``exp(-x^2/4) H_n(x)``.

    Returns
    -------
    value : float
        Calibrated to :func:`eval_orthonormal` unless ``calibrate=False``.
    regime : PrRegime
    error_scale : float
        ``1/(n cos^3 phi)``, ``1/(n (sinh(phi) e^-phi)^3)`` or ``n^(-2/3)``.
    """
    reg = classify(n, float(x))
    value = _pr_raw(n, float(x), reg)
    if calibrate:
        value *= calibration(n)
    return value, reg, _error_scale(n, reg)


def envelope(n, phi):
    """Local amplitude ``a_n / sqrt(cos phi)`` of the oscillating regime."""
    a, _, _ = pr_coefficients(n)
    return a / np.sqrt(np.cos(phi))


def oscillating_error(n, phis):
    """``|asymptotic - recurrence| / envelope`` at the angles ``phis``.

    Pointwise relative error is meaningless at the zeros of ``H_n``, so
    the error is measured against the local envelope.
    """
    N = math.sqrt(4 * n + 2)
    c = calibration(n)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    xs = N * np.sin(phis)
    rec = weighted_value(n, xs)
    out = np.empty(phis.size)
    for i, (x, phi) in enumerate(zip(xs, phis)):
        reg = classify(n, x)
        if reg.tag != "oscillating":
            raise ValueError(f"phi = {phi} is outside the oscillating band for n = {n}")
        out[i] = abs(c * _pr_raw(n, x, reg) - rec[i]) / float(envelope(n, phi))
    return out


def window_error(n, phi, half_width=0.02, samples=201):
    """Largest envelope-relative error on ``[phi - half_width, phi + half_width]``."""
    return float(np.max(oscillating_error(n, np.linspace(phi - half_width, phi + half_width, samples))))


# ---------------------------------------------------------------------------
# L^p norms
# ---------------------------------------------------------------------------


def _panels(n, p, extra=()):
    N = math.sqrt(4 * n + 2)
    half = max(N, math.sqrt(max(n * p, 1.0))) + 15.0
    brk = [-half, half, 0.0, *extra]
    if n >= 1:
        brk.extend(hermegauss(n)[0])
    brk = np.unique(np.clip(np.asarray(brk, dtype=float), -half, half))
    edges = [brk[0]]
    for a, b in zip(brk[:-1], brk[1:]):
        k = max(1, int(math.ceil((b - a) / _PANEL)))
        edges.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(edges)


def _log_panel_integrals(n, p, edges):
    """Log of ``int |H_n|^p dgamma`` over each panel ``[edges[i], edges[i+1]]``."""
    a = edges[:-1, None]
    h = (edges[1:] - edges[:-1])[:, None]
    x = a + 0.5 * h * (_GL_X[None, :] + 1.0)
    logabs, _ = eval_log(n, x)
    with np.errstate(invalid="ignore"):
        lg = p * logabs - 0.5 * x * x - _LOG_SQRT_2PI
    lg = np.where(np.isnan(lg), -np.inf, lg)
    top = np.max(lg, axis=1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    s = np.sum(_GL_W[None, :] * np.exp(lg - top), axis=1) * 0.5 * h[:, 0]
    with np.errstate(divide="ignore"):
        return np.log(s) + top[:, 0]


def _logsum(v):
    v = np.asarray(v)
    if v.size == 0:
        return -math.inf
    top = float(np.max(v))
    if not math.isfinite(top):
        return top
    return top + math.log(float(np.sum(np.exp(v - top))))


def log_lp_integral(n, p):
    """``log int |H_n|^p dgamma``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    edges = _panels(n, p)
    return _logsum(_log_panel_integrals(n, p, edges))


def lp_norm(n, p):
    """``||H_n||_p`` under the standard Gaussian.

    Composite Gauss-Legendre panels with breakpoints at the zeros of
    ``H_n`` (where ``|H_n|^p`` loses smoothness for non-even ``p``),
    panel width at most 0.25, over ``|x| <= max(N, sqrt(np)) + 15``.
    """
    if p < 2:
        raise ValueError("lp_norm needs p >= 2")
    if n == 0:
        return 1.0
    val = log_lp_integral(n, p) / p
    if not math.isfinite(val):
        raise ConvergenceError(f"L^p quadrature failed for n = {n}, p = {p}")
    return math.exp(val)


def integral_split(n, p, log=False):
    """``int |H_n|^p dgamma`` split into the oscillating (``|x| <= N - n^-1/6``),
    frontier, and exterior (``|x| >= N + n^-1/6``) parts.

    With ``log=True`` the three logarithms are returned (for large ``p``).
    """
    if p < 2:
        raise ValueError("integral_split needs p >= 2")
    if n < 10:
        raise ValueError("integral_split needs n >= 10")
    N = math.sqrt(4 * n + 2)
    band = n ** (-1.0 / 6.0)
    cuts = (N - band, N + band, -(N - band), -(N + band))
    edges = _panels(n, p, cuts)
    logs = _log_panel_integrals(n, p, edges)
    mid = 0.5 * np.abs(edges[:-1] + edges[1:])
    parts = (
        _logsum(logs[mid <= N - band]),
        _logsum(logs[(mid > N - band) & (mid < N + band)]),
        _logsum(logs[mid >= N + band]),
    )
    if log:
        return parts
    return tuple(math.exp(v) for v in parts)


def audit_lp_bound(n_max, p_set, n_min=1):
    """Empirical constants ``c(n, p) = (||H_n||_p / p^(3n/4))^(1/n)``.

    Returns
    -------
    table : dict
        ``{"n": [...], "p": [...], "c": ndarray (len(n), len(p)),
        "norm": ndarray}``.
    c_sup : float
        Largest entry; the growth bound holds on the table with ``C = c_sup``.
    """
    if n_max < 5:
        raise ValueError("n_max must be at least 5")
    ps = [float(p) for p in p_set]
    if not ps or min(ps) < 2:
        raise ValueError("p_set must be nonempty with every p >= 2")
    ns = list(range(max(1, n_min), n_max + 1))
    c = np.empty((len(ns), len(ps)))
    norms = np.empty_like(c)
    for i, n in enumerate(ns):
        for j, p in enumerate(ps):
            lognorm = log_lp_integral(n, p) / p
            norms[i, j] = math.exp(lognorm)
            c[i, j] = math.exp((lognorm - 0.75 * n * math.log(p)) / n)
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise ConvergenceError("non-finite entry in the L^p audit table")
    return {"n": ns, "p": ps, "c": c, "norm": norms}, float(np.max(c))


def c_sup_over(table, n_lo, n_hi):
    """Largest ``c(n, p)`` with ``n_lo <= n <= n_hi``."""
    ns = np.asarray(table["n"])
    sel = (ns >= n_lo) & (ns <= n_hi)
    return float(np.max(table["c"][sel]))


# ---------------------------------------------------------------------------
# Multivariate counts and bounds
# ---------------------------------------------------------------------------


def eigenspace_dims(d, k):
    """Dimensions for the ``d``-dimensional OU operator at level ``k``.

    Returns ``(level_dim, cumulative_dim)``: the number of multi-indices
    with ``|alpha| = k`` and with ``|alpha| <= k``. The cumulative count is
    ``binom(k + d, d)`` and stays below ``2^d k^d`` for ``k >= 1``.
    """
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    cumulative = int(comb(k + d, d, exact=True))
    below = int(comb(k - 1 + d, d, exact=True)) if k >= 1 else 0
    if k >= 1 and cumulative > 2**d * k**d:
        raise AssertionError("cumulative dimension exceeds 2^d k^d")
    return cumulative - below, cumulative


def multivariate_lp_bound(alpha, p):
    """``prod_k ||H_{alpha_k}||_p``, a bound on ``||H_alpha||_p`` under ``gamma_d``."""
    out = 1.0
    for a in alpha:
        if a < 0:
            raise ValueError("multi-index entries must be non-negative")
        out *= lp_norm(int(a), p)
    return out


def log_factorial(n):
    return float(gammaln(n + 1.0))
