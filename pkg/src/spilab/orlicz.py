"""Young functions, Legendre conjugates and Orlicz-space norms.

Two norms live on an Orlicz space ``L_Phi``:

* the Luxembourg norm ``||f||_Phi``, the smallest ``lam`` with
  ``int Phi(|f| / lam) dmu <= 1`` (:func:`luxembourg_norm`);
* the Orlicz norm ``N_Phi(f) = sup { int f g dmu : int Phi*(|g|) dmu <= 1 }``
  (:func:`orlicz_norm`, evaluated with the Amemiya formula).

They satisfy ``||f||_Phi <= N_Phi(f) <= 2 ||f||_Phi``, and Hölder's
inequality pairs one of each: ``int |f g| <= N_Phi(f) ||g||_Phi*``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import HypothesisError, SpiLabError
from .measure import _node_values
from .numerics import Tolerance, minimize_scan, root_find_monotone

_ROOT_TOL = Tolerance(abs_tol=1e-300, rel_tol=1e-14, max_iter=400)


@dataclass(frozen=True)
class YoungFunction:
    """Even convex ``Phi`` with ``Phi(0) = 0`` and ``Phi(x) -> inf``.

    ``kind`` is ``"power"`` (``|x|^p / p``, ``params = (p,)``) or
    ``"custom"``. Custom functions take a vectorized evaluator on
    ``x >= 0`` and optionally its inverse; otherwise the inverse is found
    numerically.
    """

    kind: str
    params: tuple = ()
    evaluator: object = field(default=None, repr=False, compare=False)
    inverse_fn: object = field(default=None, repr=False, compare=False)
    label: str = ""

    def __call__(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        if self.kind == "power":
            p = self.params[0]
            return ax**p / p
        return np.asarray(self.evaluator(ax), dtype=float)

    def inverse(self, t):
        """Largest ``x >= 0`` with ``Phi(x) <= t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            p = self.params[0]
            return (p * np.maximum(t, 0.0)) ** (1.0 / p)
        if self.inverse_fn is not None:
            return np.asarray(self.inverse_fn(t), dtype=float)
        return np.vectorize(self._numeric_inverse, otypes=[float])(t)

    def _numeric_inverse(self, t):
        if t <= 0:
            return 0.0
        hi = 1.0
        while float(self(hi)) <= t:
            hi *= 2.0
            if hi > 1e300:
                raise SpiLabError("Young function does not reach the level")
        lo = 0.0
        return root_find_monotone(lambda x: float(self(x)) - t, lo, hi, _ROOT_TOL)

    def check(self, x_max=1e3, n=400, tol=1e-9):
        """Sampled checks of the Young-function axioms; raises on failure."""
        if abs(float(self(0.0))) > tol:
            raise HypothesisError("Phi(0) != 0")
        xs = np.linspace(0.0, x_max, n)
        vals = self(xs)
        if not np.allclose(vals, self(-xs), rtol=1e-12, atol=tol):
            raise HypothesisError("Phi is not even")
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        if np.min(second) < -tol * max(1.0, float(np.max(np.abs(vals)))):
            raise HypothesisError("Phi is not convex on the sample")
        big = self(np.geomspace(1.0, 1e12, 12))
        if not (np.all(np.diff(big) > 0) and big[-1] > 1e6 * max(big[0], 1e-300)):
            raise HypothesisError("Phi does not grow to infinity")
        return True


def power_young(p):
    """``|x|^p / p`` for ``p >= 1``."""
    if p < 1:
        raise ValueError("power Young functions need p >= 1")
    return YoungFunction("power", (float(p),), label=f"x^{p:g}/{p:g}")


def conjugate_exponent(p):
    """``q`` with ``1/p + 1/q = 1``."""
    return p / (p - 1.0)


@dataclass(frozen=True)
class YoungPair:
    """A dual pair ``(Phi, Phi*)`` with ``Phi*`` the Legendre transform of ``Phi``."""

    phi: YoungFunction
    phi_star: YoungFunction

    @property
    def is_power(self):
        return self.phi.kind == "power" and self.phi_star.kind == "power"

    @property
    def p(self):
        """Exponent of ``Phi*`` for power pairs."""
        return self.phi_star.params[0]

    def check_young_inequality(self, n=60, x_max=20.0, tol=1e-9):
        xs = np.linspace(0.0, x_max, n)
        lhs = xs[:, None] * xs[None, :]
        rhs = self.phi(xs)[:, None] + self.phi_star(xs)[None, :]
        return bool(np.all(lhs <= rhs + tol * (1 + rhs)))

    def check_growth(self, tol=1e-9):
        """The growth hypotheses on ``Phi*``: ``Phi*(x)/x^2 -> inf`` and
        ``x -> Phi*(sqrt(x))`` convex, both on samples."""
        xs = np.geomspace(1.0, 1e8, 40)
        ratio = self.phi_star(xs) / xs**2
        if not (np.all(np.diff(ratio) > 0) and ratio[-1] > 1e3 * ratio[0]):
            return False
        ys = np.linspace(0.0, 100.0, 401)
        vals = self.phi_star(np.sqrt(ys))
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        return bool(np.min(second) >= -tol * max(1.0, float(np.max(vals))))


def power_pair(p):
    """``Phi*(x) = |x|^p / p`` and its conjugate ``Phi(x) = |x|^q / q``.

    Requires ``p > 2`` so that ``Phi*(x) / x^2 -> inf``.
    """
    if not p > 2:
        raise HypothesisError(f"power pair needs p > 2 (got {p}); Phi*(x)/x^2 must diverge")
    return YoungPair(phi=power_young(conjugate_exponent(p)), phi_star=power_young(p))


# ---------------------------------------------------------------------------
# Legendre transform on a grid
# ---------------------------------------------------------------------------


def _refine_conjugate(phi, y, a, b, iters=80):
    """Vectorized golden-section maximization of ``x y - phi(x)`` on ``[a, b]``."""
    gr = 0.5 * (math.sqrt(5.0) - 1.0)
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = c * y - phi(c)
    fd = d * y - phi(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - gr * (b - a)
        new_d = a + gr * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, new_c * y - phi(new_c), fd)
        fd_next = np.where(left, fc, new_d * y - phi(new_d))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
    return np.maximum(fc, fd)


def legendre(phi, x_grid, chunk=512):
    """Numerical Legendre transform ``Phi*(y) = sup_x (x y - Phi(x))``.

    The supremum is located on ``x_grid`` (only ``x >= 0`` is used; ``Phi``
    is even) and refined by golden section between the neighbours of the
    best grid point.

    Raises
    ------
    SpiLabError
        When the maximizer sits at the right end of the grid: the
        supremum is not captured and the grid must be enlarged.
    """
    xs = np.unique(np.abs(np.asarray(x_grid, dtype=float)))
    if xs[0] != 0.0:
        xs = np.concatenate(([0.0], xs))
    phi_vals = phi(xs)

    def conj(y):
        y = np.abs(np.asarray(y, dtype=float))
        flat = y.ravel()
        out = np.empty_like(flat)
        for s in range(0, flat.size, chunk):
            yy = flat[s : s + chunk]
            vals = yy[:, None] * xs[None, :] - phi_vals[None, :]
            j = np.argmax(vals, axis=1)
            if np.any((j == xs.size - 1) & (yy > 0)):
                raise SpiLabError("Legendre supremum reached the end of the grid; enlarge x_grid")
            a = xs[np.maximum(j - 1, 0)]
            b = xs[np.minimum(j + 1, xs.size - 1)]
            best = vals[np.arange(yy.size), j]
            out[s : s + chunk] = np.maximum(best, _refine_conjugate(phi, yy, a, b))
        return out.reshape(y.shape)

    return YoungFunction("custom", (), evaluator=conj, label=f"legendre({phi.label or phi.kind})")


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def luxembourg_norm(m, f, phi):
    """Luxembourg norm ``||f||_Phi`` under the measure ``m``.

    ``m`` is anything with ``nodes`` and ``weights`` (a :class:`Measure1D`
    or a :class:`GridMeasure`); ``f`` is a callable or node values.
    The root of ``lam -> int Phi(|f|/lam) dmu - 1`` is bracketed by the
    ``L^1`` and ``L^inf`` surrogates ``mean|f| / Phi^{-1}(1/W)`` and
    ``max|f| / Phi^{-1}(1/W)``, ``W`` the total mass.
    """
    v = np.abs(_node_values(m, f))
    w = np.asarray(m.weights)
    vmax = float(np.max(v))
    if vmax == 0.0:
        return 0.0
    if phi.kind == "power":
        p = phi.params[0]
        # closed form, computed on the scaled function for range safety
        return vmax * (float(np.dot(w, (v / vmax) ** p)) / p) ** (1.0 / p)
    total = float(np.sum(w))
    level = float(phi.inverse(1.0 / total))
    mean = float(np.dot(w, v)) / total
    lam_lo = mean / level
    lam_hi = vmax / level

    def excess(lam):
        return float(np.dot(w, phi(v / lam))) - 1.0

    g_hi = excess(lam_hi)
    if not np.isfinite(g_hi) or g_hi > 1e-12:
        raise SpiLabError("no finite Luxembourg scale: f is not in L_Phi on this grid")
    if g_hi >= 0 or lam_lo == lam_hi:
        return lam_hi
    if excess(lam_lo) <= 0:
        return lam_lo
    return root_find_monotone(excess, lam_lo, lam_hi, _ROOT_TOL)


def orlicz_norm(m, f, phi):
    """Orlicz (dual) norm ``N_Phi(f)`` through the Amemiya formula
    ``inf_k (1 + int Phi(k |f|) dmu) / k``.

    For ``Phi = |x|^q / q`` this is ``p^(1/p) ||f||_q`` with ``1/p + 1/q = 1``.
    """
    v = np.abs(_node_values(m, f))
    w = np.asarray(m.weights)
    vmax = float(np.max(v))
    if vmax == 0.0:
        return 0.0
    if phi.kind == "power":
        q = phi.params[0]
        if q == 1.0:
            return float(np.dot(w, v))
        p = conjugate_exponent(q)
        lq = vmax * float(np.dot(w, (v / vmax) ** q)) ** (1.0 / q)
        return p ** (1.0 / p) * lq
    lam = luxembourg_norm(m, v, phi)

    def amemiya(logk):
        k = math.exp(logk)
        return (1.0 + float(np.dot(w, phi(k * v)))) / k

    tol = Tolerance(abs_tol=1e-12, rel_tol=1e-12, max_iter=300)
    _, val = minimize_scan(amemiya, math.log(0.2 / lam), math.log(5.0 / lam), n_scan=48, tol=tol)
    return val


def orlicz_norm_dual(m, f, pair, trial_g):
    """Lower bound on ``N_Phi(f)`` from a finite set of dual test functions.

    Each ``g`` is rescaled by its Luxembourg ``Phi*``-norm so that it lies in
    ``M_Phi* = {g : int Phi*(|g|) dmu <= 1}``; the bound is the largest
    ``|int f g dmu|``.
    """
    trial_g = list(trial_g)
    if not trial_g:
        raise ValueError("orlicz_norm_dual needs at least one trial function")
    fv = _node_values(m, f)
    w = np.asarray(m.weights)
    best = 0.0
    for g in trial_g:
        gv = _node_values(m, g)
        scale = luxembourg_norm(m, gv, pair.phi_star)
        if scale == 0.0:
            continue
        best = max(best, abs(float(np.dot(w, fv * gv))) / scale)
    return best


# ---------------------------------------------------------------------------
# Indicator norms and the support factor theta
# ---------------------------------------------------------------------------


def sqrt_conjugate(pair, x_grid=None):
    """The Young function ``Psi = (Phi* o sqrt)*``.

    Closed form for power pairs: with ``Phi*(x) = x^p/p``,
    ``Psi(z) = (p - 2)/(2p) * (2z)^(p/(p-2))``.
    """
    if pair.is_power:
        p = pair.p
        if not p > 2:
            raise HypothesisError("need p > 2")
        e = p / (p - 2.0)
        c = (p - 2.0) / (2.0 * p)

        def psi(z):
            return c * (2.0 * z) ** e

        def psi_inv(t):
            return 0.5 * (np.maximum(t, 0.0) / c) ** (1.0 / e)

        return YoungFunction("custom", (p,), evaluator=psi, inverse_fn=psi_inv, label=f"sqrt-dual(p={p:g})")
    inner = YoungFunction(
        "custom", (), evaluator=lambda y: pair.phi_star(np.sqrt(y)), label="phi_star(sqrt)"
    )
    if x_grid is None:
        x_grid = np.geomspace(1e-8, 1e8, 4001)
    return legendre(inner, x_grid)


def indicator_norm(mu_a, pair):
    """Luxembourg norm of an indicator ``1_A`` in ``L_Psi``, ``Psi = (Phi* o sqrt)*``.

    Only ``mu(A)`` matters: the smallest ``lam`` with
    ``mu(A) Psi(1/lam) <= 1`` is ``1 / Psi^{-1}(1 / mu(A))``.
    """
    if not 0.0 < mu_a <= 1.0:
        raise ValueError("mu_A must lie in (0, 1]")
    psi = sqrt_conjugate(pair)
    return 1.0 / float(psi.inverse(1.0 / mu_a))


def theta(x, pair):
    """``2 / Phi*(x^{-1/2})^{1/2}``, the support factor as used in the
    Gaussian capacity chain. For power pairs ``theta(x)^2 = 4 p x^{p/2}``.

    This closed form decays faster than the true ratio
    ``||f||_Phi / ||f||_2`` for small supports; :func:`support_theta` is a
    valid bound.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("theta needs x in (0, 1)")
    return 2.0 / np.sqrt(pair.phi_star(1.0 / np.sqrt(x)))


def support_theta(x, pair):
    """Valid support factor: ``N_Phi(f) <= ||f||_2 * support_theta(mu(supp f))``.

    Equals ``2 * indicator_norm(x)^{1/2}``; tends to 0 with ``x`` because
    ``Phi*(x)/x^2 -> inf``. Also bounds the Luxembourg norm, which is
    smaller than ``N_Phi``.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x > 1)):
        raise ValueError("support_theta needs x in (0, 1]")
    psi = sqrt_conjugate(pair)
    return 2.0 / np.sqrt(psi.inverse(1.0 / x))
