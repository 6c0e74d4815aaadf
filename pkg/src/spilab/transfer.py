"""Moving constants between super-Poincaré, measure-capacity and Poincaré forms.

A super-Poincaré inequality (SPI) is a family

    int f^2 dmu <= r int |f'|^2 dmu + beta(r) (int |f| dmu)^2,   r > r0,

recorded as a :class:`BetaFunction`. The Orlicz variant replaces
``int |f|`` by an Orlicz norm of ``f`` (:class:`OrliczSpi`). The
conversions here go SPI <-> measure-capacity profile, Orlicz-SPI ->
profile -> SPI, SPI -> Poincaré, and between the two standard ways of
indexing an SPI (by ``r`` or by the weight ``s`` in front of the ``L^1``
term).
"""

from dataclasses import dataclass, field
import csv
import io
import math

import numpy as np

from .capacity import CapacityProfile
from .errors import HypothesisError, SpiLabError
from .measure import _node_values, dirichlet_energy, integrate
from .numerics import Tolerance, minimize_scalar
from .orlicz import YoungPair, theta

_S_MAX = 1e16
_R_MAX = 1e12


@dataclass(frozen=True)
class BetaFunction:
    """``r -> beta(r)``, valid for ``r > r0``.

    Two forms:

    * ``"table"``: values on an ascending ``r_grid``. Between grid points
      the value at the largest grid ``r' <= r`` is used (an SPI at ``r'``
      holds at every larger ``r``), and the table is replaced by its
      running minimum so that ``beta`` is non-increasing.
    * ``"closed-form"``: a vectorized callable.

    Outside the range of validity the value is ``inf``.
    """

    r0: float
    form: str = "table"
    r_grid: np.ndarray | None = None
    values: np.ndarray | None = None
    fn: object = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.r0 < 0 or math.isnan(self.r0):
            raise ValueError("r0 must be non-negative")
        if self.form == "table":
            r = np.asarray(self.r_grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if r.size == 0 or r.shape != v.shape:
                raise ValueError("table BetaFunction needs matching nonempty r_grid and values")
            if np.any(np.diff(r) < 0):
                raise ValueError("r_grid must be ascending")
            if np.any(v[np.isfinite(v)] <= 0):
                raise ValueError("beta must be positive")
            object.__setattr__(self, "r_grid", r)
            object.__setattr__(self, "values", np.minimum.accumulate(v))
        elif self.form == "closed-form":
            if self.fn is None:
                raise ValueError("closed-form BetaFunction needs fn")
        else:
            raise ValueError(f"unknown form {self.form!r}")

    @classmethod
    def from_callable(cls, fn, r0=0.0, **meta):
        return cls(r0=float(r0), form="closed-form", fn=fn, meta=meta)

    @classmethod
    def from_table(cls, r_grid, values, r0=0.0, **meta):
        return cls(r0=float(r0), form="table", r_grid=r_grid, values=values, meta=meta)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.form == "closed-form":
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                out = np.asarray(self.fn(r), dtype=float) * np.ones_like(r)
        else:
            j = np.searchsorted(self.r_grid, r, side="right") - 1
            out = np.where(j >= 0, self.values[np.clip(j, 0, None)], np.inf)
        out = np.where(r > self.r0, out, np.inf)
        return out if out.ndim else float(out)

    def finite_from(self):
        """Smallest tabulated ``r`` with a finite value (tables only)."""
        if self.form != "table":
            raise ValueError("finite_from is defined for tables")
        ok = np.isfinite(self.values) & (self.r_grid > self.r0)
        return float(self.r_grid[ok][0]) if ok.any() else math.inf

    def tabulate(self, r_grid):
        r = np.asarray(r_grid, dtype=float)
        return BetaFunction.from_table(r, np.asarray(self(r), dtype=float), self.r0, **self.meta)

    def to_dict(self, r_grid=None):
        t = self if self.form == "table" else self.tabulate(r_grid)
        return {"r0": self.r0, "r": [float(x) for x in t.r_grid], "beta": [float(x) for x in t.values]}

    def to_csv(self, r_grid=None):
        d = self.to_dict(r_grid)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "beta"])
        for r, b in zip(d["r"], d["beta"]):
            w.writerow([repr(r), repr(b)])
        return buf.getvalue()


@dataclass(frozen=True)
class OrliczSpi:
    """``int f^2 <= r int |f'|^2 + beta(r) N_Phi(f)^2`` for ``r > beta.r0``,
    with ``N_Phi`` the Orlicz norm of the pair's ``Phi``."""

    beta: BetaFunction
    pair: YoungPair
    check: bool = True

    def __post_init__(self):
        if self.check and not self.pair.check_growth():
            raise HypothesisError("Young pair fails the growth conditions (Phi*(x)/x^2 -> inf, Phi* o sqrt convex)")


# ---------------------------------------------------------------------------
# The two indexings of an SPI
# ---------------------------------------------------------------------------


def bcr_to_wang(beta_bcr, r0=None, s_max=_S_MAX):
    """From ``int f^2 <= beta_bcr(s) int |f'|^2 + s (int |f|)^2`` (``s >= 1``)
    to an SPI indexed by ``r``.

    ``beta(r) = inf {s >= 1 : beta_bcr(s) <= r}``, valid for
    ``r > r0 = lim_{s -> inf} beta_bcr(s)``. ``beta_bcr`` is replaced by
    its running minimum (an inequality at ``s`` holds at every larger
    ``s``). ``r0`` is estimated at ``s_max`` unless given.
    """
    b1 = float(beta_bcr(1.0))
    if not math.isfinite(b1):
        raise SpiLabError("beta_BCR(1) is not finite; the input inequality is ill-posed")
    probe = np.geomspace(1.0, s_max, 161)
    raw = np.array([float(beta_bcr(s)) for s in probe])
    run = np.minimum.accumulate(raw)
    if r0 is None:
        r0 = float(run[-1])
        if r0 <= 1e-12 * max(run[0], 1e-300):
            r0 = 0.0

    def mono(s):
        # running minimum: the probe grid bounds it from above, the exact
        # value at s is always admissible
        j = np.searchsorted(probe, s, side="right") - 1
        return min(float(beta_bcr(s)), float(run[j]) if j >= 0 else math.inf)

    def beta_scalar(r):
        if mono(1.0) <= r:
            return 1.0
        if run[-1] > r:
            return math.inf
        # smallest s with mono(s) <= r, bisection in log s
        j = int(np.argmax(run <= r))
        lo, hi = math.log(probe[max(j - 1, 0)]), math.log(probe[j])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mono(math.exp(mid)) <= r:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15 * max(1.0, abs(hi)):
                break
        return math.exp(hi)

    fn = np.vectorize(beta_scalar, otypes=[float])
    return BetaFunction.from_callable(fn, r0=r0, source="bcr_to_wang")


def wang_to_bcr(beta, c_poincare=None, r_max=_R_MAX):
    """From an SPI indexed by ``r`` to ``s -> beta_bcr(s)`` for ``s >= 1``.

    ``beta_bcr(s) = inf {r > r0 : beta(r) <= s}``. Where this set is empty
    (``s`` below ``lim beta``), a Poincaré constant ``c_poincare`` gives the
    inequality with ``(r, s) = (c_poincare, 1)`` and hence
    ``beta_bcr(s) <= c_poincare`` for every ``s >= 1``.
    """

    def scalar(s):
        if s < 1:
            raise ValueError("beta_BCR is defined for s >= 1")
        cap = math.inf if c_poincare is None else float(c_poincare)
        if beta.form == "table":
            ok = (beta.values <= s) & (beta.r_grid > beta.r0)
            found = float(beta.r_grid[ok][0]) if ok.any() else math.inf
            return min(found, cap)
        lo_r = beta.r0
        start = lo_r * (1 + 1e-12) if lo_r > 0 else 1e-300
        if float(beta(start)) <= s:
            return min(lo_r, cap)
        if not float(beta(r_max)) <= s:
            return cap
        lo, hi = math.log(start), math.log(r_max)
        for _ in range(300):
            mid = 0.5 * (lo + hi)
            if float(beta(math.exp(mid))) <= s:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15 * max(1.0, abs(hi)):
                break
        return min(math.exp(hi), cap)

    return np.vectorize(scalar, otypes=[float])


# ---------------------------------------------------------------------------
# Measure-capacity -> SPI
# ---------------------------------------------------------------------------


def mc_to_spi(profile, kappa_floor=1e-300):
    """SPI from a measure-capacity profile:
    ``beta(r) = 1 / sup {kappa : C_kappa >= 8/r}``.

    The profile is normalized first (running minimum). For a table the
    result is a table with breakpoints ``r_j = 8 / C_j`` and values
    ``1 / kappa_j``; ``r0 = 8 / c_limit`` when the profile carries its
    small-``kappa`` limit, else ``8 / C_{kappa_min}``. A closed-form
    profile gives a closed-form ``beta`` (bisection in ``log kappa``).
    """
    if profile.kappa.size == 0:
        raise ValueError("empty profile")
    if profile.closed_form is not None:
        cf = profile.closed_form
        c_lim = profile.c_limit

        def scalar(r):
            target = 8.0 / r
            if cf(0.5) >= target:
                return 2.0
            if cf(kappa_floor) < target:
                return math.inf
            lo, hi = math.log(kappa_floor), math.log(0.5)
            for _ in range(300):
                mid = 0.5 * (lo + hi)
                if cf(math.exp(mid)) >= target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-15 * abs(lo):
                    break
            return math.exp(-lo)

        r0 = 0.0 if c_lim is None or math.isinf(c_lim) else 8.0 / c_lim
        return BetaFunction.from_callable(np.vectorize(scalar, otypes=[float]), r0=r0, source="mc_to_spi")

    prof = profile.normalized()
    c = prof.c_kappa
    ok = c > 0
    if not ok.any():
        raise SpiLabError("profile has no positive C_kappa")
    k = prof.kappa[ok]
    c = c[ok]
    with np.errstate(divide="ignore"):
        r_j = 8.0 / c
    # kappa ascending -> C non-increasing -> r_j non-decreasing
    order = np.argsort(r_j, kind="stable")
    r_sorted = r_j[order]
    beta_sorted = 1.0 / k[order]
    # at equal r keep the largest kappa: the running minimum handles it
    if prof.c_limit is not None:
        r0 = 0.0 if math.isinf(prof.c_limit) else 8.0 / prof.c_limit
    else:
        r0 = float(r_j[0])
    # the first breakpoint itself is admissible, so r0 sits just below it
    r0 = min(r0, float(r_sorted[0])) * (1 - 1e-15)
    return BetaFunction.from_table(r_sorted, beta_sorted, r0=r0, source="mc_to_spi")


# ---------------------------------------------------------------------------
# SPI -> measure-capacity
# ---------------------------------------------------------------------------


def x_log_inv(x):
    """``x log(1/x)``, the default shape function."""
    x = np.asarray(x, dtype=float)
    return x * np.log(1.0 / x)


def check_psi(psi):
    """``psi(x) -> 0`` and ``psi(x)/x -> inf`` as ``x -> 0``, on decreasing samples."""
    xs = np.geomspace(1e-2, 1e-14, 13)
    vals = np.array([float(psi(x)) for x in xs])
    ratio = vals / xs
    if not (np.all(np.diff(vals) < 0) and vals[-1] < 1e-3 * vals[0]):
        raise HypothesisError("psi(x) does not tend to 0")
    if not (np.all(np.diff(ratio) > 0) and ratio[-1] > 2 * ratio[0]):
        raise HypothesisError("psi(x)/x does not tend to infinity")
    return True


def _sup_over_r(beta, weight, r_start=None, tol=1e-12):
    """``sup_{r > r0} (1 - beta(r) * weight) / r``.

    Geometric r-grid starting just above ``r0`` with the upper end doubled
    until the running sup stabilizes, then Brent refinement around the
    best sample (the objective is continuous in ``r`` for closed forms).
    """
    r0 = beta.r0
    if beta.form == "table":
        r = beta.r_grid[beta.r_grid > r0]
        v = (1.0 - beta.values[beta.r_grid > r0] * weight) / r
        return float(np.max(v)) if v.size else -math.inf
    lo = r0 * (1 + 1e-9) if r0 > 0 else (r_start or 1e-6)

    def obj(r):
        b = float(beta(r))
        return (1.0 - b * weight) / r if math.isfinite(b) else -math.inf

    hi = max(2.0 * lo, 1.0)
    best = -math.inf
    best_r = lo
    for _ in range(80):
        grid = np.geomspace(lo, hi, 400)
        vals = np.array([obj(r) for r in grid])
        j = int(np.argmax(vals))
        new_best = float(vals[j])
        if new_best > best:
            best, best_r = new_best, float(grid[j])
        stable = j < grid.size - 1 and abs(new_best - best) <= tol * max(abs(best), 1e-300)
        if stable and j < grid.size - 5:
            break
        hi *= 2.0
    # refine between the neighbours of the best sample
    grid = np.geomspace(lo, hi, 400)
    j = int(np.argmin(np.abs(grid - best_r)))
    a, b = math.log(grid[max(j - 1, 0)]), math.log(grid[min(j + 1, grid.size - 1)])
    if a < b:
        x, fx = minimize_scalar(lambda t: -obj(math.exp(t)), a, b, Tolerance(abs_tol=1e-14, rel_tol=0, max_iter=300))
        best = max(best, -fx)
    return best


def _profile_from_terms(beta, c_poincare_mc, psi, b_star, kappa_grid, second):
    if not 0 < b_star < 1:
        raise ValueError("b_star must lie in (0, 1)")
    check_psi(psi)
    ks = np.asarray(kappa_grid, dtype=float)
    first = np.array([c_poincare_mc * float(psi(k)) / k * b_star**2 for k in ks])
    sec = np.array([_sup_over_r(beta, float(second(k))) * (1 - b_star) ** 2 for k in ks])
    c = np.minimum(first, sec)
    c_limit = (1 - b_star) ** 2 / beta.r0 if beta.r0 > 0 else math.inf
    return CapacityProfile(ks, c, c_limit=c_limit, meta={"first": first, "second": sec, "b_star": b_star})


def spi_to_mc(beta, c_poincare_mc, psi=x_log_inv, b_star=0.5, kappa_grid=None):
    """Measure-capacity profile implied by an SPI and an a-priori MC constant.

    ``C_kappa = min( C psi(kappa)/kappa b*^2,
    sup_{r > r0} (1 - beta(r) psi(kappa)) / r * (1 - b*)^2 )``.

    The profile records ``c_limit = (1 - b*)^2 / r0``, the small-kappa
    limit of the second term at this ``b*``.
    """
    if kappa_grid is None:
        kappa_grid = np.geomspace(1e-12, 0.25, 45)
    return _profile_from_terms(beta, c_poincare_mc, psi, b_star, kappa_grid, psi)


def ospi_to_mc(ospi, c_poincare_mc, psi=x_log_inv, b_star=0.5, kappa_grid=None, theta_fn=None):
    """As :func:`spi_to_mc` with ``psi(kappa)`` in the second term replaced by
    ``theta(psi(kappa))^2``; ``theta_fn`` defaults to :func:`orlicz.theta`
    for the pair."""
    if kappa_grid is None:
        kappa_grid = np.geomspace(1e-12, 0.25, 45)
    th = theta_fn or (lambda x: theta(x, ospi.pair))

    def theta2_psi(k):
        return float(th(float(psi(k)))) ** 2

    return _profile_from_terms(ospi.beta, c_poincare_mc, psi, b_star, kappa_grid, theta2_psi)


def ospi_to_spi(ospi, c_poincare_mc, psi=x_log_inv, b_star=1e-6, kappa_grid=None, theta_fn=None):
    """Orlicz-SPI -> profile -> SPI.

    The validity threshold of the result is ``8 r0 / (1 - b*)^2``; the
    default ``b*`` is small so that this is ``8 r0`` up to ``2e-6``
    relative. Pass ``b_star=0.5`` for the fixed choice of the Gaussian
    chain (threshold ``32 r0``).
    """
    if kappa_grid is None:
        kappa_grid = np.geomspace(1e-60, 0.25, 121)
    prof = ospi_to_mc(ospi, c_poincare_mc, psi, b_star, kappa_grid, theta_fn)
    return mc_to_spi(prof)


# ---------------------------------------------------------------------------
# SPI -> Poincaré, and support-size checks
# ---------------------------------------------------------------------------


def spi_to_poincare(beta, r_grid=None):
    """Poincaré constant ``min_r r / (1 - beta(r)/2)`` over ``r`` with ``beta(r) < 2``."""
    if r_grid is None:
        if beta.form == "table":
            r_grid = beta.r_grid
        else:
            start = beta.r0 * (1 + 1e-9) if beta.r0 > 0 else 1e-6
            r_grid = np.geomspace(start, max(start * 1e8, 1e6), 2001)
    r = np.asarray(r_grid, dtype=float)
    b = np.asarray(beta(r), dtype=float)
    ok = (b < 2) & (r > beta.r0)
    if not ok.any():
        raise HypothesisError("hypothesis not satisfied on grid: beta(r) >= 2 everywhere")
    vals = np.where(ok, r / (1 - np.where(ok, b, 0.0) / 2), np.inf)
    j = int(np.argmin(vals))
    best = float(vals[j])
    if beta.form == "closed-form" and 0 < j < r.size - 1:

        def h(t):
            rr = math.exp(t)
            bb = float(beta(rr))
            return rr / (1 - bb / 2) if bb < 2 else math.inf

        _, fx = minimize_scalar(h, math.log(r[j - 1]), math.log(r[j + 1]), Tolerance(abs_tol=1e-13, rel_tol=0, max_iter=300))
        best = min(best, fx)
    return best


def support_mass(m, f, threshold=1e-12):
    """``mu(supp f)`` with the support taken as the union of grid cells
    where ``|f|`` exceeds ``threshold * max|f|`` at either end."""
    v = np.abs(_node_values(m, f))
    top = float(np.max(v))
    if top == 0.0:
        return 0.0
    on = v > threshold * top
    cells = on[:-1] | on[1:]
    return float(np.sum(np.diff(m._prefix)[cells]))


def lemma1_bound(m, f, beta, r, df=None):
    """``(1 - beta(r) mu(supp f)) int f^2`` versus ``r int |f'|^2``.

    An SPI with this ``beta`` forces ``lhs <= rhs``.
    """
    if not r > beta.r0:
        raise ValueError("r must exceed beta.r0")
    b = float(beta(r))
    lhs = (1.0 - b * support_mass(m, f)) * integrate(m, _square(m, f))
    rhs = r * dirichlet_energy(m, f, df)
    return lhs, rhs


def support_holder(m, f):
    """``((int |f|)^2, mu(supp f) int f^2)``; the first never exceeds the second."""
    v = _node_values(m, f)
    return integrate(m, np.abs(v)) ** 2, support_mass(m, f) * integrate(m, v * v)


def _square(m, f):
    v = _node_values(m, f)
    return v * v
