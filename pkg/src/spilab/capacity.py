"""Capacities of intervals and measure-capacity profiles in one dimension.

For ``mu = exp(-V) dx / Z`` the cheapest way to drop from 1 to 0 across
``[s, t]`` costs ``1 / R(s, t)`` with the resistance
``R(s, t) = Z * int_s^t exp(V)``. The capacity of ``[a, b]`` is then a
two-resistor problem: pick the support ``[alpha, beta]`` of the test
function with ``mu([alpha, beta]) <= 1/2`` and pay
``1/R(alpha, a) + 1/R(b, beta)``. A side that runs into the end of the
truncated domain costs nothing (the test function may stay at 1 up to a
Neumann boundary).
"""

from dataclasses import dataclass, field
import csv
import io
import json
import math

import numpy as np
from scipy.linalg import solve_banded

from .errors import SpiLabError
from .numerics import Tolerance, minimize_scan

_TOL = Tolerance(abs_tol=1e-15, rel_tol=1e-12, max_iter=300)
_MASS_SLACK = 1e-12


def _inv_resistance(m, s, t):
    if t <= s:
        return math.inf
    return math.exp(-m.log_resistance(s, t))


def _gap_energy_left(m, a, u, below):
    """Energy of the left ramp when it may use mass ``u`` below ``a``;
    ``below = mu([x_lo, a])``."""
    if a <= m.domain[0]:
        return 0.0
    if u >= below:
        return 0.0
    if u <= 0:
        return math.inf
    alpha = m.left_quantile(below - u)
    return _inv_resistance(m, alpha, a)


def _gap_energy_right(m, b, v, above):
    if b >= m.domain[1]:
        return 0.0
    if v >= above:
        return 0.0
    if v <= 0:
        return math.inf
    beta = m.right_quantile(above - v)
    return _inv_resistance(m, b, beta)


def interval_capacity(m, a, b, full_output=False):
    """Capacity of ``A = [a, b]`` with the support constraint on the test function.

    The support mass is always saturated (a wider ramp never costs more),
    so the free variable is how the spare mass ``1/2 - mu(A)`` splits
    between the two ramps. Interior splits are found by a scan plus Brent
    refinement; splits where one ramp reaches the domain end are
    evaluated separately, since the objective has a kink there.

    Returns
    -------
    float, or (float, dict) with ``full_output``
        The capacity; the dict holds the optimal support ``(alpha, beta)``.

    Raises
    ------
    ValueError
        If ``a >= b`` or ``mu([a, b]) > 1/2``.
    """
    a = max(float(a), m.domain[0])
    b = min(float(b), m.domain[1])
    if not a < b:
        raise ValueError("interval_capacity needs a < b inside the domain")
    mass = m.mass_between(a, b)
    if mass > 0.5 + _MASS_SLACK:
        raise ValueError(f"mu(A) = {mass:.6g} exceeds 1/2; capacity is not defined")
    spare = 0.5 - mass
    below, above = m.cdf(a), m.sf(b)

    def energy(u):
        return _gap_energy_left(m, a, u, below) + _gap_energy_right(m, b, spare - u, above)

    if spare <= 0:
        best_u, best = 0.0, energy(0.0)
    else:
        best_u, best = minimize_scan(energy, 0.0, spare, n_scan=65, tol=_TOL)
        for u in (below, spare - above):
            if 0.0 <= u <= spare:
                e = energy(u)
                if e < best:
                    best_u, best = u, e
    if not full_output:
        return best
    alpha = m.domain[0] if best_u >= below else m.left_quantile(below - best_u)
    v = spare - best_u
    beta = m.domain[1] if v >= above else m.right_quantile(above - v)
    return best, {"alpha": alpha, "beta": beta, "mass": mass}


def two_tail_capacity(m, a, b):
    """Capacity of ``(-inf, a] U [b, inf)``.

    The test function vanishes on a window ``[c, d]`` of mass exactly 1/2
    between the tails; the window position is optimized.
    """
    lo, hi = m.domain
    if not lo < a < b < hi:
        raise ValueError("two_tail_capacity needs lo < a < b < hi")
    inner = m.mass_between(a, b)
    if inner < 0.5 - _MASS_SLACK:
        raise ValueError("the tails carry more than mass 1/2")
    below = m.cdf(a)
    if inner <= 0.5:
        return math.inf

    def energy(c_mass):
        # c_mass = mu([a, c]); the window then runs to mass 1/2 further right
        c = m.left_quantile(below + c_mass)
        d = m.left_quantile(below + c_mass + 0.5)
        return _inv_resistance(m, a, c) + _inv_resistance(m, d, b)

    spare = inner - 0.5
    _, best = minimize_scan(energy, 0.0, spare, n_scan=65, tol=_TOL)
    return best


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityProfile:
    """Non-increasing table ``kappa -> C_kappa`` of a measure-capacity inequality.

    ``c_limit`` is ``lim_{kappa -> 0} C_kappa`` when known (``inf`` for a
    full profile). ``closed_form``, when given, evaluates ``C_kappa``
    exactly and takes precedence over the table inside its range.
    """

    kappa: np.ndarray
    c_kappa: np.ndarray
    c_limit: float | None = None
    closed_form: object = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        c = np.asarray(self.c_kappa, dtype=float)
        if k.size == 0 or k.shape != c.shape:
            raise ValueError("profile needs matching nonempty kappa and C_kappa arrays")
        if np.any(np.diff(k) <= 0):
            raise ValueError("kappa must be strictly ascending")
        if k[0] <= 0 or k[-1] > 0.5 + _MASS_SLACK:
            raise ValueError("kappa must lie in (0, 1/2]")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "c_kappa", c)

    def normalized(self):
        """Running minimum over smaller ``kappa``: the constant for
        ``mu(A) <= kappa`` is the worst one seen so far."""
        return CapacityProfile(
            self.kappa, np.minimum.accumulate(self.c_kappa), self.c_limit, self.closed_form, dict(self.meta)
        )

    @property
    def is_normalized(self):
        return bool(np.all(np.diff(self.c_kappa) <= 0))

    def value_at(self, kappa):
        """Conservative ``C_kappa``: the table value at the next grid point ``>= kappa``."""
        if self.closed_form is not None:
            return float(self.closed_form(kappa))
        k = self.kappa
        if not k[0] * (1 - 1e-12) <= kappa <= k[-1] * (1 + 1e-12):
            raise ValueError(f"kappa = {kappa:g} outside the profile range [{k[0]:g}, {k[-1]:g}]")
        j = min(int(np.searchsorted(k, kappa * (1 - 1e-12))), k.size - 1)
        return float(self.c_kappa[j])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kappa", "c_kappa"])
        for k, c in zip(self.kappa, self.c_kappa):
            w.writerow([repr(float(k)), repr(float(c))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, c_limit=None):
        rows = list(csv.reader(io.StringIO(text)))
        body = [r for r in rows[1:] if r]
        return cls(np.array([float(r[0]) for r in body]), np.array([float(r[1]) for r in body]), c_limit)

    def to_dict(self):
        return {
            "kappa": [float(k) for k in self.kappa],
            "c_kappa": [float(c) for c in self.c_kappa],
            "c_limit": self.c_limit,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["kappa"], float), np.array(d["c_kappa"], float), d.get("c_limit"))


def family_ratios(m, kappa):
    """``cap(A) / kappa`` for each test set ``A`` of mass ``kappa`` in the family.

    Family: right tail, left tail, symmetric two-tail set (mass ``kappa/2``
    per side), and the interval centred (in mass) on the median.
    """
    lo, hi = m.domain
    out = {}
    if kappa >= 0.5 - _MASS_SLACK:
        return {"right_tail": math.inf, "left_tail": math.inf, "two_tail": math.inf, "centred": math.inf}
    t = m.right_quantile(kappa)
    out["right_tail"] = interval_capacity(m, t, hi) / kappa
    s = m.left_quantile(kappa)
    out["left_tail"] = interval_capacity(m, lo, s) / kappa
    a = m.left_quantile(0.5 * kappa)
    b = m.right_quantile(0.5 * kappa)
    out["two_tail"] = two_tail_capacity(m, a, b) / kappa
    c0 = m.left_quantile(0.5 - 0.5 * kappa)
    c1 = m.left_quantile(0.5 + 0.5 * kappa)
    out["centred"] = interval_capacity(m, c0, c1) / kappa
    return out


def capacity_profile(m, kappa_grid, n_dense=48):
    """Measure-capacity profile of ``m`` on ``kappa_grid``.

    ``C_kappa`` is the minimum of :func:`family_ratios` over the family,
    evaluated on the union of ``kappa_grid`` and a dense geometric grid
    down to ``min(kappa_grid)``, then replaced by the running minimum over
    smaller ``kappa`` (the constant for all sets of mass at most
    ``kappa``). The returned table is restricted to ``kappa_grid``.
    """
    grid = np.asarray(kappa_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("kappa_grid is empty")
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] > 0.5 + _MASS_SLACK:
        raise ValueError("kappa_grid must be ascending inside (0, 1/2]")
    dense = np.geomspace(grid[0], 0.5, n_dense)
    allk = np.union1d(grid, dense)
    raw = np.array([min(family_ratios(m, k).values()) for k in allk])
    if not np.any(np.isfinite(raw)):
        raise SpiLabError("no admissible test set on the kappa grid")
    mono = np.minimum.accumulate(raw)
    idx = np.searchsorted(allk, grid)
    return CapacityProfile(grid, mono[idx], None, meta={"raw": raw[idx]})


def check_mc(profile, kappa, c):
    """True when the profile certifies ``cap(A) >= c * mu(A)`` for ``mu(A) <= kappa``."""
    return profile.value_at(kappa) >= c


def poincare_from_mc(profile):
    """Poincaré-constant interval ``[1/C_MC, 4/C_MC]`` with ``C_MC = C_{1/2}``."""
    if abs(profile.kappa[-1] - 0.5) > 1e-12:
        raise ValueError("profile has no entry at kappa = 1/2")
    c_mc = float(profile.c_kappa[-1])
    if not (c_mc > 0 and math.isfinite(c_mc)):
        raise SpiLabError(f"C_1/2 = {c_mc} is not a positive finite number")
    return 1.0 / c_mc, 4.0 / c_mc


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def brute_force_capacity(m, a, b, n=2000, bulk=1e-7):
    """Discrete capacity of ``[a, b]`` by enumerating support windows.

    Piecewise-linear test functions on a grid (``n`` nodes across the bulk
    of the measure, plus the domain ends and ``a, b``). For each left end
    of the support window, the widest admissible right end is taken and
    the discrete Dirichlet problem (``f = 1`` on ``A``, ``f = 0`` at the
    window ends) is solved as a tridiagonal linear system. Edge
    conductances use the midpoint density.
    """
    lo, hi = m.domain
    inner = np.linspace(m.left_quantile(bulk), m.right_quantile(bulk), n)
    x = np.unique(np.concatenate(([lo, hi, a, b], inner)))
    x = x[(x >= lo) & (x <= hi)]
    mid = 0.5 * (x[1:] + x[:-1])
    cond = m.density(mid) / np.diff(x)
    cum = np.array([m.cdf(xi) for xi in x])
    ia = int(np.searchsorted(x, a))
    ib = int(np.searchsorted(x, b))
    best = math.inf
    j = ib
    nx = x.size
    for i in range(ia + 1):
        # widest j with mu([x_i, x_j]) <= 1/2 (f vanishes at the window ends
        # unless they are the domain ends)
        base = 0.0 if i == 0 else cum[i]
        while j + 1 < nx and ((1.0 if j + 1 == nx - 1 else cum[j + 1]) - base) <= 0.5 + _MASS_SLACK:
            j += 1
        top = 1.0 if j == nx - 1 else cum[j]
        if top - base > 0.5 + _MASS_SLACK:
            continue
        # an empty ramp is only allowed where A touches the domain end
        if (i == ia and ia != 0) or (j == ib and ib != nx - 1):
            continue
        best = min(best, _window_energy(cond, i, j, ia, ib, nx))
    return best


def _window_energy(cond, i, j, ia, ib, nx):
    """Harmonic extension energy on the window ``[i, j]``, fixed 1 on ``[ia, ib]``."""
    total = 0.0
    # left ramp: nodes i..ia, f(i) = 0 unless i is the domain end
    if ia > i:
        total += _ramp_energy(cond[i:ia], free_end=(i == 0))
    if j > ib:
        total += _ramp_energy(cond[ib:j][::-1], free_end=(j == nx - 1))
    return total


def _ramp_energy(c, free_end):
    """Minimal ``sum c_e (f_{e+1} - f_e)^2`` on a path with ``f = 1`` at the
    last node and ``f = 0`` at the first (or free when ``free_end``)."""
    if free_end:
        return 0.0
    k = c.size  # unknowns: interior nodes 1..k-1
    if k == 1:
        return float(c[0])
    diag = c[:-1] + c[1:]
    band = np.zeros((3, k - 1))
    band[0, 1:] = -c[1:-1]
    band[1] = diag
    band[2, :-1] = -c[1:-1]
    rhs = np.zeros(k - 1)
    rhs[-1] = c[-1]
    f = np.concatenate(([0.0], solve_banded((1, 1), band, rhs), [1.0]))
    return float(np.sum(c * np.diff(f) ** 2))
