"""The Gaussian chain: spectral beta bound in dimension ``d``, the choice of
``r`` as a function of ``kappa``, the resulting dimension-free capacity
bound ``C_kappa >= log(1/kappa) / 32``, and a direct log-Sobolev check.

All products are evaluated in log space, so ``kappa`` may be far below the
smallest positive double; functions taking ``kappa`` also accept its
logarithm through ``log_inv_kappa``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import HypothesisError, SpiLabError
from .hermite import audit_lp_bound
from .measure import dirichlet_energy, integrate

_AUDIT_P = (3.0, 4.0, 6.0, 8.0, 12.0)


def default_c_const(extra_p=(), n_max=40):
    """Empirical growth constant ``c_sup`` from :func:`hermite.audit_lp_bound`,
    over the standard exponents plus ``extra_p``."""
    ps = sorted(set(_AUDIT_P) | {float(p) for p in extra_p})
    return audit_lp_bound(n_max, ps)[1]


@dataclass(frozen=True)
class GaussChainParams:
    """Parameters of the chain for the standard Gaussian on ``R^d``.

    ``c_const`` is the constant in ``||H_n||_p <= c^n p^(3n/4)``;
    ``b_star`` and the choice ``psi(x) = x log(1/x)`` are fixed.
    """

    d: int
    p: float
    c_const: float
    b_star: float = 0.5

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if not self.p > 2:
            raise HypothesisError("p must exceed 2")
        if not self.c_const > 0:
            raise ValueError("c_const must be positive")
        if self.b_star != 0.5:
            raise ValueError("b_star is fixed at 1/2 in this chain")

    def check_endgame(self):
        """Raise unless ``p > 2d + 2`` and ``p > c_const^2``."""
        if not self.p > 2 * self.d + 2:
            raise HypothesisError(f"need p > 2d + 2, got p = {self.p}, d = {self.d}")
        if not self.p > self.c_const**2:
            raise HypothesisError(f"need p > c_const^2, got p = {self.p}, c_const = {self.c_const}")

    @classmethod
    def standard(cls, d, c_const):
        """``p = 2d + 3``."""
        return cls(d=d, p=2.0 * d + 3.0, c_const=c_const)


def log_beta_bound(r, params):
    r = float(r)
    if not r > 0:
        raise ValueError("r must be positive")
    d, p, c = params.d, params.p, params.c_const
    return d * math.log(2.0) - d * math.log(r) + (2.0 / r) * math.log(c) + (1.5 / r) * math.log(p)


def beta_bound(r, params):
    """``2^d r^(-d) c^(2/r) p^(3/(2r))``, a bound on the spectral beta for ``gamma_d``."""
    return math.exp(log_beta_bound(r, params))


def _log_inv(kappa, log_inv_kappa):
    if log_inv_kappa is not None:
        lk = float(log_inv_kappa)
    else:
        if not 0.0 < kappa:
            raise ValueError("kappa must be positive")
        lk = -math.log(kappa)
    if not lk > 1.0:
        raise ValueError("kappa must lie in (0, 1/e)")
    return lk


def r_kappa(kappa=None, log_inv_kappa=None):
    """``(log(1/kappa) / 4)^(-1)``."""
    return 4.0 / _log_inv(kappa, log_inv_kappa)


@dataclass(frozen=True)
class ClaimResult:
    log_inv_kappa: float
    r_kappa: float
    log_product: float
    passed: bool

    @property
    def kappa(self):
        return math.exp(-self.log_inv_kappa)

    @property
    def product(self):
        return math.exp(self.log_product)


def claim_check(kappa, params, log_inv_kappa=None):
    """Evaluate ``beta_bound(r_kappa) * theta^2(psi(kappa))`` with
    ``theta^2(x) = 4 p x^(p/2)`` and ``psi(x) = x log(1/x)``.

    Returns ``(r_kappa, product, passed)`` where ``passed`` means
    ``product <= 1/2``. The full record is available through
    :func:`claim_record`.
    """
    rec = claim_record(kappa, params, log_inv_kappa)
    return rec.r_kappa, rec.product, rec.passed


def claim_record(kappa, params, log_inv_kappa=None):
    lk = _log_inv(kappa, log_inv_kappa)
    r = 4.0 / lk
    p = params.p
    log_psi = -lk + math.log(lk)
    log_theta2 = math.log(4.0 * p) + 0.5 * p * log_psi
    lp = log_beta_bound(r, params) + log_theta2
    return ClaimResult(lk, r, lp, bool(lp <= -math.log(2.0)))


def default_log_grid(l_max=200.0, step=0.05):
    """Grid of ``log(1/kappa)`` values from just above 1 to ``l_max``."""
    n = int(round((l_max - 1.0) / step))
    return 1.0 + step * np.arange(1, n + 1)


def find_kappa1(family, log_grid=None, extensions=2):
    """Largest grid ``kappa`` such that the claim passes at it and at every
    smaller grid ``kappa``, for every member of ``family`` at once.

    The grid is in ``log(1/kappa)``; when even the smallest grid ``kappa``
    fails, the grid is extended (tenfold in ``log(1/kappa)``) up to
    ``extensions`` times.

    Returns
    -------
    kappa1 : float
    log_inv_kappa1 : float

    Raises
    ------
    SpiLabError
        If no passing ``kappa`` is found.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    grid = default_log_grid() if log_grid is None else np.asarray(log_grid, dtype=float)
    for attempt in range(extensions + 1):
        ok = np.array([all(claim_record(None, prm, lk).passed for prm in family) for lk in grid])
        if ok[-1]:
            bad = np.nonzero(~ok)[0]
            j = 0 if bad.size == 0 else bad[-1] + 1
            lk1 = float(grid[j])
            return math.exp(-lk1), lk1
        if attempt < extensions:
            step = grid[-1] - grid[-2] if grid.size > 1 else 1.0
            grid = np.concatenate([grid, np.arange(grid[-1] + step, 10.0 * grid[-1], step * 10.0)])
    raise SpiLabError("claim never holds on the kappa grid, even after extension")


def c_kappa_chain(kappa, params, kappa1=None, log_inv_kappa=None):
    """Capacity lower bound ``(1/4) min(log(1/kappa), 1/(2 r_kappa))``,
    which equals ``log(1/kappa) / 32``.

    Raises
    ------
    HypothesisError
        If ``kappa >= kappa1`` or the claim fails at ``kappa``.
    """
    lk = _log_inv(kappa, log_inv_kappa)
    if kappa1 is None:
        _, lk1 = find_kappa1([params])
    else:
        lk1 = -math.log(kappa1)
    if not lk > lk1:
        raise HypothesisError(f"kappa must be below kappa1 = exp(-{lk1:g})")
    if not claim_record(None, params, lk).passed:
        raise HypothesisError("claim fails at this kappa")
    inv_r = 0.25 * lk
    return 0.25 * min(lk, 0.5 * inv_r)


# ---------------------------------------------------------------------------
# Elementary inequalities used along the way, checked on a grid
# ---------------------------------------------------------------------------


def side_log_p(p):
    """``log p <= p / 6`` (holds only for ``p`` above about 17.3)."""
    return bool(math.log(p) <= p / 6.0)


def side_power_constant(p_values, log_grid):
    """Smallest ``C`` with ``p kappa^(p/12) <= C kappa^(p/13)`` on the grid.

    Analytically ``sup_p p kappa^(p/156) = 156 / (e log(1/kappa))``.
    """
    ps = np.asarray(p_values, dtype=float)[:, None]
    lk = np.asarray(log_grid, dtype=float)[None, :]
    return float(np.max(ps * np.exp(-lk * ps / 156.0)))


def side_kappa0(c):
    """``log(1/kappa0)`` beyond which ``c <= log(1/kappa)``."""
    return max(float(c), 1.0)


@dataclass
class ChainReport:
    kappa1: float
    log_inv_kappa1: float
    family: list
    rows: list = field(default_factory=list)
    side_conditions: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kappa1": self.kappa1,
            "log_inv_kappa1": self.log_inv_kappa1,
            "family": [{"d": f.d, "p": f.p, "c_const": f.c_const, "b_star": f.b_star} for f in self.family],
            "rows": self.rows,
            "side_conditions": self.side_conditions,
        }


def chain_report(family, log_kappa_table=None, measured=None):
    """Run the chain for a family of dimensions.

    ``log_kappa_table`` lists ``log(1/kappa)`` values for the output table
    (default 32..256 beyond ``kappa1``); ``measured`` optionally maps
    ``kappa`` to a numerically computed one-dimensional capacity constant
    for comparison.
    """
    family = list(family)
    for prm in family:
        prm.check_endgame()
    k1, lk1 = find_kappa1(family)
    if log_kappa_table is None:
        log_kappa_table = [lk for lk in (16.0, 32.0, 64.0, 128.0, 256.0) if lk > lk1]
    rows = []
    for lk in log_kappa_table:
        row = {"log_inv_kappa": float(lk), "r_kappa": 4.0 / lk}
        row["max_log_product"] = max(claim_record(None, prm, lk).log_product for prm in family)
        row["c_kappa_chain"] = c_kappa_chain(None, family[0], kappa1=k1, log_inv_kappa=lk)
        row["log_over_32"] = lk / 32.0
        if measured is not None:
            row["measured"] = float(measured(math.exp(-lk)))
        rows.append(row)
    ps = [prm.p for prm in family]
    grid = default_log_grid()
    c_pow = side_power_constant(ps, grid)
    side = {
        "log_p_le_p_over_6": {str(p): side_log_p(p) for p in ps},
        "power_constant": c_pow,
        "log_inv_kappa0": side_kappa0(c_pow),
    }
    return ChainReport(k1, lk1, family, rows, side)


# ---------------------------------------------------------------------------
# Log-Sobolev check
# ---------------------------------------------------------------------------


def entropy_sq(m, f):
    """``Ent(f^2) = int f^2 log(f^2 / int f^2) dmu`` from node values."""
    f2 = np.asarray(f, dtype=float) ** 2
    mass = integrate(m, f2)
    if mass == 0:
        return 0.0
    g = f2 / mass
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(g > 0, g * np.log(g), 0.0)
    return float(integrate(m, t)) * mass


def _trial_functions(m, trials, seed):
    x = np.asarray(m.nodes, dtype=float)
    lo = m.left_quantile(1e-6)
    hi = m.right_quantile(1e-6)
    for i, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(ss)
        if i % 2 == 0:
            knots = np.unique(np.sort(rng.uniform(lo, hi, int(rng.integers(4, 12)))))
            if knots.size < 2:
                knots = np.array([lo, hi])
            vals = rng.normal(size=knots.size) * rng.uniform(0.2, 3.0) + rng.normal()
            sp = CubicSpline(knots, vals, bc_type="natural")
            inside = (x >= knots[0]) & (x <= knots[-1])
            xc = np.clip(x, knots[0], knots[-1])
            yield sp(xc), np.where(inside, sp(xc, 1), 0.0)
        else:
            f = np.full_like(x, rng.normal() * rng.uniform(0.0, 0.5))
            df = np.zeros_like(x)
            for _ in range(int(rng.integers(1, 4))):
                c = rng.uniform(lo, hi)
                w = rng.uniform(0.05, 2.0) * (hi - lo) / 8.0
                a = rng.normal()
                e = a * np.exp(-0.5 * ((x - c) / w) ** 2)
                f = f + e
                df = df - e * (x - c) / w**2
            yield f, df


@dataclass(frozen=True)
class LsiReport:
    passed: bool
    max_ratio: float
    c_lsi: float
    trials: int
    seed: int
    worst: str
    exp_slopes: tuple
    exp_ratios: tuple

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_ratio": self.max_ratio,
            "c_lsi": self.c_lsi,
            "trials": self.trials,
            "seed": self.seed,
            "worst": self.worst,
            "exp_slopes": list(self.exp_slopes),
            "exp_ratios": list(self.exp_ratios),
        }


def lsi_defect_check(m, c_lsi, trials=1000, seed=0, slopes=None, rtol=1e-6):
    """Check ``Ent(f^2) <= c_lsi * int |f'|^2 dmu`` on random functions and
    on the exponential family ``exp(s x / 2)``.

    For the standard Gaussian the exponential family has ratio exactly 2
    for every ``s``, so the reported maximum sits at the sharp constant.
    ``rtol`` absorbs quadrature error in the pass decision only; the
    reported ratios are raw.
    """
    if not c_lsi > 0:
        raise ValueError("c_lsi must be positive")
    if slopes is None:
        slopes = np.concatenate([-np.geomspace(2.0, 0.01, 12), np.geomspace(0.01, 2.0, 12)])
    x = np.asarray(m.nodes, dtype=float)
    best, worst = -math.inf, ""
    for i, (f, df) in enumerate(_trial_functions(m, trials, seed)):
        en = dirichlet_energy(m, f, df)
        if en <= 0:
            continue
        ratio = entropy_sq(m, f) / en
        if ratio > best:
            best, worst = ratio, f"trial {i}"
    exp_ratios = []
    for s in slopes:
        # shift the exponent so the largest node value is 1
        e = 0.5 * s * x
        f = np.exp(e - e.max())
        ratio = entropy_sq(m, f) / dirichlet_energy(m, f, 0.5 * s * f)
        exp_ratios.append(float(ratio))
        if ratio > best:
            best, worst = ratio, f"exp slope {s:.6g}"
    if not math.isfinite(best):
        raise SpiLabError("no usable test function")
    return LsiReport(
        passed=bool(best <= c_lsi * (1 + rtol)),
        max_ratio=float(best),
        c_lsi=float(c_lsi),
        trials=int(trials),
        seed=int(seed),
        worst=worst,
        exp_slopes=tuple(float(s) for s in slopes),
        exp_ratios=tuple(exp_ratios),
    )
