"""Low spectrum of the diffusion generator and spectral super-Poincaré constants.

The operator ``-L f = -f'' + V' f'`` is self-adjoint in ``L^2(mu)``. On the
uniform grid of a :class:`Measure1D` it is discretized in conservative
finite-volume form: edge conductances ``c = rho(midpoint) / h`` and
lumped node masses ``m_i = rho_i vol_i`` (half cells at the ends), with
Neumann ends. The discrete problem ``K f = lam M f`` is symmetrized as
``M^(-1/2) K M^(-1/2)``, a symmetric tridiagonal matrix.

Everything downstream (inner products, energies, Orlicz norms of
eigenvectors, SPI checks) uses the same discrete measure ``M`` and the
same discrete energy ``f^T K f``; in that setting the spectral SPI is an
exact identity chain, so the checks are limited only by roundoff.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InsufficientSpectrumError, SpiLabError
from .measure import GridMeasure, _node_values
from .numerics import eig_sym_tridiag
from .orlicz import luxembourg_norm, orlicz_norm
from .transfer import BetaFunction, OrliczSpi

_INCLUDE_SLACK = 1e-6


@dataclass(frozen=True, eq=False)
class Generator:
    """Discretized ``-L``: conductances, lumped masses and the symmetric form."""

    nodes: np.ndarray
    conductance: np.ndarray
    mass: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray

    def stiffness_apply(self, f):
        """``K f``."""
        c = self.conductance
        df = np.diff(f)
        out = np.zeros_like(f)
        out[:-1] -= c * df
        out[1:] += c * df
        return out

    def apply(self, f):
        """``(-L_h) f = M^(-1) K f``."""
        return self.stiffness_apply(np.asarray(f, dtype=float)) / self.mass

    def energy(self, f):
        """Discrete Dirichlet energy ``f^T K f = sum c (f_{i+1} - f_i)^2``."""
        f = np.asarray(f, dtype=float)
        return float(np.sum(self.conductance * np.diff(f) ** 2))

    def inner(self, f, g):
        return float(np.sum(self.mass * np.asarray(f) * np.asarray(g)))

    @property
    def grid_measure(self):
        return GridMeasure(self.nodes, self.mass)

    def dense(self):
        """Symmetric matrix ``T`` as a dense array (small grids, tests)."""
        n = self.diag.size
        t = np.diag(self.diag)
        t[np.arange(n - 1), np.arange(1, n)] = self.offdiag
        t[np.arange(1, n), np.arange(n - 1)] = self.offdiag
        return t


def discretize_generator(m):
    """Finite-volume ``-L`` on the nodes of ``m`` with Neumann ends.

    Raises
    ------
    SpiLabError
        If the grid has fewer than 64 interior nodes.
    """
    x = np.asarray(m.nodes, dtype=float)
    if x.size - 2 < 64:
        raise SpiLabError("grid too coarse: need at least 64 interior nodes")
    h = np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    cond = m.density(mid) / h
    vol = np.zeros_like(x)
    vol[:-1] += 0.5 * h
    vol[1:] += 0.5 * h
    mass = m.density(x) * vol
    diag_k = np.zeros_like(x)
    diag_k[:-1] += cond
    diag_k[1:] += cond
    s = 1.0 / np.sqrt(mass)
    diag = diag_k * s * s
    off = -cond * s[:-1] * s[1:]
    return Generator(nodes=x, conductance=cond, mass=mass, diag=diag, offdiag=off)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Ascending eigenvalues and ``M``-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    generator: Generator
    ess_threshold: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def nodes(self):
        return self.generator.nodes

    @property
    def k(self):
        return self.eigenvalues.size

    def coefficients(self, f):
        """``(f, f_i)`` in the discrete ``L^2(mu)``."""
        f = np.asarray(f, dtype=float)
        return self.eigenvectors.T @ (self.generator.mass * f)

    def gram(self):
        v = self.eigenvectors
        return v.T @ (self.generator.mass[:, None] * v)

    def residuals(self):
        """``||(-L_h) f_i - lam_i f_i||_mu`` for each pair."""
        g = self.generator
        out = np.empty(self.k)
        for i in range(self.k):
            r = g.apply(self.eigenvectors[:, i]) - self.eigenvalues[i] * self.eigenvectors[:, i]
            out[i] = math.sqrt(g.inner(r, r))
        return out

    def covered(self, r):
        """Indices with ``lam_i <= 1/r``, or raise when the computed list may miss some."""
        cut = (1.0 / r) * (1 + _INCLUDE_SLACK)
        if self.eigenvalues[-1] <= cut:
            raise InsufficientSpectrumError(
                f"insufficient spectrum computed: 1/r = {1 / r:g} reaches the largest "
                f"computed eigenvalue {self.eigenvalues[-1]:g}"
            )
        # eigenvalues within the slack of 1/r are kept: a larger projection is always safe
        return np.nonzero(self.eigenvalues <= cut)[0]


def low_spectrum(m, k, ess_threshold=None):
    """Lowest ``k`` eigenpairs of the discretized ``-L``.

    Eigenvectors are returned as grid functions normalized in the lumped
    ``L^2(mu)``, signed so that the value at the right end is positive.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    g = discretize_generator(m)
    vals, vecs = eig_sym_tridiag(g.diag, g.offdiag, k)
    f = vecs / np.sqrt(g.mass)[:, None]
    sign = np.where(f[-1] < 0, -1.0, 1.0)
    f = f * sign
    return SpectralData(vals, f, g, ess_threshold)


# ---------------------------------------------------------------------------
# Spectral SPI constants
# ---------------------------------------------------------------------------


def _beta_table(spec, r_grid, weights):
    r = np.asarray(r_grid, dtype=float)
    if r.size == 0 or np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise ValueError("r_grid must be positive and strictly ascending")
    r0 = 0.0
    if spec.ess_threshold is not None:
        r0 = 0.0 if math.isinf(spec.ess_threshold) else 1.0 / spec.ess_threshold
    vals = np.empty(r.size)
    for j, rr in enumerate(r):
        if rr <= r0:
            vals[j] = math.inf
            continue
        idx = spec.covered(rr)
        vals[j] = float(np.sum(weights[idx]))
    return r, vals, r0


def eigvec_norms(spec, pair):
    """``||f_i||_{Phi*}^2`` (Luxembourg, lumped measure) for each eigenvector."""
    gm = spec.generator.grid_measure
    return np.array([luxembourg_norm(gm, spec.eigenvectors[:, i], pair.phi_star) ** 2 for i in range(spec.k)])


def spectral_ospi(spec, pair, r_grid):
    """Orlicz-SPI with ``beta(r) = sum_{lam_i <= 1/r} ||f_i||_{Phi*}^2``.

    Valid for ``r > 1/Lambda_ess`` when ``spec.ess_threshold`` is set, and
    wherever the computed eigenvalues cover ``[0, 1/r]`` otherwise.

    Raises
    ------
    InsufficientSpectrumError
        When ``1/r`` reaches past the largest computed eigenvalue.
    """
    w = eigvec_norms(spec, pair)
    r, vals, r0 = _beta_table(spec, r_grid, w)
    beta = BetaFunction.from_table(r, vals, r0=r0, source="spectral_ospi")
    return OrliczSpi(beta, pair)


def spectral_spi(spec, r_grid):
    """Plain SPI with ``beta(r) = sum_{lam_i <= 1/r} ||f_i||_inf^2``."""
    w = np.max(np.abs(spec.eigenvectors), axis=0) ** 2
    r, vals, r0 = _beta_table(spec, r_grid, w)
    return BetaFunction.from_table(r, vals, r0=r0, source="spectral_spi")


def lp_beta(spec, p, r_grid):
    """``sum_{lam_i <= 1/r} ||f_i||_p^2`` (the ``L^p`` form of the spectral constant)."""
    gm = spec.generator.grid_measure
    w = np.array(
        [float(np.sum(gm.weights * np.abs(spec.eigenvectors[:, i]) ** p)) ** (2.0 / p) for i in range(spec.k)]
    )
    r, vals, r0 = _beta_table(spec, r_grid, w)
    return BetaFunction.from_table(r, vals, r0=r0, source="lp_beta")


def projection_split(m, spec, f, r, tol=1e-10):
    """``(P, Q)`` parts of ``int f^2``: spectral projection on ``lam <= 1/r`` and the rest.

    Checks ``-tol <= Q <= r * energy(f) + tol`` (scaled by ``int f^2``).
    """
    g = spec.generator
    fv = _node_values(m, f) if callable(f) or np.ndim(f) == 0 else np.asarray(f, dtype=float)
    idx = spec.covered(r)
    coef = spec.coefficients(fv)
    p_part = float(np.sum(coef[idx] ** 2))
    total = g.inner(fv, fv)
    q_part = total - p_part
    scale = tol * max(total, 1e-300)
    if q_part < -scale:
        raise SpiLabError(f"negative Q part {q_part:g}")
    if q_part > r * g.energy(fv) + scale:
        raise SpiLabError(f"Q bound violated: {q_part:g} > r * energy = {r * g.energy(fv):g}")
    return p_part, q_part


# ---------------------------------------------------------------------------
# Random test functions and SPI verification
# ---------------------------------------------------------------------------


def random_test_functions(m, trials, seed, kinds=("spline", "bump")):
    """Seeded random grid functions: clamped random-knot cubic splines and
    Gaussian bumps, alternating. Each trial has its own generator spawned
    from ``seed``."""
    x = np.asarray(m.nodes, dtype=float)
    lo = m.left_quantile(1e-6)
    hi = m.right_quantile(1e-6)
    out = []
    children = np.random.SeedSequence(seed).spawn(trials)
    for i, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        kind = kinds[i % len(kinds)]
        if kind == "spline":
            nk = int(rng.integers(4, 12))
            knots = np.sort(rng.uniform(lo, hi, nk))
            knots = np.unique(knots)
            if knots.size < 2:
                knots = np.array([lo, hi])
            vals = rng.normal(size=knots.size) * rng.uniform(0.2, 3.0) + rng.normal()
            sp = CubicSpline(knots, vals, bc_type="natural")
            f = sp(np.clip(x, knots[0], knots[-1]))
        else:
            nb = int(rng.integers(1, 4))
            f = np.zeros_like(x)
            for _ in range(nb):
                c = rng.uniform(lo, hi)
                w = rng.uniform(0.05, 2.0) * (hi - lo) / 8.0
                f += rng.normal() * np.exp(-0.5 * ((x - c) / w) ** 2)
            f += rng.normal() * rng.uniform(0.0, 0.5)
        out.append(f)
    return out


@dataclass(frozen=True)
class SpiReport:
    passed: bool
    max_violation: float
    r: float
    beta: float
    trials: int
    seed: int
    worst_trial: int

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_violation": self.max_violation,
            "r": self.r,
            "beta": self.beta,
            "trials": self.trials,
            "seed": self.seed,
            "worst_trial": self.worst_trial,
        }


def verify_spi(m, beta, r, trials=1000, seed=0, rel_tol=1e-8, functions=None, generator=None):
    """Check ``int f^2 <= r E(f) + beta(r) ||f||^2`` on random test functions.

    ``beta`` is a :class:`BetaFunction` (``||f|| = int |f|``) or an
    :class:`OrliczSpi` (``||f|| = N_Phi(f)``). Integrals use the lumped
    masses and the finite-volume energy of the discretized generator.
    The reported violation is ``max (lhs - rhs) / lhs``; the check passes
    when it is at most ``rel_tol``.
    """
    gen = generator or discretize_generator(m)
    gm = gen.grid_measure
    if isinstance(beta, OrliczSpi):
        b = float(beta.beta(r))
        phi = beta.pair.phi

        def norm(f):
            return orlicz_norm(gm, f, phi)

        r0 = beta.beta.r0
    else:
        b = float(beta(r))

        def norm(f):
            return float(np.sum(gm.weights * np.abs(f)))

        r0 = beta.r0
    if not r > r0:
        raise ValueError(f"r = {r} is not above the validity threshold {r0}")
    if functions is None:
        functions = random_test_functions(m, trials, seed)
    worst = -math.inf
    worst_i = -1
    for i, f in enumerate(functions):
        lhs = gen.inner(f, f)
        if lhs == 0:
            continue
        rhs = r * gen.energy(f) + b * norm(f) ** 2
        v = (lhs - rhs) / lhs
        if v > worst:
            worst, worst_i = v, i
    return SpiReport(bool(worst <= rel_tol), float(worst), float(r), b, len(functions), int(seed), worst_i)
