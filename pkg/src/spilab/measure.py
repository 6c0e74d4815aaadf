"""One-dimensional probability measures ``exp(-V(x)) dx / Z`` on a truncated line.

A :class:`Measure1D` carries two quadratures on the same uniform node grid:

* composite Simpson weights on the nodes, used by :func:`integrate` and
  everything that works with node values;
* per-cell Gauss-Legendre sums of ``exp(-V)`` and ``exp(+V)``, used for
  distribution functions, quantiles and the one-dimensional resistance
  integrals behind capacities. These are kept cell by cell (not as a
  running sum) so that tail masses and resistances keep full relative
  precision far out in the tails.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import logsumexp, roots_legendre

from .errors import DomainTooSmallError, NonFiniteError, NonIntegrableError
from .numerics import Tolerance, root_find_monotone

PRESETS = ("gaussian", "double-well", "power", "polynomial", "expression", "uniform")

_EPS = np.finfo(float).eps
_GL_X, _GL_W = roots_legendre(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class Potential:
    """A potential ``V`` defining the density ``exp(-V)``.

    ``kind`` is one of :data:`PRESETS`. ``params`` holds the preset
    coefficients: the exponent for ``power``, ascending coefficients for
    ``polynomial``, a scale for ``gaussian`` (variance) and ``double-well``
    (barrier height). ``expression`` is source text for the expression
    parser.
    """

    kind: str
    params: tuple = ()
    expression: str | None = None
    _fn: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in PRESETS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "expression":
            if self.expression is None:
                raise ValueError("expression potential needs source text")
            if self._fn is None:
                from .expr import compile_expression

                object.__setattr__(self, "_fn", compile_expression(self.expression))
        if self.kind == "power" and self.params and self.params[0] <= 0:
            raise ValueError("power potential needs a positive exponent")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "gaussian":
            var = p[0] if p else 1.0
            return 0.5 * x * x / var
        if k == "double-well":
            height = p[0] if p else 1.0
            return height * (x * x - 1.0) ** 2
        if k == "power":
            alpha = p[0] if p else 1.0
            return np.abs(x) ** alpha
        if k == "polynomial":
            return np.polynomial.polynomial.polyval(x, p) if p else np.zeros_like(x)
        if k == "uniform":
            return np.zeros_like(x)
        return np.asarray(self._fn(x), dtype=float) * np.ones_like(x)

    def derivative(self, x, step=1e-5):
        """Central-difference ``V'(x)``."""
        x = np.asarray(x, dtype=float)
        hstep = step * np.maximum(1.0, np.abs(x))
        return (self(x + hstep) - self(x - hstep)) / (2 * hstep)

    @property
    def compact(self):
        """True when the measure lives on the truncation interval itself."""
        return self.kind == "uniform"


def gaussian(variance=1.0):
    return Potential("gaussian", (variance,))


def double_well(height=1.0):
    return Potential("double-well", (height,))


def power(alpha):
    return Potential("power", (alpha,))


def polynomial(coeffs):
    return Potential("polynomial", tuple(coeffs))


def uniform():
    return Potential("uniform")


def expression(src):
    return Potential("expression", (), src)


def preset(name, params=()):
    """Potential from a preset name, e.g. ``preset("power", [1.5])``."""
    if name == "expression":
        raise ValueError("use expression(src) for expression potentials")
    return Potential(name, tuple(params))


@dataclass(frozen=True)
class GridMeasure:
    """A discrete measure: point masses ``weights`` at ``nodes``.

    Used wherever a calculation must be exact for one fixed quadrature,
    e.g. the lumped mass matrix of the discretized generator.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def values(self, f):
        return _node_values(self, f)


@dataclass(frozen=True, eq=False)
class Measure1D:
    """Normalized measure ``exp(-V) / Z`` on ``[x_lo, x_hi]``.

    Attributes
    ----------
    potential : Potential
    domain : tuple of float
    log_z : float
        Log normalization so that ``integrate(m, 1) == 1`` for the node
        quadrature.
    nodes : ndarray
        Uniform, strictly increasing.
    quad_weights : ndarray
        Composite Simpson weights (Lebesgue, no density).
    weights : ndarray
        ``quad_weights * exp(-V(nodes)) / Z``; these sum to one.
    tail_mass : float
        Estimated mass outside the domain (0 for compact measures).
    """

    potential: Potential
    domain: tuple
    log_z: float
    nodes: np.ndarray
    quad_weights: np.ndarray
    weights: np.ndarray
    tail_mass: float
    _cell_log_mass: np.ndarray = field(repr=False)
    _cell_log_resist: np.ndarray = field(repr=False)
    _log_z_cells: float = field(repr=False)
    _prefix: np.ndarray = field(repr=False)
    _suffix: np.ndarray = field(repr=False)

    @property
    def h(self):
        return self.nodes[1] - self.nodes[0]

    def density(self, x):
        return np.exp(-self.potential(x) - self.log_z)

    def values(self, f):
        return _node_values(self, f)

    # ----- cell-wise distribution function -------------------------------
    def _cell_index(self, x):
        i = int(np.searchsorted(self.nodes, x, side="right")) - 1
        return min(max(i, 0), self.nodes.size - 2)

    def _partial_log(self, a, b, sign):
        """log of int_a^b exp(sign * V) over a sub-cell interval."""
        if b <= a:
            return -np.inf
        t = a + (b - a) * _GL_X
        e = sign * self.potential(t)
        top = float(np.max(e))
        return top + math.log(float(np.dot(_GL_W, np.exp(e - top))) * (b - a))

    def mass_between(self, a, b):
        """``mu([a, b])`` with relative precision kept in both tails."""
        lo, hi = self.domain
        a = max(float(a), lo)
        b = min(float(b), hi)
        if b <= a:
            return 0.0
        ia, ib = self._cell_index(a), self._cell_index(b)
        norm = self._log_z_cells
        if ia == ib:
            return math.exp(self._partial_log(a, b, -1.0) - norm)
        left = math.exp(self._partial_log(a, self.nodes[ia + 1], -1.0) - norm)
        right = math.exp(self._partial_log(self.nodes[ib], b, -1.0) - norm)
        # full cells ia+1 .. ib-1, from whichever cumulative sum is small
        if self._prefix[ib] <= 0.5:
            middle = self._prefix[ib] - self._prefix[ia + 1]
        else:
            middle = self._suffix[ia + 1] - self._suffix[ib]
        return min(left + max(middle, 0.0) + right, 1.0)

    def log_resistance(self, a, b):
        """``log(Z * int_a^b exp(V) dx)``; the flow resistance of ``[a, b]``."""
        if b <= a:
            return -np.inf
        ia, ib = self._cell_index(a), self._cell_index(b)
        if ia == ib:
            inner = self._partial_log(a, b, 1.0)
        else:
            parts = [
                self._partial_log(a, self.nodes[ia + 1], 1.0),
                self._partial_log(self.nodes[ib], b, 1.0),
            ]
            if ib > ia + 1:
                parts.append(float(logsumexp(self._cell_log_resist[ia + 1 : ib])))
            inner = float(logsumexp(parts))
        return inner + self._log_z_cells

    def cdf(self, x):
        return self.mass_between(self.domain[0], x)

    def sf(self, x):
        """Upper tail mass ``mu([x, x_hi])``."""
        return self.mass_between(x, self.domain[1])

    def left_quantile(self, mass):
        """Point ``x`` with ``mu([x_lo, x]) = mass``."""
        return _invert_cumulative(self, mass, self._prefix, left=True)

    def right_quantile(self, mass):
        """Point ``x`` with ``mu([x, x_hi]) = mass``."""
        return _invert_cumulative(self, mass, self._suffix, left=False)


def _invert_cumulative(m, mass, cum, left):
    if not 0.0 <= mass <= 1.0:
        raise ValueError("mass must lie in [0, 1]")
    lo, hi = m.domain
    if mass == 0.0:
        return lo if left else hi
    if mass >= 1.0:
        return hi if left else lo
    ncell = m.nodes.size - 1
    if left:
        # cum[i] = mass of cells < i ; find cell i with cum[i] <= mass < cum[i+1]
        i = int(np.searchsorted(cum, mass, side="right")) - 1
        i = min(max(i, 0), ncell - 1)
        base = cum[i]
        x0 = m.nodes[i]

        def g(x):
            return base + m.mass_between(x0, x) - mass

    else:
        # cum[i] = mass of cells >= i, decreasing in i
        i = int(np.searchsorted(-cum, -mass, side="left")) - 1
        i = min(max(i, 0), ncell - 1)
        base = cum[i + 1]
        x1 = m.nodes[i + 1]

        def g(x):
            return mass - base - m.mass_between(x, x1)

    a, b = m.nodes[i], m.nodes[i + 1]
    # safeguarded Newton; g' is the normalized density
    x = 0.5 * (a + b)
    for _ in range(60):
        gx = g(x)
        if gx == 0.0:
            return x
        if gx > 0:
            b = x
        else:
            a = x
        rho = math.exp(-float(m.potential(np.array([x]))[0]) - m._log_z_cells)
        step = gx / rho
        if abs(step) <= 4 * _EPS * max(1.0, abs(x)):
            return x
        x_new = x - step
        if not (a < x_new < b) or not np.isfinite(x_new):
            x_new = 0.5 * (a + b)
        if b - a <= 4 * _EPS * max(1.0, abs(x)):
            return x_new
        x = x_new
    tol = Tolerance(abs_tol=1e-15 * max(1.0, abs(x)), rel_tol=1e-15, max_iter=300)
    return root_find_monotone(g, a, b, tol)


def _node_values(m, f):
    if callable(f):
        vals = np.asarray(f(m.nodes), dtype=float)
        if vals.ndim == 0:
            vals = np.full(m.nodes.shape, float(vals))
    else:
        vals = np.asarray(f, dtype=float)
        if vals.ndim == 0:
            vals = np.full(m.nodes.shape, float(vals))
    if vals.shape != m.nodes.shape:
        raise ValueError(f"function values have shape {vals.shape}, grid has {m.nodes.shape}")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("NaN or infinity in integrand")
    return vals


def simpson_weights(n, h):
    """Composite Simpson weights for ``n`` equispaced nodes.

    Even ``n`` closes the last three intervals with the 3/8 rule.
    """
    if n < 4:
        raise ValueError("need at least 4 nodes")
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    w[:m:2] += 2.0
    w[1:m:2] = 4.0
    w[0] = w[m - 1] = 1.0
    w[:m] *= h / 3.0
    if m < n:
        w[m - 1] += 3 * h / 8
        w[m] += 9 * h / 8
        w[m + 1] += 9 * h / 8
        w[m + 2] += 3 * h / 8
    return w


def _tail_estimate(potential, lo, hi, log_z):
    """One-sided exponential tail bounds from the boundary log-density slope.

    Returns ``(mass_outside, decaying)``; ``decaying`` is False when the
    density does not decrease outward at one of the ends.
    """
    total = 0.0
    decaying = True
    for x, outward in ((lo, -1.0), (hi, 1.0)):
        slope = -float(potential.derivative(np.array([x]))[0]) * outward
        if not slope < 0:
            decaying = False
            continue
        total += math.exp(-float(potential(np.array([x]))[0]) - log_z) / abs(slope)
    return total, decaying


def _assemble(potential, lo, hi, n_nodes):
    nodes = np.linspace(lo, hi, n_nodes)
    h = nodes[1] - nodes[0]
    v = potential(nodes)
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("potential is not finite on the grid")
    qw = simpson_weights(n_nodes, h)
    with np.errstate(over="ignore"):
        log_z = float(logsumexp(-v, b=qw))
    # cell Gauss-Legendre sums
    t = nodes[:-1, None] + h * _GL_X[None, :]
    vt = potential(t)
    cell_log_mass = logsumexp(-vt, b=h * _GL_W[None, :], axis=1)
    cell_log_resist = logsumexp(vt, b=h * _GL_W[None, :], axis=1)
    log_z_cells = float(logsumexp(cell_log_mass))
    cell_mass = np.exp(cell_log_mass - log_z_cells)
    prefix = np.concatenate(([0.0], np.cumsum(cell_mass)))
    suffix = np.concatenate((np.cumsum(cell_mass[::-1])[::-1], [0.0]))
    return nodes, qw, v, log_z, cell_log_mass, cell_log_resist, log_z_cells, prefix, suffix


def build_measure(potential, domain=None, n_nodes=2001, tail_tol=1e-10, max_doublings=12):
    """Normalize ``exp(-V)`` on a truncated domain.

    Parameters
    ----------
    potential : Potential
    domain : (float, float) or None
        Truncation interval. ``None`` grows ``[-4, 4]`` by doubling until
        the tail estimate falls below ``tail_tol``.
    n_nodes : int
        Number of uniform nodes (at least 16).
    tail_tol : float
        Bound on the mass allowed outside the domain.

    Raises
    ------
    NonIntegrableError
        The density does not decay at some end even after growing the
        domain, or overflows.
    DomainTooSmallError
        The estimated outside mass exceeds ``tail_tol``.
    """
    if n_nodes < 16:
        raise ValueError("n_nodes must be at least 16")
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")

    if potential.compact:
        if domain is None:
            raise ValueError("a compactly supported measure needs an explicit domain")
        lo, hi = map(float, domain)
        if not lo < hi:
            raise ValueError("empty domain")
        parts = _assemble(potential, lo, hi, n_nodes)
        return _finish(potential, (lo, hi), parts, 0.0)

    if domain is not None:
        lo, hi = map(float, domain)
        if not lo < hi:
            raise ValueError("empty domain")
        parts = _assemble(potential, lo, hi, n_nodes)
        tail, decaying = _tail_estimate(potential, lo, hi, parts[3])
        if not decaying:
            # grow a probe domain to tell "too small" from "not integrable"
            _grow(potential, lo, hi, n_nodes, tail_tol, max_doublings)
            raise DomainTooSmallError(
                f"density does not decay at the boundary of [{lo}, {hi}]; enlarge the domain"
            )
        if tail > tail_tol:
            raise DomainTooSmallError(f"estimated tail mass {tail:.3e} exceeds tail_tol {tail_tol:.3e}")
        return _finish(potential, (lo, hi), parts, tail)

    lo, hi, parts, tail = _grow(potential, -4.0, 4.0, n_nodes, tail_tol, max_doublings)
    return _finish(potential, (lo, hi), parts, tail)


def _grow(potential, lo, hi, n_nodes, tail_tol, max_doublings):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    for _ in range(max_doublings + 1):
        lo, hi = center - half, center + half
        with np.errstate(over="ignore", invalid="ignore"):
            v_ends = potential(np.array([lo, hi]))
        if not np.all(np.isfinite(v_ends)) or np.min(v_ends) < -700:
            raise NonIntegrableError("non-integrable density: exp(-V) overflows as the domain grows")
        try:
            parts = _assemble(potential, lo, hi, n_nodes)
        except NonFiniteError as exc:
            raise NonIntegrableError(f"non-integrable density: {exc}") from exc
        tail, decaying = _tail_estimate(potential, lo, hi, parts[3])
        if decaying and tail <= tail_tol:
            return lo, hi, parts, tail
        half *= 2.0
    raise NonIntegrableError("non-integrable density: tail mass does not vanish as the domain grows")


def _finish(potential, domain, parts, tail):
    nodes, qw, v, log_z, clm, clr, lzc, prefix, suffix = parts
    weights = qw * np.exp(-v - log_z)
    return Measure1D(
        potential=potential,
        domain=domain,
        log_z=log_z,
        nodes=nodes,
        quad_weights=qw,
        weights=weights,
        tail_mass=tail,
        _cell_log_mass=clm,
        _cell_log_resist=clr,
        _log_z_cells=lzc,
        _prefix=prefix,
        _suffix=suffix,
    )


def integrate(m, f, full_output=False):
    """Quadrature of ``int f dmu``.

    ``f`` is a callable or an array of node values. With
    ``full_output=True`` returns ``(value, error_estimate)`` where the
    estimate is the Simpson/trapezoid discrepancy, a conservative bound for
    smooth integrands.
    """
    vals = _node_values(m, f)
    value = float(np.dot(m.weights, vals))
    if not full_output:
        return value
    if isinstance(m, Measure1D):
        trap = np.full(m.nodes.size, m.h)
        trap[0] = trap[-1] = 0.5 * m.h
        dens = m.weights / m.quad_weights
        err = abs(value - float(np.dot(trap * dens, vals)))
    else:
        err = 0.0
    return value, err


def _fd_derivative(f, x, step=1e-3):
    """Fourth-order central difference."""
    return (8 * (f(x + step) - f(x - step)) - (f(x + 2 * step) - f(x - 2 * step))) / (12 * step)


def dirichlet_energy(m, f, df=None):
    """``int |f'|^2 dmu``.

    ``df`` may give the derivative (callable or node values). Otherwise a
    callable ``f`` is differentiated by a fourth-order central difference
    and node values by second-order ``np.gradient``.
    """
    if df is not None:
        deriv = _node_values(m, df)
    elif callable(f):
        deriv = _node_values(m, lambda x: _fd_derivative(f, x))
    else:
        vals = _node_values(m, f)
        deriv = np.gradient(vals, m.nodes, edge_order=2)
    return float(np.dot(m.weights, deriv * deriv))


def median(m):
    """Median of ``mu``."""
    return m.left_quantile(0.5)


def tail_quantile(m, kappa):
    """Point ``x`` with ``mu([x, x_hi]) = kappa``, ``0 < kappa < 1``."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    return m.right_quantile(kappa)
