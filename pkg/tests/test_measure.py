import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from spilab import measure as M
from spilab.errors import NonIntegrableError, SpiLabError


def test_gaussian_moments(gauss):
    assert M.integrate(gauss, lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-12)
    assert M.integrate(gauss, lambda x: x**2) == pytest.approx(1.0, abs=1e-10)
    assert M.integrate(gauss, lambda x: x**4) == pytest.approx(3.0, abs=1e-9)
    assert M.dirichlet_energy(gauss, lambda x: x, lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("x", [-8.0, -3.0, -0.5, 0.0, 1.3, 6.0])
def test_gaussian_cdf_sf(gauss, x):
    assert gauss.cdf(x) == pytest.approx(norm.cdf(x), rel=1e-9)
    assert gauss.sf(x) == pytest.approx(norm.sf(x), rel=1e-9)


@pytest.mark.parametrize("q", [1e-20, 1e-8, 1e-3, 0.2, 0.5])
def test_gaussian_quantiles(gauss, q):
    # the measure lives on [-10, 10]: invert the truncated normal
    cut = norm.cdf(-10.0)
    scale = 1.0 - 2.0 * cut
    assert gauss.left_quantile(q) == pytest.approx(norm.ppf(cut + q * scale), rel=1e-10)
    assert gauss.right_quantile(q) == pytest.approx(norm.isf(cut + q * scale), rel=1e-10)


def test_median_and_tail_quantile(gauss):
    assert abs(M.median(gauss)) < 1e-12
    assert M.tail_quantile(gauss, 0.025) == pytest.approx(norm.isf(0.025), rel=1e-10)


@given(st.floats(-5, 5), st.floats(0.01, 3))
@settings(max_examples=40, deadline=None)
def test_mass_between_is_additive(a, w):
    m = _double_well()
    mid = a + 0.5 * w
    total = m.mass_between(a, a + w)
    assert total == pytest.approx(m.mass_between(a, mid) + m.mass_between(mid, a + w), rel=1e-12)
    assert m.cdf(m.left_quantile(m.cdf(a))) == pytest.approx(m.cdf(a), rel=1e-10)


_DW = {}


def _double_well():
    if "m" not in _DW:
        _DW["m"] = M.build_measure(M.double_well(), None, 2001)
    return _DW["m"]


def test_uniform_resistance(uniform01):
    assert math.exp(uniform01.log_resistance(0.2, 0.7)) == pytest.approx(0.5, rel=1e-13)
    assert uniform01.mass_between(0.2, 0.7) == pytest.approx(0.5, rel=1e-13)


def test_expression_matches_preset():
    a = M.build_measure(M.expression("x^2/2"), (-9, 9), 1001)
    b = M.build_measure(M.gaussian(), (-9, 9), 1001)
    assert np.allclose(a.weights, b.weights, rtol=1e-12, atol=1e-300)


def test_auto_domain_covers_mass():
    m = M.build_measure(M.power(1.0), None, 2001)
    assert m.tail_mass <= 1e-10
    assert m.mass_between(*m.domain) == pytest.approx(1.0, abs=1e-12)


def test_non_integrable_potential_rejected():
    with pytest.raises((NonIntegrableError, SpiLabError)):
        M.build_measure(M.expression("0 - x^2"), None, 501)


def test_grid_measure_values():
    g = M.GridMeasure(np.array([0.0, 1.0, 2.0]), np.array([0.25, 0.5, 0.25]))
    assert M.integrate(g, lambda x: x) == pytest.approx(1.0)


def test_unknown_preset():
    with pytest.raises(ValueError):
        M.preset("cauchy")
