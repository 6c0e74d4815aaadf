import math

import numpy as np
import pytest

from spilab import measure as M
from spilab import orlicz as O
from spilab import spectrum as S
from spilab import transfer as T
from spilab.errors import InsufficientSpectrumError, SpiLabError


def test_constants_in_kernel(gauss_spec):
    g = gauss_spec.generator
    assert np.max(np.abs(g.apply(np.ones_like(g.nodes)))) == 0.0
    assert g.energy(np.ones_like(g.nodes)) == 0.0


def test_symmetric_form_matches_generalized_problem():
    m = M.build_measure(M.double_well(), (-4, 4), 200)
    g = S.discretize_generator(m)
    t = g.dense()
    k = np.diag(g.mass**0.5) @ t @ np.diag(g.mass**0.5)
    f = np.sin(g.nodes)
    assert np.allclose(k @ f, g.stiffness_apply(f), atol=1e-12)
    assert np.allclose(t, t.T)


def test_ou_eigenpairs(gauss_spec):
    assert np.allclose(gauss_spec.eigenvalues[:6], np.arange(6), atol=1e-6)
    assert np.max(np.abs(gauss_spec.gram() - np.eye(gauss_spec.k))) < 1e-10
    assert np.max(gauss_spec.residuals()) < 1e-5
    x = gauss_spec.nodes
    bulk = np.abs(x) < 4
    # orthonormal Hermite polynomials, sign fixed by the right end
    assert np.max(np.abs(gauss_spec.eigenvectors[bulk, 1] - x[bulk])) < 1e-3
    assert np.max(np.abs(gauss_spec.eigenvectors[bulk, 2] - (x[bulk] ** 2 - 1) / math.sqrt(2))) < 1e-3
    assert np.all(gauss_spec.eigenvectors[-1] > 0)


def test_uniform_neumann_spectrum():
    m = M.build_measure(M.uniform(), (0.0, 1.0), 2001)
    ev = S.low_spectrum(m, 4).eigenvalues
    assert np.allclose(ev / math.pi**2, [0, 1, 4, 9], atol=1e-5)


def test_coarse_grid_rejected():
    m = M.build_measure(M.gaussian(), (-10, 10), 50)
    with pytest.raises(SpiLabError):
        S.discretize_generator(m)


def test_spectral_ospi_value(gauss_spec):
    ospi = S.spectral_ospi(gauss_spec, O.power_pair(4.0), [0.6])
    # ||1||^2 + ||x||^2 in L_{x^4/4}: 1/2 + sqrt(3)/2 for the exact Gaussian
    assert ospi.beta(0.6) == pytest.approx((1 + math.sqrt(3)) / 2, rel=1e-4)


def test_insufficient_spectrum(gauss_spec):
    with pytest.raises(InsufficientSpectrumError):
        S.spectral_ospi(gauss_spec, O.power_pair(4.0), [0.05])


def test_essential_threshold_cuts_validity(gauss):
    spec = S.low_spectrum(gauss, 8, ess_threshold=2.0)
    ospi = S.spectral_ospi(spec, O.power_pair(4.0), [0.3, 0.5, 0.6, 1.0])
    assert ospi.beta.r0 == 0.5
    assert ospi.beta(0.5) == math.inf
    assert math.isfinite(ospi.beta(0.6))


def test_verify_spi_passes_and_is_deterministic(gauss, gauss_spec):
    ospi = S.spectral_ospi(gauss_spec, O.power_pair(4.0), [0.25, 1.0])
    a = S.verify_spi(gauss, ospi, 0.25, trials=200, seed=3, generator=gauss_spec.generator)
    b = S.verify_spi(gauss, ospi, 0.25, trials=200, seed=3, generator=gauss_spec.generator)
    assert a.passed and a == b


def test_verify_spi_detects_too_small_beta(gauss, gauss_spec):
    ospi = S.spectral_ospi(gauss_spec, O.power_pair(4.0), [1.0])
    weak = T.OrliczSpi(T.BetaFunction.from_table(ospi.beta.r_grid, ospi.beta.values * 0.1), ospi.pair)
    rep = S.verify_spi(gauss, weak, 1.0, trials=200, seed=3, generator=gauss_spec.generator)
    assert not rep.passed


def test_equality_case(gauss, gauss_spec):
    # at r = 1.5 only the constants are covered; for f = 1 the energy
    # vanishes and the Hölder step is an equality, so lhs = rhs
    ospi = S.spectral_ospi(gauss_spec, O.power_pair(4.0), [1.5])
    one = np.ones_like(gauss_spec.nodes)
    rep = S.verify_spi(gauss, ospi, 1.5, functions=[one], generator=gauss_spec.generator)
    assert rep.passed
    assert abs(rep.max_violation) < 1e-12
    v = gauss_spec.eigenvectors
    rep = S.verify_spi(gauss, ospi, 1.5, functions=[v[:, 0] + 0.3 * v[:, 1]], generator=gauss_spec.generator)
    assert rep.passed


def test_plain_spi_with_sup_norms(gauss, gauss_spec):
    beta = S.spectral_spi(gauss_spec, [0.25, 0.5, 1.0])
    for r in (0.25, 0.5, 1.0):
        assert S.verify_spi(gauss, beta, r, trials=100, seed=4, generator=gauss_spec.generator).passed


def test_projection_split(gauss, gauss_spec):
    g = gauss_spec.generator
    for f in S.random_test_functions(gauss, 30, seed=1):
        p, q = S.projection_split(gauss, gauss_spec, f, 0.5)
        assert p + q == pytest.approx(g.inner(f, f), rel=1e-12)
        assert 0 <= q <= 0.5 * g.energy(f) * (1 + 1e-10)


def test_random_functions_seeded(gauss):
    a = S.random_test_functions(gauss, 5, seed=7)
    b = S.random_test_functions(gauss, 5, seed=7)
    c = S.random_test_functions(gauss, 5, seed=8)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))
