import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh_tridiagonal

from spilab.errors import BracketError
from spilab.numerics import Tolerance, eig_sym_tridiag, minimize_scalar, minimize_scan, root_find_monotone


def test_root_cube():
    x = root_find_monotone(lambda t: t**3 - 2.0, 0.0, 2.0)
    assert x == pytest.approx(2.0 ** (1 / 3), rel=1e-14)


@given(st.floats(-50, 50), st.floats(0.1, 10))
@settings(max_examples=60, deadline=None)
def test_root_of_shifted_odd_power(c, s):
    x = root_find_monotone(lambda t: s * (t - c) ** 3, c - 7.0, c + 3.0)
    assert abs(x - c) <= 1e-4 * max(1, abs(c))


def test_root_needs_sign_change():
    with pytest.raises(BracketError):
        root_find_monotone(lambda t: t * t + 1.0, -1.0, 1.0)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(abs_tol=0.0)
    with pytest.raises(ValueError):
        Tolerance(max_iter=0)
    assert Tolerance(abs_tol=1e-10, rel_tol=1e-8).width(100.0) == pytest.approx(1e-10 + 1e-6)


def test_minimize_scalar_quadratic():
    x, fx = minimize_scalar(lambda t: (t - 0.3) ** 2 + 1.0, -2.0, 3.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0, abs=1e-14)


def test_minimize_scan_picks_global_minimum():
    h = lambda t: math.cos(3 * t) + 0.1 * t  # several local minima on [0, 10]
    x, fx = minimize_scan(h, 0.0, 10.0, n_scan=200)
    grid = np.linspace(0, 10, 200001)
    assert fx <= np.min(np.cos(3 * grid) + 0.1 * grid) + 1e-10


def test_minimize_scan_log():
    x, fx = minimize_scan(lambda t: (math.log(t) - 2.0) ** 2, 1e-3, 1e5, log=True)
    assert x == pytest.approx(math.e**2, rel=1e-6)


@given(st.integers(0, 10_000), st.integers(70, 300), st.integers(1, 8))
@settings(max_examples=25, deadline=None)
def test_tridiagonal_eigen_matches_lapack(seed, n, k):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n) * 3
    e = rng.normal(size=n - 1)
    vals, vecs = eig_sym_tridiag(d, e, k)
    ref = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))
    assert np.max(np.abs(vals - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))
    t = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.max(np.abs(t @ vecs - vecs * vals)) < 1e-7
    assert np.max(np.abs(vecs.T @ vecs - np.eye(k))) < 1e-8


def test_tridiagonal_laplacian_closed_form():
    n = 200
    vals, _ = eig_sym_tridiag(np.full(n, 2.0), np.full(n - 1, -1.0), 5)
    exact = 2 - 2 * np.cos(np.arange(1, 6) * np.pi / (n + 1))
    assert np.allclose(vals, exact, rtol=1e-10, atol=1e-14)
