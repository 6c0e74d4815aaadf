import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import airy, eval_hermitenorm, gamma, gammaln

from spilab import hermite as H


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 40])
def test_values_against_scipy(n):
    x = np.linspace(-6, 6, 41)
    ref = eval_hermitenorm(n, x) / math.sqrt(math.factorial(n))
    assert np.allclose(H.eval_orthonormal(n, x), ref, rtol=1e-11, atol=1e-11)


def exact_he(n, x):
    """``He_n(x)`` for integer ``x`` in exact integer arithmetic."""
    total = 0
    for k in range(n // 2 + 1):
        term = math.factorial(n) // (math.factorial(k) * math.factorial(n - 2 * k) * 2**k) * x ** (n - 2 * k)
        total += -term if k % 2 else term
    return total


@pytest.mark.parametrize("x", [80, -45, 3])
def test_log_evaluation_far_out(x):
    n = 300
    logv, sign = H.eval_log(n, np.array([float(x)]))
    exact = exact_he(n, x)
    expected = math.log(abs(exact)) - 0.5 * float(gammaln(n + 1))
    assert logv[0] == pytest.approx(expected, rel=1e-12)
    assert sign[0] == (1 if exact > 0 else -1)


def test_gram_identity():
    assert np.max(np.abs(H.HermiteBasis(30).gram() - np.eye(31))) < 1e-12


@pytest.mark.parametrize("p", [3.0, 6.0, 8.0])
def test_h1_lp_norm_absolute_moment(p):
    exact = (2 ** (p / 2) * gamma((p + 1) / 2) / math.sqrt(math.pi)) ** (1 / p)
    assert H.lp_norm(1, p) == pytest.approx(exact, rel=1e-12)


def test_l2_norms():
    assert max(abs(H.lp_norm(n, 2.0) - 1) for n in range(41)) < 1e-12


@given(st.integers(10, 30), st.sampled_from([3.0, 4.0, 6.0]))
@settings(max_examples=20, deadline=None)
def test_integral_split_sums(n, p):
    parts = H.integral_split(n, p)
    assert sum(parts) == pytest.approx(H.lp_norm(n, p) ** p, rel=1e-10)


def test_airy_series():
    z = np.linspace(-8, 4, 61)
    assert np.allclose([H.airy_ai(t) for t in z], airy(z)[0], rtol=1e-10, atol=1e-14)


def test_regimes():
    n = 100
    N = math.sqrt(4 * n + 2)
    assert H.classify(n, 0.0).tag == "oscillating"
    assert H.classify(n, N).tag == "frontier"
    assert H.classify(n, 1.5 * N).tag == "exterior"
    assert H.classify(n, -1.5 * N).tag == "exterior"


@pytest.mark.parametrize("n", [50, 200, 400])
def test_calibration_close_to_one(n):
    assert H.calibration(n) == pytest.approx(1 - 1 / (8 * n), rel=2e-4)


def test_exterior_and_frontier_ratios():
    n = 200
    N = math.sqrt(4 * n + 2)
    for x, tol in ((1.5 * N, 0.01), (N, 0.01)):
        val, _, _ = H.pr_asymptotic(n, x)
        ref = float(H.weighted_value(n, np.array([x]))[0])
        assert val / ref == pytest.approx(1.0, abs=tol)


def test_error_decreases_with_degree():
    errs = [H.window_error(n, 0.3) for n in (50, 100, 200, 400)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_audit_rejects_small_p():
    with pytest.raises(ValueError):
        H.audit_lp_bound(10, [1.5])


def test_audit_bound_holds_on_table():
    table, c_sup = H.audit_lp_bound(30, [3.0, 4.0])
    n = np.array(table["n"])[:, None]
    p = np.array(table["p"])[None, :]
    assert np.all(table["norm"] <= c_sup**n * p ** (0.75 * n) * (1 + 1e-12))


def test_eigenspace_dims():
    assert H.eigenspace_dims(2, 2) == (3, 6)
    assert H.eigenspace_dims(1, 7) == (1, 8)


@given(st.integers(1, 10), st.integers(1, 40))
def test_eigenspace_counts(d, k):
    level, cum = H.eigenspace_dims(d, k)
    assert cum == math.comb(k + d, d)
    assert level == math.comb(k + d - 1, d - 1)
    assert cum <= 2**d * k**d


def test_multivariate_bound():
    assert H.multivariate_lp_bound((1, 1), 4.0) == pytest.approx(math.sqrt(3.0), rel=1e-12)
