import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spilab import capacity as C
from spilab import measure as M


def test_uniform_centre_interval(uniform01):
    assert C.interval_capacity(uniform01, 0.45, 0.55) == pytest.approx(10.0, abs=1e-9)


@given(st.floats(0.0, 0.45), st.floats(0.01, 0.5))
@settings(max_examples=40, deadline=None)
def test_uniform_closed_form(start, mass):
    # two linear ramps of lengths u, v with u + v = 1/2 - mass: minimal
    # 1/u + 1/v at u = v unless a ramp hits an end of [0, 1], which is free
    m = _uniform()
    mass = min(mass, 0.5 - 1e-3)
    a, b = start, min(start + mass, 1.0)
    mass = b - a
    spare = 0.5 - mass
    cands = []
    for u in np.linspace(0, spare, 20001):
        v = spare - u
        left = 0.0 if u >= a else 1.0 / u if u > 0 else math.inf
        right = 0.0 if v >= 1 - b else 1.0 / v if v > 0 else math.inf
        cands.append(left + right)
    expected = min(cands)
    assert C.interval_capacity(m, a, b) == pytest.approx(expected, rel=2e-3)


_U = {}


def _uniform():
    if "m" not in _U:
        _U["m"] = M.build_measure(M.uniform(), (0.0, 1.0), 2001)
    return _U["m"]


def test_support_mass_saturated(gauss):
    cap, info = C.interval_capacity(gauss, -0.1, 0.3, full_output=True)
    assert gauss.mass_between(info["alpha"], info["beta"]) == pytest.approx(0.5, abs=1e-10)


def test_too_heavy_set_rejected(gauss):
    with pytest.raises(ValueError):
        C.interval_capacity(gauss, -1.0, 1.0)


def test_gaussian_symmetry(gauss):
    right = C.interval_capacity(gauss, 1.5, 10.0)
    left = C.interval_capacity(gauss, -10.0, -1.5)
    assert right == pytest.approx(left, rel=1e-9)


def test_monotone_under_inclusion(gauss):
    small = C.interval_capacity(gauss, 0.1, 0.2)
    big = C.interval_capacity(gauss, 0.0, 0.3)
    assert small <= big


@pytest.mark.parametrize("a,b", [(-0.1, 0.1), (1.0, 10.0), (-2.0, -0.5)])
def test_brute_force_agreement(gauss, a, b):
    cap = C.interval_capacity(gauss, a, b)
    brute = C.brute_force_capacity(gauss, a, b)
    # a discrete minimization over a subspace cannot go below the infimum
    assert brute >= cap * (1 - 1e-6)
    assert brute == pytest.approx(cap, rel=0.02)


def test_two_tail(gauss):
    a, b = gauss.left_quantile(0.05), gauss.right_quantile(0.05)
    two = C.two_tail_capacity(gauss, a, b)
    one = C.interval_capacity(gauss, b, 10.0)
    assert math.isfinite(two)
    assert two >= one  # a larger set cannot have smaller capacity


def test_profile_properties(gauss_profile):
    assert gauss_profile.is_normalized
    assert np.all(gauss_profile.c_kappa > 0)
    assert C.check_mc(gauss_profile, 1e-3, 0.5 * gauss_profile.value_at(1e-3))
    assert not C.check_mc(gauss_profile, 1e-3, 2 * gauss_profile.value_at(1e-3))


def test_profile_round_trips(gauss_profile):
    back = C.CapacityProfile.from_csv(gauss_profile.to_csv())
    assert np.array_equal(back.kappa, gauss_profile.kappa)
    assert np.array_equal(back.c_kappa, gauss_profile.c_kappa)
    d = C.CapacityProfile.from_dict(gauss_profile.to_dict())
    assert np.array_equal(d.c_kappa, gauss_profile.c_kappa)


def test_poincare_needs_half():
    prof = C.CapacityProfile(np.array([0.1, 0.2]), np.array([3.0, 2.0]))
    with pytest.raises(ValueError):
        C.poincare_from_mc(prof)
    prof = C.CapacityProfile(np.array([0.1, 0.5]), np.array([3.0, 2.0]))
    assert C.poincare_from_mc(prof) == (0.5, 2.0)


def test_value_at_is_conservative():
    prof = C.CapacityProfile(np.array([0.01, 0.1, 0.5]), np.array([5.0, 3.0, 1.0]))
    assert prof.value_at(0.05) == 3.0
    assert prof.value_at(0.1) == 3.0
    with pytest.raises(ValueError):
        prof.value_at(1e-4)
