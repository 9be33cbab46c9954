"""Bessel functions against mpmath values frozen at 30 digits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weinstein.special_fn import (
    DomainError, bessel_j, bessel_j_asymptotic, bessel_j_hybrid, bessel_j_series, log_gamma,
    normalized_bessel, normalized_bessel_series, switchover_point,
)

# mpmath.besselj at dps=30
FROZEN_J = [
    (2.5, 40.0, -0.08751431140932354553),
    (0.3, 1e-3, 0.11393853750601629263),
    (7.0, 25.0, -0.010168168212703074178),
]


@pytest.mark.parametrize("nu,z,ref", FROZEN_J)
def test_bessel_j_frozen(nu, z, ref):
    assert bessel_j(nu, z) == pytest.approx(ref, rel=1e-13)
    assert bessel_j_hybrid(nu, z) == pytest.approx(ref, rel=1e-12)


def test_normalized_bessel_frozen():
    # 2 Gamma(2) J_1(3.7) / 3.7
    assert normalized_bessel(1.0, 3.7) == pytest.approx(0.029099452835384750232, rel=1e-13)


def test_half_integer_closed_form():
    z = np.linspace(0.5, 60, 200)
    ref = np.sqrt(2 / (np.pi * z)) * np.sin(z)
    np.testing.assert_allclose(bessel_j(0.5, z), ref, rtol=1e-12, atol=1e-15)
    # the Hankel expansion terminates for half-integer orders
    np.testing.assert_allclose(bessel_j_asymptotic(0.5, z), ref, rtol=1e-12, atol=1e-15)


def test_series_and_asymptotic_agree_at_switchover():
    for nu in (0.0, 1.0, 2.5):
        z = switchover_point(nu)
        assert bessel_j_series(nu, z) == pytest.approx(bessel_j_asymptotic(nu, z), abs=1e-10)


def test_log_gamma_frozen():
    assert log_gamma(1e-3) == pytest.approx(6.9071788853838536617, rel=1e-14)
    assert log_gamma(171.5) == pytest.approx(709.14316303092824227, rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j(-0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_j(1.0, -1.0)
    with pytest.raises(DomainError):
        normalized_bessel(1.0, np.nan)
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_normalized_at_zero_and_large_order():
    assert normalized_bessel(3.0, 0.0) == 1.0
    # large order: no overflow, and close to the series
    assert normalized_bessel(80.0, 5.0) == pytest.approx(normalized_bessel_series(80.0, 5.0), rel=1e-12)


@given(nu=st.floats(-0.49, 20), z=st.floats(-200, 200))
@settings(max_examples=300, deadline=None)
def test_normalized_bessel_bounded_and_even(nu, z):
    v = normalized_bessel(nu, z)
    assert abs(v) <= 1 + 1e-12
    assert v == normalized_bessel(nu, -z)


@given(nu=st.floats(0.0, 10), z=st.floats(1e-3, 50))
@settings(max_examples=200, deadline=None)
def test_recurrence(nu, z):
    # J_{nu-1} + J_{nu+1} = 2 nu / z J_nu, checked for nu >= 1 via shift
    n = nu + 1
    lhs = bessel_j(n - 1, z) + bessel_j(n + 1, z)
    rhs = 2 * n / z * bessel_j(n, z)
    scale = max(1.0, abs(rhs), abs(lhs))
    assert math.isclose(lhs, rhs, rel_tol=0, abs_tol=1e-11 * scale)
