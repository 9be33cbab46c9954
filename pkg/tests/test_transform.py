"""Weinstein transform: closed forms, inversion, Plancherel and the eigen-relation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weinstein.halfspace import GridFunction, HalfSpaceGrid, RadialProfile, WeinsteinParams, sample
from weinstein.transform import (
    apply_laplace_bessel, ball_indicator_transform, ball_transform_constant, forward_transform,
    inverse_transform, plancherel_check, radial_transform, weinstein_kernel,
)

P = WeinsteinParams(1.0, 2)
# scipy dblquad of cos(1.3 x1) j_1(2.1 x2) over the unit half disk, scipy.special.jv for J_1
INDICATOR_AT = (np.array([1.3, 2.1]), 0.0336002958767971)


def gauss(x):
    return np.exp(-0.5 * np.sum(x * x, axis=-1))


@pytest.fixture(scope="module")
def gauss_grid():
    g = HalfSpaceGrid((6.0,), 6.0, (128, 1024))
    return g, sample(g, gauss)


def test_indicator_transform_frozen():
    lam, ref = INDICATOR_AT
    assert ball_indicator_transform(P, 1.0, lam) == pytest.approx(ref, rel=1e-12)


def test_indicator_transform_at_zero_is_ball_measure():
    from weinstein.halfspace import ball_measure
    for p in (P, WeinsteinParams(0.0, 3), WeinsteinParams(2.5, 2)):
        assert ball_transform_constant(p) == pytest.approx(ball_measure(p, 1.0), rel=1e-13)


def test_radial_transform_matches_closed_form():
    prof = RadialProfile.from_callable(lambda r: np.where(np.asarray(r) < 1, 1.0, 0.0), 1.0)
    mags = np.array([0.0, 0.7, 5.0, 19.0])
    lam = np.column_stack([np.zeros_like(mags), mags])
    np.testing.assert_allclose(radial_transform(P, prof, mags), ball_indicator_transform(P, 1.0, lam),
                               rtol=1e-9, atol=1e-13)


def test_gaussian_is_fixed_point(gauss_grid):
    g, f = gauss_grid
    lam = np.array([[0.0, 0.0], [0.5, 1.0], [1.5, 2.0], [-2.0, 0.3]])
    F = forward_transform(P, g, f, lam)
    np.testing.assert_allclose(F, gauss(lam), atol=2e-5)


def test_separable_matches_direct():
    g = HalfSpaceGrid.uniform(2, 3.0, 3.0, 16)
    f = sample(g, gauss)
    spec = HalfSpaceGrid.uniform(2, 2.0, 2.0, 8)
    a = forward_transform(P, g, f, spec)
    b = forward_transform(P, g, f, spec, method="direct")
    np.testing.assert_allclose(a.values, b.values, atol=1e-13)
    back_a = inverse_transform(P, spec, a, g)
    back_b = inverse_transform(P, spec, a, g, method="direct")
    np.testing.assert_allclose(back_a.values, back_b.values, atol=1e-13)


def test_inversion(gauss_grid):
    g, f = gauss_grid
    spec = HalfSpaceGrid((8.0,), 8.0, (128, 1024))
    F = forward_transform(P, g, f, spec)
    pts = np.array([[0.0, 0.5], [1.0, 1.0], [-0.7, 2.0]])
    back = inverse_transform(P, spec, F, pts)
    np.testing.assert_allclose(back.real, gauss(pts), atol=1e-4)


def test_plancherel(gauss_grid):
    g, f = gauss_grid
    res = plancherel_check(P, HalfSpaceGrid((4.0,), 4.0, (128, 1024)),
                           HalfSpaceGrid((8.0,), 8.0, (128, 1024)),
                           sample(HalfSpaceGrid((4.0,), 4.0, (128, 1024)), gauss))
    assert res.gap < 1e-4


@given(l1=st.floats(-5, 5), l2=st.floats(0, 5), x1=st.floats(-5, 5), x2=st.floats(0, 5))
@settings(max_examples=200, deadline=None)
def test_kernel_bounded_and_conjugate_symmetric(l1, l2, x1, x2):
    k = weinstein_kernel(P, np.array([l1, l2]), np.array([x1, x2]))
    assert abs(k) <= 1 + 1e-12
    assert weinstein_kernel(P, np.array([-l1, l2]), np.array([x1, x2])) == pytest.approx(np.conj(k))


def test_kernel_is_eigenfunction():
    lam = np.array([1.2, 0.8])
    res = []
    for n in (32, 64, 128):
        g = HalfSpaceGrid.uniform(2, 2.0, 2.0, n)
        psi = GridFunction(g, weinstein_kernel(P, lam, g.points()))
        r = apply_laplace_bessel(P, g, psi) + np.sum(lam ** 2) * np.ma.MaskedArray(psi.values, mask=False)
        res.append(float(np.max(np.abs(r))))
    slopes = np.diff(np.log(res)) / np.diff(np.log([1 / 32, 1 / 64, 1 / 128]))
    assert np.all((slopes > 1.8) & (slopes < 2.2))
