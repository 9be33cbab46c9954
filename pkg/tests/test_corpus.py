"""Corpus members: evenness, normalization and determinism."""

import numpy as np
import pytest

from weinstein.corpus import CORPUS_NAMES, bump, make_corpus
from weinstein.halfspace import HalfSpaceGrid, RadialProfile, WeinsteinParams, radial_integrate
from weinstein.transform import forward_transform


@pytest.mark.parametrize("params", [WeinsteinParams(1.0, 2), WeinsteinParams(1.5, 3), WeinsteinParams(-0.4, 2)])
def test_members_even_and_finite(params):
    rng = np.random.default_rng(3)
    x = rng.uniform(-2, 2, (200, params.d))
    xr = x.copy()
    xr[:, -1] *= -1
    for c in make_corpus(params):
        v = c(x)
        assert np.all(np.isfinite(v))
        np.testing.assert_array_equal(v, c(xr))
        if c.nonnegative:
            assert np.all(v >= 0)
        outside = np.linalg.norm(x, axis=1) >= c.support_radius
        assert np.all(v[outside] == 0)


def test_bump_unit_mass():
    p = WeinsteinParams(1.0, 2)
    b = make_corpus(p, names=["bump"])[0]

    def profile(r):
        r = np.asarray(r, dtype=float)
        return b(np.stack([np.zeros_like(r), r], axis=-1))

    prof = RadialProfile.from_callable(profile, 1.25, breakpoints=(1.0,))
    assert radial_integrate(p, prof) == pytest.approx(1.0, rel=1e-10)


def test_closed_form_transforms():
    p = WeinsteinParams(1.0, 2)
    g = HalfSpaceGrid((6.0,), 6.0, (128, 1024))
    lam = np.array([[0.0, 0.0], [0.8, 1.1]])
    for c in make_corpus(p, names=["gaussian", "indicator"]):
        F = forward_transform(p, g, c.on_grid(p, g), lam)
        np.testing.assert_allclose(F.real, c.transform(lam), atol=2e-3)


def test_seeded_mixture():
    p = WeinsteinParams(1.0, 2)
    a = make_corpus(p, seed=7, names=["bump_mix"])[0]
    b = make_corpus(p, seed=7, names=["bump_mix"])[0]
    c = make_corpus(p, seed=8, names=["bump_mix"])[0]
    assert a.parameters == b.parameters
    assert a.parameters != c.parameters


def test_names_and_errors():
    assert [c.name for c in make_corpus(WeinsteinParams(1.0, 2))] == list(CORPUS_NAMES)
    with pytest.raises(ValueError):
        make_corpus(WeinsteinParams(1.0, 2), names=["nope"])
    assert bump(np.array([0.0, 0.0])) == pytest.approx(np.exp(-1.0))
    assert bump(np.array([1.0, 0.0])) == 0.0
