"""Maximal functions, distribution functions and the Vitali selection."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weinstein.corpus import make_corpus
from weinstein.halfspace import BallSpec, GridFunction, HalfSpaceGrid, WeinsteinParams, sample
from weinstein.maximal import (
    BallFamily, RadiusSchedule, center_offsets, distribution_function, edge_mask, lp_operator_ratio,
    maximal_ball_average, maximal_ball_average_field, maximal_uncentered, maximal_uncentered_field,
    vitali_measure_ratio, vitali_select, vitali_uncovered, weak_type_constant,
)
from weinstein.special_fn import DomainError

P = WeinsteinParams(1.0, 2)
G = HalfSpaceGrid.uniform(2, 4.0, 4.0, 32)
SCHED = RadiusSchedule.log_spaced(0.5, 2.0, 4, 16)


@pytest.fixture(scope="module")
def fields():
    corpus = make_corpus(P, names=["indicator", "bump_signed"])
    fs = [c.on_grid(P, G) for c in corpus]
    return fs, maximal_uncentered_field(P, G, fs, SCHED), maximal_ball_average_field(P, G, fs, SCHED)


def test_field_matches_point(fields):
    fs, Ms, Ts = fields
    for idx in [(16, 3), (10, 12), (20, 1), (0, 0), (31, 31)]:
        x = np.array([G.axes[0][idx[0]], G.axes[1][idx[1]]])
        for f, M, T in zip(fs, Ms, Ts):
            assert M.values[idx] == pytest.approx(maximal_uncentered(P, G, f, x, SCHED), rel=1e-10, abs=1e-14)
            assert T.values[idx] == pytest.approx(maximal_ball_average(P, G, f, x, SCHED), rel=1e-10, abs=1e-14)


def test_sup_bound(fields):
    fs, Ms, Ts = fields
    for f, M, T in zip(fs, Ms, Ts):
        sup = np.abs(f.values).max()
        assert M.values.max() <= sup
        assert T.values.max() <= sup * (1 + 1e-12)


def test_constant_is_fixed():
    f = GridFunction(G, np.full(G.shape, 2.5))
    M = maximal_uncentered_field(P, G, f, SCHED)
    np.testing.assert_allclose(M.values, 2.5, rtol=1e-12)


def test_homogeneous_and_sublinear(fields):
    fs, Ms, _ = fields
    f, g = fs
    M2 = maximal_uncentered_field(P, G, f * -3.0, SCHED)
    np.testing.assert_allclose(M2.values, 3.0 * Ms[0].values, rtol=1e-10, atol=1e-14)
    Msum = maximal_uncentered_field(P, G, f + g, SCHED)
    assert np.all(Msum.values <= Ms[0].values + Ms[1].values + 1e-12)


def test_center_offsets_nested_and_inside():
    g = HalfSpaceGrid.uniform(2, 4.0, 4.0, 64)
    big = center_offsets(g, 1.0, 64)
    small = center_offsets(g, 1.0, 16)
    np.testing.assert_array_equal(big[:16], small)
    assert np.all(big[0] == 0)
    assert np.all(np.sum((big * np.asarray(g.spacings)) ** 2, axis=1) < 1.0)
    assert len({tuple(k) for k in big}) == len(big)


def test_edge_mask_excludes_faces():
    m = edge_mask(G, SCHED)
    pts = G.points()
    assert not np.any(m & (np.abs(pts[..., 0]) > 4.0 - 2.0))
    assert not np.any(m & (pts[..., 1] > 4.0 - 2.0))
    assert m[16, 0]


def test_schedule():
    s = RadiusSchedule((0.1, 1.0, 0.5))
    assert s.radii == (1.0, 0.5, 0.1)
    assert s.decades == pytest.approx(1.0)
    with pytest.raises(DomainError):
        RadiusSchedule(())
    with pytest.raises(DomainError):
        RadiusSchedule((1.0, -1.0))
    with pytest.raises(DomainError):
        RadiusSchedule.for_grid(HalfSpaceGrid.uniform(2, 1.0, 1.0, 2))


def test_distribution_and_weak_type(fields):
    fs, Ms, _ = fields
    f, M = fs[0], Ms[0]
    lo, hi = distribution_function(P, G, M, 0.1), distribution_function(P, G, M, 0.5)
    assert lo >= hi > 0
    c = weak_type_constant(P, G, f, [0.1, 0.5], SCHED, mf=M)
    assert 0 < c < np.inf
    assert lp_operator_ratio(P, G, f, 2.0, SCHED, mf=M) >= 1.0 - 1e-12
    with pytest.raises(DomainError):
        distribution_function(P, G, M, 0.0)
    with pytest.raises(DomainError):
        distribution_function(P, G, fs[1], 0.1)
    with pytest.raises(DomainError):
        weak_type_constant(P, G, GridFunction(G, np.zeros(G.shape)), [0.1], SCHED)


balls = st.lists(
    st.tuples(st.floats(-5, 5), st.floats(0, 5), st.floats(0.05, 2)), min_size=1, max_size=60)


@given(balls)
@settings(max_examples=150, deadline=None)
def test_vitali_properties(spec):
    fam = BallFamily(tuple(BallSpec(np.array([a, b]), r) for a, b, r in spec))
    sel = vitali_select(fam)
    C, R = sel.centers, sel.radii
    for i in range(len(sel)):
        for j in range(i):
            assert np.linalg.norm(C[i] - C[j]) > R[i] + R[j]
    assert vitali_uncovered(fam, sel, 5.0) == []
    # greedy by radius: the largest ball is always chosen
    assert R.max() == max(r for _, _, r in spec)


def test_vitali_measure_ratio_single_ball():
    fam = BallFamily((BallSpec(np.array([0.0, 1.0]), 0.5),))
    ratio = vitali_measure_ratio(P, fam, vitali_select(fam), n_samples=200_000, seed=1)
    # box over ball for a single ball: finite and above 1
    assert 1.0 < ratio < 2.5
