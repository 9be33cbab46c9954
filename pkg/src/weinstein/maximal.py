"""Uncentered maximal operator, ball-average majorant and Vitali selection.

The maximal function is discretized as a maximum over a finite radius
schedule and, per radius, over a capped set of grid centers ``z`` inside
``B+(x, eps)``:

    M f(x) = max_{eps, z} |sum_y f(y) K_eps(z, y) w(y)| / sum_y K_eps(z, y) w(y),

where ``K_eps(z, y)`` is the translated ball indicator. Dividing by the
discrete mass of the kernel instead of ``nu(B+(0, eps))`` keeps every average
a convex combination, so ``M f <= ||f||_inf`` holds exactly on the grid; the
two normalizers agree up to quadrature error. Every value is a lower bound
for the continuum supremum.

The kernel depends on ``(z_d, y_d)`` and the lateral difference only, so
the field version tabulates it once per output depth and applies it as an
FFT convolution across the lateral axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as spfft
from scipy import signal

from .halfspace import (
    BallSpec,
    ContractError,
    GridFunction,
    HalfSpaceGrid,
    WeinsteinParams,
    _check_on,
    box_measure,
    lp_norm,
    measure_density,
    node_weights,
)
from .special_fn import DomainError
from .translation import ball_kernel

__all__ = [
    "RadiusSchedule",
    "BallFamily",
    "center_offsets",
    "edge_mask",
    "maximal_uncentered",
    "maximal_uncentered_field",
    "maximal_ball_average",
    "maximal_ball_average_field",
    "distribution_function",
    "weak_type_constant",
    "lp_operator_ratio",
    "vitali_select",
    "vitali_uncovered",
    "vitali_measure_ratio",
]


@dataclass(frozen=True)
class RadiusSchedule:
    """Radii (stored decreasing) and the cap on centers sampled per ball."""

    radii: tuple
    z_samples_per_ball: int = 64

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float).ravel()
        if r.size == 0:
            raise DomainError("radius schedule is empty")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise DomainError("radii must be finite and > 0")
        if self.z_samples_per_ball < 1:
            raise DomainError("z_samples_per_ball must be >= 1")
        object.__setattr__(self, "radii", tuple(float(v) for v in np.sort(r)[::-1]))

    @classmethod
    def log_spaced(cls, r_min: float, r_max: float, n: int = 8, z_samples_per_ball: int = 64) -> "RadiusSchedule":
        return cls(tuple(np.geomspace(r_min, r_max, n)), z_samples_per_ball)

    @classmethod
    def for_grid(cls, grid: HalfSpaceGrid, n: int = 8, z_samples_per_ball: int = 64) -> "RadiusSchedule":
        """From twice the coarsest spacing up to half the smallest box extent."""
        r_min = 2.0 * max(grid.spacings)
        r_max = 0.5 * min(min(grid.half_widths), grid.depth)
        if r_max <= r_min:
            raise DomainError("grid too coarse for a radius schedule")
        return cls.log_spaced(r_min, r_max, n, z_samples_per_ball)

    @property
    def decades(self) -> float:
        return math.log10(self.radii[0] / self.radii[-1])


@dataclass(frozen=True)
class BallFamily:
    """Finite family of balls."""

    balls: tuple

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))

    def __len__(self) -> int:
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.balls], dtype=float)

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls], dtype=float)


def center_offsets(grid: HalfSpaceGrid, eps: float, cap: int) -> np.ndarray:
    """Integer node offsets ``k`` with ``|k * h| < eps``, at most ``cap`` of them.

    When the ball holds more nodes than ``cap``, farthest-point sampling
    picks them, starting from the zero offset; samples for a smaller cap are
    a prefix of those for a larger one.
    """
    h = np.asarray(grid.spacings)
    m = [int(math.ceil(eps / hi)) for hi in h]
    mesh = np.meshgrid(*[np.arange(-mi, mi + 1) for mi in m], indexing="ij")
    k = np.stack([v.ravel() for v in mesh], axis=-1)
    phys = k * h
    k = k[np.sum(phys * phys, axis=1) < eps * eps]
    if len(k) <= cap:
        # zero offset first, then by distance (stable, deterministic)
        order = np.lexsort(tuple(k.T[::-1]) + (np.sum((k * h) ** 2, axis=1),))
        return k[order]
    phys = k * h
    chosen = [int(np.flatnonzero(~k.any(axis=1))[0])]
    dist = np.sum((phys - phys[chosen[0]]) ** 2, axis=1)
    while len(chosen) < cap:
        j = int(np.argmax(dist))
        chosen.append(j)
        dist = np.minimum(dist, np.sum((phys - phys[j]) ** 2, axis=1))
    return k[chosen]


def edge_mask(grid: HalfSpaceGrid, sched: RadiusSchedule) -> np.ndarray:
    """Nodes farther than the largest radius from the lateral and top box faces."""
    r = sched.radii[0]
    mask = np.ones(grid.shape, dtype=bool)
    for i, (ax, L) in enumerate(zip(grid.axes[:-1], grid.half_widths)):
        keep = np.abs(ax) <= L - r
        shape = [1] * grid.d
        shape[i] = -1
        mask &= keep.reshape(shape)
    mask &= (grid.axes[-1] <= grid.depth - r).reshape((1,) * (grid.d - 1) + (-1,))
    return mask


def _shift_max(field: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """``out[x] = max_k field[x + k]`` over offsets ``k`` whose target node exists."""
    out = np.full(field.shape, -np.inf)
    n = field.shape
    for k in offsets:
        src, dst = [], []
        for ki, ni in zip(k, n):
            if ki >= 0:
                src.append(slice(ki, ni))
                dst.append(slice(0, ni - ki))
            else:
                src.append(slice(0, ni + ki))
                dst.append(slice(-ki, ni))
        src, dst = tuple(src), tuple(dst)
        np.maximum(out[dst], field[src], out=out[dst])
    return out


def _translated_averages(params: WeinsteinParams, grid: HalfSpaceGrid, values: np.ndarray, eps: float):
    """Pairings ``sum_y v(y) K_eps(z, y) w(y)`` at every node ``z``, per channel.

    ``values`` has shape ``(channels,) + grid.shape``. Returns an array of the
    same shape.
    """
    d = grid.d
    h = grid.spacings
    zd = grid.axes[-1]
    nd = grid.counts[-1]
    nlat = grid.counts[:-1]
    m = [int(math.ceil(eps / hi)) for hi in h[:-1]]
    lat_offsets = np.meshgrid(*[np.arange(-mi, mi + 1) * hi for mi, hi in zip(m, h[:-1])], indexing="ij")
    dist2 = sum(o * o for o in lat_offsets)
    s_lat = eps * eps - dist2  # lateral part of s, shape (2m+1,)*(d-1)
    lat_axes = tuple(range(1, d))
    fft_shape = tuple(spfft.next_fast_len(n + 2 * mi, real=True) for n, mi in zip(nlat, m))
    G = values * node_weights(params, grid)
    G_hat = spfft.rfftn(G, s=fft_shape, axes=lat_axes)  # (c, freq..., nd)
    out = np.empty(values.shape)
    crop = (slice(None),) + tuple(slice(mi, mi + n) for mi, n in zip(m, nlat))
    for a in range(nd):
        b0 = int(np.searchsorted(zd, zd[a] - eps, side="right"))
        b1 = int(np.searchsorted(zd, zd[a] + eps, side="left"))
        yd = zd[b0:b1]
        K = ball_kernel(params, s_lat[None, ...], zd[a], yd.reshape((-1,) + (1,) * (d - 1)))
        K_hat = spfft.rfftn(K, s=fft_shape, axes=tuple(range(1, d)))  # (nb, freq...)
        acc = np.einsum("b...,c...b->c...", K_hat, G_hat[..., b0:b1], optimize=True)
        conv = spfft.irfftn(acc, s=fft_shape, axes=lat_axes)
        out[..., a] = conv[crop]
    return out


def _stack(fs) -> tuple[list, bool]:
    single = isinstance(fs, GridFunction)
    return ([fs] if single else list(fs)), single


def maximal_uncentered_field(params: WeinsteinParams, grid: HalfSpaceGrid, f, sched: RadiusSchedule):
    """``M f`` at every node; ``f`` may be one GridFunction or a list sharing the kernel work."""
    fs, single = _stack(f)
    if not fs:
        raise ContractError("no functions given")
    for g in fs:
        _check_on(params, grid, g)
        if np.iscomplexobj(g.values):
            raise ContractError("maximal operator expects real-valued functions")
    vals = np.stack([g.values for g in fs] + [np.ones(grid.shape)])
    # each average is a convex combination of values of f; the clip only
    # removes FFT roundoff (a few ulps) above that bound
    sup = np.abs(vals[:-1]).reshape(len(fs), -1).max(axis=1)
    best = np.zeros((len(fs),) + grid.shape)
    for eps in sched.radii:
        pair = _translated_averages(params, grid, vals, eps)
        ratio = np.abs(pair[:-1]) / pair[-1]
        offs = center_offsets(grid, eps, sched.z_samples_per_ball)
        for c in range(len(fs)):
            best[c] = np.maximum(best[c], np.minimum(_shift_max(ratio[c], offs), sup[c]))
    out = [GridFunction(grid, b) for b in best]
    return out[0] if single else out


def _node_index(grid: HalfSpaceGrid, x) -> tuple:
    x = np.asarray(x, dtype=float)
    if x.shape != (grid.d,) or not grid.contains(x):
        raise DomainError(f"point {x} outside the grid")
    idx = grid.nearest_index(x)
    node = np.array([ax[i] for ax, i in zip(grid.axes, idx)])
    if not np.allclose(node, x, rtol=0, atol=1e-9 * max(grid.spacings)):
        raise DomainError(f"point {x} is not a grid node")
    return idx


def maximal_uncentered(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, x,
                       sched: RadiusSchedule) -> float:
    """``M f(x)`` at a single node by direct summation over the grid.

    Same discretization as :func:`maximal_uncentered_field`, evaluated
    without the convolution structure.
    """
    _check_on(params, grid, f)
    idx = np.array(_node_index(grid, x))
    pts = grid.points().reshape(-1, grid.d)
    fw = (f.values * node_weights(params, grid)).ravel()
    w = np.broadcast_to(node_weights(params, grid), grid.shape).ravel()
    h = np.asarray(grid.spacings)
    best = 0.0
    for eps in sched.radii:
        for k in center_offsets(grid, eps, sched.z_samples_per_ball):
            j = idx + k
            if np.any(j < 0) or np.any(j >= grid.counts):
                continue
            z = np.array([ax[i] for ax, i in zip(grid.axes, j)])
            near = np.all(np.abs(pts - z) < eps + h, axis=1)
            y = pts[near]
            s = eps * eps - np.sum((y[:, :-1] - z[:-1]) ** 2, axis=1)
            K = ball_kernel(params, s, z[-1], y[:, -1])
            best = max(best, abs(np.sum(K * fw[near])) / np.sum(K * w[near]))
    return float(min(best, np.abs(f.values).max()))


def _ball_stencil(grid: HalfSpaceGrid, eps: float) -> np.ndarray:
    h = np.asarray(grid.spacings)
    m = [int(math.ceil(eps / hi)) for hi in h]
    mesh = np.meshgrid(*[np.arange(-mi, mi + 1) * hi for mi, hi in zip(m, h)], indexing="ij")
    return (sum(v * v for v in mesh) < eps * eps).astype(float)


def maximal_ball_average_field(params: WeinsteinParams, grid: HalfSpaceGrid, f, sched: RadiusSchedule):
    """``M~ f`` at every node: largest plain ``nu``-average of ``|f|`` over the sampled balls."""
    fs, single = _stack(f)
    for g in fs:
        _check_on(params, grid, g)
    w = np.broadcast_to(node_weights(params, grid), grid.shape)
    best = np.zeros((len(fs),) + grid.shape)
    for eps in sched.radii:
        st = _ball_stencil(grid, eps)
        mass = signal.fftconvolve(w, st, mode="same")
        offs = center_offsets(grid, eps, sched.z_samples_per_ball)
        for c, g in enumerate(fs):
            num = signal.fftconvolve(np.abs(g.values) * w, st, mode="same")
            # fft roundoff can leave tiny negatives where |f| w vanishes
            avg = np.clip(num, 0.0, None) / mass
            best[c] = np.maximum(best[c], _shift_max(avg, offs))
    out = [GridFunction(grid, b) for b in best]
    return out[0] if single else out


def maximal_ball_average(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, x,
                         sched: RadiusSchedule) -> float:
    """``M~ f(x)`` at a single node by direct summation."""
    _check_on(params, grid, f)
    idx = np.array(_node_index(grid, x))
    pts = grid.points().reshape(-1, grid.d)
    w = np.broadcast_to(node_weights(params, grid), grid.shape).ravel()
    af = np.abs(f.values).ravel()
    best = 0.0
    for eps in sched.radii:
        for k in center_offsets(grid, eps, sched.z_samples_per_ball):
            j = idx + k
            if np.any(j < 0) or np.any(j >= grid.counts):
                continue
            z = np.array([ax[i] for ax, i in zip(grid.axes, j)])
            inside = np.sum((pts - z) ** 2, axis=1) < eps * eps
            best = max(best, np.sum(af[inside] * w[inside]) / np.sum(w[inside]))
    return float(best)


def distribution_function(params: WeinsteinParams, grid: HalfSpaceGrid, g: GridFunction, level: float,
                          mask: np.ndarray | None = None) -> float:
    """Discrete ``nu``-measure of ``{g > level}``, optionally restricted to ``mask``."""
    _check_on(params, grid, g)
    if not level > 0:
        raise DomainError("level must be > 0")
    if np.iscomplexobj(g.values) or np.any(g.values < 0):
        raise DomainError("distribution_function expects a real nonnegative function")
    sel = g.values > level
    if mask is not None:
        sel &= mask
    w = np.broadcast_to(node_weights(params, grid), grid.shape)
    return float(np.sum(w[sel]))


def weak_type_constant(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, levels: Sequence[float],
                       sched: RadiusSchedule, mf: GridFunction | None = None,
                       mask: np.ndarray | None = None) -> float:
    """``max_level level * nu({M f > level}) / ||f||_1``.

    ``mf`` may carry a precomputed ``M f``; ``mask`` restricts the level sets
    (typically :func:`edge_mask`).
    """
    norm = lp_norm(params, grid, f, 1)
    if norm == 0:
        raise DomainError("weak-type constant undefined for ||f||_1 = 0")
    levels = np.asarray(levels, dtype=float)
    if levels.size == 0 or np.any(levels <= 0):
        raise DomainError("levels must be a nonempty positive sequence")
    if mf is None:
        mf = maximal_uncentered_field(params, grid, f, sched)
    return max(lev * distribution_function(params, grid, mf, lev, mask) for lev in levels) / norm


def lp_operator_ratio(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, p: float,
                      sched: RadiusSchedule, mf: GridFunction | None = None,
                      mask: np.ndarray | None = None) -> float:
    """``||M f||_p / ||f||_p``, with ``M f`` measured on ``mask`` only."""
    if not p > 1:
        raise DomainError("p must be > 1")
    norm = lp_norm(params, grid, f, p)
    if norm == 0:
        raise DomainError("ratio undefined for ||f||_p = 0")
    if mf is None:
        mf = maximal_uncentered_field(params, grid, f, sched)
    return lp_norm(params, grid, mf, p, mask) / norm


def vitali_select(family: BallFamily) -> BallFamily:
    """Greedy disjoint subfamily: largest radius first, ties by center, keep if disjoint."""
    balls = sorted(family.balls, key=lambda b: (-b.radius, b.center))
    chosen: list[BallSpec] = []
    for b in balls:
        c = np.asarray(b.center)
        if all(np.linalg.norm(c - np.asarray(s.center)) > b.radius + s.radius for s in chosen):
            chosen.append(b)
    return BallFamily(tuple(chosen))


def vitali_uncovered(family: BallFamily, selected: BallFamily, dilation: float = 5.0) -> list[int]:
    """Indices of input balls not contained in the ``dilation``-fold dilate of any selected ball."""
    C, R = selected.centers, selected.radii
    bad = []
    for i, b in enumerate(family.balls):
        dist = np.linalg.norm(C - np.asarray(b.center), axis=1)
        if not np.any(dist + b.radius <= dilation * R * (1 + 1e-12)):
            bad.append(i)
    return bad


def vitali_measure_ratio(params: WeinsteinParams, family: BallFamily, selected: BallFamily,
                         n_samples: int = 20000, seed: int = 0) -> float:
    """``sum nu(selected) / nu(union of family)``, the union measured by Monte Carlo.

    Each selected ball is measured by the box bound ``nu(C+(x, r))``, an
    upper bound for ``nu(B+(x, r))``. The union is sampled uniformly in its
    bounding box with the ``nu`` density as weight.
    """
    rng = np.random.default_rng(seed)
    C, R = family.centers, family.radii
    lo = C - R[:, None]
    hi = C + R[:, None]
    lo_b, hi_b = lo.min(axis=0), hi.max(axis=0)
    lo_b[-1] = max(lo_b[-1], 0.0)
    pts = rng.uniform(lo_b, hi_b, size=(n_samples, C.shape[1]))
    inside = np.zeros(n_samples, dtype=bool)
    for c, r in zip(C, R):
        inside |= np.sum((pts - c) ** 2, axis=1) < r * r
    vol = float(np.prod(hi_b - lo_b))
    union = vol * float(np.mean(np.where(inside, measure_density(params, pts), 0.0)))
    sel = sum(box_measure(params, np.asarray(b.center), b.radius) for b in selected.balls)
    return sel / union if union > 0 else math.inf
