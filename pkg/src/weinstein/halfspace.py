"""Weighted half-space: the measure, tensor grids and discrete integration.

Points are arrays whose last axis has length ``d``; the last coordinate is
the distinguished variable ``x_d >= 0``. Grids are cell-centered boxes
``[-L_1, L_1] x ... x [-L_{d-1}, L_{d-1}] x (0, L_d]``. Along ``x_d`` the
node weight is the exact integral of ``t^(2 alpha + 1)`` over the cell, so a
function that is constant on each cell is integrated exactly.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate as spi

from .special_fn import DomainError, log_gamma

__all__ = [
    "WeinsteinParams",
    "HalfSpaceGrid",
    "GridFunction",
    "RadialProfile",
    "BallSpec",
    "ContractError",
    "TailWarning",
    "measure_density",
    "ball_measure",
    "box_measure",
    "ball_measure_quadrature",
    "node_weights",
    "integrate",
    "radial_integrate",
    "lp_norm",
    "sample",
    "write_grid_function_csv",
    "read_grid_function_csv",
]


class ContractError(ValueError):
    """Inputs that violate a structural precondition (e.g. mismatched grids)."""


class TailWarning(RuntimeWarning):
    """Radial integrand does not appear to have decayed at the cutoff."""


@dataclass(frozen=True)
class WeinsteinParams:
    """The pair ``(alpha, d)``; ``alpha > -1/2`` and ``d >= 2``."""

    alpha: float
    d: int

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or a <= -0.5:
            raise DomainError(f"alpha must be > -1/2, got {self.alpha}")
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"d must be an integer >= 2, got {self.d}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "d", int(self.d))

    @property
    def strong_regime(self) -> bool:
        """``alpha > d/2 - 1``: the hypothesis of the translated-ball bounds."""
        return self.alpha > self.d / 2.0 - 1.0

    @property
    def weight_exponent(self) -> float:
        return 2.0 * self.alpha + 1.0

    @property
    def homogeneity(self) -> float:
        """Scaling exponent of ball measures, ``2 alpha + d + 1``."""
        return 2.0 * self.alpha + self.d + 1.0

    @functools.cached_property
    def density_constant(self) -> float:
        a, d = self.alpha, self.d
        return math.exp(-(0.5 * (d - 1) * math.log(2 * math.pi) + a * math.log(2.0) + log_gamma(a + 1.0)))

    @functools.cached_property
    def radial_constant(self) -> float:
        a, d = self.alpha, self.d
        return math.exp(-((a + 0.5 * (d - 1)) * math.log(2.0) + log_gamma(a + 0.5 * (d + 1))))


@dataclass(frozen=True)
class BallSpec:
    """Closed ball ``B+(center, radius)`` with ``center_d >= 0``."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if not self.radius > 0:
            raise DomainError("ball radius must be > 0")
        if c[-1] < 0:
            raise DomainError("ball center must lie in the closed half-space")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum((x - np.asarray(self.center)) ** 2, axis=-1) <= self.radius ** 2


def _as_points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise ContractError(f"points must have trailing dimension {d}, got shape {x.shape}")
    return x


def measure_density(params: WeinsteinParams, x):
    """Density of ``nu_alpha`` with respect to Lebesgue measure at ``x``."""
    x = _as_points(x, params.d)
    xd = x[..., -1]
    if np.any(xd < 0):
        raise DomainError("measure_density needs x_d >= 0")
    out = params.density_constant * xd ** params.weight_exponent
    return float(out) if np.ndim(out) == 0 else out


def ball_measure(params: WeinsteinParams, eps) -> float:
    """Closed-form ``nu_alpha(B+(0, eps))``."""
    e = np.asarray(eps, dtype=float)
    if np.any(~(e > 0)):
        raise DomainError("eps must be > 0")
    a, d = params.alpha, params.d
    log_c = (a + 0.5 * (d - 1)) * math.log(2.0) + math.log(2 * a + d + 1) + log_gamma(a + 0.5 * (d + 1))
    out = np.exp(params.homogeneity * np.log(e) - log_c)
    return float(out) if out.ndim == 0 else out


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def box_measure(params: WeinsteinParams, x, eps) -> float:
    """``nu_alpha`` of the cylinder ``B_{d-1}(x', eps) x ]max(0, x_d - eps), x_d + eps[``."""
    x = _as_points(x, params.d)
    e = np.asarray(eps, dtype=float)
    if np.any(~(e > 0)):
        raise DomainError("eps must be > 0")
    xd = x[..., -1]
    if np.any(xd < 0):
        raise DomainError("box_measure needs x_d >= 0")
    p = 2.0 * params.alpha + 2.0
    lat = _unit_ball_volume(params.d - 1) * e ** (params.d - 1)
    depth = ((xd + e) ** p - np.maximum(0.0, xd - e) ** p) / p
    out = params.density_constant * lat * depth
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class HalfSpaceGrid:
    """Cell-centered tensor grid on a truncated half-space box.

    Attributes
    ----------
    half_widths : tuple of float
        ``L_i`` for the ``d - 1`` lateral axes; axis ``i`` covers ``[-L_i, L_i]``.
    depth : float
        ``L_d``; the last axis covers ``(0, L_d]``.
    counts : tuple of int
        Number of cells per axis (lateral axes first).
    """

    half_widths: tuple
    depth: float
    counts: tuple

    def __post_init__(self):
        hw = tuple(float(v) for v in self.half_widths)
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != len(hw) + 1:
            raise ContractError("counts must have one entry per axis (d entries)")
        if not hw:
            raise ContractError("need at least one lateral axis")
        if any(not (v > 0) for v in hw) or not (self.depth > 0):
            raise ContractError("all extents must be positive")
        if any(c < 1 for c in counts):
            raise ContractError("counts must be positive")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "depth", float(self.depth))
        object.__setattr__(self, "counts", counts)

    @classmethod
    def uniform(cls, d: int, half_width: float, depth: float, n: int) -> "HalfSpaceGrid":
        """``n`` cells along every axis, the same half-width on lateral axes."""
        return cls((half_width,) * (d - 1), depth, (n,) * d)

    @property
    def d(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacings(self) -> tuple:
        lat = tuple(2.0 * L / n for L, n in zip(self.half_widths, self.counts[:-1]))
        return lat + (self.depth / self.counts[-1],)

    @property
    def origins(self) -> tuple:
        """Lower edge of each axis."""
        return tuple(-L for L in self.half_widths) + (0.0,)

    @functools.cached_property
    def axes(self) -> tuple:
        return tuple(o + (np.arange(n) + 0.5) * h for o, n, h in zip(self.origins, self.counts, self.spacings))

    @functools.cached_property
    def depth_edges(self) -> np.ndarray:
        return np.arange(self.counts[-1] + 1) * self.spacings[-1]

    def points(self) -> np.ndarray:
        """All nodes, shape ``counts + (d,)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = x[..., -1] >= 0
        ok &= x[..., -1] <= self.depth
        for i, L in enumerate(self.half_widths):
            ok &= np.abs(x[..., i]) <= L
        return ok

    def nearest_index(self, x) -> tuple:
        """Index of the node closest to point ``x``."""
        x = np.asarray(x, dtype=float)
        idx = []
        for xi, o, h, n in zip(x, self.origins, self.spacings, self.counts):
            idx.append(int(np.clip(np.floor((xi - o) / h), 0, n - 1)))
        return tuple(idx)

    def refine(self, factor: int = 2) -> "HalfSpaceGrid":
        return HalfSpaceGrid(self.half_widths, self.depth, tuple(c * factor for c in self.counts))

    def to_dict(self) -> dict:
        return {"half_widths": list(self.half_widths), "depth": self.depth, "counts": list(self.counts)}

    @classmethod
    def from_mapping(cls, m: Mapping) -> "HalfSpaceGrid":
        return cls(tuple(m["half_widths"]), m["depth"], tuple(m["counts"]))


@functools.lru_cache(maxsize=64)
def _depth_weights(alpha: float, d: int, grid: HalfSpaceGrid) -> np.ndarray:
    p = 2.0 * alpha + 2.0
    e = grid.depth_edges
    w = (e[1:] ** p - e[:-1] ** p) / p
    w = w * WeinsteinParams(alpha, d).density_constant * float(np.prod(grid.spacings[:-1]))
    w.setflags(write=False)
    return w


def node_weights(params: WeinsteinParams, grid: HalfSpaceGrid) -> np.ndarray:
    """Quadrature weights, broadcastable to ``grid.shape`` (singleton lateral axes)."""
    if grid.d != params.d:
        raise ContractError(f"grid is {grid.d}-dimensional, params have d={params.d}")
    w = _depth_weights(params.alpha, params.d, grid)
    return w.reshape((1,) * (grid.d - 1) + (-1,))


@dataclass
class GridFunction:
    """Values of a scalar field at the nodes of a :class:`HalfSpaceGrid`."""

    grid: HalfSpaceGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.shape != self.grid.shape:
            raise ContractError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractError("grid function values must be finite")
        self.values = v

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.values - other.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))


def _same_grid(a: HalfSpaceGrid, b: HalfSpaceGrid) -> None:
    if a != b:
        raise ContractError("grid functions live on different grids")


def _check_on(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction) -> None:
    _same_grid(grid, f.grid)
    if grid.d != params.d:
        raise ContractError(f"grid is {grid.d}-dimensional, params have d={params.d}")


def sample(grid: HalfSpaceGrid, func: Callable, params: WeinsteinParams | None = None,
           supersample: int = 1) -> GridFunction:
    """Sample ``func`` (vectorized over points) at the grid nodes.

    With ``supersample = s > 1`` each node gets the ``nu_alpha``-weighted
    average of ``func`` over ``s**d`` sub-cells of its cell. This is the
    right discretization for indicators, whose point samples carry an O(h)
    bias from the skew of the weight inside a cell.
    """
    if supersample <= 1:
        return GridFunction(grid, func(grid.points()))
    if params is None:
        raise ContractError("weighted supersampling needs params")
    s = int(supersample)
    fine = HalfSpaceGrid(grid.half_widths, grid.depth, tuple(c * s for c in grid.counts))
    # one lateral slab at a time keeps memory at O(size * s**(d-1))
    w_fine = _depth_weights(params.alpha, params.d, fine)
    w_coarse = _depth_weights(params.alpha, params.d, grid)
    n_lat = grid.counts[:-1]
    out = np.empty(grid.shape)
    fine_axes = fine.axes
    for i0 in range(n_lat[0]):
        ax0 = fine_axes[0][i0 * s:(i0 + 1) * s]
        mesh = np.meshgrid(ax0, *fine_axes[1:], indexing="ij")
        vals = np.asarray(func(np.stack(mesh, axis=-1)), dtype=float) * w_fine
        # block-sum s x ... x s
        shp = [1, s]
        for c in grid.counts[1:]:
            shp += [c, s]
        vals = vals.reshape(shp).sum(axis=tuple(range(1, 2 * grid.d, 2)))[0]
        out[i0] = vals / w_coarse
    return GridFunction(grid, out)


def integrate(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction):
    """Weighted midpoint sum of ``f`` against ``nu_alpha``."""
    _check_on(params, grid, f)
    total = np.sum(f.values * node_weights(params, grid))
    return complex(total) if np.iscomplexobj(total) else float(total)


def lp_norm(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, p: float,
            mask: np.ndarray | None = None) -> float:
    """Discrete ``||f||_{p, alpha}``; ``p = inf`` gives the max over nodes.

    ``mask`` restricts the norm to a subset of nodes.
    """
    _check_on(params, grid, f)
    p = float(p)
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if mask is not None:
        a = np.where(mask, a, 0.0)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    s = float(np.sum(a ** p * node_weights(params, grid)))
    return s ** (1.0 / p)


def ball_measure_quadrature(params: WeinsteinParams, grid: HalfSpaceGrid, center, eps: float) -> float:
    """``nu_alpha(B+(center, eps))`` by column quadrature on ``grid``.

    Lateral directions use the grid's midpoint nodes; along ``x_d`` each
    column's chord through the ball is integrated exactly against the
    density. Needed for balls not centered at the origin, where no closed
    form exists.
    """
    c = _as_points(center, params.d)
    if not eps > 0:
        raise DomainError("eps must be > 0")
    lat = np.meshgrid(*grid.axes[:-1], indexing="ij")
    r2 = sum((g - ci) ** 2 for g, ci in zip(lat, c[:-1]))
    half = np.sqrt(np.clip(eps * eps - r2, 0.0, None))
    lo = np.clip(c[-1] - half, 0.0, grid.depth)
    hi = np.clip(c[-1] + half, 0.0, grid.depth)
    p = 2.0 * params.alpha + 2.0
    col = np.where(half > 0, (hi ** p - lo ** p) / p, 0.0)
    return float(np.sum(col) * np.prod(grid.spacings[:-1]) * params.density_constant)


@dataclass
class RadialProfile:
    """Profile ``F`` of a radial function ``f(x) = F(||x||)``.

    ``radii``/``values`` are samples; ``func``, when given, is the exact
    profile and enables adaptive quadrature. ``breakpoints`` lists radii
    where ``F`` is not smooth (e.g. the edge of an indicator).
    """

    radii: np.ndarray
    values: np.ndarray
    func: Callable | None = None
    breakpoints: tuple = ()

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape:
            raise ContractError("radii and values must be 1-D of equal length")
        if r.size < 2 or r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise ContractError("radii must start > 0 and increase strictly")
        if not np.all(np.isfinite(v)):
            raise ContractError("profile values must be finite")
        self.radii, self.values = r, v

    @classmethod
    def from_callable(cls, func: Callable, r_max: float, n: int = 2049,
                      breakpoints: Sequence[float] = ()) -> "RadialProfile":
        r = np.linspace(r_max / n, r_max, n)
        return cls(r, np.asarray(func(r), dtype=float), func, tuple(breakpoints))

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])


def _radial_quad(g: Callable, prof: RadialProfile, tol: float) -> tuple[float, float]:
    """Integral of ``g`` over ``[0, r_max]`` and over its last tenth."""
    rmax = prof.r_max
    if prof.func is None:
        r = np.concatenate([[0.0], prof.radii])
        y = np.concatenate([[g(0.0, None)], g(prof.radii, prof.values)])
        total = spi.simpson(y, x=r)
        cut = r >= 0.9 * rmax
        tail = spi.simpson(y[cut], x=r[cut]) if cut.sum() >= 3 else 0.0
        return float(total), float(tail)
    pts = sorted({0.0, *[b for b in prof.breakpoints if 0 < b < rmax], 0.9 * rmax, rmax})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = spi.quad(lambda r: g(r, None), a, b, epsabs=tol * 1e-3, epsrel=tol, limit=400)
        total += val
    tail, _ = spi.quad(lambda r: g(r, None), 0.9 * rmax, rmax, epsabs=tol * 1e-3, epsrel=tol, limit=400)
    return total, tail


def _profile_value(prof: RadialProfile, r, sampled):
    if sampled is not None:
        return sampled
    if prof.func is not None:
        return prof.func(r)
    return np.interp(r, prof.radii, prof.values, left=prof.values[0])


def radial_integrate(params: WeinsteinParams, profile: RadialProfile, tol: float = 1e-12) -> float:
    """``int f d nu_alpha`` for radial ``f`` via the one-dimensional reduction.

    Emits :class:`TailWarning` when the last tenth of ``[0, r_max]`` carries
    more than ``sqrt(tol)`` of the total, i.e. the profile has not decayed.
    """
    k = 2.0 * params.alpha + params.d

    def g(r, sampled):
        return _profile_value(profile, r, sampled) * np.power(r, k)

    total, tail = _radial_quad(g, profile, tol)
    if abs(tail) > math.sqrt(tol) * max(abs(total), 1e-300):
        warnings.warn(f"radial integrand still significant at r_max={profile.r_max}", TailWarning, stacklevel=2)
    return params.radial_constant * total


def write_grid_function_csv(f: GridFunction, path, columns: Mapping[str, np.ndarray] | None = None) -> None:
    """Write node coordinates and values (plus optional extra columns) as CSV."""
    path = Path(path)
    pts = f.grid.points().reshape(-1, f.grid.d)
    extra = dict(columns or {})
    cplx = np.iscomplexobj(f.values)
    header = [f"x{i + 1}" for i in range(f.grid.d)]
    header += ["value_re", "value_im"] if cplx else ["value"]
    header += list(extra)
    cols = [pts[:, i] for i in range(f.grid.d)]
    v = f.values.reshape(-1)
    cols += [v.real, v.imag] if cplx else [v]
    cols += [np.asarray(c).reshape(-1) for c in extra.values()]
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(*cols):
                w.writerow([repr(float(x)) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_grid_function_csv(path) -> GridFunction:
    """Read a CSV written by :func:`write_grid_function_csv`, rebuilding the grid."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    d = sum(1 for h in header if h.startswith("x") and h[1:].isdigit())
    pts = data[:, :d]
    axes = [np.unique(pts[:, i]) for i in range(d)]
    counts = tuple(len(a) for a in axes)
    spac = [(a[-1] - a[0]) / (len(a) - 1) if len(a) > 1 else 2 * abs(a[0]) for a in axes]
    half_widths = tuple(-(a[0] - h / 2) for a, h in zip(axes[:-1], spac[:-1]))
    depth = axes[-1][-1] + spac[-1] / 2
    grid = HalfSpaceGrid(half_widths, depth, counts)
    if "value_re" in header:
        v = data[:, header.index("value_re")] + 1j * data[:, header.index("value_im")]
    else:
        v = data[:, header.index("value")]
    return GridFunction(grid, v.reshape(counts))
