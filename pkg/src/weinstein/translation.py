"""Generalized translation, convolution and translated ball indicators.

The translation of ``f`` (even in the last variable) is

    tau_x f(y) = int f(x' + y', rho) W(x_d, y_d, rho) rho^(2 alpha + 1) d rho

with ``rho`` running over ``]|x_d - y_d|, x_d + y_d[``. The kernel has
integrable singularities at both ends. Substituting
``rho^2 = x_d^2 + y_d^2 - 2 x_d y_d cos(theta)`` turns the measure into
``c_alpha sin(theta)^(2 alpha) d theta`` on ``[0, pi]``; with
``t = cos(theta)`` this is the Gauss-Jacobi weight ``(1 - t^2)^(alpha - 1/2)``,
so translation integrals become plain Gauss-Jacobi sums.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as spi
from scipy import ndimage
from scipy import special as sp

from .halfspace import (
    ContractError,
    GridFunction,
    HalfSpaceGrid,
    WeinsteinParams,
    _check_on,
    node_weights,
)
from .special_fn import DomainError, log_gamma

__all__ = [
    "TranslationQuadrature",
    "translation_constant",
    "translation_weight",
    "translate_point",
    "translate_point_rho",
    "normalization_residual",
    "ball_translate",
    "ball_kernel",
    "translate_grid",
    "convolve",
    "GridInterpolator",
]


@dataclass(frozen=True)
class TranslationQuadrature:
    """Quadrature settings for translation integrals.

    ``theta_nodes`` is the Gauss-Jacobi node count (doubled adaptively by
    :func:`translate_point` until successive sums agree to ``tolerance``).
    ``interp_order`` is the spline order used to evaluate grid functions off
    the nodes: 1 is multilinear (positivity preserving), 3 is a cubic spline.
    """

    theta_nodes: int = 32
    tolerance: float = 1e-10
    interp_order: int = 1

    def __post_init__(self):
        if self.theta_nodes < 8:
            raise ValueError("theta_nodes must be >= 8")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.interp_order not in (0, 1, 2, 3, 4, 5):
            raise ValueError("interp_order must be a spline order in 0..5")


def translation_constant(alpha: float) -> float:
    """``Gamma(alpha + 1) / (sqrt(pi) Gamma(alpha + 1/2))``."""
    return math.exp(log_gamma(alpha + 1.0) - log_gamma(alpha + 0.5) - 0.5 * math.log(math.pi))


@functools.lru_cache(maxsize=128)
def _jacobi_rule(n: int, alpha: float):
    t, w = sp.roots_jacobi(n, alpha - 0.5, alpha - 0.5)
    w = w * translation_constant(alpha)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _rho(xd, yd, t):
    return np.sqrt(np.clip(xd * xd + yd * yd - 2.0 * xd * yd * t, 0.0, None))


def translation_weight(params: WeinsteinParams, x_d, y_d, rho):
    """The translation kernel ``W_alpha(x_d, y_d, rho)``.

    Zero outside the open interval ``]|x_d - y_d|, x_d + y_d[``. The value
    blows up at the interval ends for ``alpha < 1/2``; callers integrate it
    with endpoint-aware rules and never evaluate it exactly at an end.
    """
    x_d, y_d, rho = (np.asarray(v, dtype=float) for v in (x_d, y_d, rho))
    if np.any(x_d <= 0) or np.any(y_d <= 0):
        raise DomainError("translation_weight needs x_d > 0 and y_d > 0")
    a = params.alpha
    lo, hi = np.abs(x_d - y_d), x_d + y_d
    inside = (rho > lo) & (rho < hi)
    r = np.where(inside, rho, 0.5 * (lo + hi))
    log_c = log_gamma(a + 1.0) - (2 * a - 1) * math.log(2.0) - 0.5 * math.log(math.pi) - log_gamma(a + 0.5)
    logw = (log_c + (a - 0.5) * (np.log(hi * hi - r * r) + np.log(r * r - lo * lo))
            - 2 * a * np.log(x_d * y_d * r))
    out = np.where(inside, np.exp(logw), 0.0)
    return float(out) if out.ndim == 0 else out


def translate_point(params: WeinsteinParams, f: Callable, x, y, quad: TranslationQuadrature | None = None):
    """``tau_x f (y)`` for a callable ``f`` (vectorized over points, even in ``x_d``).

    Gauss-Jacobi sums in ``cos(theta)``; the node count doubles until two
    successive sums agree to ``quad.tolerance``. On the boundary ``x_d = 0``
    or ``y_d = 0`` the kernel degenerates to a point mass and the result is
    ``f(x' + y', max(x_d, y_d))``.
    """
    quad = quad or TranslationQuadrature()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be single points of equal dimension")
    lat = x[:-1] + y[:-1]
    xd, yd = x[-1], y[-1]
    if xd < 0 or yd < 0:
        raise DomainError("points must lie in the closed half-space")
    if xd == 0 or yd == 0:
        return f(np.append(lat, max(xd, yd)))

    def rule(n):
        t, w = _jacobi_rule(n, params.alpha)
        pts = np.empty((n, x.size))
        pts[:, :-1] = lat
        pts[:, -1] = _rho(xd, yd, t)
        return np.sum(w * f(pts))

    n = quad.theta_nodes
    prev = rule(n)
    while n < 4096:
        n *= 2
        cur = rule(n)
        if abs(cur - prev) <= quad.tolerance * max(1.0, abs(cur)):
            return cur
        prev = cur
    return cur


def translate_point_rho(params: WeinsteinParams, f: Callable, x, y, tol: float = 1e-12):
    """``tau_x f (y)`` by direct quadrature in ``rho``.

    The endpoint singularities ``(rho - lo)^(alpha - 1/2) (hi - rho)^(alpha - 1/2)``
    of ``W rho^(2 alpha + 1)`` are handed to QUADPACK's algebraic-weight
    rule; the smooth cofactor is written out explicitly (QUADPACK samples
    the interval ends). Independent of the angular substitution, so it
    serves as a cross-check of it.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xd, yd = x[-1], y[-1]
    lo, hi = abs(xd - yd), xd + yd
    a = params.alpha
    lat = x[:-1] + y[:-1]
    log_k = (log_gamma(a + 1.0) - (2 * a - 1) * math.log(2.0) - 0.5 * math.log(math.pi)
             - log_gamma(a + 0.5) - 2 * a * math.log(xd * yd))

    def smooth(rho):
        return (math.exp(log_k) * ((hi + rho) * (rho + lo)) ** (a - 0.5) * rho
                * f(np.append(lat, rho)))

    val, _ = spi.quad(smooth, lo, hi, weight="alg", wvar=(a - 0.5, a - 0.5), epsabs=tol, epsrel=tol, limit=200)
    return val


def normalization_residual(params: WeinsteinParams, x_d: float, y_d: float, method: str = "theta",
                           quad: TranslationQuadrature | None = None) -> float:
    """``int W(x_d, y_d, rho) rho^(2 alpha + 1) d rho - 1`` by either route."""

    def one(p):
        return np.ones(p.shape[:-1])

    x = np.array([0.0, x_d])
    y = np.array([0.0, y_d])
    if method == "theta":
        return float(translate_point(params, one, x, y, quad)) - 1.0
    if method == "rho":
        return float(translate_point_rho(params, one, x, y)) - 1.0
    raise ValueError(f"unknown method {method!r}")


def ball_translate(params: WeinsteinParams, x, eps: float, y, method: str = "beta"):
    """Translated ball indicator ``tau_x(chi_{B+(0, eps)})(-y', y_d)``.

    With ``s = eps^2 - |x' - y'|^2`` the integrand is the indicator of
    ``rho^2 <= s``. The value is 0 when ``s <= (x_d - y_d)^2``, 1 when
    ``s >= (x_d + y_d)^2``, and otherwise the angular measure of
    ``[0, theta*]``, a regularized incomplete beta function
    ``I_u(alpha + 1/2, alpha + 1/2)`` with ``u = (s - (x_d - y_d)^2) / (4 x_d y_d)``.
    ``method="quad"`` integrates ``c_alpha sin(theta)^(2 alpha)`` up to
    ``theta*`` adaptively instead. Broadcasts over leading axes of ``x``, ``y``.
    """
    if not eps > 0:
        raise DomainError("eps must be > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xd, yd = x[..., -1], y[..., -1]
    if np.any(xd < 0) or np.any(yd < 0):
        raise DomainError("points must lie in the closed half-space")
    s = eps * eps - np.sum((x[..., :-1] - y[..., :-1]) ** 2, axis=-1)
    out = ball_kernel(params, s, xd, yd, method)
    return float(out) if out.ndim == 0 else out


def ball_kernel(params: WeinsteinParams, s, x_d, y_d, method: str = "beta") -> np.ndarray:
    """Translated ball indicator as a function of ``s = eps^2 - |x' - y'|^2``, ``x_d`` and ``y_d``.

    Broadcasts its arguments; :func:`ball_translate` and the maximal operator
    both go through here.
    """
    s, xd, yd = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, x_d, y_d)))
    lo = (xd - yd) ** 2
    span = 4.0 * xd * yd
    # s > lo keeps the ball open when span = 0 (x_d or y_d on the boundary)
    out = np.where((s >= lo + span) & (s > lo), 1.0, 0.0)
    mid = (s > lo) & (s < lo + span)
    if np.any(mid):
        u = (s[mid] - lo[mid]) / span[mid]
        b = params.alpha + 0.5
        if method == "beta":
            vals = sp.betainc(b, b, u)
        elif method == "quad":
            c = translation_constant(params.alpha)
            th = np.arccos(1.0 - 2.0 * u)
            p = 2 * params.alpha
            vals = c * np.array([spi.quad(lambda t: np.sin(t) ** p, 0.0, tt,
                                          epsabs=1e-14, epsrel=1e-13, limit=200)[0] for tt in th])
        else:
            raise ValueError(f"unknown method {method!r}")
        out[mid] = vals
    return out


_SPLINE_PAD = 12  # cells; the cubic prefilter decays below roundoff well within this


class GridInterpolator:
    """Spline interpolation of a grid function, extended evenly across ``x_d = 0``.

    Coordinates within ``1e-9`` cells of a node are snapped to it, so
    evaluation at nodes reproduces the stored values (exactly for orders 0
    and 1, to roundoff for spline orders). Points outside
    the box evaluate to 0.
    """

    def __init__(self, grid: HalfSpaceGrid, values: np.ndarray, order: int = 1):
        self.grid = grid
        self.order = order
        v = np.asarray(values)
        ext = np.concatenate([v[..., ::-1], v], axis=-1)
        # the zero exterior must be part of the prefiltered array, otherwise
        # the boundary coefficients do not interpolate the face nodes
        self._pad = _SPLINE_PAD if order > 1 else 0
        if order > 1:
            ext = np.pad(ext, self._pad)
            if np.iscomplexobj(ext):
                ext = (ndimage.spline_filter(ext.real, order=order, mode="grid-constant")
                       + 1j * ndimage.spline_filter(ext.imag, order=order, mode="grid-constant"))
            else:
                ext = ndimage.spline_filter(ext, order=order, mode="grid-constant")
        self._coef = ext

    def coordinates(self, pts: np.ndarray) -> np.ndarray:
        g = self.grid
        coords = np.empty((g.d,) + pts.shape[:-1])
        for i, (o, h) in enumerate(zip(g.origins[:-1], g.spacings[:-1])):
            coords[i] = (pts[..., i] - o) / h - 0.5
        coords[-1] = np.abs(pts[..., -1]) / g.spacings[-1] - 0.5 + g.counts[-1]
        r = np.rint(coords)
        return np.where(np.abs(coords - r) < 1e-9, r, coords) + self._pad

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        c = self.coordinates(pts).reshape(self.grid.d, -1)
        kw = dict(order=self.order, mode="grid-constant", cval=0.0, prefilter=False)
        if np.iscomplexobj(self._coef):
            out = (ndimage.map_coordinates(self._coef.real, c, **kw)
                   + 1j * ndimage.map_coordinates(self._coef.imag, c, **kw))
        else:
            out = ndimage.map_coordinates(self._coef, c, **kw)
        return out.reshape(pts.shape[:-1])


def translate_grid(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, x,
                   quad: TranslationQuadrature | None = None) -> GridFunction:
    """``tau_x f`` at every node of ``grid``; ``f`` is interpolated off the nodes."""
    _check_on(params, grid, f)
    quad = quad or TranslationQuadrature()
    x = np.asarray(x, dtype=float)
    if not grid.contains(x):
        raise DomainError(f"translation point {x} outside the grid box")
    itp = GridInterpolator(grid, f.values, quad.interp_order)
    t, w = _jacobi_rule(quad.theta_nodes, params.alpha)
    axes = grid.axes
    out = np.empty(grid.shape, dtype=f.values.dtype)
    lat_rest = np.meshgrid(*axes[1:-1], indexing="ij") if grid.d > 2 else []
    for i0, y0 in enumerate(axes[0]):
        # slab of nodes with first coordinate y0: shape counts[1:]
        slab_shape = grid.counts[1:]
        pts_lat = [np.full(slab_shape, x[0] + y0)]
        pts_lat += [np.broadcast_to((L + xi)[..., None], slab_shape) for L, xi in zip(lat_rest, x[1:-1])]
        yd = np.broadcast_to(axes[-1], slab_shape)
        if x[-1] == 0:
            pts = np.stack(pts_lat + [yd], axis=-1)
            out[i0] = itp(pts)
            continue
        rho = _rho(x[-1], yd[..., None], t)  # slab_shape + (n_theta,)
        pts = np.stack([np.broadcast_to(p[..., None], rho.shape) for p in pts_lat] + [rho], axis=-1)
        out[i0] = np.sum(itp(pts) * w, axis=-1)
    return GridFunction(grid, out)


def _lateral_offsets(grid: HalfSpaceGrid):
    """Lattice of lateral differences ``x' - y'`` between nodes, per axis."""
    return [np.arange(-(n - 1), n) * h for n, h in zip(grid.counts[:-1], grid.spacings[:-1])]


def convolve(params: WeinsteinParams, grid: HalfSpaceGrid, f, g: GridFunction,
             quad: TranslationQuadrature | None = None) -> GridFunction:
    """Generalized convolution ``(f * g)(x) = sum_y tau_x(f)(-y', y_d) g(y) w(y)``.

    ``f`` is a :class:`GridFunction` on ``grid`` (interpolated with
    ``quad.interp_order``) or a callable evaluated exactly. The translated
    kernel depends on ``(x_d, y_d)`` and on the lateral difference only, so
    it is tabulated per output depth and applied as an FFT convolution over
    the lateral axes.
    """
    _check_on(params, grid, g)
    quad = quad or TranslationQuadrature()
    if isinstance(f, GridFunction):
        _check_on(params, grid, f)
        feval = GridInterpolator(grid, f.values, quad.interp_order)
    elif callable(f):
        feval = f
    else:
        raise ContractError("f must be a GridFunction on grid or a callable")
    t, w = _jacobi_rule(quad.theta_nodes, params.alpha)
    zd = grid.axes[-1]
    nd = grid.counts[-1]
    nlat = grid.counts[:-1]
    lat_axes = tuple(range(grid.d - 1))
    offs = _lateral_offsets(grid)
    off_mesh = np.meshgrid(*offs, indexing="ij")
    full = tuple(2 * n - 1 + n - 1 for n in nlat)
    fft_shape = tuple(int(2 ** math.ceil(math.log2(m))) for m in full)

    G = g.values * node_weights(params, grid)
    cplx = np.iscomplexobj(G) or np.iscomplexobj(getattr(f, "values", np.zeros(0)))
    fftn, ifftn = (np.fft.fftn, np.fft.ifftn) if cplx else (np.fft.rfftn, np.fft.irfftn)
    G_hat = fftn(G, s=fft_shape, axes=lat_axes)  # lateral FFT of every depth column
    out = np.empty(grid.shape, dtype=complex if cplx else float)
    crop = tuple(slice(n - 1, 2 * n - 1) for n in nlat)
    for a in range(nd):
        rho = _rho(zd[a], zd[:, None], t)  # (nd, n_theta)
        shp = off_mesh[0].shape + rho.shape
        pts = np.empty(shp + (grid.d,))
        for i, om in enumerate(off_mesh):
            pts[..., i] = om.reshape(om.shape + (1, 1))
        pts[..., -1] = rho
        T = np.sum(feval(pts) * w, axis=-1)  # lateral offsets + (nd,)
        T_hat = fftn(T, s=fft_shape, axes=lat_axes)
        conv = ifftn(np.sum(T_hat * G_hat, axis=-1), s=fft_shape, axes=lat_axes)
        out[(Ellipsis, a)] = conv[crop]
    return GridFunction(grid, out)
