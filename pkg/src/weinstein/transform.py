"""Weinstein kernel and transform, radial fast path, Laplace-Bessel operator.

The transform of ``f`` at a frequency ``lam`` in the half-space is

    F(lam) = sum_y f(y) Psi_lam(y) w(y),
    Psi_lam(y) = exp(-i <y', lam'>) j_alpha(y_d lam_d),

with the node weights ``w`` of :func:`weinstein.halfspace.node_weights`.
The kernel factors over the axes, so the grid path applies one
one-dimensional matrix per axis (lateral Fourier sums, then a weighted
Bessel sum in ``y_d``). :func:`forward_transform` with ``method="direct"``
evaluates the full kernel at every node pair and exists to cross-check the
separable path.
"""

from __future__ import annotations

import math
import string
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi

from .halfspace import (
    ContractError,
    GridFunction,
    HalfSpaceGrid,
    RadialProfile,
    TailWarning,
    WeinsteinParams,
    _check_on,
    lp_norm,
    node_weights,
)
from .special_fn import log_gamma, normalized_bessel

__all__ = [
    "SpectralGrid",
    "weinstein_kernel",
    "forward_transform",
    "inverse_transform",
    "radial_transform",
    "ball_indicator_transform",
    "ball_transform_constant",
    "apply_laplace_bessel",
    "PlancherelResult",
    "plancherel_check",
]

# frequency grids share the node/weight structure of spatial grids
SpectralGrid = HalfSpaceGrid


def weinstein_kernel(params: WeinsteinParams, lam, x):
    """``Psi_lam(x) = exp(-i <x', lam'>) j_alpha(x_d lam_d)``, broadcasting over points."""
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    phase = np.sum(lam[..., :-1] * x[..., :-1], axis=-1)
    out = np.exp(-1j * phase) * normalized_bessel(params.alpha, lam[..., -1] * x[..., -1])
    return complex(out) if np.ndim(out) == 0 else out


def _axis_matrices(params: WeinsteinParams, src: HalfSpaceGrid, dst_axes, sign: float):
    """Per-axis kernel factors, ``mats[i][p, j]`` for target ``p`` and source node ``j``."""
    mats = []
    for i in range(src.d - 1):
        mats.append(np.exp(sign * 1j * np.outer(dst_axes[i], src.axes[i])))
    mats.append(normalized_bessel(params.alpha, np.outer(dst_axes[-1], src.axes[-1])))
    return mats


def _apply_separable(fw: np.ndarray, mats) -> np.ndarray:
    # contract axis i of fw with mats[i][:, j]; tensordot moves the new axis
    # to the end, so after d steps the axis order is restored
    out = fw
    for m in mats:
        out = np.tensordot(out, m, axes=([0], [1]))
    return out


def _apply_pointwise(fw: np.ndarray, mats) -> np.ndarray:
    # mats[i] has shape (n_points, N_i); result[p] = sum fw * prod_i mats[i][p, j_i]
    d = fw.ndim
    letters = string.ascii_lowercase[:d]
    subs = letters + "," + ",".join("z" + c for c in letters) + "->z"
    return np.einsum(subs, fw, *mats, optimize=True)


def forward_transform(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction, spectral,
                      method: str = "separable"):
    """Weinstein transform of ``f`` by weighted quadrature on ``grid``.

    Parameters
    ----------
    spectral : HalfSpaceGrid or array_like, shape (n, d)
        Frequency grid, or an explicit list of frequencies.
    method : {"separable", "direct"}
        ``"direct"`` evaluates the full kernel for every pair of nodes.

    Returns
    -------
    GridFunction on ``spectral`` (complex), or ndarray of shape ``(n,)``.
    """
    _check_on(params, grid, f)
    fw = f.values * node_weights(params, grid)
    if isinstance(spectral, HalfSpaceGrid):
        if spectral.d != grid.d:
            raise ContractError("spectral grid dimension mismatch")
        if method == "direct":
            return GridFunction(spectral, _direct(params, grid, fw, spectral.points(), -1.0))
        mats = _axis_matrices(params, grid, spectral.axes, -1.0)
        return GridFunction(spectral, _apply_separable(fw, mats))
    lam = np.atleast_2d(np.asarray(spectral, dtype=float))
    if lam.shape[0] == 0:
        raise ContractError("no spectral points")
    if lam.shape[1] != grid.d:
        raise ContractError("spectral points have the wrong dimension")
    if method == "direct":
        return _direct(params, grid, fw, lam, -1.0)
    mats = _axis_matrices(params, grid, lam.T, -1.0)
    return _apply_pointwise(fw, mats)


def _direct(params, grid, fw, targets, sign):
    pts = grid.points()
    flat = targets.reshape(-1, grid.d)
    out = np.empty(flat.shape[0], dtype=complex)
    for k, t in enumerate(flat):
        # Psi_t(+-y', y_d): the sign flips the lateral phase only
        kern = weinstein_kernel(params, t, pts)
        if sign > 0:
            kern = np.conj(kern)
        out[k] = np.sum(fw * kern)
    return out.reshape(targets.shape[:-1])


def inverse_transform(params: WeinsteinParams, spectral: HalfSpaceGrid, g: GridFunction, grid,
                      method: str = "separable"):
    """Inverse transform ``f(x) = int Psi_lam(-x', x_d) g(lam) d nu_alpha(lam)``.

    ``grid`` may be a :class:`HalfSpaceGrid` or an ``(n, d)`` array of points.
    """
    _check_on(params, spectral, g)
    gw = g.values * node_weights(params, spectral)
    if isinstance(grid, HalfSpaceGrid):
        if method == "direct":
            return GridFunction(grid, _direct(params, spectral, gw, grid.points(), 1.0))
        mats = _axis_matrices(params, spectral, grid.axes, 1.0)
        return GridFunction(grid, _apply_separable(gw, mats))
    x = np.atleast_2d(np.asarray(grid, dtype=float))
    if method == "direct":
        return _direct(params, spectral, gw, x, 1.0)
    return _apply_pointwise(gw, _axis_matrices(params, spectral, x.T, 1.0))


def radial_transform(params: WeinsteinParams, profile: RadialProfile, lambda_mag, tol: float = 1e-12):
    """Fourier-Bessel transform of order ``alpha + (d-1)/2`` of a radial profile.

    The integral is split into pieces of about half an oscillation each so
    adaptive quadrature stays robust at large ``lambda_mag``.
    """
    gamma = params.alpha + 0.5 * (params.d - 1)
    power = 2.0 * gamma + 1.0
    const = math.exp(-(gamma * math.log(2.0) + log_gamma(gamma + 1.0)))
    mags = np.atleast_1d(np.asarray(lambda_mag, dtype=float))
    if np.any(mags < 0):
        raise ValueError("lambda_mag must be >= 0")
    rmax = profile.r_max
    F = profile.func
    if F is None:
        def F(r):
            return np.interp(r, profile.radii, profile.values, left=profile.values[0])
    out = np.empty_like(mags)
    for k, lam in enumerate(mags):
        n_pieces = int(math.ceil(lam * rmax / math.pi)) + 1
        pts = set(np.linspace(0.0, rmax, n_pieces + 1).tolist())
        pts.update(b for b in profile.breakpoints if 0 < b < rmax)
        pts = sorted(pts)

        def g(r):
            return F(r) * normalized_bessel(gamma, lam * r) * r ** power

        total, tail = 0.0, 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = spi.quad(g, a, b, epsabs=tol * 1e-3, epsrel=tol, limit=200)
            total += val
            if a >= 0.9 * rmax:
                tail += abs(val)
        if lam == 0 and tail > math.sqrt(tol) * max(abs(total), 1e-300):
            warnings.warn(f"radial integrand still significant at r_max={rmax}", TailWarning, stacklevel=2)
        out[k] = const * total
    return float(out[0]) if np.ndim(lambda_mag) == 0 else out


def ball_transform_constant(params: WeinsteinParams) -> float:
    """``1 / (2^(alpha+(d+1)/2) Gamma(alpha+(d+3)/2))``: the transform of the unit ball at 0."""
    a, d = params.alpha, params.d
    return math.exp(-((a + 0.5 * (d + 1)) * math.log(2.0) + log_gamma(a + 0.5 * (d + 3))))


def ball_indicator_transform(params: WeinsteinParams, eps: float, lam):
    """Closed-form transform of the indicator of ``B+(0, eps)`` at frequencies ``lam``."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    lam = np.asarray(lam, dtype=float)
    mag = np.sqrt(np.sum(lam * lam, axis=-1))
    order = params.alpha + 0.5 * params.d + 0.5
    out = eps ** params.homogeneity * ball_transform_constant(params) * normalized_bessel(order, mag * eps)
    return float(out) if np.ndim(out) == 0 else out


def apply_laplace_bessel(params: WeinsteinParams, grid: HalfSpaceGrid, f: GridFunction) -> np.ma.MaskedArray:
    """Second-order finite-difference Laplace-Bessel operator.

    Central differences on every axis plus the drift term
    ``(2 alpha + 1)/x_d * df/dx_d``. One-sided stencils are not used: the
    outer ring of nodes is masked in the returned array.
    """
    _check_on(params, grid, f)
    if any(c < 3 for c in grid.counts):
        raise ContractError("need at least 3 nodes per axis")
    v = f.values
    d = grid.d
    out = np.zeros(v.shape, dtype=v.dtype)
    inner = tuple(slice(1, -1) for _ in range(d))

    def shifted(axis, k):
        sl = list(inner)
        sl[axis] = slice(1 + k, v.shape[axis] - 1 + k)
        return v[tuple(sl)]

    acc = np.zeros(tuple(c - 2 for c in grid.counts), dtype=v.dtype)
    for axis, h in enumerate(grid.spacings):
        acc += (shifted(axis, 1) - 2.0 * v[inner] + shifted(axis, -1)) / (h * h)
    hd = grid.spacings[-1]
    xd = grid.axes[-1][1:-1]
    acc += params.weight_exponent / xd * (shifted(d - 1, 1) - shifted(d - 1, -1)) / (2.0 * hd)
    out[inner] = acc
    mask = np.ones(v.shape, dtype=bool)
    mask[inner] = False
    return np.ma.MaskedArray(out, mask=mask)


@dataclass
class PlancherelResult:
    norm2: float
    transform_norm2: float

    @property
    def gap(self) -> float:
        if self.norm2 == 0 and self.transform_norm2 == 0:
            return 0.0
        return abs(self.transform_norm2 - self.norm2) / max(self.norm2, self.transform_norm2)


def plancherel_check(params: WeinsteinParams, grid: HalfSpaceGrid, spectral: HalfSpaceGrid,
                     f: GridFunction) -> PlancherelResult:
    """Squared ``L^2(nu_alpha)`` norms of ``f`` and of its transform."""
    F = forward_transform(params, grid, f, spectral)
    return PlancherelResult(lp_norm(params, grid, f, 2) ** 2, lp_norm(params, spectral, F, 2) ** 2)
