"""Deterministic test-function corpus.

Every member is defined in closed form and evaluated through ``|x_d|``, so
it is even in the last variable by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .halfspace import GridFunction, HalfSpaceGrid, RadialProfile, WeinsteinParams, radial_integrate, sample
from .transform import ball_indicator_transform

__all__ = ["CorpusFunction", "CORPUS_NAMES", "make_corpus", "build_corpus", "bump"]

CORPUS_NAMES = ("indicator", "gaussian", "bump", "bump_mix", "bump_signed")


@dataclass(frozen=True)
class CorpusFunction:
    """A named closed-form test function.

    Attributes
    ----------
    evaluator : callable
        Maps points of shape ``(..., d)`` to values of shape ``(...)``.
    support_radius : float
        Radius of a ball about the origin holding the support, or ``inf``
        for the Gaussian.
    transform : callable or None
        Closed-form Weinstein transform ``lam -> F(lam)`` when known.
    parameters : dict
        Everything the member was built from (for reports).
    """

    name: str
    evaluator: Callable
    radial: bool
    support_radius: float
    nonnegative: bool
    supersample: int = 1
    transform: Callable | None = None
    parameters: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xe = x.copy()
        xe[..., -1] = np.abs(xe[..., -1])
        return self.evaluator(xe)

    def on_grid(self, params: WeinsteinParams, grid: HalfSpaceGrid) -> GridFunction:
        return sample(grid, self, params, supersample=self.supersample)


def bump(x, center=None, radius: float = 1.0) -> np.ndarray:
    """``exp(-1/(1 - r^2))`` in the scaled distance ``r = |x - center| / radius``, zero outside."""
    x = np.asarray(x, dtype=float)
    c = np.zeros(x.shape[-1]) if center is None else np.asarray(center, dtype=float)
    r2 = np.sum((x - c) ** 2, axis=-1) / radius ** 2
    out = np.zeros(r2.shape)
    inside = r2 < 1
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def _bump_norm(params: WeinsteinParams) -> float:
    # integrate past the support so the truncation check sees a zero tail
    prof = RadialProfile.from_callable(lambda r: bump(np.asarray(r)[..., None]), 1.25, breakpoints=(1.0,))
    return radial_integrate(params, prof)


def _indicator(x):
    return (np.sum(x * x, axis=-1) < 1.0).astype(float)


def _gaussian(x):
    return np.exp(-0.5 * np.sum(x * x, axis=-1))


def make_corpus(params: WeinsteinParams, seed: int = 0, names=None, n_mix: int = 4) -> list[CorpusFunction]:
    """The standard corpus for ``params``; ``seed`` fixes the random bump mixture."""
    names = CORPUS_NAMES if names is None else tuple(names)
    unknown = set(names) - set(CORPUS_NAMES)
    if unknown:
        raise ValueError(f"unknown corpus members: {sorted(unknown)}")
    d = params.d
    out = []
    for name in names:
        if name == "indicator":
            out.append(CorpusFunction(
                "indicator", _indicator, True, 1.0, True, supersample=4,
                transform=lambda lam: ball_indicator_transform(params, 1.0, lam),
                parameters={"radius": 1.0}))
        elif name == "gaussian":
            out.append(CorpusFunction(
                "gaussian", _gaussian, True, np.inf, True,
                transform=lambda lam: np.exp(-0.5 * np.sum(np.asarray(lam, dtype=float) ** 2, axis=-1)),
                parameters={"sigma": 1.0}))
        elif name == "bump":
            c = 1.0 / _bump_norm(params)
            out.append(CorpusFunction(
                "bump", lambda x, c=c: c * bump(x), True, 1.0, True,
                parameters={"radius": 1.0, "scale": c}))
        elif name == "bump_mix":
            rng = np.random.default_rng(seed)
            centers = np.column_stack([rng.uniform(-1.5, 1.5, (n_mix, d - 1)), rng.uniform(0.0, 1.5, n_mix)])
            radii = rng.uniform(0.3, 0.8, n_mix)
            amps = rng.uniform(0.5, 1.0, n_mix)

            def mix(x, centers=centers, radii=radii, amps=amps):
                return sum(a * bump(x, c, r) for c, r, a in zip(centers, radii, amps))

            reach = float(np.max(np.linalg.norm(centers, axis=1) + radii))
            out.append(CorpusFunction(
                "bump_mix", mix, False, reach, True,
                parameters={"seed": seed, "centers": centers.tolist(), "radii": radii.tolist(),
                            "amplitudes": amps.tolist()}))
        elif name == "bump_signed":
            c1 = np.zeros(d)
            c1[-1] = 0.5
            c2 = np.zeros(d)
            c2[0] = 1.2
            c2[-1] = 0.5

            def signed(x, c1=c1, c2=c2):
                return bump(x, c1, 0.5) - bump(x, c2, 0.5)

            out.append(CorpusFunction(
                "bump_signed", signed, False, float(np.linalg.norm(c2)) + 0.5, False,
                parameters={"centers": [c1.tolist(), c2.tolist()], "radius": 0.5}))
    return out


def build_corpus(config) -> list[CorpusFunction]:
    """Corpus selected by a run configuration (``params``, ``seed``, ``corpus``)."""
    return make_corpus(config.params, config.seed, config.corpus)
