"""Numerical toolkit for Weinstein harmonic analysis on the upper half-space.

Submodules
----------
special_fn   Bessel functions and the normalized Bessel ``j_alpha``.
halfspace    The weighted measure, grids, quadrature and radial integrals.
transform    Forward/inverse Weinstein transform and Plancherel checks.
translation  Generalized translation, ball kernels and convolution.
maximal      Uncentered and ball-average maximal functions, weak-type studies.
corpus       Deterministic closed-form test functions.
harness      Verification runs, reports and configuration.
"""

from .halfspace import (
    BallSpec, ContractError, GridFunction, HalfSpaceGrid, RadialProfile, TailWarning, WeinsteinParams,
    ball_measure, box_measure, integrate, lp_norm, measure_density, node_weights, sample,
)
from .special_fn import DomainError, bessel_j, normalized_bessel
from .transform import forward_transform, inverse_transform, plancherel_check, radial_transform
from .translation import TranslationQuadrature, ball_translate, convolve, translate_grid, translate_point
from .maximal import RadiusSchedule, maximal_ball_average_field, maximal_uncentered_field
from .corpus import CORPUS_NAMES, make_corpus
from .harness import ConfigError, RunConfig, VerificationReport, run_verify

__version__ = "0.1.0"

__all__ = [
    "BallSpec", "ContractError", "GridFunction", "HalfSpaceGrid", "RadialProfile", "TailWarning",
    "WeinsteinParams", "ball_measure", "box_measure", "integrate", "lp_norm", "measure_density",
    "node_weights", "sample", "DomainError", "bessel_j", "normalized_bessel", "forward_transform",
    "inverse_transform", "plancherel_check", "radial_transform", "TranslationQuadrature",
    "ball_translate", "convolve", "translate_grid", "translate_point", "RadiusSchedule",
    "maximal_ball_average_field", "maximal_uncentered_field", "CORPUS_NAMES", "make_corpus",
    "ConfigError", "RunConfig", "VerificationReport", "run_verify",
]
