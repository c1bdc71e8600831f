"""Verification toolkit for negative association of Orlicz-ball type measures.

The package builds densities of the form ``cap(sum_i f_i(x_i)) * prod_i
w_i(x_i)`` on the nonnegative orthant (``f_i`` Young functions, ``w_i``
log-concave weights, ``cap`` log-concave with compact support and maximum
at zero) and checks, by deterministic quadrature and Monte Carlo sampling,
the structural facts that make such measures negatively associated:
closure under hyperplane restrictions and origin shifts, ratio
monotonicity conditions, a product inequality for partial integrals of
log-concave functions, projection bounds, and a two-dimensional
localization loop that reduces ratio inequalities to log-concave measures
on a segment.
"""

from .scalars import (
    DegenerateFunctionError,
    DomainError,
    LogConcaveScalar,
    YoungFunction,
    compose_shift_young,
    eval_logconcave,
    eval_young,
    indicator,
    log_affine,
    log_quadratic,
    multiply_logconcave,
    shift_young,
    young_from_pieces,
    young_identity,
    young_infinite,
    young_power,
    young_zero_with_cutoff,
)
from .model import (
    HyperplaneRestrict,
    LineageRecord,
    ModelError,
    MultiplyWeight,
    OriginShift,
    OrliczModel,
    SpannedSet,
    Splitting,
    cube_model,
    lp_ball_model,
    simplex_model,
    triangle_model,
)
from .quadrature import (
    ProjectionDensity,
    QuadratureError,
    QuadratureSpec,
    c_constant,
    integrate,
    mass,
    projection_density,
)
from .sampler import SampleBatch, SamplerError, sample
from .na import (
    CovarianceResult,
    IndexOverlapError,
    MonotoneTestFunction,
    UndefinedMeasureError,
    check_cross_block_ratio,
    check_slice_ratio_pair,
    covariance,
    na_sweep,
    ratio_monotone_in_z,
    sweep_report,
)
from .theta import (
    PreconditionError,
    ThetaCheckCase,
    check_hereditary_theta,
    check_pl_product,
    check_ratio_lemmas,
    check_theta,
    profile_report,
    theta_profile,
    theta_sweep,
)
from .localization import (
    LocalizationError,
    LocalizationResult,
    LocalizationState,
    MeasureProfile,
    OrthantFunction,
    SlicePair,
    check_horline,
    directional_ratio_samples,
    localize,
    terminal_ratio_profile,
)
from .reports import VerificationReport, write_csv, write_json_report

__version__ = "0.1.0"

__all__ = [
    "DegenerateFunctionError",
    "DomainError",
    "LogConcaveScalar",
    "YoungFunction",
    "compose_shift_young",
    "eval_logconcave",
    "eval_young",
    "indicator",
    "log_affine",
    "log_quadratic",
    "multiply_logconcave",
    "shift_young",
    "young_from_pieces",
    "young_identity",
    "young_infinite",
    "young_power",
    "young_zero_with_cutoff",
    "HyperplaneRestrict",
    "LineageRecord",
    "ModelError",
    "MultiplyWeight",
    "OriginShift",
    "OrliczModel",
    "SpannedSet",
    "Splitting",
    "cube_model",
    "lp_ball_model",
    "simplex_model",
    "triangle_model",
    "ProjectionDensity",
    "QuadratureError",
    "QuadratureSpec",
    "c_constant",
    "integrate",
    "mass",
    "projection_density",
    "SampleBatch",
    "SamplerError",
    "sample",
    "CovarianceResult",
    "IndexOverlapError",
    "MonotoneTestFunction",
    "UndefinedMeasureError",
    "check_cross_block_ratio",
    "check_slice_ratio_pair",
    "covariance",
    "na_sweep",
    "ratio_monotone_in_z",
    "sweep_report",
    "PreconditionError",
    "ThetaCheckCase",
    "check_hereditary_theta",
    "check_pl_product",
    "check_ratio_lemmas",
    "check_theta",
    "profile_report",
    "theta_profile",
    "theta_sweep",
    "LocalizationError",
    "LocalizationResult",
    "LocalizationState",
    "MeasureProfile",
    "OrthantFunction",
    "SlicePair",
    "check_horline",
    "directional_ratio_samples",
    "localize",
    "terminal_ratio_profile",
    "VerificationReport",
    "write_csv",
    "write_json_report",
    "__version__",
]
