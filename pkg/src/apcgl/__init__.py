"""Lie-Trotter solver for polynomial complex Ginzburg-Landau equations on
almost periodic lattices ``{j * lam : j >= 1}``."""

from .apseries import (
    ApSeries,
    GridField,
    ParameterMismatchError,
    UnresolvedFrequencyError,
    bohr_coefficient,
    cauchy_product,
    evaluate,
    l1_norm,
    power,
)
from .linprop import (
    CglParams,
    QuadratureError,
    gaussian_integral,
    kernel_convolve_mode,
    kernel_eval,
    linear_multiplier,
    linear_step,
)
from .nonlinear import (
    ClosedFormError,
    FlowResult,
    FlowStatus,
    coefficient_flow,
    half_interval_flow,
    pointwise_flow,
)
from .oracle import (
    BlowupError,
    NonContractionError,
    grid_to_series,
    picard_iterate,
    pseudospectral_solve,
    pseudospectral_trajectory,
    sample,
    spectral_leakage,
)
from .splitting import SplitSchedule, TrajectoryRecord, alpha, evolve, lie_trotter_step, tau_h

__version__ = "0.1.0"

__all__ = [
    "ApSeries",
    "BlowupError",
    "CglParams",
    "ClosedFormError",
    "FlowResult",
    "FlowStatus",
    "GridField",
    "NonContractionError",
    "ParameterMismatchError",
    "QuadratureError",
    "SplitSchedule",
    "TrajectoryRecord",
    "UnresolvedFrequencyError",
    "alpha",
    "bohr_coefficient",
    "cauchy_product",
    "coefficient_flow",
    "evaluate",
    "evolve",
    "gaussian_integral",
    "grid_to_series",
    "half_interval_flow",
    "kernel_convolve_mode",
    "kernel_eval",
    "l1_norm",
    "lie_trotter_step",
    "linear_multiplier",
    "linear_step",
    "picard_iterate",
    "pointwise_flow",
    "power",
    "pseudospectral_solve",
    "pseudospectral_trajectory",
    "sample",
    "spectral_leakage",
    "tau_h",
]

