"""Excursion-count scaling test for diffusion-like behavior in time series."""

__version__ = "0.1.0"

from .core import (
    DIFFUSIVE,
    INDETERMINATE,
    NON_DIFFUSIVE,
    ClassifierConfig,
    EpsilonGrid,
    ExcursionProfile,
    SlopeFit,
    Trajectory,
    Verdict,
    classify,
    count_excursions,
    default_grid,
    excursion_profile,
    fit_slope,
    quadratic_variation,
    select_scaling_range,
    theoretical_counts,
)
from .errors import (
    DegenerateSignalError,
    ExdiffError,
    InvalidInputError,
    SimulationDivergedError,
)
from .sweep import (
    SweepPlan,
    SweepResult,
    export_results,
    load_results,
    parse_plan,
    run_sweep,
    slope_histogram,
)
from .systems import (
    ALL_KINDS,
    GeneratedSeries,
    SystemSpec,
    add_noise_snr,
    noise_scale_from_R,
    simulate,
    system_rhs,
)

__all__ = [
    "DIFFUSIVE",
    "NON_DIFFUSIVE",
    "INDETERMINATE",
    "Trajectory",
    "EpsilonGrid",
    "ExcursionProfile",
    "SlopeFit",
    "Verdict",
    "ClassifierConfig",
    "quadratic_variation",
    "count_excursions",
    "theoretical_counts",
    "excursion_profile",
    "select_scaling_range",
    "fit_slope",
    "default_grid",
    "classify",
    "SystemSpec",
    "GeneratedSeries",
    "simulate",
    "add_noise_snr",
    "noise_scale_from_R",
    "system_rhs",
    "ALL_KINDS",
    "SweepPlan",
    "SweepResult",
    "run_sweep",
    "slope_histogram",
    "export_results",
    "load_results",
    "parse_plan",
    "ExdiffError",
    "InvalidInputError",
    "DegenerateSignalError",
    "SimulationDivergedError",
]
