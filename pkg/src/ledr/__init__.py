"""Geodesic-flow model-error dynamics.

True and model systems are geodesic flows of two affine connections on a
shared chart.  The trajectory discrepancy (the latent error dynamic
response) obeys a curvature-driven second-order equation; this package
simulates both flows, integrates and samples that response, classifies
the discrete stability regimes, fits the resonance frequency, and
estimates curvature back from measured deviation series.
"""

__version__ = "0.1.0"

from .geometry import (
    ChartPoint,
    ConnectionField,
    CurvatureValue,
    MetricField,
    TangentVector,
    connection_mismatch,
    curvature_at,
    forcing_term,
    jacobi_apply,
    sectional_curvature,
)
from .worlds import (
    AnalyticOracle,
    WorldPreset,
    analytic_geodesic,
    constant_curvature_world,
    flat_world,
    make_world,
    sphere_log,
    sphere_plane_ledr_oracle,
    sphere_world,
)
from .geodesic import Trajectory, discrete_velocity, integrate_geodesic, shadow_integrate
from .continuous import (
    LedrSolution,
    LedrState,
    general_deviation_rhs,
    integrate_ledr,
    ledr_from_trajectories,
    ledr_rhs,
    scalar_jacobi_closed_form,
)
from .discrete import (
    CurvatureEstimate,
    DiscreteLedrSeries,
    MismatchProbeReport,
    StabilityReport,
    characteristic_roots,
    classify_stability,
    discrete_first_diff,
    discrete_frequency,
    discrete_second_diff,
    estimate_curvature,
    jacobi_action_on_trajectory,
    mismatch_lower_bound_probe,
    recurrence_step,
    run_recurrence,
)
from .analysis import (
    ConvergenceReport,
    DiagnosisSetup,
    FrequencyFit,
    MerReport,
    convergence_order,
    fit_frequency,
    mer_diagnosis,
    sphere_plane_experiment,
)
from . import errors

__all__ = [
    "__version__",
    "errors",
    # geometry
    "ChartPoint", "TangentVector", "ConnectionField", "CurvatureValue", "MetricField",
    "curvature_at", "jacobi_apply", "sectional_curvature", "connection_mismatch",
    "forcing_term",
    # worlds
    "WorldPreset", "AnalyticOracle", "make_world", "flat_world", "sphere_world",
    "constant_curvature_world", "analytic_geodesic", "sphere_log",
    "sphere_plane_ledr_oracle",
    # geodesic
    "Trajectory", "integrate_geodesic", "shadow_integrate", "discrete_velocity",
    # continuous response
    "LedrState", "LedrSolution", "ledr_rhs", "general_deviation_rhs", "integrate_ledr",
    "ledr_from_trajectories", "scalar_jacobi_closed_form",
    # discrete response
    "DiscreteLedrSeries", "StabilityReport", "CurvatureEstimate", "MismatchProbeReport",
    "discrete_first_diff", "discrete_second_diff", "recurrence_step", "run_recurrence",
    "jacobi_action_on_trajectory", "characteristic_roots", "classify_stability",
    "discrete_frequency", "estimate_curvature", "mismatch_lower_bound_probe",
    # analysis
    "FrequencyFit", "ConvergenceReport", "DiagnosisSetup", "MerReport",
    "fit_frequency", "convergence_order", "mer_diagnosis", "sphere_plane_experiment",
]
