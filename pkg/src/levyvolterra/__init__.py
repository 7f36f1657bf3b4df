"""Levy-driven Volterra processes, kernel-perturbation smoothing and
pathwise fractional integration.

The package simulates moving averages Y(t) = integral of g(t - s) dL(s) of
Levy drivers, approximates singular-kernel processes by smoothed ones via
the shift g(u + eps), decides the parameter conditions under which the
approximation and the pathwise product-form integral are valid, and runs
the Monte-Carlo experiments that verify the published convergence
exponents at desk scale.
"""

__version__ = "0.1.0"

from .levy import (
    CharTriplet,
    CompoundPoisson,
    DiscreteJumps,
    GaussianJumps,
    LevyPath,
    PathGrid,
    TemperedStable,
    absolute_moment,
    characteristic_exponent,
    empirical_cf,
    replication_stream,
    sample_path,
)
from .kernels import (
    GammaKernel,
    Kernel,
    PerturbedKernel,
    constant_kernel,
    lp_distance,
    lp_norm,
    rate_experiment,
    rate_fit,
    theoretical_rate,
    zero_kernel,
)
from .conditions import (
    ConditionReport,
    FracParams,
    check_Cp_gamma,
    check_Cp_numeric,
    check_Dp_gamma,
    check_Dp_numeric,
    semimartingale_gamma,
    semimartingale_perturbed,
)
from .volterra import (
    VolterraPath,
    left_limit,
    mc_distance_experiment,
    mc_lp_distance,
    mc_terminal_values,
    simulate_volterra,
)
from .fracderiv import (
    CompensatedFunction,
    SampledFunction,
    derivative_trace,
    export_derivative_trace,
    frac_deriv_bm_moment,
    left_frac_deriv,
    right_frac_deriv_compensated,
    rl_integral,
    rl_integral_path,
)
from .integrate import (
    IntegralResult,
    gls_integral,
    integral_convergence_experiment,
    ito_euler_integral,
    membership_check_X,
)

__all__ = [
    "CharTriplet",
    "CompoundPoisson",
    "CompensatedFunction",
    "ConditionReport",
    "DiscreteJumps",
    "FracParams",
    "GammaKernel",
    "GaussianJumps",
    "IntegralResult",
    "Kernel",
    "LevyPath",
    "PathGrid",
    "PerturbedKernel",
    "SampledFunction",
    "TemperedStable",
    "VolterraPath",
    "absolute_moment",
    "characteristic_exponent",
    "check_Cp_gamma",
    "check_Cp_numeric",
    "check_Dp_gamma",
    "check_Dp_numeric",
    "constant_kernel",
    "derivative_trace",
    "empirical_cf",
    "export_derivative_trace",
    "frac_deriv_bm_moment",
    "gls_integral",
    "integral_convergence_experiment",
    "ito_euler_integral",
    "left_frac_deriv",
    "left_limit",
    "lp_distance",
    "lp_norm",
    "mc_distance_experiment",
    "mc_lp_distance",
    "mc_terminal_values",
    "membership_check_X",
    "rate_experiment",
    "rate_fit",
    "replication_stream",
    "right_frac_deriv_compensated",
    "rl_integral",
    "rl_integral_path",
    "sample_path",
    "semimartingale_gamma",
    "semimartingale_perturbed",
    "simulate_volterra",
    "theoretical_rate",
    "zero_kernel",
]
