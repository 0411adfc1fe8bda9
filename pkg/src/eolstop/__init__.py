"""End-of-life spare-parts inventory control.

Exact discounted cost kernels under non-homogeneous Poisson demand, backward
induction over a taxonomy of ordering/stopping flexibilities, switching-time
analytics, and a Monte Carlo validation harness.
"""

from ._backends import active_backend
from .analytics import (
    AssumptionReport,
    StoppingTimeDistribution,
    SwitchBounds,
    SwitchCostCurve,
    brute_force_switch_argmin,
    delta2_x_switch_cost,
    delta_x_switch_cost,
    order_up_to_of_tau,
    stopping_time_distribution,
    switch_cost,
    switch_cost_curve,
    switch_time_bounds,
    validate_assumptions,
)
from .config import ExperimentConfig, kernels_with_K
from .costs import CostParameters, LostSalesConvention, order_cost
from .demand import (
    IntensityModel,
    PathSample,
    build_named_intensity,
    increment_pmf,
    load_rates_table,
    sample_path,
)
from .errors import (
    AssumptionViolated,
    BudgetMisuse,
    CapSaturated,
    ConfigError,
    EolstopError,
    NonNormalizable,
    NotFound,
    OutOfGrid,
    OutOfHorizon,
    PolicyIncompatible,
    UnreachableState,
)
from .kernels import (
    KernelTable,
    build_kernel_table,
    constant_A,
    holding_cost,
    one_period_cost,
    reformulated_cost,
    replacement_cost,
    stopping_cost,
)
from .sim import (
    MartingaleReport,
    SimEstimate,
    evaluate_policy,
    martingale_check,
    sample_stopping_times,
)
from .solver import (
    FirstOrder,
    ModelSpec,
    PolicyTable,
    SolveResult,
    StopMode,
    ValueGrid,
    extract_regions,
    order_up_to_profile,
    solve,
    solve_original_form,
    static_switch_values,
)

__version__ = "0.1.0"
