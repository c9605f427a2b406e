"""Fast model selection on growing data subsets with sequential elimination."""

__version__ = "0.1.0"

from .cvst import (
    Configuration,
    CVSTParams,
    CVSTResult,
    outlier_binarize,
    run_cvst,
    select_winner,
    similar_performance,
    top_configurations,
)
from .datagen import GeneratorSpec, gen_noisy_sine, gen_noisy_sinc, load_csv, write_csv
from .learners import (
    Dataset,
    FullCVResult,
    LearnerFailure,
    LearnerSpec,
    full_cv,
    score_configurations,
)
from .sequential import (
    SpicerTestPlan,
    WaldTestPlan,
    cvst_error_bound,
    is_flop_configuration,
    min_steps,
    path_count,
    path_table,
    plan_spicer_test,
    plan_wald_test,
    safety_zone,
    spicer_ruin_probability,
)
from .simulation import (
    BudgetSpec,
    InfeasibleBudgetError,
    NoRealRootError,
    SafetyFractionError,
    SimulationEstimate,
    SwitchingBernoulliSpec,
    bound_cvst_cost,
    exact_cvst_cost,
    max_beta_for_safety,
    plan_budget,
    power_sum_bound_check,
    simulate_false_negatives,
    simulate_speed_gain,
)
from .stat_tests import TestResult, chi_square_sf, cochran_q, friedman

__all__ = [
    "__version__",
    "Configuration",
    "CVSTParams",
    "CVSTResult",
    "run_cvst",
    "top_configurations",
    "outlier_binarize",
    "similar_performance",
    "select_winner",
    "GeneratorSpec",
    "gen_noisy_sine",
    "gen_noisy_sinc",
    "load_csv",
    "write_csv",
    "Dataset",
    "LearnerSpec",
    "LearnerFailure",
    "FullCVResult",
    "full_cv",
    "score_configurations",
    "WaldTestPlan",
    "SpicerTestPlan",
    "min_steps",
    "plan_wald_test",
    "plan_spicer_test",
    "safety_zone",
    "is_flop_configuration",
    "path_count",
    "path_table",
    "cvst_error_bound",
    "spicer_ruin_probability",
    "SwitchingBernoulliSpec",
    "SimulationEstimate",
    "simulate_false_negatives",
    "simulate_speed_gain",
    "BudgetSpec",
    "InfeasibleBudgetError",
    "NoRealRootError",
    "SafetyFractionError",
    "plan_budget",
    "exact_cvst_cost",
    "bound_cvst_cost",
    "max_beta_for_safety",
    "power_sum_bound_check",
    "TestResult",
    "chi_square_sf",
    "cochran_q",
    "friedman",
]
