"""Runtime analysis toolkit for the (1+1) EA on linear pseudo-boolean functions."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    additive_drift_lower,
    bound_table,
    constant_mut_lower,
    constant_mut_upper,
    general_lower_bound,
    general_upper_bound,
    mult_drift_lower,
    mult_drift_upper,
    onemax_drift_upper,
    refined_upper_bound,
)
from .engine import (
    DEFAULT_CAP,
    DEFAULT_SEED,
    SELECTORS,
    RunConfig,
    RunRecord,
    mutate,
    run_mutation_based_ea,
    run_oneone_ea,
    run_oneone_ea_mu,
)
from .experiments import (
    Campaign,
    Cell,
    CellSummary,
    dominance_test,
    drift_trace_estimator,
    exact_optimal_c,
    optimal_p_scan,
    phase_transition_scan,
    report_from_records,
    run_campaign,
    simulate,
    summarize,
    theoretical_delta,
)
from .functions import LinearFunction, evaluate, function_from_spec, make_family, normalize
from .oracles import (
    check_cdf_monotonicity,
    check_onemax_drift_bound,
    exact_mutation_ones_distribution,
    exact_one_step_drift,
    run_verification_suite,
    solve_onemax_chain,
    verify_drift_condition,
)
from .potentials import (
    Potential,
    build_adaptive_potential,
    build_refined_potential,
    identity_potential,
    initial_value_bound,
    potential_value,
)
