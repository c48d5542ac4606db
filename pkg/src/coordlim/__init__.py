"""Limiting coordination performance of a two-agent team.

One agent observes a random state, the other learns about it only through
the first agent's actions.  The achievable long-run expected payoff is the
optimum of a convex program over joint distributions: maximize the
expected payoff subject to the pinned state marginal and an entropy
inequality that prices the implicit communication.  This package solves
that program with certified KKT residuals and applies it to distributed
power allocation on a multi-band interference channel.
"""

from . import backend
from .distributions import (
    Dims,
    IcValue,
    JointDistribution,
    StateMarginal,
    conditional_entropy_x1_given_x0_x2,
    entropy_bits,
    expected_payoff,
    info_constraint,
    info_constraint_gradient,
    info_constraint_vector,
    lex_index,
    lex_unindex,
    marginal_state,
    marginal_x1,
    marginal_x2,
    mutual_information_x0_x2,
    read_distribution,
    slater_point,
    write_distribution,
)
from .errors import (
    BracketError,
    CapacityError,
    ConvergenceError,
    CoordlimError,
    ValidationError,
)
from .solver import (
    KktMultipliers,
    KktResiduals,
    Ordering,
    OrderingReport,
    ProblemSpec,
    Solution,
    SolverOptions,
    brute_force_solve,
    check_payoff_ordering,
    inner_minimize,
    kkt_residuals,
    random_feasible_start,
    solve,
)
from .sweep import SweepConfig, SweepRecord, emit_csv, run_beta_sweep, run_snr_sweep
from .wireless import (
    BaselineReport,
    ChannelScenario,
    ChannelState,
    PowerAction,
    baseline_report,
    build_problem,
    enumerate_channel_states,
    enumerate_power_actions,
    evaluate_blind,
    evaluate_costless,
    hir_scenario,
    lir_scenario,
    load_scenario,
    preset_scenario,
    relative_gain,
    save_scenario,
    sum_rate,
    uniform_action_index,
)

__version__ = "0.1.0"
