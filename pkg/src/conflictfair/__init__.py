"""Fair allocation of indivisible items under conflict constraints.

Exact (rational) checkers, brute-force oracles and constructive solvers for
EF1 / EF[1,1] allocations whose bundles must be independent sets of a
conflict graph.
"""

from .checkers import (
    CheckResult,
    check_properties,
    is_complete,
    is_ef1,
    is_ef11,
    is_efx,
    is_envy_free,
    is_maximal,
    is_order_adjacent,
    is_pareto_optimal,
)
from .core import (
    AdditiveValuation,
    Allocation,
    ConflictGraph,
    Instance,
    Monotonicity,
    RuleValuation,
    TableValuation,
    UniformValuation,
    is_feasible,
)
from .errors import *  # noqa: F403
from .hardness import build_reduction, has_independent_set, verify_reduction
from .instances import IntervalSpec, builtin, generate, load_instance
from .interval import exchange_sequence, greedy_schedule, solve_interval
from .kernels import BACKEND
from .oracle import EnumerationBudget, compute_gamma, exists_allocation
from .path_ef11 import build_clique_cycle, color_clique_cycle, solve_path_ef11
from .tree_equitable import equitable_color_tree, solve_tree_uniform
from .two_agents import (
    build_sequence,
    envy_cycle_constrained,
    round_robin_constrained,
    solve_additive,
    solve_bipartite,
    solve_two_agents,
)

__version__ = "0.1.0"
