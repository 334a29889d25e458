"""Cardinality-constrained mean-variance portfolio selection by token-ring tabu search."""

from .construct import ConstructParams, construct_initial, sharpe_rank
from .estimators import ConstrainedFrontier, EfficientFrontier, TokenRingPortfolio, check_instance
from .exceptions import *  # noqa: F401,F403
from .frontier import (
    DeviationReport,
    Frontier,
    FrontierPoint,
    deviation_error,
    global_min_variance,
    interpolate_return,
    interpolate_risk,
    solve_cef,
    solve_qp_min_variance,
    solve_uef,
    summary_metrics,
)
from .instance import Instance, covariance_of, format_orlib, load_orlib, parse_orlib
from .neighborhood import Move, MoveKind, decrease_move, enumerate_neighbors, increase_move, swap_move
from .portfolio import Constraints, Portfolio, evaluate, is_feasible, rescale
from .tabu import TabuParams, TabuState, select_admissible, t1_search
from .tokenring import Schedule, SearchResult, t2_search

__version__ = "0.1.0"
