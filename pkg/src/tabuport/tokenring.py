"""Token-ring driver: chained tabu runs over a shrinking step-size schedule."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .construct import ConstructParams, construct_initial
from .instance import Instance
from .neighborhood import Move
from .portfolio import Constraints, Portfolio, evaluate
from .tabu import IMPROVEMENT_TOL, TabuParams, TabuState, t1_search

MAX_PASSES = 50


@dataclass(frozen=True)
class Schedule:
    q0: float = 5.2
    first: float = 5.0
    last: float = 0.2
    spacing: float = 0.2

    @property
    def steps(self) -> list[float]:
        count = int(round((self.first - self.last) / self.spacing)) + 1
        # built from integers so every step is the nearest double to k * spacing
        return [round(self.last + i * self.spacing, 12) for i in reversed(range(count))]


@dataclass
class SearchResult:
    portfolio: Portfolio
    objective: float
    initial_objective: float
    passes: int = 0
    t1_calls: int = 0
    iterations: int = 0
    pass_objectives: list[float] = field(default_factory=list)


# (t1 call index, q, iteration, objective, incumbent, move)
T2Trace = Callable[[int, float, int, float, float, Move], None]


def t2_search(
    inst: Instance,
    c: Constraints,
    construct_params: ConstructParams | None = None,
    tabu_params: TabuParams | None = None,
    seed: int = 42,
    schedule: Schedule | None = None,
    trace: T2Trace | None = None,
    initial: Portfolio | None = None,
) -> SearchResult:
    """Build the greedy start, warm up at ``q0``, then sweep the schedule.

    Every tabu run starts from the best portfolio so far with all tenures
    cleared. Sweeps repeat until one finishes without improving the best
    objective (or :data:`MAX_PASSES` is hit, which emits a warning).
    """
    construct_params = construct_params or ConstructParams()
    tabu_params = tabu_params or TabuParams()
    schedule = schedule or Schedule()
    rng = np.random.default_rng(seed)
    state = TabuState(inst.n)
    lam = c.risk_aversion

    if initial is None:
        initial = construct_initial(inst, c, construct_params)
    initial_obj = evaluate(initial, inst, lam).objective
    result = SearchResult(initial, initial_obj, initial_obj)

    def run(start: Portfolio, q: float) -> Portfolio:
        call = result.t1_calls
        hook = None
        if trace is not None:
            def hook(it, obj, inc, move):
                trace(call, q, it, obj, inc, move)
        state.reset()
        out = t1_search(start, q, inst, c, tabu_params, state, rng, hook)
        result.t1_calls += 1
        result.iterations += state.iteration
        return out

    best = run(initial, schedule.q0)
    best_obj = evaluate(best, inst, lam).objective

    while True:
        improved = False
        for q in schedule.steps:
            cand = run(best, q)
            cand_obj = evaluate(cand, inst, lam).objective
            if cand_obj < best_obj - IMPROVEMENT_TOL:
                best, best_obj = cand, cand_obj
                improved = True
        result.passes += 1
        result.pass_objectives.append(best_obj)
        if not improved:
            break
        if result.passes >= MAX_PASSES:
            warnings.warn(f"token-ring search stopped at the {MAX_PASSES}-pass cap")
            break

    result.portfolio, result.objective = best, best_obj
    return result
