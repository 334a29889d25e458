"""Tabu search over the union of the Increase, Decrease and Swap neighbourhoods."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import EmptyNeighborhood
from .instance import Instance
from .neighborhood import Move, MoveKind, NeighborBatch, neighbor_batch
from .portfolio import Constraints, Portfolio, evaluate, evaluate_rows

IMPROVEMENT_TOL = 1e-12

# (iteration, objective of the move taken, incumbent objective, move)
TraceHook = Callable[[int, float, float, Move], None]


@dataclass(frozen=True)
class TabuParams:
    tenure_increase: int = 3
    tenure_decrease: int = 3
    tenure_swap: int = 20
    stagnation_limit: int = 200
    aspiration: bool = True

    def __post_init__(self):
        if min(self.tenure_increase, self.tenure_decrease, self.tenure_swap) < 0:
            raise ValueError("tabu tenures must be non-negative")
        if self.stagnation_limit < 1:
            raise ValueError("stagnation_limit must be >= 1")

    @property
    def tenures(self) -> tuple[int, int, int]:
        return (self.tenure_increase, self.tenure_decrease, self.tenure_swap)


@dataclass
class TabuState:
    """Remaining tenure per (asset, move kind) plus loop counters.

    The tabu attribute of an Increase or Decrease is the asset it changed.
    A Swap marks the asset it brought in; while marked, that asset may not be
    swapped back out.
    """

    n: int
    tenure: np.ndarray = field(init=False)
    iteration: int = 0
    stagnation: int = 0

    def __post_init__(self):
        self.tenure = np.zeros((self.n, len(MoveKind)), dtype=np.int64)

    def reset(self) -> None:
        self.tenure[:] = 0
        self.iteration = 0
        self.stagnation = 0

    def record(self, move: Move, params: TabuParams) -> None:
        """Age every entry by one iteration, then mark ``move``."""
        np.subtract(self.tenure, 1, out=self.tenure)
        np.maximum(self.tenure, 0, out=self.tenure)
        self.tenure[move.target, move.kind] = params.tenures[move.kind]


def _attribute(kind, target, displaced):
    return np.where(kind == MoveKind.SWAP, displaced, target)


def is_tabu(state: TabuState, move: Move) -> bool:
    if move.kind == MoveKind.SWAP:
        asset = move.displaced
    else:
        asset = move.target
    return bool(state.tenure[asset, move.kind] > 0)


def _select(objective: np.ndarray, tabu: np.ndarray, incumbent: float, aspiration: bool) -> int:
    allowed = ~tabu
    if aspiration:
        allowed |= objective < incumbent - IMPROVEMENT_TOL
    if not allowed.any():
        # everything is tabu: take the least bad move rather than stall
        return int(np.argmin(objective))
    return int(np.argmin(np.where(allowed, objective, np.inf)))


def _batch_select(batch: NeighborBatch, objective, state, incumbent, aspiration) -> int:
    if len(batch) == 0:
        raise EmptyNeighborhood("no neighbours to choose from")
    attr = _attribute(batch.kinds, batch.targets, batch.displaced)
    tabu = state.tenure[attr, batch.kinds] > 0
    return _select(objective, tabu, incumbent, aspiration)


def select_admissible(
    neighbors: Sequence[tuple[Portfolio, Move]],
    state: TabuState,
    incumbent_objective: float,
    inst: Instance,
    risk_aversion: float,
    aspiration: bool = True,
) -> tuple[Portfolio, Move]:
    """Best non-tabu neighbour, letting tabu moves through if they beat the incumbent.

    Ties go to the earliest neighbour in the sequence.
    """
    if not neighbors:
        raise EmptyNeighborhood("no neighbours to choose from")
    objective = np.array([evaluate(p, inst, risk_aversion).objective for p, _ in neighbors])
    tabu = np.array([is_tabu(state, m) for _, m in neighbors])
    r = _select(objective, tabu, incumbent_objective, aspiration)
    return neighbors[r]


def t1_search(
    initial: Portfolio,
    q: float,
    inst: Instance,
    c: Constraints,
    params: TabuParams | None = None,
    state: TabuState | None = None,
    rng: np.random.Generator | None = None,
    trace: TraceHook | None = None,
) -> Portfolio:
    """Run tabu search with step ``q`` from ``initial`` and return the incumbent.

    Stops once ``params.stagnation_limit`` consecutive iterations fail to
    improve the incumbent. ``state`` is updated in place so callers can
    inspect or reuse it.
    """
    params = params or TabuParams()
    state = state if state is not None else TabuState(inst.n)
    rng = rng if rng is not None else np.random.default_rng()
    lam = c.risk_aversion

    current = best = initial
    best_obj = evaluate(initial, inst, lam).objective
    state.stagnation = 0

    while state.stagnation < params.stagnation_limit:
        batch = neighbor_batch(current, q, inst, c, rng)
        if len(batch) == 0:
            break
        objective, _, _ = evaluate_rows(batch.assets, batch.weights, inst, lam)
        r = _batch_select(batch, objective, state, best_obj, params.aspiration)
        move = batch.move(r)
        current = batch.portfolio(r)
        state.record(move, params)
        state.iteration += 1

        if objective[r] < best_obj - IMPROVEMENT_TOL:
            best, best_obj = current, float(objective[r])
            state.stagnation = 0
        else:
            state.stagnation += 1
        if trace is not None:
            trace(state.iteration, float(objective[r]), best_obj, move)

    return best
