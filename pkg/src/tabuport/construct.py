"""Initial solution: Sharpe-ratio greedy asset pick plus random weight trials."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleBounds
from .instance import Instance
from .portfolio import Constraints, Portfolio, evaluate_rows, rescale_rows


@dataclass(frozen=True)
class ConstructParams:
    """``t`` weight trials drawn from a PCG64 stream seeded with ``seed``.

    ``method="random"`` switches to the classic initializer that also draws
    the asset set at random for every trial.
    """

    t: int = 10000
    seed: int = 42
    method: str = "sharpe"

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if self.method not in ("sharpe", "random"):
            raise ValueError(f"unknown construction method {self.method!r}")


def sharpe_rank(inst: Instance) -> list[int]:
    """Asset ids by mean/std descending, ties broken by ascending id.

    A zero-std asset with positive mean has an unbounded ratio and is ranked
    ahead of everything (largest mean first); a zero-std asset with
    non-positive mean goes to the back.
    """

    def key(i: int):
        mu, s = float(inst.mean[i]), float(inst.std[i])
        if s > 0:
            return (1, -mu / s, i)
        if mu > 0:
            return (0, -mu, i)
        return (2, -mu, i)

    return sorted(range(inst.n), key=key)


def _best_trial(assets, weights, inst, c):
    weights = weights / weights.sum(axis=1, keepdims=True)
    weights = rescale_rows(weights, c.epsilon, c.delta)
    obj, _, _ = evaluate_rows(assets, weights, inst, c.risk_aversion)
    best = int(np.argmin(obj))  # first minimum, i.e. lowest trial index
    return Portfolio(assets[best], weights[best])


def construct_initial(
    inst: Instance, c: Constraints, params: ConstructParams | None = None
) -> Portfolio:
    params = params or ConstructParams()
    if c.k > inst.n:
        raise InfeasibleBounds(f"k = {c.k} exceeds the {inst.n} available assets")
    rng = np.random.default_rng(params.seed)

    if params.method == "random":
        picks = rng.random((params.t, inst.n)).argsort(axis=1)[:, : c.k]
        assets = np.sort(picks, axis=1)
    else:
        top = np.array(sharpe_rank(inst)[: c.k], dtype=np.intp)
        assets = np.broadcast_to(top, (params.t, c.k))

    # epsilon == 0 would allow an all-zero draw; nudge the lower edge
    low = c.epsilon if c.epsilon > 0 else np.finfo(float).tiny
    weights = rng.uniform(low, c.delta, size=(params.t, c.k))
    return _best_trial(assets, weights, inst, c)
