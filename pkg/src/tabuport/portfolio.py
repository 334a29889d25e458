"""Candidate portfolios, the scalarised objective, and weight repair."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import (
    DuplicateAsset,
    IndexOutOfRange,
    InfeasibleBounds,
    NonPositiveWeight,
)
from .instance import Instance

SUM_TOL = 1e-9
BOUND_TOL = 1e-12


@dataclass(frozen=True)
class Constraints:
    """Cardinality ``k``, per-asset bounds ``[epsilon, delta]`` and risk aversion.

    ``risk_aversion`` is the scalarisation weight: 1 minimises risk only,
    0 maximises return only.
    """

    k: int
    epsilon: float = 0.01
    delta: float = 1.0
    risk_aversion: float = 0.5

    def __post_init__(self):
        check_bounds(self.k, self.epsilon, self.delta)
        if not 0.0 <= self.risk_aversion <= 1.0:
            raise ValueError(f"risk_aversion must be in [0, 1], got {self.risk_aversion}")

    def with_risk_aversion(self, risk_aversion: float) -> "Constraints":
        return Constraints(self.k, self.epsilon, self.delta, risk_aversion)


def check_bounds(k: int, epsilon: float, delta: float) -> None:
    if int(k) != k or k < 1:
        raise InfeasibleBounds(f"k must be a positive integer, got {k}")
    if not 0.0 <= epsilon < 1.0:
        raise InfeasibleBounds(f"epsilon must be in [0, 1), got {epsilon}")
    if not 0.0 < delta <= 1.0:
        raise InfeasibleBounds(f"delta must be in (0, 1], got {delta}")
    if epsilon > delta:
        raise InfeasibleBounds(f"epsilon {epsilon} exceeds delta {delta}")
    if k * epsilon > 1.0 + SUM_TOL:
        raise InfeasibleBounds(f"k * epsilon = {k * epsilon:g} > 1")
    if k * delta < 1.0 - SUM_TOL:
        raise InfeasibleBounds(f"k * delta = {k * delta:g} < 1")


class Portfolio:
    """Held assets ``L`` and their capital fractions ``S``, paired by position.

    Both sequences are stored as read-only numpy arrays; operations return
    new portfolios instead of mutating.
    """

    __slots__ = ("assets", "weights")

    def __init__(self, assets: Sequence[int], weights: Sequence[float]):
        assets = np.array(assets, dtype=np.intp).reshape(-1)
        weights = np.array(weights, dtype=float).reshape(-1)
        if assets.shape != weights.shape:
            raise ValueError(
                f"{assets.size} assets but {weights.size} weights"
            )
        if np.unique(assets).size != assets.size:
            raise DuplicateAsset(f"duplicate asset ids in {assets.tolist()}")
        assets.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("Portfolio is immutable")

    def __reduce__(self):
        # rebuild through __init__ so pickling (process pools) bypasses __setattr__
        return (Portfolio, (self.assets, self.weights))

    def __len__(self) -> int:
        return self.assets.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Portfolio):
            return NotImplemented
        return np.array_equal(self.assets, other.assets) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.assets.tobytes(), self.weights.tobytes()))

    def __repr__(self) -> str:
        pairs = ", ".join(f"{a}: {w:.6g}" for a, w in zip(self.assets, self.weights))
        return f"Portfolio({{{pairs}}})"

    def weight_of(self, asset: int) -> float:
        hit = np.flatnonzero(self.assets == asset)
        return float(self.weights[hit[0]]) if hit.size else 0.0

    def dense(self, n: int) -> np.ndarray:
        """Weights as a length-``n`` vector (zero for assets not held)."""
        x = np.zeros(n)
        x[self.assets] = self.weights
        return x


class Evaluation(NamedTuple):
    objective: float
    risk: float
    ret: float


def _check_assets(assets: np.ndarray, inst: Instance) -> None:
    if assets.size and (assets.min() < 0 or assets.max() >= inst.n):
        raise IndexOutOfRange(f"asset ids {assets.tolist()} outside 0..{inst.n - 1}")


def evaluate_rows(
    assets: np.ndarray, weights: np.ndarray, inst: Instance, risk_aversion: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Objective, risk and return for a batch of portfolios.

    ``assets`` is an integer array ``(m, k)`` and ``weights`` a float array of
    the same shape. Each row is evaluated independently, so a row gives the
    same result whatever batch it sits in.
    """
    cov = inst.covariance[assets[:, :, None], assets[:, None, :]]
    risk = np.einsum("mi,mij,mj->m", weights, cov, weights)
    ret = np.einsum("mi,mi->m", weights, inst.mean[assets])
    objective = risk_aversion * risk - (1.0 - risk_aversion) * ret
    return objective, risk, ret


def evaluate(p: Portfolio, inst: Instance, risk_aversion: float) -> Evaluation:
    _check_assets(p.assets, inst)
    obj, risk, ret = evaluate_rows(p.assets[None, :], p.weights[None, :], inst, risk_aversion)
    return Evaluation(float(obj[0]), float(risk[0]), float(ret[0]))


def feasible_rows(weights: np.ndarray, epsilon: float, delta: float) -> np.ndarray:
    sums_ok = np.abs(weights.sum(axis=1) - 1.0) <= SUM_TOL
    lo_ok = np.all(weights >= epsilon - BOUND_TOL, axis=1)
    hi_ok = np.all(weights <= delta + BOUND_TOL, axis=1)
    return sums_ok & lo_ok & hi_ok


def rescale_rows(weights: np.ndarray, epsilon: float, delta: float) -> np.ndarray:
    """Repair every row of ``weights`` onto ``{sum = 1, epsilon <= w <= delta}``.

    Rows that already satisfy the constraints are returned unchanged. Other
    rows get the two-pass repair: an affine map that lifts every weight to at
    least ``epsilon`` and makes the row sum to one, then capping of weights
    above ``delta`` with the surplus spread over the uncapped weights. The
    capping step repeats until nothing exceeds ``delta``.
    """
    w = np.array(weights, dtype=float, copy=True)
    if w.ndim != 2:
        raise ValueError("weights must be a 2-D array")
    m, k = w.shape
    check_bounds(k, epsilon, delta)

    todo = ~feasible_rows(w, epsilon, delta)
    if not todo.any():
        return w
    sub = w[todo]
    if np.any(sub < 0):
        raise NonPositiveWeight("weights must be non-negative before rescaling")
    total = sub.sum(axis=1, keepdims=True)
    if np.any(total <= 0):
        raise NonPositiveWeight("weights sum to zero")

    sub = epsilon + (sub / total) * (1.0 - k * epsilon)

    capped = np.zeros_like(sub, dtype=bool)
    for _ in range(k):
        over = (sub > delta) & ~capped
        rows = over.any(axis=1)
        if not rows.any():
            break
        capped |= over
        c = capped[rows]
        n_capped = c.sum(axis=1, keepdims=True)
        free = 1.0 - ((k - n_capped) * epsilon + n_capped * delta)
        if np.any(free < -SUM_TOL):
            raise InfeasibleBounds("no room left to redistribute below delta")
        free = np.maximum(free, 0.0)
        vals = sub[rows]
        uncapped_sum = np.where(c, 0.0, vals).sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            spread = epsilon + np.where(uncapped_sum > 0, vals / uncapped_sum, 0.0) * free
        sub[rows] = np.where(c, delta, spread)

    w[todo] = sub
    return w


def rescale(p: Portfolio, epsilon: float, delta: float) -> Portfolio:
    fixed = rescale_rows(p.weights[None, :], epsilon, delta)[0]
    return Portfolio(p.assets, fixed)


def is_feasible(p: Portfolio, c: Constraints) -> bool:
    if len(p) != c.k:
        return False
    return bool(feasible_rows(p.weights[None, :], c.epsilon, c.delta)[0])
