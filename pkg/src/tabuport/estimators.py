"""scikit-learn style wrappers around the solvers.

Each estimator takes an asset universe in ``fit`` and exposes its results as
trailing-underscore attributes. An asset universe can be passed as an
:class:`~tabuport.instance.Instance`, a ``(mean, covariance)`` pair, or a
``(n_periods, n_assets)`` matrix of historical returns.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .construct import ConstructParams
from .frontier import (
    DeviationReport,
    Frontier,
    frontier_from_runs,
    run_lambda_sweep,
    solve_uef,
    summary_metrics,
)
from .instance import Instance
from .portfolio import Constraints, evaluate
from .tabu import TabuParams
from .tokenring import t2_search


def check_instance(X) -> Instance:
    """Coerce ``X`` into an :class:`Instance`, validating shapes and values."""
    if isinstance(X, Instance):
        return X
    if isinstance(X, tuple) and len(X) == 2:
        mean = check_array(np.asarray(X[0], dtype=float).reshape(1, -1)).ravel()
        cov = check_array(X[1])
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance has shape {cov.shape}, expected ({mean.size}, {mean.size})"
            )
        if np.any(np.diag(cov) < 0):
            raise ValueError("covariance has a negative variance on its diagonal")
        return Instance.from_covariance(mean, cov)
    R = check_array(X, ensure_min_samples=2)
    return Instance.from_covariance(R.mean(axis=0), np.atleast_2d(np.cov(R, rowvar=False)))


class TokenRingPortfolio(BaseEstimator):
    """A single cardinality-constrained portfolio at a fixed risk aversion.

    After ``fit``, ``weights_`` is a dense length-``n`` weight vector, so
    ``predict`` on a matrix of asset returns gives the portfolio return per
    period.
    """

    def __init__(
        self,
        k: int = 10,
        epsilon: float = 0.01,
        delta: float = 1.0,
        risk_aversion: float = 0.5,
        t_trials: int = 10000,
        stagnation_limit: int = 200,
        seed: int = 42,
    ):
        self.k = k
        self.epsilon = epsilon
        self.delta = delta
        self.risk_aversion = risk_aversion
        self.t_trials = t_trials
        self.stagnation_limit = stagnation_limit
        self.seed = seed

    def fit(self, X, y=None):
        inst = check_instance(X)
        c = Constraints(self.k, self.epsilon, self.delta, self.risk_aversion)
        result = t2_search(
            inst,
            c,
            ConstructParams(self.t_trials, self.seed),
            TabuParams(stagnation_limit=self.stagnation_limit),
            seed=self.seed,
        )
        ev = evaluate(result.portfolio, inst, self.risk_aversion)
        self.search_ = result
        self.portfolio_ = result.portfolio
        self.weights_ = result.portfolio.dense(inst.n)
        self.objective_ = ev.objective
        self.risk_ = ev.risk
        self.return_ = ev.ret
        self.n_features_in_ = inst.n
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        R = check_array(X)
        if R.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} assets, got {R.shape[1]}")
        return R @ self.weights_


class EfficientFrontier(BaseEstimator):
    """Unconstrained mean-variance frontier traced by exact QP."""

    def __init__(self, n_points: int = 2000, tol: float = 1e-9):
        self.n_points = n_points
        self.tol = tol

    def fit(self, X, y=None):
        inst = check_instance(X)
        self.frontier_ = solve_uef(inst, self.n_points, self.tol)
        self.risks_ = self.frontier_.risks
        self.returns_ = self.frontier_.returns
        self.weights_ = np.array([p.portfolio.dense(inst.n) for p in self.frontier_])
        self.n_features_in_ = inst.n
        return self


class ConstrainedFrontier(BaseEstimator):
    """Constrained frontier: one token-ring search per risk-aversion value."""

    def __init__(
        self,
        k: int = 10,
        epsilon: float = 0.01,
        delta: float = 1.0,
        lambda_step: float = 0.02,
        t_trials: int = 10000,
        stagnation_limit: int = 200,
        seed: int = 42,
        n_jobs: int | None = 1,
    ):
        self.k = k
        self.epsilon = epsilon
        self.delta = delta
        self.lambda_step = lambda_step
        self.t_trials = t_trials
        self.stagnation_limit = stagnation_limit
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        inst = check_instance(X)
        self.runs_ = run_lambda_sweep(
            inst, self.k, self.epsilon, self.delta, self.lambda_step, self.seed,
            self.t_trials, TabuParams(stagnation_limit=self.stagnation_limit), self.n_jobs,
        )
        self.frontier_ = frontier_from_runs(inst, self.runs_)
        self.risks_ = self.frontier_.risks
        self.returns_ = self.frontier_.returns
        self.n_features_in_ = inst.n
        return self

    def deviation(self, uef: Frontier | EfficientFrontier) -> DeviationReport:
        """Percentage deviation of the fitted frontier from ``uef``."""
        check_is_fitted(self, "frontier_")
        if isinstance(uef, EfficientFrontier):
            check_is_fitted(uef, "frontier_")
            uef = uef.frontier_
        return summary_metrics(self.frontier_, uef)
