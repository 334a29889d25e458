"""Efficient frontiers and the percentage-deviation quality metric.

The unconstrained frontier (long-only, fully invested, no cardinality limit)
comes from an active-set QP solver. The constrained frontier comes from one
token-ring search per risk-aversion value. Quality of the constrained
frontier is measured by how far each of its points sits from the
piecewise-linear unconstrained one, in percent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .construct import ConstructParams
from .exceptions import EmptyFrontier, Infeasible, NotConverged
from .instance import Instance
from .portfolio import Constraints, Portfolio, check_bounds, evaluate
from .tabu import TabuParams
from .tokenring import SearchResult, t2_search

DENOM_TOL = 1e-15


class FrontierPoint(NamedTuple):
    risk: float
    ret: float
    portfolio: Portfolio | None = None
    risk_aversion: float | None = None


@dataclass
class Frontier:
    points: list[FrontierPoint] = field(default_factory=list)

    def __post_init__(self):
        self.points = sorted(
            self.points,
            key=lambda p: (p.risk, -p.ret, -1.0 if p.risk_aversion is None else p.risk_aversion),
        )

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def risks(self) -> np.ndarray:
        return np.array([p.risk for p in self.points], dtype=float)

    @property
    def returns(self) -> np.ndarray:
        return np.array([p.ret for p in self.points], dtype=float)


@dataclass
class DeviationReport:
    deviations: list[float]
    median_error: float
    mean_error: float
    risk_error: float
    return_error: float


# --------------------------------------------------------------------------
# Active-set QP:  min x' S x  s.t.  mu' x >= target, sum x = 1, x >= 0
# (x <= 1 is implied by the other two.)
# --------------------------------------------------------------------------


@dataclass
class _QPState:
    x: np.ndarray
    at_zero: np.ndarray      # bool mask of bounds in the working set
    return_active: bool
    nu: float = 0.0          # budget multiplier
    rho: float = 0.0         # return multiplier


def _eqp(cov2, mu, target, free, return_active, ridge):
    """Minimiser of x' S x over the free variables with the working equalities."""
    f = np.flatnonzero(free)
    nf = f.size
    m = nf + 1 + int(return_active)
    kkt = np.zeros((m, m))
    kkt[:nf, :nf] = cov2[np.ix_(f, f)] + ridge * np.eye(nf)
    kkt[:nf, nf] = -1.0
    kkt[nf, :nf] = 1.0
    rhs = np.zeros(m)
    rhs[nf] = 1.0
    if return_active:
        kkt[:nf, nf + 1] = -mu[f]
        kkt[nf + 1, :nf] = mu[f]
        rhs[nf + 1] = target
    try:
        sol = np.linalg.solve(kkt, rhs)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    x = np.zeros_like(mu)
    x[f] = sol[:nf]
    rho = sol[nf + 1] if return_active else 0.0
    return x, sol[nf], rho


def _kkt_residual(cov, mu, target, st: _QPState) -> float:
    """Largest violation of the optimality conditions, relative to the data scale."""
    scale = max(np.abs(cov).max(), 1e-300)
    mscale = max(np.abs(mu).max(), 1e-300)
    x = st.x
    g = 2.0 * cov @ x
    lam = g - st.nu - st.rho * mu
    free = ~st.at_zero
    worst = [
        np.abs(lam[free]).max(initial=0.0) / scale,             # stationarity
        max(0.0, -lam[st.at_zero].min(initial=0.0)) / scale,     # dual feasibility
        max(0.0, -st.rho) / scale,
        abs(x.sum() - 1.0),                                      # primal feasibility
        max(0.0, -x.min()),
        max(0.0, target - mu @ x) / mscale,
        abs(st.rho * (mu @ x - target)) / (scale * mscale) if st.return_active else 0.0,
    ]
    return float(max(worst))


def _active_set(cov, mu, target, x0, tol, max_iter) -> _QPState:
    cov2 = 2.0 * cov
    scale = max(np.abs(cov).max(), 1e-300)
    mscale = max(np.abs(mu).max(), 1e-300)
    ridge = 1e-13 * scale
    mult_tol = tol * scale
    step_tol = 1e-12  # weights live in [0, 1]

    x = np.array(x0, dtype=float)
    st = _QPState(x, x <= 0.0, False)
    st.x[st.at_zero] = 0.0
    seen: set[tuple[bytes, bool]] = set()
    bland = False

    for _ in range(max_iter):
        free = ~st.at_zero
        x_eqp, nu, rho = _eqp(cov2, mu, target, free, st.return_active, ridge)
        d = x_eqp - st.x

        alpha, block = 1.0, None
        dec = np.flatnonzero(free & (d < -step_tol))
        if dec.size:
            ratios = st.x[dec] / -d[dec]
            j = int(np.argmin(ratios))  # lowest index among ties
            if ratios[j] < alpha:
                alpha, block = float(ratios[j]), int(dec[j])
        if not st.return_active:
            slope = float(mu @ d)
            if slope < -step_tol * mscale:
                slack = max(float(mu @ st.x) - target, 0.0)
                ratio = slack / -slope
                if ratio < alpha:
                    alpha, block = ratio, "return"

        if block is not None:
            st.x = st.x + alpha * d
            if block == "return":
                st.return_active = True
            else:
                st.at_zero[block] = True
                st.x[block] = 0.0
            np.maximum(st.x, 0.0, out=st.x)
            continue

        st.x = np.maximum(x_eqp, 0.0)
        st.x[st.at_zero] = 0.0
        st.nu, st.rho = float(nu), float(rho)

        lam = cov2 @ st.x - st.nu - st.rho * mu
        # candidates to release: (multiplier, key); key n stands for the return row
        cands = [(float(lam[i]), int(i)) for i in np.flatnonzero(st.at_zero)]
        if st.return_active:
            cands.append((st.rho, mu.size))
        negative = [(v, i) for v, i in cands if v < -mult_tol]
        if not negative:
            return st

        key = (st.at_zero.tobytes(), st.return_active)
        if key in seen:
            bland = True  # a working set came back: switch to smallest-index rule
        seen.add(key)
        _, drop = min(negative, key=lambda c: c[1]) if bland else min(negative)
        if drop == mu.size:
            st.return_active = False
            st.rho = 0.0
        else:
            st.at_zero[drop] = False

    raise NotConverged(f"active-set QP hit the {max_iter}-iteration cap (target {target:g})")


def _check_target(inst: Instance, mu_p: float) -> None:
    lo, hi = float(inst.mean.min()), float(inst.mean.max())
    slack = 1e-12 * max(abs(lo), abs(hi), 1e-300)
    if not (lo - slack <= mu_p <= hi + slack):
        raise Infeasible(f"target return {mu_p:g} outside the attainable range [{lo:g}, {hi:g}]")


def _corner(inst: Instance) -> np.ndarray:
    x = np.zeros(inst.n)
    x[int(np.argmax(inst.mean))] = 1.0
    return x


def _solve(inst: Instance, target: float, tol: float, x0=None, max_iter=None) -> np.ndarray:
    cov, mu = inst.covariance, inst.mean
    max_iter = max_iter or 20 * inst.n + 100
    top = float(mu.max())
    if target >= top - 1e-12 * max(abs(top), 1e-300):
        # only the highest-mean assets can reach the target: least-variance mix of them
        tied = np.flatnonzero(mu >= top - 1e-12 * max(abs(top), 1e-300))
        sub = cov[np.ix_(tied, tied)]
        start = np.zeros(tied.size)
        start[0] = 1.0
        st = _active_set(sub, mu[tied], -math.inf, start, tol, max_iter)
        res = _kkt_residual(sub, mu[tied], -math.inf, st)
        x = np.zeros(inst.n)
        x[tied] = st.x
    else:
        if x0 is None:
            x0 = _corner(inst)
        st = _active_set(cov, mu, target, x0, tol, max_iter)
        res = _kkt_residual(cov, mu, target, st)
        x = st.x
    if res > tol:
        raise NotConverged(f"KKT residual {res:.3g} above tolerance {tol:g} (target {target:g})")
    return x


def solve_qp_min_variance(
    inst: Instance,
    mu_p: float,
    tol: float = 1e-9,
    x0: np.ndarray | None = None,
    max_iter: int | None = None,
) -> np.ndarray:
    """Minimum-variance long-only weights with expected return at least ``mu_p``.

    ``x0`` may supply any feasible starting point (a warm start); by default
    the search starts from the highest-mean asset alone.
    """
    _check_target(inst, mu_p)
    return _solve(inst, float(mu_p), tol, x0, max_iter)


def global_min_variance(inst: Instance, tol: float = 1e-9) -> np.ndarray:
    return _solve(inst, -math.inf, tol)


def _point(inst: Instance, x: np.ndarray) -> FrontierPoint:
    held = np.flatnonzero(x > 0)
    risk = float(x @ inst.covariance @ x)
    ret = float(inst.mean @ x)
    return FrontierPoint(risk, ret, Portfolio(held, x[held]))


def dominance_filter(points: Sequence[FrontierPoint]) -> list[FrontierPoint]:
    """Keep points whose return beats every point of lower or equal risk."""
    kept: list[FrontierPoint] = []
    for p in sorted(points, key=lambda p: (p.risk, -p.ret)):
        if not kept or p.ret > kept[-1].ret:
            kept.append(p)
    return kept


def solve_uef(inst: Instance, n_points: int = 2000, tol: float = 1e-9) -> Frontier:
    """Trace the unconstrained frontier with ``n_points`` evenly spaced targets.

    Targets run from the return of the global minimum-variance portfolio up
    to the largest asset mean. Targets are solved from the top down so each
    solve can start from the previous optimum, which stays feasible.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    gmv = global_min_variance(inst, tol)
    low, high = float(inst.mean @ gmv), float(inst.mean.max())
    targets = np.linspace(low, high, n_points)

    points = []
    x = _corner(inst)
    for target in targets[:0:-1]:
        x = _solve(inst, float(target), tol, x0=x)
        points.append(_point(inst, x))
    points.append(_point(inst, gmv))
    return Frontier(dominance_filter(points))


# --------------------------------------------------------------------------
# Constrained frontier
# --------------------------------------------------------------------------


def lambda_grid(lambda_step: float = 0.02) -> list[float]:
    steps = round(1.0 / lambda_step)
    if steps < 1 or abs(steps * lambda_step - 1.0) > 1e-9:
        raise ValueError(f"lambda_step {lambda_step} must divide 1 evenly")
    return [round(i / steps, 12) for i in range(steps + 1)]


@dataclass
class LambdaRun:
    risk_aversion: float
    seed: int
    result: SearchResult
    trace: list[tuple] = field(default_factory=list)


def _run_lambda(args) -> LambdaRun:
    inst, c, construct_params, tabu_params, seed, want_trace = args
    rows: list[tuple] = []
    hook = None
    if want_trace:
        def hook(call, q, it, obj, inc, move):
            rows.append((call, q, it, obj, inc, int(move.kind), move.target))
    res = t2_search(inst, c, construct_params, tabu_params, seed, trace=hook)
    return LambdaRun(c.risk_aversion, seed, res, rows)


def run_lambda_sweep(
    inst: Instance,
    k: int,
    epsilon: float,
    delta: float,
    lambda_step: float = 0.02,
    seed: int = 42,
    t_trials: int = 10000,
    tabu_params: TabuParams | None = None,
    n_jobs: int | None = 1,
    trace: bool = False,
) -> list[LambdaRun]:
    """One token-ring search per risk-aversion value; run ``i`` uses ``seed + i``."""
    check_bounds(k, epsilon, delta)
    if k > inst.n:
        raise Infeasible(f"k = {k} exceeds the {inst.n} available assets")
    jobs = []
    for i, lam in enumerate(lambda_grid(lambda_step)):
        c = Constraints(k, epsilon, delta, lam)
        jobs.append((inst, c, ConstructParams(t_trials, seed + i), tabu_params, seed + i, trace))

    n_jobs = n_jobs or os.cpu_count() or 1
    if n_jobs == 1:
        return [_run_lambda(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run_lambda, jobs))


def frontier_from_runs(inst: Instance, runs: Sequence[LambdaRun]) -> Frontier:
    points = []
    for run in runs:
        ev = evaluate(run.result.portfolio, inst, run.risk_aversion)
        points.append(FrontierPoint(ev.risk, ev.ret, run.result.portfolio, run.risk_aversion))
    return Frontier(points)


def solve_cef(
    inst: Instance,
    k: int = 10,
    epsilon: float = 0.01,
    delta: float = 1.0,
    lambda_step: float = 0.02,
    seed: int = 42,
    t_trials: int = 10000,
    tabu_params: TabuParams | None = None,
    n_jobs: int | None = 1,
) -> Frontier:
    """Constrained frontier: every solution of the risk-aversion sweep, dominated or not."""
    runs = run_lambda_sweep(
        inst, k, epsilon, delta, lambda_step, seed, t_trials, tabu_params, n_jobs
    )
    return frontier_from_runs(inst, runs)


# --------------------------------------------------------------------------
# Deviation metrics
# --------------------------------------------------------------------------


def _interp(xs: np.ndarray, ys: np.ndarray, x: float) -> float:
    """Piecewise-linear y(x) through the knots, clamped at both ends."""
    order = np.argsort(xs, kind="stable")
    xs, ys = xs[order], ys[order]
    if x <= xs[0]:
        return float(ys[0])
    if x >= xs[-1]:
        return float(ys[-1])
    k = int(np.searchsorted(xs, x, side="right")) - 1   # last knot with xs <= x
    j = int(np.searchsorted(xs, x, side="left"))        # first knot with xs >= x
    if xs[j] == xs[k]:
        return float(ys[k])
    return float(ys[k] + (ys[j] - ys[k]) * (x - xs[k]) / (xs[j] - xs[k]))


def _require(uef: Frontier) -> None:
    if len(uef) == 0:
        raise EmptyFrontier("frontier has no points")


def interpolate_return(uef: Frontier, v: float) -> float:
    """Return on the piecewise-linear frontier at risk ``v``."""
    _require(uef)
    return _interp(uef.risks, uef.returns, v)


def interpolate_risk(uef: Frontier, r: float) -> float:
    """Risk on the piecewise-linear frontier at return ``r``."""
    _require(uef)
    return _interp(uef.returns, uef.risks, r)


def _pct(actual: float, reference: float) -> float | None:
    if abs(reference) < DENOM_TOL:
        return None
    return abs(100.0 * (actual - reference) / reference)


def deviation_error(point: FrontierPoint, uef: Frontier) -> float:
    """Smaller of the return-direction and risk-direction percentage gaps.

    Returns NaN when both reference values are numerically zero and the
    point is not itself on the frontier.
    """
    _require(uef)
    phi_x = _pct(point.ret, interpolate_return(uef, point.risk))
    phi_y = _pct(point.risk, interpolate_risk(uef, point.ret))
    errs = [e for e in (phi_x, phi_y) if e is not None]
    if errs:
        return min(errs)
    on_knot = any(
        abs(point.risk - p.risk) <= 1e-12 and abs(point.ret - p.ret) <= 1e-12 for p in uef
    )
    return 0.0 if on_knot else math.nan


def _nanmean(vals) -> float:
    arr = np.array([v for v in vals if v is not None and not math.isnan(v)], dtype=float)
    return float(arr.mean()) if arr.size else math.nan


def summary_metrics(cef: Frontier, uef: Frontier) -> DeviationReport:
    if len(cef) == 0:
        raise EmptyFrontier("constrained frontier has no points")
    _require(uef)
    devs = [deviation_error(p, uef) for p in cef]
    finite = np.array([d for d in devs if not math.isnan(d)], dtype=float)
    risk_errs = [_pct(p.risk, interpolate_risk(uef, p.ret)) for p in cef]
    ret_errs = [_pct(p.ret, interpolate_return(uef, p.risk)) for p in cef]
    return DeviationReport(
        deviations=devs,
        median_error=float(np.median(finite)) if finite.size else math.nan,
        mean_error=float(finite.mean()) if finite.size else math.nan,
        risk_error=_nanmean(risk_errs),
        return_error=_nanmean(ret_errs),
    )
