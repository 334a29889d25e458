import numpy as np
import pytest

from oracles import simplex_grid
from tabuport.construct import ConstructParams, construct_initial, sharpe_rank
from tabuport.exceptions import InfeasibleBounds
from tabuport.instance import Instance
from tabuport.portfolio import Constraints, evaluate, is_feasible


def _inst(mean, std):
    return Instance.from_correlation(mean, std, np.eye(len(mean)))


@pytest.mark.parametrize(
    "mean, std, order",
    [
        ([0.02, 0.01], [0.01, 0.01], [0, 1]),
        ([0.01, 0.01], [0.01, 0.01], [0, 1]),
        ([0.01, 0.04], [0.01, 0.02], [1, 0]),
    ],
)
def test_sharpe_order(mean, std, order):
    assert sharpe_rank(_inst(mean, std)) == order


def test_sharpe_zero_volatility():
    inst = _inst([0.01, 0.001, -0.001, 0.05], [0.01, 0.0, 0.0, 0.02])
    # riskless positive return first, riskless non-positive return last
    assert sharpe_rank(inst) == [1, 3, 0, 2]


def test_equal_bounds_force_weights():
    inst = _inst([0.01, 0.02], [0.01, 0.02])
    p = construct_initial(inst, Constraints(2, 0.5, 0.5, 0.5), ConstructParams(t=50))
    np.testing.assert_allclose(p.weights, [0.5, 0.5], atol=1e-12)


def test_feasible_and_deterministic(medium):
    c = Constraints(4, 0.05, 0.6, 0.3)
    a = construct_initial(medium, c, ConstructParams(t=2000, seed=5))
    b = construct_initial(medium, c, ConstructParams(t=2000, seed=5))
    assert a == b
    assert is_feasible(a, c)
    assert sorted(a.assets.tolist()) == sorted(sharpe_rank(medium)[:4])


def test_more_trials_never_hurt(medium):
    # the first draws of a long run are the draws of a short run
    c = Constraints(5, 0.01, 1.0, 0.5)
    short = construct_initial(medium, c, ConstructParams(t=10, seed=3))
    long = construct_initial(medium, c, ConstructParams(t=5000, seed=3))
    assert evaluate(long, medium, 0.5).objective <= evaluate(short, medium, 0.5).objective


def test_near_weight_optimum_on_chosen_assets(small):
    # minimum risk over the greedy asset set, compared with a fine weight grid
    c = Constraints(3, 0.0, 1.0, 1.0)
    p = construct_initial(small, c, ConstructParams(t=10000))
    ids = np.array(sharpe_rank(small)[:3])
    grid = simplex_grid(3, 200)
    sub = small.covariance[np.ix_(ids, ids)]
    best = np.einsum("ij,jk,ik->i", grid, sub, grid).min()
    assert evaluate(p, small, 1.0).objective <= best * 1.05


def test_random_method(medium):
    c = Constraints(4, 0.01, 1.0, 0.5)
    p = construct_initial(medium, c, ConstructParams(t=500, method="random"))
    assert is_feasible(p, c)


def test_errors(toy):
    with pytest.raises(InfeasibleBounds):
        construct_initial(toy, Constraints(3, 0.01, 1.0))
    with pytest.raises(ValueError):
        ConstructParams(t=0)
    with pytest.raises(ValueError):
        ConstructParams(method="anneal")
