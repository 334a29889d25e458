import warnings

import numpy as np
import pytest

from tabuport import tokenring
from tabuport.construct import ConstructParams
from tabuport.portfolio import Constraints, evaluate, is_feasible
from tabuport.tabu import TabuParams
from tabuport.tokenring import Schedule, t2_search

FAST = TabuParams(stagnation_limit=20)


def test_schedule():
    steps = Schedule().steps
    assert len(steps) == 25
    assert steps[0] == 5.0 and steps[-1] == 0.2
    np.testing.assert_allclose(np.diff(steps), -0.2, atol=1e-12)


def test_counts_and_monotonicity(medium):
    c = Constraints(4, 0.01, 1.0, 0.5)
    calls = []
    res = t2_search(medium, c, ConstructParams(t=500), FAST, seed=1,
                    trace=lambda call, q, it, obj, inc, move: calls.append((call, q, it)))
    assert res.t1_calls >= 26
    assert res.t1_calls == 1 + 25 * res.passes
    assert res.objective <= res.initial_objective
    assert all(b <= a for a, b in zip(res.pass_objectives, res.pass_objectives[1:]))
    assert res.objective == res.pass_objectives[-1]
    assert is_feasible(res.portfolio, c)
    assert evaluate(res.portfolio, medium, 0.5).objective == res.objective
    # the warm-up runs at q0 and every run restarts its iteration count
    assert calls[0][:3] == (0, 5.2, 1)
    first_of_call = {}
    for call, q, it in calls:
        first_of_call.setdefault(call, it)
    assert set(first_of_call.values()) == {1}


def test_last_pass_did_not_improve(medium):
    c = Constraints(3, 0.01, 1.0, 0.2)
    res = t2_search(medium, c, ConstructParams(t=200), FAST, seed=4)
    if res.passes > 1:
        assert res.pass_objectives[-1] == res.pass_objectives[-2]


def test_deterministic(medium):
    c = Constraints(4, 0.01, 1.0, 0.7)
    a = t2_search(medium, c, ConstructParams(t=300, seed=9), FAST, seed=9)
    b = t2_search(medium, c, ConstructParams(t=300, seed=9), FAST, seed=9)
    assert a.portfolio == b.portfolio and a.pass_objectives == b.pass_objectives


def test_full_universe(small):
    # k = n: only weight moves exist
    c = Constraints(5, 0.01, 1.0, 0.5)
    kinds = set()
    res = t2_search(small, c, ConstructParams(t=100), FAST,
                    trace=lambda *a: kinds.add(int(a[-1].kind)))
    assert kinds <= {0, 1}
    assert is_feasible(res.portfolio, c)


def test_pass_cap_warns(monkeypatch, medium):
    monkeypatch.setattr(tokenring, "MAX_PASSES", 1)
    c = Constraints(4, 0.01, 1.0, 0.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = t2_search(medium, c, ConstructParams(t=50), TabuParams(stagnation_limit=2), seed=0,
                        schedule=Schedule(q0=0.1, first=0.9, last=0.1, spacing=0.2))
    # a tiny stagnation limit leaves plenty to gain in the first pass
    assert res.passes == 1
    assert len(caught) == 1 and "cap" in str(caught[0].message)
