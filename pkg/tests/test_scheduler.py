import numpy as np
import pytest

from fedcure.entities import ClientProfile, Partition
from fedcure.errors import NoAvailableCoalition, Undefined
from fedcure.latency import LatencyBelief
from fedcure.scheduler import (
    VirtualQueueState,
    compute_delta,
    fair_select,
    fedcure_select,
    greedy_select,
    mean_rate,
    select,
    simulate_fixed_latency,
    update_queue,
)

ALL = [True, True, True]


def state(lam, delta=(0.2, 0.2, 0.2), t=5):
    return VirtualQueueState(np.array(lam, float), np.array(delta, float), t)


def test_delta_hand_values():
    clients = [ClientProfile(0, (100,), 1, 1), ClientProfile(1, (150,), 1, 1), ClientProfile(2, (150,), 1, 1)]
    part = Partition((0, 1, 1), 2)
    assert np.allclose(compute_delta(part, clients, 1.0), [0.25, 0.75])
    assert np.allclose(compute_delta(part, clients, 0.0), [0, 0])
    eq = [ClientProfile(i, (10,), 1, 1) for i in range(10)]
    assert np.allclose(compute_delta(Partition.blocks(10, 5), eq, 1.0), 0.2)


def test_queue_hand_values():
    s = update_queue(VirtualQueueState.initial([0.2, 0.2]), None)
    assert np.allclose(s.lam, 0) and s.t == 0  # round 0 schedules everyone
    s = update_queue(s, 0)
    assert np.allclose(s.lam, [0.0, 0.2]) and s.t == 1
    s = update_queue(s, 1)
    assert np.allclose(s.lam, [0.2, 0.0])


def test_mean_rate():
    assert np.allclose(mean_rate(state([0, 0, 0], t=7)), 0)
    assert mean_rate(state([2, 0, 0], t=200))[0] == pytest.approx(0.01)
    with pytest.raises(Undefined):
        mean_rate(state([0, 0, 0], t=0))


def test_fedcure_hand_example():
    d = fedcure_select(state([0.5, 0.1, 0.0]), [10, 5, 2], ALL, 0.5, 10)
    assert np.allclose(d.scores, [0.5, 0.35, 0.4]) and d.chosen == 0


def test_fedcure_limits():
    assert fedcure_select(state([1, 1, 1]), [10, 5, 2], ALL, 0.5, 10).chosen == 2
    assert fedcure_select(state([0.3, 0.9, 0.1]), [1, 50, 1], ALL, 1e-9, 10).chosen == 1


def test_greedy_and_fair():
    assert greedy_select([10, 5, 2], ALL, 10).chosen == 2
    assert greedy_select([4, 4, 4], ALL, 10).chosen == 0
    assert greedy_select([10, 5, 2], [True, False, False], 10).chosen == 0
    assert fair_select(state([0.5, 0.1, 0.0]), ALL).chosen == 0
    assert fair_select(state([0, 0, 0]), ALL).chosen == 0
    assert fair_select(state([0.5, 0.1, 0.0]), [False, True, True]).chosen == 1


def test_beliefs_accepted_in_place_of_numbers():
    beliefs = [LatencyBelief.from_first_observation(x, 0.1) for x in (10, 5, 2)]
    assert greedy_select(beliefs, ALL, 10).chosen == 2


def test_fair_is_small_beta_fedcure():
    g = np.random.default_rng(0)
    for _ in range(200):
        s = state(g.uniform(0, 3, 4), delta=(0.25,) * 4)
        avail = g.random(4) < 0.7
        if not avail.any():
            continue
        t_hat = g.uniform(1, 100, 4)
        assert fedcure_select(s, t_hat, avail, 1e-12, 50).chosen == fair_select(s, avail).chosen


def test_nothing_available():
    with pytest.raises(NoAvailableCoalition):
        fair_select(state([0, 0, 0]), [False] * 3)
    with pytest.raises(ValueError):
        select("random", state([0, 0, 0]), [1, 1, 1], ALL, 1, 1)


def test_fixed_latency_balance():
    run = simulate_fixed_latency("fedcure", [2, 5, 9], [0.2, 0.3, 0.5], beta=5, I=10, rounds=5000)
    part = run.participation()
    assert part.sum() == pytest.approx(1.0)
    assert np.all(part >= np.array([0.2, 0.3, 0.5]) - 0.01)
    assert run.lam.shape == (5001, 3)
    greedy = simulate_fixed_latency("greedy", [2, 5, 9], [0.2, 0.3, 0.5], beta=5, I=10, rounds=100)
    assert np.all(greedy.chosen == 0)
