import math

import numpy as np
import pytest

from fedcure.errors import InvalidFrequency, InvalidObservation
from fedcure.latency import LatencyBelief, LatencyModel, estimate, realize_latency, update_belief


def model(comp, comm, edge, sigma=0.0, tau_c=1, tau_e=1):
    return LatencyModel(np.array(comp, float), np.array(comm, float), np.array(edge, float), sigma, tau_c, tau_e)


def test_unit_ratio():
    m = model([1e9], [0.0], [0.0])
    assert realize_latency(m, 0, [0], [1e9], np.random.default_rng(0)) == pytest.approx(1.0)


def test_slowest_member_sets_the_pace():
    m = model([1.0, 3.0], [0.0, 0.0], [0.0], tau_e=2)
    assert realize_latency(m, 0, [0, 1], [1.0, 1.0], np.random.default_rng(0)) == pytest.approx(6.0)


def test_five_local_steps_twelve_edge_rounds():
    m = model([0.1], [0.0], [0.0], tau_c=5, tau_e=12)
    assert m.deterministic_latency(0, [0], [1.0]) == pytest.approx(6.0)


def test_edge_delay_added_after_noise():
    m = model([2.0], [0.5], [10.0, 30.0], sigma=0.0, tau_c=2, tau_e=3)
    assert m.deterministic_latency(1, [0], [4.0]) == pytest.approx(3 * (2 * 2.0 / 4.0 + 0.5) + 30.0)


def test_one_draw_per_call_regardless_of_sigma():
    quiet, noisy = model([1.0], [0.0], [0.0], 0.0), model([1.0], [0.0], [0.0], 0.5)
    g1, g2 = np.random.default_rng(9), np.random.default_rng(9)
    realize_latency(quiet, 0, [0], [1.0], g1)
    realize_latency(noisy, 0, [0], [1.0], g2)
    assert g1.random() == g2.random()


def test_lognormal_factor():
    m = model([1.0], [0.0], [0.0], sigma=0.2)
    g = np.random.default_rng(1)
    draws = np.array([realize_latency(m, 0, [0], [1.0], g) for _ in range(20000)])
    assert np.log(draws).std() == pytest.approx(0.2, rel=0.03)
    assert draws.mean() == pytest.approx(math.exp(0.02), rel=0.01)


def test_bad_frequency():
    with pytest.raises(InvalidFrequency):
        realize_latency(model([1.0], [0.0], [0.0]), 0, [0], [0.0], np.random.default_rng(0))


def test_conjugate_update_hand_value():
    b = LatencyBelief(prior_mean=10.0, prior_var=25.0, obs_var=25.0)
    assert estimate(b) == 10.0
    b = update_belief(b, 20.0)
    assert estimate(b) == pytest.approx(15.0)
    assert b.posterior_var == pytest.approx(12.5)


def test_fresh_belief_reports_prior_mean():
    b = LatencyBelief.from_first_observation(5.0, 0.1)
    assert estimate(b) == 5.0 and b.prior_var == 25.0 and b.obs_var == pytest.approx(0.25)
    # zero noise still leaves a finite observation variance
    assert LatencyBelief.from_first_observation(5.0, 0.0).obs_var > 0


def test_posterior_between_prior_and_sample_mean():
    g = np.random.default_rng(4)
    for _ in range(50):
        b = LatencyBelief(g.uniform(1, 100), g.uniform(1, 100), g.uniform(1, 100))
        obs = g.uniform(1, 200, size=g.integers(1, 20))
        for o in obs:
            b = update_belief(b, o)
        lo, hi = sorted((b.prior_mean, obs.mean()))
        assert lo - 1e-9 <= estimate(b) <= hi + 1e-9


def test_many_observations_track_sample_mean():
    g = np.random.default_rng(2)
    b = LatencyBelief.from_first_observation(80.0, 0.3)
    obs = 50.0 * np.exp(0.3 * g.standard_normal(10_000))
    for o in obs:
        b = update_belief(b, o)
    assert estimate(b) == pytest.approx(obs.mean(), rel=0.02)


def test_rejects_nonpositive_observations():
    b = LatencyBelief.from_first_observation(5.0, 0.1)
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(InvalidObservation):
            update_belief(b, bad)
    with pytest.raises(InvalidObservation):
        LatencyBelief.from_first_observation(0.0, 0.1)
