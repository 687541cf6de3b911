import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedcure.config import ExperimentConfig, LearnerConfig
from fedcure.errors import ConfigError, Undefined
from fedcure.experiment import run
from fedcure.report import cov, parse_metrics, summarize, sweep, write_metrics


def test_cov_hand_values():
    assert cov([1, 1, 1]) == 0.0
    assert cov([2, 4]) == pytest.approx(1 / 3)
    with pytest.raises(Undefined):
        cov([])
    with pytest.raises(Undefined):
        cov([1, -1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.1, 1e4), min_size=1, max_size=30), st.floats(1e-3, 1e3))
def test_cov_scale_invariant(values, k):
    assert cov(np.array(values) * k) == pytest.approx(cov(values), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("learner", [False, True])
def test_round_trip(tmp_path, learner):
    m = run(ExperimentConfig(tau_g=25, seed=2, learner=LearnerConfig(enabled=learner)))
    write_metrics(m, tmp_path)
    back = parse_metrics(tmp_path)
    assert back == m
    write_metrics(back, tmp_path / "again")
    for name in ("rounds.csv", "allocations.csv", "summary.json", "formation.csv"):
        assert (tmp_path / name).read_bytes() == (tmp_path / "again" / name).read_bytes()


def test_round_trip_without_formation(tmp_path):
    m = run(ExperimentConfig(tau_g=10), skip_formation=True)
    assert m.formation is None
    write_metrics(m, tmp_path)
    assert parse_metrics(tmp_path) == m
    assert not (tmp_path / "formation.csv").exists()


def test_summary_matches_rows(tmp_path):
    m = run(ExperimentConfig(tau_g=60, seed=1))
    s = summarize(m)
    counts = np.bincount([r.chosen for r in m.rows[1:]], minlength=m.n_coalitions)
    assert np.allclose(s["participation"], counts / 60)
    assert s["cov"] == pytest.approx(cov([r.latency for r in m.rows[1:]]))
    assert s["mean_rate"] == pytest.approx(list(np.array(m.rows[-1].lam) / 60))
    assert s["final_avg_js"] == m.formation.final_js
    write_metrics(m, tmp_path)
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["summary"]["participation"] == s["participation"]
    header = (tmp_path / "rounds.csv").read_text().splitlines()[0].split(",")
    assert header[:8] == ["t", "clock", "chosen", "phi", "xi", "latency", "loss", "accuracy"]
    assert len((tmp_path / "rounds.csv").read_text().splitlines()) == 62


def test_sweep():
    res = sweep(ExperimentConfig(tau_g=400), "beta", [0.5, 5, 50])
    peaks = [r["max_queue"] for r in res.table()]
    assert peaks == sorted(peaks)
    assert all(m.formation == res.runs[0].formation for m in res.runs)
    assert sweep(ExperimentConfig(), "beta", []).runs == []
    with pytest.raises(ConfigError):
        sweep(ExperimentConfig(), "nope", [1])
    with pytest.raises(ConfigError):
        sweep(ExperimentConfig(), "scheduler_kind", ["fair"])


def test_kappa_sweep_floor_scales():
    res = sweep(ExperimentConfig(tau_g=1000), "kappa", [0.0, 0.5, 1.0])
    for kappa, m in zip(res.values, res.runs):
        assert np.allclose(m.delta, kappa * np.array(res.runs[-1].delta))
        assert np.all(m.participation() >= np.array(m.delta) - 0.02)
