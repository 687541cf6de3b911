"""End-to-end experiment: population -> coalition formation -> simulation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import learner as lrn
from .coalition import GameTrace, run_formation
from .config import ExperimentConfig
from .engine import LearnerSetup, Simulation
from .entities import ClientProfile, Partition, build_population
from .metrics import RunMetrics
from .rng import RandomSource, seeded_rng


@dataclass
class Setup:
    cfg: ExperimentConfig
    rng: RandomSource
    clients: list[ClientProfile]
    initial: Partition
    edge_delay: np.ndarray
    data: Optional[LearnerSetup]


def prepare(cfg: ExperimentConfig) -> Setup:
    cfg.validate()
    rng = seeded_rng(cfg.seed)
    clients, initial, edge_delay = build_population(cfg, rng.child("population"))
    data = None
    if cfg.learner.enabled:
        per_class = np.sum([c.label_counts for c in clients], axis=0)
        ln = cfg.learner
        dataset = lrn.generate(cfg.n_classes, ln.dim, per_class, ln.class_sep, rng.stream("dataset"), ln.test_per_class)
        shards = lrn.shard_non_iid(dataset, clients, initial, cfg.population.labels_per_coalition, rng.stream("shard"))
        data = LearnerSetup(dataset, shards)
    return Setup(cfg, rng, clients, initial, edge_delay, data)


def form(setup: Setup) -> tuple[Partition, GameTrace]:
    if setup.initial.n_coalitions < 2:
        return setup.initial, GameTrace(converged=True)
    return run_formation(setup.initial, setup.clients, setup.cfg.max_game_iters, setup.rng.child("game"))


def simulate(setup: Setup, partition: Partition) -> RunMetrics:
    sim = Simulation(setup.cfg, setup.clients, partition, setup.edge_delay, setup.rng.child("sim"), setup.data)
    return sim.run()


def run(cfg: ExperimentConfig, skip_formation: bool = False) -> RunMetrics:
    setup = prepare(cfg)
    if skip_formation:
        partition, trace = setup.initial, None
    else:
        partition, trace = form(setup)
    metrics = simulate(setup, partition)
    metrics.formation = trace
    return metrics
