"""Discrete-event loop for semi-asynchronous hierarchical training.

Clients inside a coalition train synchronously (tau_c local steps, then an
edge aggregation, tau_e times); coalitions talk to the cloud asynchronously.
Uploaded edge models wait in a buffer at the cloud until the scheduler picks
their coalition; that coalition's model is then folded into the global model
with a staleness-discounted weight and the coalition restarts from the fresh
global model. A global round lasts until the dispatched coalition's upload
lands, so the buffer can hold several coalitions to choose from.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import learner as lrn
from .config import ExperimentConfig
from .entities import ClientProfile, Partition
from .errors import EmptyCoalition, ShapeError
from .latency import LatencyBelief, LatencyModel, estimate, realize_latency, update_belief
from .metrics import AllocationRow, RoundRow, RunMetrics
from .resource import UtilityParams, apply_allocation
from .rng import RandomSource
from .scheduler import VirtualQueueState, compute_delta, select, update_queue


def staleness_weight(ell: float, kpen: float, phi: float) -> float:
    return ell * kpen**phi


@dataclass
class GlobalModel:
    weights: np.ndarray
    version: int = 0


def global_aggregate(model: GlobalModel, edge_model: np.ndarray, phi: float, ell: float, kpen: float,
                     version: Optional[int] = None) -> GlobalModel:
    edge_model = np.asarray(edge_model, dtype=float)
    if edge_model.shape != model.weights.shape:
        raise ShapeError(f"edge model shape {edge_model.shape} != global shape {model.weights.shape}")
    xi = staleness_weight(ell, kpen, phi)
    return GlobalModel((1.0 - xi) * model.weights + xi * edge_model,
                       model.version if version is None else max(version, model.version))


def edge_aggregate(local_models: Sequence[np.ndarray], sizes: Sequence[float]) -> np.ndarray:
    if len(local_models) == 0:
        raise EmptyCoalition("edge aggregation needs at least one local model")
    sizes = np.asarray(sizes, dtype=float)
    if sizes.shape != (len(local_models),) or np.any(sizes <= 0):
        raise ValueError("one positive size per local model required")
    stacked = np.stack([np.asarray(m, dtype=float) for m in local_models])
    return (sizes[:, None] * stacked).sum(axis=0) / sizes.sum()


class Status(Enum):
    IN_FLIGHT = "in_flight"
    WAITING = "waiting"
    IDLE = "idle"


@dataclass
class CoalitionRuntime:
    status: Status = Status.IDLE
    dispatched_at: int = 0
    arrival_time: float = math.inf
    pending_model: Optional[np.ndarray] = None


@dataclass
class SimClock:
    now: float = 0.0
    round: int = 0

    def advance_to(self, when: float) -> None:
        if when < self.now:
            raise ValueError("simulated clock cannot run backwards")
        self.now = when


@dataclass
class LearnerSetup:
    dataset: lrn.SyntheticDataset
    shards: list[np.ndarray]


class Simulation:
    """One run of the cloud loop; ``run()`` executes round 0 plus tau_g rounds."""

    def __init__(
        self,
        cfg: ExperimentConfig,
        clients: Sequence[ClientProfile],
        partition: Partition,
        edge_delay: Sequence[float],
        rng: RandomSource,
        data: Optional[LearnerSetup] = None,
    ):
        self.cfg = cfg
        self.clients = list(clients)
        self.partition = partition
        self.M = partition.n_coalitions
        self.members = [partition.members(m) for m in range(self.M)]
        empty = [m for m, mem in enumerate(self.members) if not mem]
        if empty:
            raise EmptyCoalition(f"coalitions {empty} have no members")
        self.sizes = np.array([c.dataset_size for c in self.clients], dtype=float)
        self.latency_model = LatencyModel(
            comp_load=[c.comp_load for c in self.clients],
            comm_delay=[c.comm_delay for c in self.clients],
            edge_cloud_delay=np.asarray(edge_delay, dtype=float)[: self.M],
            noise_sigma=cfg.population.noise_sigma,
            tau_c=cfg.tau_c,
            tau_e=cfg.tau_e,
        )
        self.f_max = [c.f_max for c in self.clients]
        self.comp_load = [c.comp_load for c in self.clients]
        self.params = UtilityParams(cfg.alpha, cfg.gamma, cfg.varsigma)
        self.noise = [rng.stream("latency", m) for m in range(self.M)]
        self.data = data
        if data is not None:
            self.train_rng = [rng.stream("train", n) for n in range(len(self.clients))]
            dim = data.dataset.dim
            self.model = GlobalModel(lrn.init_params(data.dataset.n_classes, dim))
        else:
            self.model = GlobalModel(np.zeros(0))
        self.delta = compute_delta(partition, self.clients, cfg.kappa)
        self.queue = VirtualQueueState.initial(self.delta)
        self.runtime = [CoalitionRuntime() for _ in range(self.M)]
        self.beliefs: list[Optional[LatencyBelief]] = [None] * self.M
        self.clock = SimClock()
        self._arrivals: list[tuple[float, int]] = []
        self._hold_until = 0.0
        self._warmup: list[float] = []
        self.metrics = RunMetrics(
            n_coalitions=self.M,
            delta=tuple(float(d) for d in self.delta),
            assignment=partition.assignment,
            config=cfg.to_dict(),
        )

    # -- pieces -----------------------------------------------------------

    @property
    def I(self) -> float:
        """Mean of per-round maximum latencies over the first M rounds, frozen afterwards."""
        return float(np.mean(self._warmup))

    def t_hat(self) -> np.ndarray:
        return np.array([estimate(b) if b is not None else math.nan for b in self.beliefs])

    def _train(self, m: int, start: np.ndarray) -> Optional[np.ndarray]:
        if self.data is None:
            return None
        ds, shards = self.data.dataset, self.data.shards
        K = ds.n_classes
        edge = start
        mem = self.members[m]
        for _ in range(self.cfg.tau_e):
            local = []
            for n in mem:
                idx = shards[n]
                local.append(lrn.local_train(
                    edge, ds.train.features[idx], ds.train.labels[idx], K,
                    self.cfg.tau_c, self.cfg.learner.lr, self.train_rng[n], self.cfg.learner.batch_size,
                ))
            edge = edge_aggregate(local, self.sizes[mem])
        return edge

    def _evaluate(self) -> tuple[float, float]:
        if self.data is None:
            return math.nan, math.nan
        return lrn.evaluate(self.model.weights, self.data.dataset.test, self.data.dataset.n_classes)

    def _dispatch(self, m: int, t: int, freqs: Sequence[float]) -> float:
        latency = realize_latency(self.latency_model, m, self.members[m], freqs, self.noise[m])
        rt = self.runtime[m]
        rt.status = Status.IN_FLIGHT
        rt.dispatched_at = t
        rt.arrival_time = self.clock.now + latency
        rt.pending_model = self._train(m, self.model.weights)
        heapq.heappush(self._arrivals, (rt.arrival_time, m))
        return latency

    def _collect_arrivals(self) -> None:
        while self._arrivals and self._arrivals[0][0] <= self.clock.now:
            _, m = heapq.heappop(self._arrivals)
            self.runtime[m].status = Status.WAITING

    def status_counts(self) -> dict[Status, int]:
        out = {s: 0 for s in Status}
        for rt in self.runtime:
            out[rt.status] += 1
        return out

    # -- rounds -----------------------------------------------------------

    def round_zero(self) -> None:
        latencies = []
        for m in range(self.M):
            freqs = [self.f_max[n] for n in self.members[m]]
            for n in self.members[m]:
                self.metrics.allocations.append(AllocationRow(0, m, n, self.f_max[n], True))
            latency = self._dispatch(m, 0, freqs)
            self.beliefs[m] = LatencyBelief.from_first_observation(latency, self.cfg.population.noise_sigma)
            latencies.append(latency)
        self.queue = update_queue(self.queue, None)
        self._hold_until = 0.0
        self._warmup.append(max(latencies))
        loss, acc = self._evaluate()
        self.metrics.rows.append(RoundRow(
            t=0, clock=self.clock.now, chosen=-1, phi=math.nan, xi=math.nan, latency=max(latencies),
            lam=tuple(self.queue.lam), t_hat=tuple(self.t_hat()), available=(),
            loss=loss, accuracy=acc,
        ))

    def step(self, t: int) -> None:
        cfg = self.cfg
        self.clock.round = t
        # the previous round closes when its dispatched upload lands
        self.clock.advance_to(max(self.clock.now, self._hold_until))
        self._collect_arrivals()
        if not any(rt.status is Status.WAITING for rt in self.runtime):
            self.clock.advance_to(self._arrivals[0][0])
            self._collect_arrivals()
        available = np.array([rt.status is Status.WAITING for rt in self.runtime])
        t_hat = self.t_hat()
        I = self.I
        decision = select(cfg.scheduler_kind, self.queue, t_hat, available, cfg.beta, I)
        c = decision.chosen
        rt = self.runtime[c]
        phi = t - rt.dispatched_at
        xi = staleness_weight(cfg.ell, cfg.kpen, phi)
        if rt.pending_model is not None:
            self.model = global_aggregate(self.model, rt.pending_model, phi, cfg.ell, cfg.kpen, version=t)
        rt.pending_model = None
        allocs = apply_allocation(self.members[c], self.comp_load, self.f_max, self.params, t_hat[c])
        for a in allocs:
            self.metrics.allocations.append(AllocationRow(t, c, a.member, a.freq, a.clamped))
        latency = self._dispatch(c, t, [a.freq for a in allocs])
        self.beliefs[c] = update_belief(self.beliefs[c], latency)
        self.queue = update_queue(self.queue, c)
        if len(self._warmup) < self.M:
            self._warmup.append(latency)
        self._hold_until = rt.arrival_time
        loss, acc = self._evaluate()
        self.metrics.rows.append(RoundRow(
            t=t, clock=self.clock.now, chosen=c, phi=phi, xi=xi, latency=latency,
            lam=tuple(self.queue.lam), t_hat=tuple(t_hat), available=tuple(int(i) for i in np.flatnonzero(available)),
            loss=loss, accuracy=acc,
        ))

    def run(self) -> RunMetrics:
        self.round_zero()
        for t in range(1, self.cfg.tau_g + 1):
            self.step(t)
        self.metrics.I = float(self.I)
        return self.metrics


def run_simulation(
    cfg: ExperimentConfig,
    clients: Sequence[ClientProfile],
    partition: Partition,
    edge_delay: Sequence[float],
    rng: RandomSource,
    data: Optional[LearnerSetup] = None,
) -> RunMetrics:
    return Simulation(cfg, clients, partition, edge_delay, rng, data).run()
