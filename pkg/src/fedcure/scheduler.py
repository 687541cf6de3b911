"""Virtual-queue coalition scheduling and the Greedy / Fair baselines.

Each coalition m owns a backlog Lambda_m that grows by its participation target
delta_m every round and drains by one when it is scheduled. The FedCure rule
picks the available coalition maximising Lambda_m + beta * (1 - T_hat_m / I).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .entities import ClientProfile, Partition
from .errors import NoAvailableCoalition, Undefined
from .latency import LatencyBelief, estimate


@dataclass(frozen=True)
class VirtualQueueState:
    lam: np.ndarray
    delta: np.ndarray
    t: int = -1  # round of the last update; -1 before round 0

    @classmethod
    def initial(cls, delta: Sequence[float]) -> "VirtualQueueState":
        d = np.asarray(delta, dtype=float)
        return cls(lam=-d.copy(), delta=d, t=-1)

    @property
    def n(self) -> int:
        return self.delta.size


@dataclass(frozen=True)
class ScheduleDecision:
    chosen: int
    scores: np.ndarray  # nan where unavailable
    available: np.ndarray


def compute_delta(partition: Partition, clients: Sequence[ClientProfile], kappa: float) -> np.ndarray:
    if not 0 <= kappa <= 1:
        raise ValueError("kappa must lie in [0, 1]")
    sizes = np.zeros(partition.n_coalitions)
    for client, m in zip(clients, partition.assignment):
        sizes[m] += client.dataset_size
    return kappa * sizes / sizes.sum()


def update_queue(state: VirtualQueueState, scheduled: Optional[int]) -> VirtualQueueState:
    """Advance every backlog by one round. The first update (round 0) counts all coalitions as scheduled."""
    chi = np.zeros(state.n)
    if state.t < 0:
        chi[:] = 1.0
    elif scheduled is not None:
        chi[scheduled] = 1.0
    lam = np.maximum(state.lam + state.delta - chi, 0.0)
    return VirtualQueueState(lam=lam, delta=state.delta, t=state.t + 1)


def mean_rate(state: VirtualQueueState) -> np.ndarray:
    if state.t < 1:
        raise Undefined("mean rate needs t >= 1")
    return state.lam / state.t


Estimates = Union[Sequence[LatencyBelief], Sequence[float], np.ndarray]


def _estimates(beliefs: Estimates) -> np.ndarray:
    return np.array([estimate(b) if isinstance(b, LatencyBelief) else float(b) for b in beliefs])


def _decide(scores: np.ndarray, available: Sequence[bool]) -> ScheduleDecision:
    mask = np.asarray(available, dtype=bool)
    if mask.shape != scores.shape:
        raise ValueError("availability mask does not match the number of coalitions")
    if not mask.any():
        raise NoAvailableCoalition("no coalition is available for scheduling")
    masked = np.where(mask, scores, np.nan)
    # nanargmax returns the first maximum, i.e. the lowest index on ties
    return ScheduleDecision(chosen=int(np.nanargmax(masked)), scores=masked, available=mask)


def efficiency(t_hat: np.ndarray, I: float) -> np.ndarray:
    """Per-coalition efficiency 1 - T_hat / I (may be negative)."""
    return 1.0 - np.asarray(t_hat, dtype=float) / I


def fedcure_select(
    state: VirtualQueueState, beliefs: Estimates, available: Sequence[bool], beta: float, I: float
) -> ScheduleDecision:
    if I <= 0:
        raise ValueError("I must be > 0")
    return _decide(state.lam + beta * efficiency(_estimates(beliefs), I), available)


def greedy_select(beliefs: Estimates, available: Sequence[bool], I: float) -> ScheduleDecision:
    if I <= 0:
        raise ValueError("I must be > 0")
    return _decide(efficiency(_estimates(beliefs), I), available)


def fair_select(state: VirtualQueueState, available: Sequence[bool]) -> ScheduleDecision:
    return _decide(state.lam.astype(float), available)


def select(
    kind: str, state: VirtualQueueState, beliefs: Estimates, available: Sequence[bool], beta: float, I: float
) -> ScheduleDecision:
    if kind == "fedcure":
        return fedcure_select(state, beliefs, available, beta, I)
    if kind == "greedy":
        return greedy_select(beliefs, available, I)
    if kind == "fair":
        return fair_select(state, available)
    raise ValueError(f"unknown scheduler {kind!r}")


@dataclass
class QueueRun:
    chosen: np.ndarray  # rounds 1..T
    lam: np.ndarray  # (T + 1, M), row t is Lambda(t)

    def participation(self) -> np.ndarray:
        return np.bincount(self.chosen, minlength=self.lam.shape[1]) / self.chosen.size


def simulate_fixed_latency(
    kind: str, t_hat: Sequence[float], delta: Sequence[float], beta: float, I: float, rounds: int
) -> QueueRun:
    """Scheduler loop with fixed latency estimates and every coalition always available."""
    t_hat = np.asarray(t_hat, dtype=float)
    state = update_queue(VirtualQueueState.initial(delta), None)
    available = np.ones(t_hat.size, dtype=bool)
    chosen = np.empty(rounds, dtype=int)
    lam = np.empty((rounds + 1, t_hat.size))
    lam[0] = state.lam
    for t in range(rounds):
        c = select(kind, state, t_hat, available, beta, I).chosen
        chosen[t] = c
        state = update_queue(state, c)
        lam[t + 1] = state.lam
    return QueueRun(chosen=chosen, lam=lam)
