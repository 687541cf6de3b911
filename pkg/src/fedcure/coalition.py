"""Coalition formation game over edge servers.

Clients are players; a client prefers the coalition whose joining yields the
lowest average pairwise JS divergence across all coalitions. The game is an
exact potential game with potential C(M, 2) * avg-JS, so best-response
dynamics terminate at a partition where no unilateral move helps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .divergence import js, pairwise_js
from .entities import ClientProfile, Partition, count_matrix
from .errors import InsufficientCoalitions, InvalidCoalition
from .rng import RandomSource

# a switch is accepted only if it lowers avg-JS by more than this
ACCEPT_TOL = 1e-12


@dataclass(frozen=True)
class SwitchProposal:
    client: int
    from_: int
    to: int
    delta_avg_js: float

    @property
    def accepted(self) -> bool:
        return self.delta_avg_js < -ACCEPT_TOL


@dataclass
class GameTrace:
    initial_js: float = float("nan")
    iterations: int = 0
    js_history: list[float] = field(default_factory=list)
    switches: list[SwitchProposal] = field(default_factory=list)
    converged: bool = False

    @property
    def final_js(self) -> float:
        return self.js_history[-1] if self.js_history else self.initial_js

    def rows(self) -> list[dict]:
        """One row per accepted switch: iteration, client, from, to, avg-JS after."""
        return [
            {"switch": i + 1, "client": s.client, "from": s.from_, "to": s.to, "avg_js": v}
            for i, (s, v) in enumerate(zip(self.switches, self.js_history))
        ]


def _avg_js_from_counts(counts: np.ndarray) -> float:
    m = counts.shape[0]
    if m < 2:
        raise InsufficientCoalitions("avg-JS needs at least 2 coalitions")
    probs = counts / counts.sum(axis=1, keepdims=True)
    return float(np.triu(pairwise_js(probs), k=1).sum() / (m * (m - 1) / 2))


def _moved_counts(counts: np.ndarray, row: np.ndarray, a: int, b: int) -> np.ndarray:
    out = counts.copy()
    out[a] -= row
    out[b] += row
    return out


def avg_js_of(partition: Partition, clients: Sequence[ClientProfile]) -> float:
    return _avg_js_from_counts(count_matrix(partition, clients))


def potential(partition: Partition, clients: Sequence[ClientProfile]) -> float:
    """Raw pairwise sum of JS divergences, i.e. C(M, 2) * avg-JS."""
    m = partition.n_coalitions
    if m < 2:
        raise InsufficientCoalitions("potential needs at least 2 coalitions")
    counts = count_matrix(partition, clients)
    probs = counts / counts.sum(axis=1, keepdims=True)
    return float(np.triu(pairwise_js(probs), k=1).sum())


def evaluate_switch(partition: Partition, clients: Sequence[ClientProfile], client: int, to: int) -> SwitchProposal:
    """Hypothetical move of ``client`` into coalition ``to``; the partition is left as is.

    A move that would empty the client's current coalition gets an infinite
    delta so it can never be accepted.
    """
    m = partition.n_coalitions
    if not 0 <= to < m:
        raise InvalidCoalition(f"coalition {to} outside 0..{m - 1}")
    frm = partition.assignment[client]
    if frm == to:
        raise InvalidCoalition(f"client {client} is already in coalition {to}")
    if partition.sizes()[frm] == 1:
        return SwitchProposal(client, frm, to, float("inf"))
    counts = count_matrix(partition, clients)
    row = np.asarray(clients[client].label_counts, dtype=float)
    before = _avg_js_from_counts(counts)
    after = _avg_js_from_counts(_moved_counts(counts, row, frm, to))
    return SwitchProposal(client, frm, to, after - before)


def switch_utility_delta(partition: Partition, clients: Sequence[ClientProfile], client: int, to: int) -> float:
    """Deviator's utility change, summed only over coalition pairs the move touches.

    Pairs among the untouched coalitions cancel between the two states and are
    skipped; the result equals the change of the potential.
    """
    frm = partition.assignment[client]
    counts = count_matrix(partition, clients)
    row = np.asarray(clients[client].label_counts, dtype=float)
    moved = _moved_counts(counts, row, frm, to)

    def dist(c: np.ndarray, i: int) -> np.ndarray:
        return c[i] / c[i].sum()

    touched = {frm, to}
    total = 0.0
    for i in range(partition.n_coalitions):
        for j in range(i + 1, partition.n_coalitions):
            if i in touched or j in touched:
                total += js(dist(moved, i), dist(moved, j)) - js(dist(counts, i), dist(counts, j))
    return total


def is_stable(partition: Partition, clients: Sequence[ClientProfile]) -> bool:
    for n, frm in enumerate(partition.assignment):
        for to in range(partition.n_coalitions):
            if to != frm and evaluate_switch(partition, clients, n, to).delta_avg_js < -ACCEPT_TOL:
                return False
    return True


def best_response(
    counts: np.ndarray, sizes: list[int], row: np.ndarray, frm: int, current_js: float
) -> list[tuple[int, float]]:
    """Deltas for every target other than ``frm`` (inf when the move would empty ``frm``)."""
    out = []
    for to in range(counts.shape[0]):
        if to == frm:
            continue
        if sizes[frm] == 1:
            out.append((to, float("inf")))
        else:
            out.append((to, _avg_js_from_counts(_moved_counts(counts, row, frm, to)) - current_js))
    return out


def _choose(deltas: list[tuple[int, float]]) -> Optional[tuple[int, float]]:
    """Lowest-delta target; stays put when staying ties the best within ACCEPT_TOL."""
    if not deltas:
        return None
    best = min(d for _, d in deltas)
    if best >= -ACCEPT_TOL:
        return None
    for to, d in deltas:  # ascending coalition index
        if d <= best + ACCEPT_TOL:
            return to, d
    return None


def run_formation(
    initial: Partition,
    clients: Sequence[ClientProfile],
    max_iters: int,
    rng: RandomSource | np.random.Generator,
    observer: Optional[Callable[[Partition, SwitchProposal], None]] = None,
) -> tuple[Partition, GameTrace]:
    """Best-response switching until a full sweep accepts nothing or ``max_iters`` visits.

    Each sweep visits every client once in a fresh uniformly random order. One
    iteration is one client visit. ``observer`` sees every evaluated switch
    together with the partition it was evaluated against.
    """
    gen = rng.stream("formation") if isinstance(rng, RandomSource) else rng
    if initial.n_coalitions < 2:
        raise InsufficientCoalitions("formation needs at least 2 coalitions")
    assignment = list(initial.assignment)
    counts = count_matrix(initial, clients)
    sizes = initial.sizes()
    rows = [np.asarray(c.label_counts, dtype=float) for c in clients]
    current = _avg_js_from_counts(counts)
    trace = GameTrace(initial_js=current)

    while trace.iterations < max_iters:
        accepted_in_sweep = False
        for n in gen.permutation(len(clients)):
            if trace.iterations >= max_iters:
                break
            trace.iterations += 1
            n = int(n)
            frm = assignment[n]
            deltas = best_response(counts, sizes, rows[n], frm, current)
            if observer is not None:
                snapshot = Partition(tuple(assignment), initial.n_coalitions)
                for to, d in deltas:
                    observer(snapshot, SwitchProposal(n, frm, to, d))
            choice = _choose(deltas)
            if choice is None:
                continue
            to, d = choice
            counts = _moved_counts(counts, rows[n], frm, to)
            sizes[frm] -= 1
            sizes[to] += 1
            assignment[n] = to
            current = _avg_js_from_counts(counts)
            trace.switches.append(SwitchProposal(n, frm, to, d))
            trace.js_history.append(current)
            accepted_in_sweep = True
        else:
            if not accepted_in_sweep:
                trace.converged = True
                break
    return Partition(tuple(assignment), initial.n_coalitions), trace
