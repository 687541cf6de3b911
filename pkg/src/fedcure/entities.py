"""Clients, label histograms and coalition partitions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .errors import EmptyCoalition, InvalidCoalition, ShapeError
from .rng import RandomSource


@dataclass(frozen=True)
class ClientProfile:
    id: int
    label_counts: tuple[int, ...]
    comp_load: float  # cycles per local step
    f_max: float  # cycles / s
    comm_delay: float = 0.0  # s

    def __post_init__(self):
        if any(c < 0 for c in self.label_counts):
            raise ValueError(f"client {self.id}: negative label count")
        if self.comp_load <= 0 or self.f_max <= 0:
            raise ValueError(f"client {self.id}: comp_load and f_max must be > 0")
        if self.comm_delay < 0:
            raise ValueError(f"client {self.id}: comm_delay must be >= 0")

    @property
    def dataset_size(self) -> int:
        return int(sum(self.label_counts))


@dataclass(frozen=True, eq=False)
class LabelDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ShapeError("label distribution must be a nonempty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("label distribution has negative or non-finite entries")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"label distribution sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_counts(cls, counts: Sequence[float]) -> "LabelDistribution":
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise EmptyCoalition("cannot normalise an all-zero histogram")
        return cls(c / total)

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)


@dataclass(frozen=True)
class Partition:
    """Client -> coalition assignment; ``assignment[n]`` is client n's coalition."""

    assignment: tuple[int, ...]
    n_coalitions: int

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        self.validate()

    def validate(self) -> None:
        if self.n_coalitions < 1:
            raise InvalidCoalition("a partition needs at least one coalition")
        for n, a in enumerate(self.assignment):
            if not 0 <= a < self.n_coalitions:
                raise InvalidCoalition(f"client {n} assigned to coalition {a} outside 0..{self.n_coalitions - 1}")

    @classmethod
    def blocks(cls, n_clients: int, n_coalitions: int) -> "Partition":
        """Contiguous, near-equal blocks: clients 0..k-1 -> 0, and so on."""
        return cls(tuple(n * n_coalitions // n_clients for n in range(n_clients)), n_coalitions)

    @property
    def n_clients(self) -> int:
        return len(self.assignment)

    def members(self, m: int) -> list[int]:
        return [n for n, a in enumerate(self.assignment) if a == m]

    def sizes(self) -> list[int]:
        out = [0] * self.n_coalitions
        for a in self.assignment:
            out[a] += 1
        return out

    def moved(self, client: int, to: int) -> "Partition":
        if not 0 <= to < self.n_coalitions:
            raise InvalidCoalition(f"coalition {to} outside 0..{self.n_coalitions - 1}")
        new = list(self.assignment)
        new[client] = to
        return Partition(tuple(new), self.n_coalitions)

    def has_empty(self) -> bool:
        return 0 in self.sizes()


def count_matrix(partition: Partition, clients: Sequence[ClientProfile]) -> np.ndarray:
    """Per-coalition summed label counts, shape (M, K)."""
    if len(clients) != partition.n_clients:
        raise ShapeError(f"{len(clients)} clients but partition covers {partition.n_clients}")
    k = len(clients[0].label_counts)
    out = np.zeros((partition.n_coalitions, k))
    for client, m in zip(clients, partition.assignment):
        out[m] += client.label_counts
    return out


def coalition_distribution(partition: Partition, clients: Sequence[ClientProfile], m: int) -> LabelDistribution:
    if not 0 <= m < partition.n_coalitions:
        raise InvalidCoalition(f"coalition {m} outside 0..{partition.n_coalitions - 1}")
    members = partition.members(m)
    if not members:
        raise EmptyCoalition(f"coalition {m} has no members")
    total = np.sum([clients[n].label_counts for n in members], axis=0, dtype=float)
    return LabelDistribution.from_counts(total)


def label_groups(n_classes: int, n_coalitions: int, labels_per_coalition: int = 2) -> list[tuple[int, ...]]:
    """Label set owned by each coalition under the edge non-IID layout.

    Consecutive blocks of ``labels_per_coalition`` labels, wrapping round-robin
    when the classes run out (K=10, M=5 gives (0,1), (2,3), ..., (8,9)).
    """
    return [
        tuple((m * labels_per_coalition + j) % n_classes for j in range(labels_per_coalition))
        for m in range(n_coalitions)
    ]


def non_iid_label_counts(
    partition: Partition, n_classes: int, samples_per_client: int, labels_per_coalition: int = 2
) -> list[tuple[int, ...]]:
    groups = label_groups(n_classes, partition.n_coalitions, labels_per_coalition)
    out = []
    for m in partition.assignment:
        labels = sorted(set(groups[m]))
        counts = [0] * n_classes
        base, extra = divmod(samples_per_client, len(labels))
        for j, lab in enumerate(labels):
            counts[lab] = base + (1 if j < extra else 0)
        out.append(tuple(counts))
    return out


def build_population(cfg: ExperimentConfig, rng: RandomSource) -> tuple[list[ClientProfile], Partition, np.ndarray]:
    """Clients with edge non-IID label counts, their initial partition, and per-edge cloud delays."""
    partition = Partition.blocks(cfg.n_clients, cfg.n_edges)
    pop = cfg.population
    counts = non_iid_label_counts(partition, cfg.n_classes, pop.samples_per_client, pop.labels_per_coalition)
    clients = []
    for n in range(cfg.n_clients):
        g = rng.stream("client", n)
        clients.append(
            ClientProfile(
                id=n,
                label_counts=counts[n],
                comp_load=float(g.uniform(*pop.comp_load)),
                f_max=float(g.uniform(*pop.f_max)),
                comm_delay=float(g.uniform(*pop.comm_delay)),
            )
        )
    edge_delay = np.array([rng.stream("edge", m).uniform(*pop.edge_cloud_delay) for m in range(cfg.n_edges)])
    return clients, partition, edge_delay
