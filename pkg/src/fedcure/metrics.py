"""Per-run records produced by the engine and consumed by the reporting layer."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .coalition import GameTrace


def sig9(x: float) -> float:
    """Round to 9 significant digits, the precision every metrics file carries."""
    if x is None or not math.isfinite(x):
        return float("nan") if x is None else float(x)
    return float(f"{x:.9g}")


@dataclass
class RoundRow:
    t: int
    clock: float
    chosen: int  # -1 in round 0, where every coalition is dispatched
    phi: float
    xi: float
    latency: float
    lam: tuple[float, ...]
    t_hat: tuple[float, ...]
    available: tuple[int, ...]  # indices of coalitions waiting when the round opened
    loss: float = float("nan")
    accuracy: float = float("nan")

    def __post_init__(self):
        for name in ("clock", "phi", "xi", "latency", "loss", "accuracy"):
            setattr(self, name, sig9(getattr(self, name)))
        self.lam = tuple(sig9(v) for v in self.lam)
        self.t_hat = tuple(sig9(v) for v in self.t_hat)
        self.available = tuple(int(v) for v in self.available)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoundRow):
            return NotImplemented

        def same(a, b):
            return (a == b) or (isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b))

        return all(
            same(getattr(self, f), getattr(other, f)) if not isinstance(getattr(self, f), tuple)
            else len(getattr(self, f)) == len(getattr(other, f))
            and all(same(a, b) for a, b in zip(getattr(self, f), getattr(other, f)))
            for f in self.__dataclass_fields__
        )


@dataclass
class AllocationRow:
    t: int
    coalition: int
    member: int
    freq: float
    clamped: bool

    def __post_init__(self):
        self.freq = sig9(self.freq)
        self.clamped = bool(self.clamped)


@dataclass
class RunMetrics:
    n_coalitions: int
    rows: list[RoundRow] = field(default_factory=list)
    allocations: list[AllocationRow] = field(default_factory=list)
    formation: Optional[GameTrace] = None
    delta: tuple[float, ...] = ()
    I: float = float("nan")
    assignment: tuple[int, ...] = ()
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def tau_g(self) -> int:
        return len(self.rows) - 1

    def chosen(self) -> np.ndarray:
        return np.array([r.chosen for r in self.rows[1:]], dtype=int)

    def latencies(self) -> np.ndarray:
        """Training latency of the scheduled coalition for rounds t >= 1."""
        return np.array([r.latency for r in self.rows[1:]])

    def lam_history(self) -> np.ndarray:
        return np.array([r.lam for r in self.rows])

    def participation(self) -> np.ndarray:
        chosen = self.chosen()
        if chosen.size == 0:
            return np.zeros(self.n_coalitions)
        return np.bincount(chosen, minlength=self.n_coalitions) / chosen.size
