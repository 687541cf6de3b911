"""Client CPU-frequency choice: utility and its closed-form maximiser."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidFrequency


@dataclass(frozen=True)
class UtilityParams:
    alpha: float = 1.0
    gamma: float = 1.0
    varsigma: float = 2.0

    def __post_init__(self):
        if self.alpha <= 0 or self.gamma <= 0:
            raise ValueError("alpha and gamma must be > 0")
        if self.varsigma < 1:
            raise ValueError("varsigma must be >= 1")


def utility(params: UtilityParams, c_n: float, T_hat: float, f):
    """alpha * (1 - c_n / (f * T_hat)) - gamma * f**varsigma; vectorised over f."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(~(f_arr > 0)):
        raise InvalidFrequency("frequency must be > 0")
    val = params.alpha * (1.0 - c_n / (f_arr * T_hat)) - params.gamma * f_arr**params.varsigma
    return float(val) if np.ndim(val) == 0 else val


def interior_frequency(params: UtilityParams, c_n: float, T_hat: float) -> float:
    """Stationary point of the utility, ignoring the f_max cap."""
    return (params.alpha * c_n / (params.varsigma * params.gamma * T_hat)) ** (1.0 / (params.varsigma + 1.0))


def optimal_frequency(params: UtilityParams, c_n: float, T_hat: float, f_max: float) -> float:
    if min(c_n, T_hat, f_max) <= 0:
        raise ValueError("c_n, T_hat and f_max must be > 0")
    return min(f_max, interior_frequency(params, c_n, T_hat))


@dataclass(frozen=True)
class Allocation:
    member: int
    freq: float
    clamped: bool


def apply_allocation(
    members: Sequence[int],
    comp_load: Sequence[float],
    f_max: Sequence[float],
    params: UtilityParams,
    T_hat: float,
) -> list[Allocation]:
    """Optimal frequency for every member of the scheduled coalition."""
    out = []
    for n in members:
        interior = interior_frequency(params, comp_load[n], T_hat)
        if interior >= f_max[n]:
            out.append(Allocation(int(n), float(f_max[n]), True))
        else:
            out.append(Allocation(int(n), float(interior), False))
    return out
