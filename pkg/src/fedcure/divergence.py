"""Kullback-Leibler / Jensen-Shannon divergences in nats.

Probabilities below ``ZERO_TOL`` are treated as exact zeros, and the
convention 0 * ln(0 / x) = 0 applies.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .entities import LabelDistribution
from .errors import InsufficientCoalitions, ShapeError, UnboundedDivergence

ZERO_TOL = 1e-15

DistLike = Union[LabelDistribution, Sequence[float], np.ndarray]


def _probs(d: DistLike) -> np.ndarray:
    p = d.probs if isinstance(d, LabelDistribution) else np.asarray(d, dtype=float)
    return np.where(p < ZERO_TOL, 0.0, p)


def _kl_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    support = p > 0
    if np.any(support & (q <= 0)):
        raise UnboundedDivergence("p has mass where q has none")
    out = np.zeros_like(p)
    out[support] = p[support] * np.log(p[support] / q[support])
    return out


def kl(p: DistLike, q: DistLike) -> float:
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ShapeError(f"length mismatch: {p.shape} vs {q.shape}")
    if p is q or np.array_equal(p, q):
        return 0.0
    return float(max(_kl_terms(p, q).sum(), 0.0))


def js(p: DistLike, q: DistLike) -> float:
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ShapeError(f"length mismatch: {p.shape} vs {q.shape}")
    mix = 0.5 * (p + q)
    val = 0.5 * (_kl_terms(p, mix).sum() + _kl_terms(q, mix).sum())
    return float(min(max(val, 0.0), np.log(2.0)))


def pairwise_js(probs: np.ndarray) -> np.ndarray:
    """Symmetric (M, M) matrix of JS values between the rows of ``probs``."""
    P = np.where(probs < ZERO_TOL, 0.0, np.asarray(probs, dtype=float))
    mix = 0.5 * (P[:, None, :] + P[None, :, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(P[:, None, :] > 0, P[:, None, :] * np.log(P[:, None, :] / mix), 0.0)
    val = 0.5 * (t1.sum(axis=2) + t1.sum(axis=2).T)
    val = np.clip(val, 0.0, np.log(2.0))
    np.fill_diagonal(val, 0.0)
    return val


def avg_js(distributions: Sequence[DistLike]) -> float:
    m = len(distributions)
    if m < 2:
        raise InsufficientCoalitions(f"average JS needs at least 2 distributions, got {m}")
    P = np.stack([_probs(d) for d in distributions])
    return float(np.triu(pairwise_js(P), k=1).sum() / (m * (m - 1) / 2))
