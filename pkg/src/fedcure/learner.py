"""Synthetic non-IID classification data and a multinomial logistic regression learner.

Parameters are one flat vector: a (K, d) weight matrix in row-major order
followed by K biases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entities import ClientProfile, Partition, label_groups
from .errors import EmptyDataset, InfeasibleShard, ShapeError


@dataclass(frozen=True)
class Split:
    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,)

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class SyntheticDataset:
    train: Split
    test: Split
    n_classes: int
    means: np.ndarray

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def class_means(n_classes: int, dim: int, class_sep: float, rng: np.random.Generator) -> np.ndarray:
    if n_classes == 1 or class_sep == 0:
        return np.zeros((n_classes, dim))
    if dim >= n_classes:
        # scaled one-hot: every pair is exactly class_sep apart
        means = np.zeros((n_classes, dim))
        means[np.arange(n_classes), np.arange(n_classes)] = class_sep / np.sqrt(2.0)
        return means
    means = rng.standard_normal((n_classes, dim))
    gaps = np.linalg.norm(means[:, None] - means[None, :], axis=2)
    closest = gaps[np.triu_indices(n_classes, 1)].min()
    return means * (class_sep / closest)


def generate(
    n_classes: int,
    dim: int,
    per_class_count: int | Sequence[int],
    class_sep: float,
    rng: np.random.Generator,
    test_per_class: int = 100,
) -> SyntheticDataset:
    """Unit-covariance Gaussian blobs; the test split has the same count for every class."""
    if n_classes < 1 or dim < 1:
        raise ValueError("n_classes and dim must be >= 1")
    counts = np.broadcast_to(np.asarray(per_class_count, dtype=int), (n_classes,))
    if np.any(counts < 0) or test_per_class < 1:
        raise ValueError("class counts must be nonnegative and test_per_class >= 1")
    means = class_means(n_classes, dim, class_sep, rng)

    def draw(per_class: np.ndarray) -> Split:
        labels = np.repeat(np.arange(n_classes), per_class)
        feats = means[labels] + rng.standard_normal((labels.size, dim))
        return Split(feats, labels)

    train = draw(counts)
    test = draw(np.full(n_classes, test_per_class))
    return SyntheticDataset(train=train, test=test, n_classes=n_classes, means=means)


def shard_non_iid(
    dataset: SyntheticDataset,
    clients: Sequence[ClientProfile],
    partition: Partition,
    labels_per_coalition: int,
    rng: np.random.Generator,
) -> list[np.ndarray]:
    """Disjoint train-sample indices per client, matching each client's label counts.

    Every client must only hold labels owned by its coalition in the edge
    non-IID layout; no sample is used twice.
    """
    groups = label_groups(dataset.n_classes, partition.n_coalitions, labels_per_coalition)
    pools = []
    for k in range(dataset.n_classes):
        idx = np.flatnonzero(dataset.train.labels == k)
        pools.append(list(rng.permutation(idx)))
    demand = np.zeros(dataset.n_classes, dtype=int)
    for client, m in zip(clients, partition.assignment):
        counts = np.asarray(client.label_counts)
        if counts.size != dataset.n_classes:
            raise ShapeError(f"client {client.id} has {counts.size} label counts, dataset has {dataset.n_classes} classes")
        stray = set(np.flatnonzero(counts)) - set(groups[m])
        if stray:
            raise InfeasibleShard(f"client {client.id} holds labels {sorted(stray)} outside coalition {m}'s {groups[m]}")
        demand += counts
    short = np.flatnonzero(demand > np.array([len(p) for p in pools]))
    if short.size:
        raise InfeasibleShard(f"not enough samples for labels {short.tolist()}")
    shards = []
    for client in clients:
        take = []
        for k, c in enumerate(client.label_counts):
            take += pools[k][:c]
            del pools[k][:c]
        shards.append(np.array(sorted(take), dtype=int))
    return shards


def n_params(n_classes: int, dim: int) -> int:
    return n_classes * dim + n_classes


def init_params(n_classes: int, dim: int) -> np.ndarray:
    return np.zeros(n_params(n_classes, dim))


def _unpack(params: np.ndarray, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    dim = (params.size - n_classes) // n_classes
    if params.size != n_params(n_classes, dim):
        raise ShapeError(f"parameter vector of length {params.size} does not fit {n_classes} classes")
    return params[: n_classes * dim].reshape(n_classes, dim), params[n_classes * dim :]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def loss_and_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray, n_classes: int) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over (X, y) and its gradient w.r.t. the flat parameters."""
    W, b = _unpack(params, n_classes)
    logp = _log_softmax(X @ W.T + b)
    n = y.size
    loss = -logp[np.arange(n), y].mean()
    resid = np.exp(logp)
    resid[np.arange(n), y] -= 1.0
    resid /= n
    return float(loss), np.concatenate([(resid.T @ X).ravel(), resid.sum(axis=0)])


def local_train(
    params: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    steps: int,
    lr: float,
    rng: np.random.Generator,
    batch_size: int = 16,
) -> np.ndarray:
    """``steps`` minibatch SGD steps (sampling with replacement)."""
    if lr < 0:
        raise ValueError("lr must be >= 0")
    w = params.copy()
    if lr == 0 or y.size == 0:
        return w
    for _ in range(steps):
        batch = rng.integers(0, y.size, size=min(batch_size, y.size))
        _, grad = loss_and_grad(w, X[batch], y[batch], n_classes)
        w -= lr * grad
    return w


def evaluate(params: np.ndarray, split: Split, n_classes: int) -> tuple[float, float]:
    if len(split) == 0:
        raise EmptyDataset("cannot evaluate on an empty split")
    W, b = _unpack(params, n_classes)
    logits = split.features @ W.T + b
    logp = _log_softmax(logits)
    loss = -logp[np.arange(len(split)), split.labels].mean()
    acc = (logits.argmax(axis=1) == split.labels).mean()
    return float(loss), float(acc)
