"""Hierarchical seeded randomness.

One :class:`RandomSource` per experiment. Consumers ask for a named child
stream (``rng.stream("latency", m)``) instead of sharing a generator, so that
adding a client or changing a scheduler never shifts another owner's draws.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part: str | int) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream index must be nonnegative")
        return int(part)
    # crc32 is stable across interpreter runs, unlike hash()
    return zlib.crc32(str(part).encode("utf-8")) | (1 << 32)


class RandomSource:
    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._path = tuple(path)

    def child(self, *parts: str | int) -> "RandomSource":
        return RandomSource(self.seed, self._path + tuple(_key(p) for p in parts))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self._path)
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, *parts: str | int) -> np.random.Generator:
        """Fresh generator for the named child; same parts -> same draws."""
        return self.child(*parts).generator()

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, path={self._path})"


def seeded_rng(seed: int) -> RandomSource:
    return RandomSource(seed)
