"""Deterministic random-stream derivation.

Every stochastic routine takes an explicit seed or ``numpy.random.Generator``.
Substreams are derived from integer keys, so replicas and lazily expanded
structures are reproducible no matter in which order they are evaluated.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed, *keys) -> np.random.Generator:
    """Generator for substream ``keys`` of the master ``seed``.

    ``stream(s, a, b)`` is independent of ``stream(s, a, c)`` for ``b != c``
    and stable across runs and platforms.
    """
    if isinstance(seed, np.random.Generator):
        # derive a fresh integer root from the generator, then key it
        seed = int(seed.integers(0, 2**63 - 1))
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def as_generator(seed_or_rng) -> np.random.Generator:
    """Pass through a Generator, or build one from an integer seed."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def mix64(a: int, b: int) -> int:
    """Stable splitmix-style combination of two integer keys."""
    x = (a * 0x9E3779B97F4A7C15 + b + 0xD1B54A32D192ED03) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


class UniformBuffer:
    """Buffered uniform draws; one numpy call per block instead of per event."""

    __slots__ = ("_rng", "_buf", "_i", "_n")

    def __init__(self, rng: np.random.Generator, block: int = 8192):
        self._rng = rng
        self._n = block
        self._buf = rng.random(block)
        self._i = 0

    def __call__(self) -> float:
        i = self._i
        if i >= self._n:
            self._buf = self._rng.random(self._n)
            i = 0
        self._i = i + 1
        return self._buf[i]
