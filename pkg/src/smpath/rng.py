"""Reproducible random streams.

Every stochastic computation in the package draws from an ``RngStream``:
a (master seed, stream index) pair.  The pair is mixed into one 64-bit
seed for a PCG64 bit generator, so replicate ``i`` of an experiment uses
``RngStream(seed, i)`` and can be recomputed in isolation.

Mixing function (fixed, part of the public contract)::

    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)

which is the SplitMix64 output function applied to a Weyl-sequence step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    z = (seed + (index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngStream:
    """A named substream of a master seed."""

    seed: int
    index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.index < 0:
            raise ValueError(f"stream index must be nonnegative, got {self.index}")

    @property
    def substream_seed(self) -> int:
        return mix64(self.seed, self.index)

    def generator(self) -> np.random.Generator:
        """Fresh generator; calling twice gives two identical sequences."""
        return np.random.Generator(np.random.PCG64(self.substream_seed))

    def child(self, index: int) -> "RngStream":
        """Substream keyed by this stream's mixed seed (for nested replicates)."""
        return RngStream(self.substream_seed, index)


def replicate_streams(seed: int, count: int) -> list[RngStream]:
    return [RngStream(seed, i) for i in range(count)]
