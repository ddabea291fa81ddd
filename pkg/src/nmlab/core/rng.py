"""Portable SplitMix64 stream used for experiment seeding.

Constants (the interface other implementations must reproduce):

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

all arithmetic modulo 2**64. A uniform double in [0, 1) is
``(z >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit generator; one instance per trial stream."""

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _finalize(self.state)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        """Draw ``size`` values uniform on [low, high) in stream order."""
        span = high - low
        return np.array(
            [low + span * self.next_double() for _ in range(size)], dtype=np.float64
        )


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed.

    Each part is absorbed by adding it to the running state and
    finalizing, so (base, cell, trial) triples give independent streams.
    """
    state = 0
    for part in parts:
        state = (state + _GOLDEN + (part & _MASK)) & _MASK
        state = _finalize(state)
    return state
