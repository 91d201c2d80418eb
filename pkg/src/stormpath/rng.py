"""SplitMix64 streams and seed derivation.

Every run owns one :class:`SplitMix64` stream. The stream is counter based
(state ``seed + n * GAMMA``), so a batch of ``n`` draws can be produced with
vectorised ``uint64`` arithmetic and still match the one-at-a-time sequence
used by the compiled kernel bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, multiplier: int, repeat: int) -> int:
    """Seed for repeat ``repeat`` of multiplier ``multiplier``.

    Injective for ``repeat < 2**32`` because the finalizer is a bijection.
    """
    return mix64((master_seed & MASK64) ^ ((multiplier << 32) + repeat))


class SplitMix64:
    """Counter-based SplitMix64 generator producing doubles in [0, 1)."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.seed + self.counter * GAMMA)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` draws as a float64 array."""
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        k = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        state = np.uint64(self.seed) + k * np.uint64(GAMMA)
        self.counter += n
        z = _mix64_array(state)
        return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
