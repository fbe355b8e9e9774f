"""Counter-based random streams.

Every stream is SplitMix64: the i-th output is a fixed mixing function of
``seed + i * GOLDEN``.  The same arithmetic is available element-wise on
numpy ``uint64`` arrays so that a batch of replicas reproduces exactly the
numbers a scalar :class:`RngStream` would give for each replica seed.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed of replica ``index`` under ``master``; pure function of both."""
    return mix64((master & MASK64) ^ mix64((index * GOLDEN + 0x632BE59BD9B4E019) & MASK64))


class RngStream:
    """Single-owner uniform stream.  Never share one between trajectories."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV53


# -- vectorized twin ---------------------------------------------------------

_G = np.uint64(GOLDEN)
_U1 = np.uint64(_C1)
_U2 = np.uint64(_C2)
_S11, _S27, _S30, _S31 = (np.uint64(s) for s in (11, 27, 30, 31))


class BatchStream:
    """One independent :class:`RngStream` per element, advanced in lockstep."""

    def __init__(self, seeds):
        self.state = np.array([s & MASK64 for s in seeds], dtype=np.uint64)

    def uniform(self) -> np.ndarray:
        self.state += _G
        z = self.state.copy()
        z ^= z >> _S30
        z *= _U1
        z ^= z >> _S27
        z *= _U2
        z ^= z >> _S31
        return (z >> _S11).astype(np.float64) * _INV53
