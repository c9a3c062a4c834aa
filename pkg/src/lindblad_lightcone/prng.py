"""Portable seeded random numbers for sampled model families.

The generator is xorshift64* (Vigna 2016): state ``x`` is updated by
``x ^= x >> 12; x ^= x << 25; x ^= x >> 27`` and the output is
``x * 0x2545F4914F6CDD1D mod 2**64``.  The seed is expanded into a
nonzero state with one splitmix64 step, so ``seed = 0`` is valid.
Uniform doubles take the top 53 bits.  Normals use Box-Muller.
All arithmetic is on unsigned 64-bit integers, so any language with
wrapping ``uint64`` reproduces the same stream.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import RejectedInputError

_MASK = (1 << 64) - 1
XORSHIFT_MULTIPLIER = 0x2545F4914F6CDD1D
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB


def splitmix64(seed: int) -> int:
    z = (seed + SPLITMIX_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL1) & _MASK
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL2) & _MASK
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int = 0):
        if int(seed) != seed or seed < 0:
            raise RejectedInputError(f"seed must be a non-negative integer, got {seed!r}")
        state = splitmix64(int(seed) & _MASK)
        self.state = state or SPLITMIX_GAMMA

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * XORSHIFT_MULTIPLIER) & _MASK

    def uniform(self, size: int | None = None, low: float = 0.0, high: float = 1.0):
        """Doubles in ``[low, high)``."""
        if size is None:
            return low + (high - low) * (self.next_u64() >> 11) * 2.0**-53
        return np.array([self.uniform(None, low, high) for _ in range(size)])

    def normal(self, size: int | None = None):
        if size is None:
            u1 = 1.0 - self.uniform()  # (0, 1] keeps the log finite
            u2 = self.uniform()
            return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return np.array([self.normal() for _ in range(size)])

    def complex_normal(self, size: int):
        return (self.normal(size) + 1j * self.normal(size)) / math.sqrt(2.0)
