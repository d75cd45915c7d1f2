"""Splittable counter-based random streams (splitmix64 core).

A run owns three independent substreams derived from its 64-bit seed: the
environment's reward draws, the estimator's Laplace draws, and the policy's
tie-breaks.  The same jitted primitives drive both the Python episode runner
and the fast kernel, so traces replay bit-exactly across the two paths.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as _k

MASK64 = (1 << 64) - 1

# substream keys
KEY_ENV = 1
KEY_EST = 2
KEY_POL = 3


def derive_seed(seed: int, key: int) -> int:
    """Mix (seed, key) into a fresh 64-bit stream state."""
    return int(_k.sm64_mix(np.uint64(seed & MASK64), np.uint64(key & MASK64)))


class SplitStream:
    """Sequential view over one splitmix64 stream.

    The state is stored as a plain int and re-wrapped as uint64 on every
    kernel call: the jitted functions hand back Python ints, and feeding one
    straight back would get typed as int64 (overflow past 2^63).
    """

    def __init__(self, state: int):
        self.state = int(state) & MASK64

    @classmethod
    def from_seed(cls, seed: int, key: int) -> "SplitStream":
        return cls(derive_seed(seed, key))

    def split(self, key: int) -> "SplitStream":
        return SplitStream(derive_seed(self.state, key))

    def uniform(self) -> float:
        state, u = _k.next_unit(np.uint64(self.state))
        self.state = int(state)
        return u

    def below(self, k: int) -> int:
        state, j = _k.next_below(np.uint64(self.state), k)
        self.state = int(state)
        return int(j)

    def laplace(self, scale: float) -> float:
        state, v = _k.next_laplace(np.uint64(self.state), scale)
        self.state = int(state)
        return v

    def bernoulli(self, p: float) -> int:
        return 1 if self.uniform() < p else 0
