"""
Seeded random number generation
"""
import math

import numpy as np

SEED_MASK = (1 << 64) - 1


class Rng:
    """Deterministic generator over numpy's PCG64 bit generator

    PCG64 output is specified bit-for-bit by numpy, so equal seeds give equal
    draws on every platform.
    """

    def __init__(self, seed=0):
        self.seed = int(seed) & SEED_MASK
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low, high, shape):
        return self._generator.uniform(low, high, size=shape)

    def normal(self, shape, scale=1.0):
        return self._generator.normal(0.0, scale, size=shape)

    def integers(self, low, high, shape=None):
        return self._generator.integers(low, high, size=shape)

    def permutation(self, n):
        return self._generator.permutation(n)

    def choice(self, n, size, replace=False):
        return self._generator.choice(n, size=size, replace=replace)

    def glorot(self, shape):
        """uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out))"""
        fan_out, fan_in = shape[0], shape[-1]
        r = math.sqrt(6.0 / (fan_in + fan_out))
        return self.uniform(-r, r, shape)

    def fork(self, offset):
        """Independent child generator, reproducible from (seed, offset)"""
        return Rng((self.seed * 1_000_003 + int(offset)) & SEED_MASK)

    def __repr__(self):
        return f"<Rng seed={self.seed}>"
