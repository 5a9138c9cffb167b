"""Seed derivation and the bounded-integer draw shared by both kernel backends.

Both backends consume the bit generator through raw 64-bit outputs only, so a
given seed produces the same run whichever backend is active.
"""

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1


def splitmix64(x):
    """One step of the SplitMix64 output function (Steele, Lea & Flood)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master, *path):
    """Deterministic 64-bit seed for a position in a (master, cell, run, ...) tree."""
    h = splitmix64(int(master) & MASK64)
    for p in path:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def make_rng(seed):
    """Generator used everywhere in the package (PCG64)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def bounded(bit_generator, r):
    """Uniform integer in [0, r) from one raw draw (Lemire's method on the high 32 bits).

    Mirrors the compiled kernel exactly; r must satisfy 0 < r < 2**32.
    """
    x = int(bit_generator.random_raw()) >> 32
    m = x * r
    low = m & MASK32
    if low < r:
        thresh = ((1 << 32) - r) % r
        while low < thresh:
            x = int(bit_generator.random_raw()) >> 32
            m = x * r
            low = m & MASK32
    return m >> 32
