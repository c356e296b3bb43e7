"""Deterministic seeding helpers.

All stochastic code in the toolkit draws from generators created here, so
that identical seeds give bit-identical results on every platform.  Seeds
for sub-streams are derived by hashing a tuple of parts (integers and
strings) through SplitMix64, which is also the counter-based generator the
Monte Carlo kernels use.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64(z: int) -> int:
    """One SplitMix64 finalization round (pure int, 64-bit wrapping)."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts) -> int:
    """Fold integers/strings into a 64-bit sub-stream seed."""
    h = 0x8BADF00D5EEDC0DE
    for part in parts:
        if isinstance(part, str):
            for b in part.encode("utf-8"):
                h = splitmix64(h ^ b)
        else:
            h = splitmix64(h ^ (int(part) & MASK64))
    return h


def generator(seed: int, *parts) -> np.random.Generator:
    """Counter-based (Philox) generator for the sub-stream (seed, *parts)."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *parts)))
