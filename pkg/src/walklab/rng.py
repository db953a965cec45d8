"""Counter-based random numbers for the coalescence simulators.

Draw ``i`` of the stream with key ``k`` is the SplitMix64 output

    mix64(k + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)

and the uniform variate is its top 53 bits scaled into ``[0, 1)``. The
particle ``a`` of an ``n``-particle system uses draw ``(t - 1) * n + a`` for
its move at time ``t``, so any process that looks at a particle at a given
time sees the same variate regardless of which other particles it tracks.
Replica ``r`` of a run with master seed ``s`` uses key ``split(s, r)``,
which is draw ``r`` of the stream keyed by ``s``.

This module is the pure-Python reference; the compiled kernels carry an
identical copy of the arithmetic.
"""
from __future__ import annotations

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * MIX1) & MASK
    z = ((z ^ (z >> 27)) * MIX2) & MASK
    return z ^ (z >> 31)


def draw(key: int, i: int) -> int:
    return mix64(key + (i + 1) * GAMMA)


def uniform(key: int, i: int) -> float:
    return (draw(key, i) >> 11) * INV_2_53


def split(seed: int, r: int) -> int:
    return draw(seed & MASK, r)


def particle_uniform(key: int, n: int, a: int, t: int) -> float:
    """Variate driving particle ``a`` (0-based) from time ``t - 1`` to ``t``."""
    return uniform(key, (t - 1) * n + a)
