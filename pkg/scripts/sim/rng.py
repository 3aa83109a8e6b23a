"""Deterministic SplitMix64 random source.

All randomness in the simulator flows through :class:`Rng64` values. The
generator is a pure function of its 64-bit state: every helper takes an
``Rng64`` and returns the advanced one alongside the draw, so two runs with
the same seed see the same numbers on every platform.

Block helpers (:func:`rng_block`, :func:`uniforms`, :func:`gaussians`)
compute many outputs at once with numpy ``uint64`` arithmetic. Drawing a
block of ``n`` values advances the state exactly as ``n`` scalar calls to
:func:`rng_next` would and yields the same values in the same order.

Named substreams keep unrelated consumers (exogenous walk, per-hour demand,
sensors, training) from shifting each other when one of them draws more
or fewer numbers.

Example:
    >>> rng = Rng64(0)
    >>> rng, value = rng_next(rng)
    >>> hex(value)
    '0xe220a8397b1dcdaf'
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    'MASK64',
    'Rng64',
    'Stream',
    'rng_next',
    'rng_block',
    'next_uniform',
    'next_gaussian',
    'next_poisson',
    'uniforms',
    'gaussians',
    'substream',
]

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB

_TWO_POW_53 = float(1 << 53)
_POISSON_INVERSION_LIMIT = 30.0


class Stream(IntEnum):
    """Substream keys. Values are part of the reproducibility contract."""

    EXOGENOUS = 1
    DEMAND = 2
    SENSORS = 3
    POPULATION = 4
    FRAMES = 5
    TRAINING = 6
    EXPLORATION = 7
    HOLDOUT = 8
    FACTORS = 9
    SHUFFLE = 10


@dataclass(frozen=True, slots=True)
class Rng64:
    """Immutable SplitMix64 state."""

    state: int

    def __post_init__(self) -> None:
        if not 0 <= self.state <= MASK64:
            raise ValueError(f"Rng64 state must be an unsigned 64-bit integer, got {self.state}")


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def rng_next(rng: Rng64) -> tuple[Rng64, int]:
    """Advance the state by the golden gamma and return the mixed output."""
    state = (rng.state + GOLDEN_GAMMA) & MASK64
    return Rng64(state), _mix(state)


def rng_block(rng: Rng64, n: int) -> tuple[Rng64, np.ndarray]:
    """Return the next ``n`` raw outputs as a ``uint64`` array."""
    if n < 0:
        raise ValueError(f"block size must be non-negative, got {n}")
    steps = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over='ignore'):
        z = np.uint64(rng.state) + steps * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
        z = z ^ (z >> np.uint64(31))
    return Rng64((rng.state + n * GOLDEN_GAMMA) & MASK64), z


def next_uniform(rng: Rng64) -> tuple[Rng64, float]:
    """Uniform real in [0, 1) from the top 53 bits."""
    rng, x = rng_next(rng)
    return rng, (x >> 11) / _TWO_POW_53


def next_gaussian(rng: Rng64) -> tuple[Rng64, float]:
    """Standard normal draw via one Box–Muller pair (cosine branch)."""
    rng, u1 = next_uniform(rng)
    rng, u2 = next_uniform(rng)
    radius = math.sqrt(-2.0 * math.log(1.0 - u1))
    return rng, radius * math.cos(2.0 * math.pi * u2)


def next_poisson(rng: Rng64, rate: float) -> tuple[Rng64, int]:
    """Poisson draw: CDF inversion below rate 30, rounded normal above."""
    if rate < 0 or not math.isfinite(rate):
        raise ValueError(f"Poisson rate must be finite and non-negative, got {rate}")
    if rate < _POISSON_INVERSION_LIMIT:
        rng, u = next_uniform(rng)
        p = math.exp(-rate)
        cdf = p
        k = 0
        while u > cdf and p > 0.0:
            k += 1
            p *= rate / k
            cdf += p
        return rng, k
    rng, z = next_gaussian(rng)
    return rng, max(0, int(round(rate + math.sqrt(rate) * z)))


def uniforms(rng: Rng64, n: int) -> tuple[Rng64, np.ndarray]:
    """``n`` uniforms in [0, 1), identical to ``n`` calls of :func:`next_uniform`."""
    rng, raw = rng_block(rng, n)
    return rng, (raw >> np.uint64(11)).astype(np.float64) / _TWO_POW_53


def gaussians(rng: Rng64, n: int) -> tuple[Rng64, np.ndarray]:
    """``n`` standard normals from the uniforms ``n`` calls of :func:`next_gaussian` would consume."""
    rng, u = uniforms(rng, 2 * n)
    u1 = u[0::2]
    u2 = u[1::2]
    return rng, np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(2.0 * np.pi * u2)


def substream(seed: int, *keys: int) -> Rng64:
    """Derive an independent generator for ``(seed, *keys)``."""
    state = _mix((seed + GOLDEN_GAMMA) & MASK64)
    for key in keys:
        state = _mix(((state ^ ((int(key) + 1) * MIX_1)) + GOLDEN_GAMMA) & MASK64)
    return Rng64(state)
