"""
Counter-based random streams.

Every draw is a pure function of the run seed and the coordinates
(iteration, particle, axis, slot), so engines that visit particles in any
order, on any number of threads, consume exactly the same numbers.

The coordinates are packed into one 64-bit counter:

    iteration (30 bits) | particle (20 bits) | axis (12 bits) | slot (2 bits)

and pushed through a keyed SplitMix64-style finalizer. Each mixing round is a
bijection on 64-bit words, so for a fixed seed distinct counters give distinct
outputs. The top 53 bits are scaled by 2**-53, which yields exactly
representable doubles in [0, 1).
"""

from enum import IntEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from swarmq.errors import RngArgumentError

ITERATION_BITS = 30
PARTICLE_BITS = 20
AXIS_BITS = 12
SLOT_BITS = 2

MAX_ITERATION = (1 << ITERATION_BITS) - 1
MAX_PARTICLES = 1 << PARTICLE_BITS
MAX_DIMS = 1 << AXIS_BITS

_AXIS_SHIFT = np.uint64(SLOT_BITS)
_PARTICLE_SHIFT = np.uint64(SLOT_BITS + AXIS_BITS)
_ITERATION_SHIFT = np.uint64(SLOT_BITS + AXIS_BITS + PARTICLE_BITS)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 2.0**-53


class Slot(IntEnum):
    """Which quantity a draw feeds"""

    R1 = 0
    R2 = 1
    INIT_POS = 2
    INIT_VEL = 3


class RngKey(BaseModel):
    """Seed of a run; equal keys define equal streams"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2**64, description="64-bit seed")


class RngDraw(BaseModel):
    """Coordinates of a single draw"""

    model_config = ConfigDict(frozen=True)

    iteration: int = Field(..., ge=0, le=MAX_ITERATION, description="Iteration index, 0 = initialization")
    particle: int = Field(..., ge=0, lt=MAX_PARTICLES, description="Particle index")
    axis: int = Field(..., ge=0, lt=MAX_DIMS, description="Axis index")
    slot: Slot = Field(..., description="Quantity the draw feeds")


def _fmix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


def _stream_keys(key: RngKey) -> tuple[np.ndarray, np.ndarray]:
    k0 = _fmix64(np.array([key.seed], dtype=np.uint64) + _GOLDEN)
    k1 = _fmix64(k0 ^ _GOLDEN)
    return k0, k1


def _bits(key: RngKey, counters: np.ndarray) -> np.ndarray:
    k0, k1 = _stream_keys(key)
    return _fmix64(_fmix64(counters + k0) ^ k1)


def _to_unit(bits: np.ndarray) -> np.ndarray:
    return (bits >> _S11).astype(np.float64) * _TO_UNIT


def pack_counters(iteration: int, particles: np.ndarray, axes: np.ndarray, slot: Slot) -> np.ndarray:
    """Pack coordinates into 64-bit counters; particles and axes broadcast."""
    it = np.uint64(iteration) << _ITERATION_SHIFT
    p = np.asarray(particles, dtype=np.uint64) << _PARTICLE_SHIFT
    a = np.asarray(axes, dtype=np.uint64) << _AXIS_SHIFT
    return it | p | a | np.uint64(int(slot))


def uniform01(key: RngKey, draw: RngDraw) -> float:
    """Uniform double in [0, 1) for one coordinate tuple."""
    counters = pack_counters(draw.iteration, np.array([draw.particle]), np.array([draw.axis]), draw.slot)
    return float(_to_unit(_bits(key, counters))[0])


def uniform_range(key: RngKey, draw: RngDraw, lo: float, hi: float) -> float:
    """lo + uniform01 * (hi - lo)"""
    if lo > hi:
        raise RngArgumentError(f"lo must be <= hi (got lo={lo}, hi={hi})")
    return lo + uniform01(key, draw) * (hi - lo)


def uniform01_block(key: RngKey, iteration: int, particles: np.ndarray, dims: int, slot: Slot) -> np.ndarray:
    """Draws for every axis of a set of particles, shaped (dims, len(particles)).

    Element [d, j] is bitwise equal to uniform01 at (iteration, particles[j], d, slot).
    """
    if not 0 <= iteration <= MAX_ITERATION:
        raise RngArgumentError(f"iteration out of range: {iteration}")
    if not 1 <= dims <= MAX_DIMS:
        raise RngArgumentError(f"dims out of range: {dims}")
    particles = np.atleast_1d(np.asarray(particles, dtype=np.int64))
    axes = np.arange(dims, dtype=np.uint64)[:, None]
    counters = pack_counters(iteration, particles[None, :], axes, slot)
    return _to_unit(_bits(key, counters))


def uniform_range_block(
    key: RngKey,
    iteration: int,
    particles: np.ndarray,
    dims: int,
    slot: Slot,
    lo: float,
    hi: float,
) -> np.ndarray:
    if lo > hi:
        raise RngArgumentError(f"lo must be <= hi (got lo={lo}, hi={hi})")
    return lo + uniform01_block(key, iteration, particles, dims, slot) * (hi - lo)
