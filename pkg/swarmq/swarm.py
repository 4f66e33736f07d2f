"""
Swarm state, run parameters and the clamped kinematic update rules.

Vector fields are stored structure-of-arrays, axis-major: the flat index of
(particle i, axis d) is d * particle_cnt + i, so reshaping a field to
(dims, particle_cnt) gives one contiguous row per axis.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from swarmq.config import DEFAULT_GROUP_SIZE, DEFAULT_C1, DEFAULT_C2, DEFAULT_W
from swarmq.errors import ConfigurationError
from swarmq.fitness import FitnessFn
from swarmq.rng import MAX_DIMS, MAX_ITERATION, MAX_PARTICLES, RngKey, Slot, uniform01_block, uniform_range_block
from swarmq.runtime import GlobalLock


class PsoParams(BaseModel):
    """Immutable run parameters shared read-only by every worker"""

    model_config = ConfigDict(frozen=True)

    w: float = Field(DEFAULT_W, description="Inertia weight")
    c1: float = Field(DEFAULT_C1, description="Cognitive coefficient")
    c2: float = Field(DEFAULT_C2, description="Social coefficient")
    min_pos: float = Field(-100.0, description="Lower position bound of every axis")
    max_pos: float = Field(100.0, description="Upper position bound of every axis")
    min_v: Optional[float] = Field(None, description="Lower velocity bound; defaults to -max_v")
    max_v: Optional[float] = Field(None, description="Upper velocity bound; defaults to (max_pos - min_pos) / 2")
    particle_cnt: int = Field(..., description="Number of particles")
    dims: int = Field(1, description="Number of axes")
    max_iter: int = Field(..., description="Number of iterations")
    group_size: int = Field(DEFAULT_GROUP_SIZE, description="Lanes per worker group")

    @model_validator(mode="before")
    @classmethod
    def _default_velocity_bounds(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for name in ("min_pos", "max_pos"):
                if name in data and data[name] is None:
                    raise ConfigurationError(f"{name} must be a finite number (got None)")
            min_pos = float(data.get("min_pos", -100.0))
            max_pos = float(data.get("max_pos", 100.0))
            if data.get("max_v") is None:
                data["max_v"] = (max_pos - min_pos) / 2.0
            if data.get("min_v") is None:
                data["min_v"] = -float(data["max_v"])
        return data

    @model_validator(mode="after")
    def _check(self) -> "PsoParams":
        check_params(self)
        return self

    @property
    def n_groups(self) -> int:
        return -(-self.particle_cnt // self.group_size)


def check_params(params: PsoParams) -> None:
    """Raise ConfigurationError naming the first violated bound."""
    for name in ("w", "c1", "c2", "min_pos", "max_pos", "min_v", "max_v"):
        value = getattr(params, name)
        if value is None or not math.isfinite(value):
            raise ConfigurationError(f"{name} must be a finite number (got {value})")
    if not params.min_pos < params.max_pos:
        raise ConfigurationError(f"min_pos must be < max_pos (got {params.min_pos} >= {params.max_pos})")
    # min_v == max_v is allowed: it pins every velocity to one value
    if not params.min_v <= params.max_v:
        raise ConfigurationError(f"min_v must be <= max_v (got {params.min_v} > {params.max_v})")
    if not 1 <= params.particle_cnt <= MAX_PARTICLES:
        raise ConfigurationError(f"particle_cnt must be in [1, {MAX_PARTICLES}] (got {params.particle_cnt})")
    if not 1 <= params.dims <= MAX_DIMS:
        raise ConfigurationError(f"dims must be in [1, {MAX_DIMS}] (got {params.dims})")
    if not 1 <= params.max_iter <= MAX_ITERATION:
        raise ConfigurationError(f"max_iter must be in [1, {MAX_ITERATION}] (got {params.max_iter})")
    if params.group_size < 1:
        raise ConfigurationError(f"group_size must be >= 1 (got {params.group_size})")


@dataclass
class SwarmState:
    """Structure-of-arrays particle state"""

    particle_cnt: int
    dims: int
    positions: np.ndarray
    velocities: np.ndarray
    fitness: np.ndarray
    pbest_pos: np.ndarray
    pbest_fit: np.ndarray

    def __post_init__(self) -> None:
        vec = self.particle_cnt * self.dims
        for name in ("positions", "velocities", "pbest_pos"):
            if getattr(self, name).shape != (vec,):
                raise ValueError(f"{name} must have {vec} elements")
        for name in ("fitness", "pbest_fit"):
            if getattr(self, name).shape != (self.particle_cnt,):
                raise ValueError(f"{name} must have {self.particle_cnt} elements")

    # (dims, particle_cnt) views over the flat axis-major fields
    @property
    def pos_matrix(self) -> np.ndarray:
        return self.positions.reshape(self.dims, self.particle_cnt)

    @property
    def vel_matrix(self) -> np.ndarray:
        return self.velocities.reshape(self.dims, self.particle_cnt)

    @property
    def pbest_matrix(self) -> np.ndarray:
        return self.pbest_pos.reshape(self.dims, self.particle_cnt)

    def position_of(self, i: int) -> np.ndarray:
        return gather(self.positions, i, self.particle_cnt).copy()

    def copy(self) -> "SwarmState":
        return SwarmState(
            particle_cnt=self.particle_cnt,
            dims=self.dims,
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            fitness=self.fitness.copy(),
            pbest_pos=self.pbest_pos.copy(),
            pbest_fit=self.pbest_fit.copy(),
        )


@dataclass
class GlobalBest:
    """Swarm-wide best with its lock word.

    particle and iteration record which particle produced the best and in which
    iteration, so equal-fitness candidates arriving in the same iteration can be
    ordered by particle index.
    """

    gbest_fit: float
    gbest_pos: np.ndarray
    particle: int = 0
    iteration: int = 0
    lock: GlobalLock = field(default_factory=GlobalLock, repr=False)

    def record(self, fit: float, pos: np.ndarray, particle: int, iteration: int) -> None:
        # Fitness is written last so a reader that sees the new value also sees its provenance
        self.iteration = iteration
        self.particle = particle
        self.gbest_pos = np.array(pos, dtype=np.float64, copy=True)
        self.gbest_fit = float(fit)

    def beaten_by(self, fit: float, particle: int, iteration: int) -> bool:
        """Strictly better, or equal and earlier in particle order within the same iteration."""
        if fit > self.gbest_fit:
            return True
        return fit == self.gbest_fit and self.iteration == iteration and particle < self.particle


def flat_index(i: int, d: int, particle_cnt: int) -> int:
    return d * particle_cnt + i


def gather(flat: np.ndarray, i: int, particle_cnt: int) -> np.ndarray:
    """All axes of particle i (a strided view)."""
    return flat[i::particle_cnt]


def scatter(flat: np.ndarray, i: int, particle_cnt: int, values: np.ndarray) -> None:
    flat[i::particle_cnt] = values


def init_swarm(params: PsoParams, seed: RngKey, fitness_fn: FitnessFn) -> tuple[SwarmState, GlobalBest]:
    """Uniform random positions and velocities, fitness, pbest and the initial gbest."""
    check_params(params)
    n, dims = params.particle_cnt, params.dims
    particles = np.arange(n)

    pos = uniform_range_block(seed, 0, particles, dims, Slot.INIT_POS, params.min_pos, params.max_pos)
    vel = uniform_range_block(seed, 0, particles, dims, Slot.INIT_VEL, params.min_v, params.max_v)
    pos = np.clip(pos, params.min_pos, params.max_pos)
    vel = np.clip(vel, params.min_v, params.max_v)

    fit = fitness_fn.evaluate_batch(pos)
    state = SwarmState(
        particle_cnt=n,
        dims=dims,
        positions=pos.ravel(),
        velocities=vel.ravel(),
        fitness=fit.copy(),
        pbest_pos=pos.ravel().copy(),
        pbest_fit=fit.copy(),
    )

    # argmax returns the first occurrence, i.e. the lowest particle index on ties
    best = int(np.argmax(state.pbest_fit))
    gbest = GlobalBest(
        gbest_fit=float(state.pbest_fit[best]),
        gbest_pos=state.pbest_matrix[:, best].copy(),
        particle=best,
        iteration=0,
    )
    return state, gbest


def clamp(values, lo: float, hi: float):
    """Saturate into [lo, hi]."""
    return np.minimum(np.maximum(values, lo), hi)


def update_velocity(
    i: int,
    state: SwarmState,
    params: PsoParams,
    gbest_pos: np.ndarray,
    r1: np.ndarray,
    r2: np.ndarray,
) -> np.ndarray:
    """New velocity of particle i, clamped into [min_v, max_v]."""
    n = state.particle_cnt
    v = gather(state.velocities, i, n)
    x = gather(state.positions, i, n)
    pb = gather(state.pbest_pos, i, n)
    new_v = params.w * v + params.c1 * r1 * (pb - x) + params.c2 * r2 * (gbest_pos - x)
    return clamp(new_v, params.min_v, params.max_v)


def update_position(i: int, state: SwarmState, params: PsoParams) -> np.ndarray:
    """pos + v (the already updated velocity), clamped into [min_pos, max_pos]."""
    n = state.particle_cnt
    return clamp(gather(state.positions, i, n) + gather(state.velocities, i, n), params.min_pos, params.max_pos)


def update_pbest(i: int, state: SwarmState, fit: float) -> bool:
    if fit > state.pbest_fit[i]:
        state.pbest_fit[i] = fit
        scatter(state.pbest_pos, i, state.particle_cnt, gather(state.positions, i, state.particle_cnt))
        return True
    return False


def step_lanes(
    state: SwarmState,
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    iteration: int,
    start: int,
    stop: int,
    gbest_pos: np.ndarray,
) -> np.ndarray:
    """Velocity, position, fitness and pbest updates for particles [start, stop).

    The lanes of a group run as one vector operation per step; the arithmetic is
    element for element the same as update_velocity / update_position /
    update_pbest, so results match the one-particle path bit for bit.
    Returns the fresh fitness of the lanes.
    """
    lanes = np.arange(start, stop)
    dims = state.dims
    sl = slice(start, stop)
    P, V, PB = state.pos_matrix, state.vel_matrix, state.pbest_matrix

    x = P[:, sl]
    v = V[:, sl]
    pb = PB[:, sl]
    r1 = uniform01_block(key, iteration, lanes, dims, Slot.R1)
    r2 = uniform01_block(key, iteration, lanes, dims, Slot.R2)

    new_v = params.w * v + params.c1 * r1 * (pb - x) + params.c2 * r2 * (gbest_pos[:, None] - x)
    new_v = clamp(new_v, params.min_v, params.max_v)
    new_x = clamp(x + new_v, params.min_pos, params.max_pos)
    fit = fitness_fn.evaluate_batch(new_x)

    V[:, sl] = new_v
    P[:, sl] = new_x
    state.fitness[sl] = fit

    improved = fit > state.pbest_fit[sl]
    if improved.any():
        cols = lanes[improved]
        PB[:, cols] = new_x[:, improved]
        state.pbest_fit[cols] = fit[improved]
    return fit
