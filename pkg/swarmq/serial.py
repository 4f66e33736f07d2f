"""
Serial reference engine: the oracle the parallel engines are checked against.

Particles are processed one at a time in index order. Velocities are steered
by the global best as it stood when the iteration began, while the global best
record itself is updated online, right after each particle's personal best.

The per-particle arithmetic is element for element that of update_velocity /
update_position / update_pbest, applied to (dims,) column views of the
axis-major fields.
"""

import time
from typing import Optional

import numpy as np

from swarmq.fitness import FitnessFn
from swarmq.log import get_logger
from swarmq.result import Observer, RunResult, notify
from swarmq.rng import RngKey, Slot, uniform01_block
from swarmq.swarm import PsoParams, clamp, init_swarm

logger = get_logger(__name__)

ENGINE_NAME = "serial"


def run_serial(
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    observer: Optional[Observer] = None,
) -> RunResult:
    state, gbest = init_swarm(params, key, fitness_fn)
    n, dims = params.particle_cnt, params.dims
    particles = np.arange(n)
    trace = np.empty(params.max_iter)
    occupancy = np.zeros(params.max_iter, dtype=np.int64)

    X, V, PB = state.pos_matrix, state.vel_matrix, state.pbest_matrix
    fresh, pbest_fit = state.fitness, state.pbest_fit
    w, c1, c2 = params.w, params.c1, params.c2
    evaluate = fitness_fn.evaluator
    # clamped positions stay in the run box; only a run box wider than the fitness box needs per-particle checks
    check_each = not fitness_fn.covers(params.min_pos, params.max_pos)

    logger.info("run_started", engine=ENGINE_NAME, particles=n, dims=dims, iters=params.max_iter, seed=key.seed)
    t0 = time.perf_counter()
    for t in range(1, params.max_iter + 1):
        steer = gbest.gbest_pos.copy()
        snapshot = gbest.gbest_fit
        r1 = uniform01_block(key, t, particles, dims, Slot.R1)
        r2 = uniform01_block(key, t, particles, dims, Slot.R2)
        improving = 0

        for i in range(n):
            x = X[:, i]
            new_v = clamp(
                w * V[:, i] + c1 * r1[:, i] * (PB[:, i] - x) + c2 * r2[:, i] * (steer - x),
                params.min_v,
                params.max_v,
            )
            V[:, i] = new_v
            X[:, i] = clamp(x + new_v, params.min_pos, params.max_pos)

            column = X[:, i : i + 1]
            if check_each:
                fitness_fn.check_domain(column)
            fit = float(evaluate(column)[0])
            fresh[i] = fit
            if fit > pbest_fit[i]:
                pbest_fit[i] = fit
                PB[:, i] = X[:, i]
            if fit > snapshot:
                improving += 1
            if pbest_fit[i] > gbest.gbest_fit:
                gbest.record(pbest_fit[i], PB[:, i], i, t)

        if not check_each:
            fitness_fn.check_domain(X)
        trace[t - 1] = gbest.gbest_fit
        occupancy[t - 1] = improving
        notify(observer, t, state, gbest)
    seconds = time.perf_counter() - t0

    logger.info("run_completed", engine=ENGINE_NAME, gbest_fit=gbest.gbest_fit, seconds=round(seconds, 6))
    return RunResult(
        engine=ENGINE_NAME,
        gbest_fit=gbest.gbest_fit,
        gbest_pos=gbest.gbest_pos.copy(),
        gbest_particle=gbest.particle,
        trace=trace,
        occupancy=occupancy,
        seconds=seconds,
    )
