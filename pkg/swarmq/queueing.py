"""
Queue engines.

queue: lanes whose fresh fitness beats the global best snapshot (read when the
iteration starts) append (fit, particle index) to the group queue through the
atomic counter. After the group barrier the leader lane scans the num queued
entries sequentially and writes the group winner, or the sentinel when the
queue is empty, to the aux arrays. Phase 2 applies the same queue scheme to the
aux entries in a single group.

queue-lock: the two phases are fused. Each group leader takes the global spin
lock, compares its winner with the global best and replaces it when strictly
better (or equal and lower-indexed than a record written this iteration),
then releases. The only grid-wide synchronization is the iteration boundary.

Queues hold particle indices; the winner's position is gathered from the swarm
state after selection.
"""

import time
from typing import Callable, Optional

import numpy as np

from swarmq.fitness import FitnessFn
from swarmq.log import get_logger
from swarmq.result import Observer, RunResult, notify
from swarmq.rng import RngKey
from swarmq.runtime import (
    PAD_INDEX,
    SENTINEL_FIT,
    AuxArrays,
    GroupExecutor,
    GroupLayout,
    GroupScratch,
    global_lock_acquire,
    global_lock_release,
)
from swarmq.swarm import GlobalBest, PsoParams, SwarmState, init_swarm, step_lanes

logger = get_logger(__name__)

LeaderDelay = Callable[[int], float]


def leader_scan(scratch: GroupScratch) -> tuple[float, int]:
    """Best queued entry by fitness, ties to the lower particle index.

    The running best is kept in locals; the queue itself is left untouched.
    Returns (SENTINEL_FIT, PAD_INDEX) when nothing was queued.
    """
    fits, indices = scratch.entries()
    best_fit, best_idx = SENTINEL_FIT, PAD_INDEX
    for j in range(len(fits)):
        f, i = float(fits[j]), int(indices[j])
        if f > best_fit or (f == best_fit and i < best_idx):
            best_fit, best_idx = f, i
    return best_fit, best_idx


def enqueue_candidates(scratch: GroupScratch, fit: np.ndarray, start: int, snapshot: float) -> int:
    """Lanes with fit > snapshot append themselves; returns how many did."""
    scratch.reset()
    for lane in np.flatnonzero(fit > snapshot):
        scratch.atomic_append(float(fit[lane]), start + int(lane))
    return scratch.num.load()


def _result(engine: str, gbest: GlobalBest, trace, occupancy, seconds: float) -> RunResult:
    return RunResult(
        engine=engine,
        gbest_fit=gbest.gbest_fit,
        gbest_pos=gbest.gbest_pos.copy(),
        gbest_particle=gbest.particle,
        trace=trace,
        occupancy=occupancy,
        seconds=seconds,
    )


def _log_occupancy(engine: str, t: int, queued: int, particle_cnt: int) -> None:
    logger.debug("queue_occupancy", engine=engine, iteration=t, queued=queued, ratio=queued / particle_cnt)


def run_queue(
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    observer: Optional[Observer] = None,
    workers: Optional[int] = None,
) -> RunResult:
    engine = "queue"
    state, gbest = init_swarm(params, key, fitness_fn)
    layout = GroupLayout(params.particle_cnt, params.group_size)
    scratches = [GroupScratch(g, params.group_size) for g in range(layout.n_groups)]
    aux = AuxArrays(layout.n_groups)
    # The cross-group phase runs as one group whose lanes are the aux slots
    cross = GroupScratch(layout.n_groups, layout.n_groups)
    queued = np.zeros(layout.n_groups, dtype=np.int64)
    trace = np.empty(params.max_iter)
    occupancy = np.zeros(params.max_iter, dtype=np.int64)

    logger.info(
        "run_started",
        engine=engine,
        particles=params.particle_cnt,
        dims=params.dims,
        iters=params.max_iter,
        groups=layout.n_groups,
        seed=key.seed,
    )
    with GroupExecutor(layout, workers) as executor:
        t0 = time.perf_counter()
        for t in range(1, params.max_iter + 1):
            steer = gbest.gbest_pos.copy()
            snapshot = gbest.gbest_fit

            def first_phase(g: int) -> None:
                start, stop = layout.bounds(g)
                fit = step_lanes(state, params, fitness_fn, key, t, start, stop, steer)
                queued[g] = enqueue_candidates(scratches[g], fit, start, snapshot)
                # group barrier: every append above happens before the leader scan
                if queued[g]:
                    aux.write(g, *leader_scan(scratches[g]))
                else:
                    aux.write_sentinel(g)

            executor.launch(first_phase)

            # Second phase: same queue scheme over the aux slots
            cross.reset()
            for g in np.flatnonzero(aux.aux_fit > gbest.gbest_fit):
                cross.atomic_append(float(aux.aux_fit[g]), int(aux.aux_pos[g]))
            win_fit, winner = leader_scan(cross)
            if win_fit > gbest.gbest_fit:
                gbest.record(win_fit, state.pos_matrix[:, winner], winner, t)

            total = int(queued.sum())
            trace[t - 1] = gbest.gbest_fit
            occupancy[t - 1] = total
            _log_occupancy(engine, t, total, params.particle_cnt)
            notify(observer, t, state, gbest)
        seconds = time.perf_counter() - t0

    logger.info("run_completed", engine=engine, gbest_fit=gbest.gbest_fit, seconds=round(seconds, 6))
    return _result(engine, gbest, trace, occupancy, seconds)


def merge_under_lock(
    gbest: GlobalBest,
    state: SwarmState,
    fit: float,
    particle: int,
    iteration: int,
) -> bool:
    """Leader-side global best update guarded by the spin lock."""
    global_lock_acquire(gbest.lock)
    try:
        if gbest.beaten_by(fit, particle, iteration):
            gbest.record(fit, state.pos_matrix[:, particle], particle, iteration)
            return True
        return False
    finally:
        global_lock_release(gbest.lock)


def run_queue_lock(
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    observer: Optional[Observer] = None,
    workers: Optional[int] = None,
    leader_delay: Optional[LeaderDelay] = None,
) -> RunResult:
    engine = "queue-lock"
    state, gbest = init_swarm(params, key, fitness_fn)
    layout = GroupLayout(params.particle_cnt, params.group_size)
    scratches = [GroupScratch(g, params.group_size) for g in range(layout.n_groups)]
    queued = np.zeros(layout.n_groups, dtype=np.int64)
    trace = np.empty(params.max_iter)
    occupancy = np.zeros(params.max_iter, dtype=np.int64)

    logger.info(
        "run_started",
        engine=engine,
        particles=params.particle_cnt,
        dims=params.dims,
        iters=params.max_iter,
        groups=layout.n_groups,
        seed=key.seed,
    )
    with GroupExecutor(layout, workers) as executor:
        t0 = time.perf_counter()
        for t in range(1, params.max_iter + 1):
            steer = gbest.gbest_pos.copy()
            snapshot = gbest.gbest_fit

            def fused(g: int) -> None:
                start, stop = layout.bounds(g)
                fit = step_lanes(state, params, fitness_fn, key, t, start, stop, steer)
                queued[g] = enqueue_candidates(scratches[g], fit, start, snapshot)
                if not queued[g]:
                    return
                win_fit, winner = leader_scan(scratches[g])
                if leader_delay is not None:
                    time.sleep(leader_delay(g))
                merge_under_lock(gbest, state, win_fit, winner, t)

            executor.launch(fused)

            total = int(queued.sum())
            trace[t - 1] = gbest.gbest_fit
            occupancy[t - 1] = total
            _log_occupancy(engine, t, total, params.particle_cnt)
            notify(observer, t, state, gbest)
        seconds = time.perf_counter() - t0

    logger.info("run_completed", engine=engine, gbest_fit=gbest.gbest_fit, seconds=round(seconds, 6))
    return _result(engine, gbest, trace, occupancy, seconds)
