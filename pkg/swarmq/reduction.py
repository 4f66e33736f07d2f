"""
Two-phase parallel engine built on intra-group tree max-reduction.

Phase 1 runs one task per group: the lanes update their particles, then a tree
reduction over (fit, particle index) leaves the group winner in the aux arrays.
After the grid-wide join, phase 2 reduces the aux arrays in a single group and
updates the global best when the winner is strictly better.

The unrolled variant replaces the stride loop by straight-line folds for
group sizes 32, 64, 128 and 256 and falls back to the loop otherwise.
"""

import threading
import time
from typing import Callable, Optional

import numpy as np

from swarmq.fitness import FitnessFn
from swarmq.log import get_logger
from swarmq.result import Observer, RunResult, notify
from swarmq.rng import RngKey
from swarmq.runtime import PAD_INDEX, SENTINEL_FIT, AuxArrays, GroupExecutor, GroupLayout
from swarmq.swarm import PsoParams, init_swarm, step_lanes

logger = get_logger(__name__)


def _padded_width(n: int) -> int:
    width = 1
    while width < n:
        width *= 2
    return width


def _pad(fits: np.ndarray, indices: np.ndarray, width: int) -> tuple[np.ndarray, np.ndarray]:
    f = np.full(width, SENTINEL_FIT)
    ix = np.full(width, PAD_INDEX, dtype=np.int64)
    f[: len(fits)] = fits
    ix[: len(indices)] = indices
    return f, ix


def _fold(f: np.ndarray, ix: np.ndarray, stride: int) -> None:
    """Lanes [0, stride) combine with their partner lane + stride."""
    a_f, a_i = f[:stride], ix[:stride]
    b_f, b_i = f[stride : 2 * stride], ix[stride : 2 * stride]
    take_b = (b_f > a_f) | ((b_f == a_f) & (b_i < a_i))
    f[:stride] = np.where(take_b, b_f, a_f)
    ix[:stride] = np.where(take_b, b_i, a_i)


def _looped(f: np.ndarray, ix: np.ndarray) -> None:
    stride = len(f) // 2
    while stride > 0:
        _fold(f, ix, stride)
        stride //= 2


def _unrolled_32(f: np.ndarray, ix: np.ndarray) -> None:
    _fold(f, ix, 16)
    _fold(f, ix, 8)
    _fold(f, ix, 4)
    _fold(f, ix, 2)
    _fold(f, ix, 1)


def _unrolled_64(f: np.ndarray, ix: np.ndarray) -> None:
    _fold(f, ix, 32)
    _unrolled_32(f, ix)


def _unrolled_128(f: np.ndarray, ix: np.ndarray) -> None:
    _fold(f, ix, 64)
    _unrolled_64(f, ix)


def _unrolled_256(f: np.ndarray, ix: np.ndarray) -> None:
    _fold(f, ix, 128)
    _unrolled_128(f, ix)


_UNROLLED: dict[int, Callable[[np.ndarray, np.ndarray], None]] = {
    32: _unrolled_32,
    64: _unrolled_64,
    128: _unrolled_128,
    256: _unrolled_256,
}

UNROLLED_WIDTHS = tuple(_UNROLLED)


def tree_reduce_max(
    fits: np.ndarray,
    indices: np.ndarray,
    lanes: Optional[int] = None,
    unrolled: bool = False,
) -> tuple[float, int]:
    """Max by fitness, ties to the lower particle index.

    lanes is the group width the tree is laid over (defaults to len(fits));
    it is padded to a power of two with (-inf, PAD_INDEX) entries. With
    unrolled, a straight-line kernel is used only when the group width is
    itself one of UNROLLED_WIDTHS; any other width runs the stride loop.
    """
    fits = np.asarray(fits, dtype=np.float64)
    indices = np.asarray(indices, dtype=np.int64)
    if len(fits) != len(indices):
        raise ValueError("fits and indices must have the same length")
    if len(fits) == 0:
        return SENTINEL_FIT, PAD_INDEX
    group_width = lanes or len(fits)
    width = _padded_width(max(group_width, len(fits)))
    f, ix = _pad(fits, indices, width)
    kernel = _UNROLLED.get(width) if unrolled and width == group_width else None
    (kernel or _looped)(f, ix)
    return float(f[0]), int(ix[0])


def lane_tree_reduce(
    lane: int,
    fits: np.ndarray,
    indices: np.ndarray,
    barrier: threading.Barrier,
) -> tuple[float, int]:
    """Tree reduction performed cooperatively by the lanes of one group.

    This is the lane-level form for bodies run under run_groups, one thread per
    lane; the engines reduce with the vectorized tree_reduce_max, and both
    must pick the same winner.

    fits and indices are group-shared arrays of power-of-two length, one entry
    per lane. Each round the lower half folds in its partner and every lane
    meets at the barrier; after log2(width) rounds entry 0 holds the winner.
    """
    stride = len(fits) // 2
    while stride > 0:
        if lane < stride:
            other = lane + stride
            if fits[other] > fits[lane] or (fits[other] == fits[lane] and indices[other] < indices[lane]):
                fits[lane] = fits[other]
                indices[lane] = indices[other]
        barrier.wait()
        stride //= 2
    return float(fits[0]), int(indices[0])


def run_reduction(
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    unrolled: bool = False,
    observer: Optional[Observer] = None,
    workers: Optional[int] = None,
) -> RunResult:
    engine = "unrolled" if unrolled else "reduction"
    state, gbest = init_swarm(params, key, fitness_fn)
    layout = GroupLayout(params.particle_cnt, params.group_size)
    aux = AuxArrays(layout.n_groups)
    improving = np.zeros(layout.n_groups, dtype=np.int64)
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
                improving[g] = int(np.count_nonzero(fit > snapshot))
                win_fit, win_idx = tree_reduce_max(
                    fit, np.arange(start, stop), lanes=params.group_size, unrolled=unrolled
                )
                aux.write(g, win_fit, win_idx)

            executor.launch(first_phase)

            # Second phase: one group over the aux arrays
            win_fit, winner = tree_reduce_max(aux.aux_fit, aux.aux_pos, unrolled=unrolled)
            if win_fit > gbest.gbest_fit:
                gbest.record(win_fit, state.pos_matrix[:, winner], winner, t)

            trace[t - 1] = gbest.gbest_fit
            occupancy[t - 1] = int(improving.sum())
            notify(observer, t, state, gbest)
        seconds = time.perf_counter() - t0

    logger.info("run_completed", engine=engine, gbest_fit=gbest.gbest_fit, seconds=round(seconds, 6))
    return RunResult(
        engine=engine,
        gbest_fit=gbest.gbest_fit,
        gbest_pos=gbest.gbest_pos.copy(),
        gbest_particle=gbest.particle,
        trace=trace,
        occupancy=occupancy,
        seconds=seconds,
    )
