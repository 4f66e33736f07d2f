"""
Worker-group runtime.

Two ways to run a grid of groups over particle_cnt lanes:

- run_groups: one OS thread per lane, a threading.Barrier per group and a
  GroupScratch per group. This is the lane-level contract (barrier, atomic
  append, global lock) and what the concurrency stress tests drive.
- GroupExecutor: one pool task per group. The lanes of a group are
  multiplexed onto that task and run as numpy vector operations, so the end of
  each vectorized step is the group barrier and the pool join is the
  grid-wide synchronization point between phases. Engines use this form.

The append counter and the lock word are native atomics (sequentially
consistent), so every write made while holding the lock is visible to the next
acquirer.
"""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import atomics
import numpy as np

from swarmq.config import LANE_THREAD_BUDGET, SPIN_YIELD, WORKERS
from swarmq.errors import GroupRuntimeError, LockStateError
from swarmq.log import get_logger

logger = get_logger(__name__)

# Replaces an integer minimum; compares correctly under max for double fitness
SENTINEL_FIT = -np.inf
PAD_INDEX = np.iinfo(np.int64).max

LOCK_FREE = 0
LOCK_HELD = 1


@dataclass(frozen=True)
class GroupLayout:
    """Ceiling-divided grid of fixed-size groups over the particles"""

    particle_cnt: int
    group_size: int

    def __post_init__(self) -> None:
        if self.group_size < 1:
            raise ValueError(f"group_size must be >= 1 (got {self.group_size})")
        if self.particle_cnt < 1:
            raise ValueError(f"particle_cnt must be >= 1 (got {self.particle_cnt})")

    @property
    def n_groups(self) -> int:
        return -(-self.particle_cnt // self.group_size)

    def bounds(self, group: int) -> tuple[int, int]:
        """Particle range [start, stop) of the active lanes of a group."""
        start = group * self.group_size
        return start, min(start + self.group_size, self.particle_cnt)

    def active_lanes(self, group: int) -> int:
        start, stop = self.bounds(group)
        return stop - start

    def particle(self, group: int, lane: int) -> int:
        return group * self.group_size + lane


class AtomicCounter:
    """Lock-free integer counter"""

    def __init__(self, value: int = 0) -> None:
        self._a = atomics.atomic(width=4, atype=atomics.INT)
        self._a.store(value)

    def fetch_inc(self) -> int:
        """Increment and return the previous value."""
        return self._a.fetch_inc()

    def load(self) -> int:
        return self._a.load()

    def store(self, value: int) -> None:
        self._a.store(value)


@dataclass
class GroupScratch:
    """Group-local queue: candidate fitness, candidate particle index, append counter"""

    group_id: int
    capacity: int
    best_fit_queue: np.ndarray = field(init=False)
    best_pos_queue: np.ndarray = field(init=False)
    num: AtomicCounter = field(init=False)

    def __post_init__(self) -> None:
        self.best_fit_queue = np.full(self.capacity, SENTINEL_FIT)
        self.best_pos_queue = np.full(self.capacity, PAD_INDEX, dtype=np.int64)
        self.num = AtomicCounter(0)

    def reset(self) -> None:
        self.num.store(0)

    def atomic_append(self, fit: float, particle: int) -> int:
        slot = self.num.fetch_inc()
        if slot >= self.capacity:
            raise IndexError(f"group {self.group_id} queue overflow (capacity {self.capacity})")
        self.best_fit_queue[slot] = fit
        self.best_pos_queue[slot] = particle
        return slot

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.num.load()
        return self.best_fit_queue[:n], self.best_pos_queue[:n]


@dataclass
class AuxArrays:
    """Per-group winner slots bridging the intra-group and cross-group phases"""

    n_groups: int
    aux_fit: np.ndarray = field(init=False)
    aux_pos: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.aux_fit = np.full(self.n_groups, SENTINEL_FIT)
        self.aux_pos = np.full(self.n_groups, PAD_INDEX, dtype=np.int64)

    def write(self, group: int, fit: float, particle: int) -> None:
        self.aux_fit[group] = fit
        self.aux_pos[group] = particle

    def write_sentinel(self, group: int) -> None:
        self.write(group, SENTINEL_FIT, PAD_INDEX)


def atomic_append(scratch: GroupScratch, fit: float, particle: int) -> int:
    """Append (fit, particle) to the group queue; returns the unique slot."""
    return scratch.atomic_append(fit, particle)


class GlobalLock:
    """Spin lock over one atomic word: 0 = free, 1 = held"""

    def __init__(self) -> None:
        self._word = atomics.atomic(width=4, atype=atomics.INT)
        self._word.store(LOCK_FREE)

    @property
    def word(self) -> int:
        return self._word.load()

    def acquire(self) -> None:
        while not self._word.cmpxchg_strong(LOCK_FREE, LOCK_HELD).success:
            if SPIN_YIELD:
                time.sleep(0)

    def release(self) -> None:
        if not self._word.cmpxchg_strong(LOCK_HELD, LOCK_FREE).success:
            logger.error("lock_release_without_hold")
            raise LockStateError("release of a global lock that is not held")

    def __enter__(self) -> "GlobalLock":
        self.acquire()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        self.release()
        return False


def global_lock_acquire(lock: GlobalLock) -> None:
    lock.acquire()


def global_lock_release(lock: GlobalLock) -> None:
    lock.release()


LaneBody = Callable[[int, int, threading.Barrier, GroupScratch], None]


def run_groups(
    particle_cnt: int,
    group_size: int,
    body: LaneBody,
    *,
    thread_budget: int = LANE_THREAD_BUDGET,
) -> list[GroupScratch]:
    """Run body(group, lane, barrier, scratch) on one thread per lane.

    Every lane of every group runs, including lanes whose particle index is
    >= particle_cnt; the body must skip particle work for those lanes but still
    take part in barriers. Groups are dispatched in waves so that at most
    thread_budget lane threads are alive at once (always at least one whole
    group). Returns the per-group scratch.
    """
    layout = GroupLayout(particle_cnt, group_size)
    scratches = [GroupScratch(g, group_size) for g in range(layout.n_groups)]
    per_wave = max(1, thread_budget // group_size)

    for wave_start in range(0, layout.n_groups, per_wave):
        wave = range(wave_start, min(wave_start + per_wave, layout.n_groups))
        failures: list[tuple[int, int, BaseException]] = []
        failures_lock = threading.Lock()
        threads = []

        for g in wave:
            barrier = threading.Barrier(group_size)
            for lane in range(group_size):
                threads.append(
                    threading.Thread(
                        target=_run_lane,
                        args=(body, g, lane, barrier, scratches[g], failures, failures_lock),
                        name=f"swarmq-g{g}-l{lane}",
                        daemon=True,
                    )
                )
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        if failures:
            group, lane, cause = min(failures, key=lambda f: (f[0], f[1]))
            logger.error("lane_failed", group=group, lane=lane, error=str(cause))
            raise GroupRuntimeError(group, lane, cause) from cause

    return scratches


def _run_lane(body, group, lane, barrier, scratch, failures, failures_lock) -> None:
    try:
        body(group, lane, barrier, scratch)
    except threading.BrokenBarrierError:
        # Another lane of this group failed and aborted the barrier
        pass
    except BaseException as e:
        with failures_lock:
            failures.append((group, lane, e))
        barrier.abort()


class GroupExecutor:
    """Pool that runs one task per group and joins them as a phase boundary"""

    def __init__(self, layout: GroupLayout, workers: Optional[int] = None) -> None:
        self.layout = layout
        self.workers = max(1, workers or WORKERS)
        self._pool: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "GroupExecutor":
        if self.workers > 1 and self.layout.n_groups > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="swarmq-group")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None
        return False

    def launch(self, body: Callable[[int], None]) -> None:
        """Run body(group) for every group and wait for all of them."""
        if self._pool is None:
            for g in range(self.layout.n_groups):
                _call_group(body, g)
            return

        futures = [self._pool.submit(_call_group, body, g) for g in range(self.layout.n_groups)]
        first_error: Optional[BaseException] = None
        for f in futures:
            err = f.exception()
            if err is not None and first_error is None:
                first_error = err
        if first_error is not None:
            raise first_error


def _call_group(body: Callable[[int], None], group: int) -> None:
    try:
        body(group)
    except GroupRuntimeError:
        raise
    except Exception as e:
        logger.error("group_failed", group=group, error=str(e))
        raise GroupRuntimeError(group, None, e) from e
