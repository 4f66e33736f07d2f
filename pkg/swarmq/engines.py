"""
Engine registry
"""

from typing import Callable, Optional

from swarmq.errors import UnknownNameError
from swarmq.fitness import FitnessFn
from swarmq.queueing import run_queue, run_queue_lock
from swarmq.reduction import run_reduction
from swarmq.result import Observer, RunResult
from swarmq.rng import RngKey
from swarmq.serial import run_serial
from swarmq.swarm import PsoParams

Engine = Callable[..., RunResult]


def _unrolled(params, fitness_fn, key, observer=None, workers=None) -> RunResult:
    return run_reduction(params, fitness_fn, key, unrolled=True, observer=observer, workers=workers)


def _reduction(params, fitness_fn, key, observer=None, workers=None) -> RunResult:
    return run_reduction(params, fitness_fn, key, unrolled=False, observer=observer, workers=workers)


def _serial(params, fitness_fn, key, observer=None, workers=None) -> RunResult:
    return run_serial(params, fitness_fn, key, observer=observer)


ENGINES: dict[str, Engine] = {
    "serial": _serial,
    "reduction": _reduction,
    "unrolled": _unrolled,
    "queue": run_queue,
    "queue-lock": run_queue_lock,
}

PARALLEL_ENGINES = ("reduction", "unrolled", "queue", "queue-lock")


def get_engine(name: str) -> Engine:
    try:
        return ENGINES[name]
    except KeyError:
        raise UnknownNameError("engine", name, list(ENGINES)) from None


def run_engine(
    name: str,
    params: PsoParams,
    fitness_fn: FitnessFn,
    key: RngKey,
    observer: Optional[Observer] = None,
    workers: Optional[int] = None,
) -> RunResult:
    return get_engine(name)(params, fitness_fn, key, observer=observer, workers=workers)
