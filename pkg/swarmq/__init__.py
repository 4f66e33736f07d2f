"""
swarmq: particle swarm optimization on a worker-group runtime.

Five engines compute the same synchronous PSO and produce bitwise identical
gbest traces for a given seed:

    serial      one particle at a time, the reference
    reduction   per-group tree max-reduction, then a cross-group reduction
    unrolled    reduction with straight-line folds for common group widths
    queue       lanes that beat the global best append to a group queue
    queue-lock  queue, with group leaders merging under a global spin lock
"""

from swarmq.bench import BenchConfig, BenchRecord, emit_table, read_records, run_bench
from swarmq.engines import ENGINES, get_engine, run_engine
from swarmq.errors import (
    ConfigurationError,
    FitnessDomainError,
    GroupRuntimeError,
    LockStateError,
    MissingBaselineError,
    RngArgumentError,
    SwarmError,
    UnknownNameError,
)
from swarmq.fitness import FITNESS, FitnessFn, get_fitness, negated
from swarmq.result import RunResult, trace_checksum
from swarmq.rng import RngDraw, RngKey, Slot, uniform01, uniform_range
from swarmq.swarm import GlobalBest, PsoParams, SwarmState, init_swarm

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "ConfigurationError",
    "ENGINES",
    "FITNESS",
    "FitnessDomainError",
    "FitnessFn",
    "GlobalBest",
    "GroupRuntimeError",
    "LockStateError",
    "MissingBaselineError",
    "PsoParams",
    "RngArgumentError",
    "RngDraw",
    "RngKey",
    "RunResult",
    "Slot",
    "SwarmError",
    "SwarmState",
    "UnknownNameError",
    "emit_table",
    "get_engine",
    "get_fitness",
    "init_swarm",
    "negated",
    "read_records",
    "run_bench",
    "run_engine",
    "trace_checksum",
    "uniform01",
    "uniform_range",
]
