"""
Benchmark harness: repeated timed runs, trimmed-mean aggregation, CSV
persistence and speedup tables.

Only the iteration loop is timed; engines measure it themselves and report it
as RunResult.seconds, so initialization and I/O never leak into the numbers.
"""

import csv
import statistics
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from swarmq.config import DEFAULT_GROUP_SIZE, DEFAULT_REPEAT, DESK_ITERS, FULL_SCALE_ITERS
from swarmq.engines import get_engine, run_engine
from swarmq.errors import ConfigurationError, MissingBaselineError
from swarmq.fitness import get_fitness
from swarmq.log import get_logger
from swarmq.rng import RngKey
from swarmq.swarm import PsoParams

logger = get_logger(__name__)

CSV_COLUMNS = (
    "engine",
    "particles",
    "dims",
    "iters",
    "seed",
    "run_idx",
    "seconds",
    "final_gbest_fit",
    "trace_checksum",
)

BASELINE_ENGINE = "serial"


class BenchConfig(BaseModel):
    """One benchmark cell for one engine"""

    model_config = ConfigDict(frozen=True)

    engine: str = Field(..., description="Engine registry name")
    particle_cnt: int = Field(..., ge=1, description="Number of particles")
    dims: int = Field(1, ge=1, description="Number of axes")
    max_iter: int = Field(DESK_ITERS, ge=1, description="Iterations per run")
    seeds: tuple[int, ...] = Field((1,), min_length=1, description="Seeds; every seed runs `repeat` times")
    repeat: int = Field(DEFAULT_REPEAT, ge=1, description="Runs per seed")
    fitness: str = Field("cubic", description="Fitness registry name")
    group_size: int = Field(DEFAULT_GROUP_SIZE, ge=1, description="Lanes per worker group")
    output: Optional[Path] = Field(None, description="CSV file rows are appended to")
    trim: bool = Field(True, description="Report the mean without the single min and max")
    workers: Optional[int] = Field(None, ge=1, description="Group pool size; defaults to SWARMQ_WORKERS")

    @model_validator(mode="after")
    def _check(self) -> "BenchConfig":
        if self.trim and self.repeat < 3:
            raise ConfigurationError(f"repeat must be >= 3 when trimming (got {self.repeat})")
        return self


class BenchRun(BaseModel):
    """One timed run"""

    model_config = ConfigDict(frozen=True)

    seed: int
    run_idx: int
    seconds: float
    final_gbest_fit: float
    trace_checksum: str


class BenchRecord(BaseModel):
    """All runs of one engine on one (particles, dims, iters) cell"""

    model_config = ConfigDict(frozen=True)

    engine: str
    particles: int
    dims: int
    iters: int
    runs: tuple[BenchRun, ...]
    trim: bool = True

    @property
    def seconds(self) -> list[float]:
        return [r.seconds for r in self.runs]

    @property
    def mean_seconds(self) -> float:
        """Trimmed mean of the run times, or the plain mean when trim is off."""
        if not self.trim:
            return statistics.fmean(self.seconds)
        return trimmed_mean(self.seconds)

    @property
    def final_gbest_fit(self) -> float:
        return max(r.final_gbest_fit for r in self.runs)

    @property
    def trace_checksums(self) -> dict[int, str]:
        """Checksum of the first run of every seed."""
        out: dict[int, str] = {}
        for r in self.runs:
            out.setdefault(r.seed, r.trace_checksum)
        return out

    @property
    def cell(self) -> tuple[int, int, int]:
        return self.particles, self.dims, self.iters


def trimmed_mean(times: Iterable[float]) -> float:
    """Mean after dropping one minimum and one maximum."""
    values = sorted(times)
    if not values:
        raise ValueError("no timings")
    if len(values) < 3:
        logger.warning("trimmed_mean_untrimmed", runs=len(values))
        return statistics.fmean(values)
    return statistics.fmean(values[1:-1])


def speedup(serial_seconds: float, engine_seconds: float) -> float:
    if engine_seconds <= 0:
        raise ValueError(f"engine time must be positive (got {engine_seconds})")
    return serial_seconds / engine_seconds


def params_for(config: BenchConfig) -> PsoParams:
    fn = get_fitness(config.fitness)
    return PsoParams(
        particle_cnt=config.particle_cnt,
        dims=config.dims,
        max_iter=config.max_iter,
        group_size=config.group_size,
        min_pos=fn.lo,
        max_pos=fn.hi,
    )


def run_bench(config: BenchConfig) -> BenchRecord:
    get_engine(config.engine)
    fitness_fn = get_fitness(config.fitness)
    params = params_for(config)

    logger.info(
        "bench_started",
        engine=config.engine,
        particles=config.particle_cnt,
        dims=config.dims,
        iters=config.max_iter,
        seeds=list(config.seeds),
        repeat=config.repeat,
    )
    runs: list[BenchRun] = []
    for seed in config.seeds:
        checksums = set()
        for run_idx in range(config.repeat):
            result = run_engine(config.engine, params, fitness_fn, RngKey(seed=seed), workers=config.workers)
            checksums.add(result.checksum)
            runs.append(
                BenchRun(
                    seed=seed,
                    run_idx=run_idx,
                    seconds=result.seconds,
                    final_gbest_fit=result.gbest_fit,
                    trace_checksum=result.checksum,
                )
            )
        if len(checksums) > 1:
            logger.warning("nondeterministic_trace", engine=config.engine, seed=seed, distinct=len(checksums))

    record = BenchRecord(
        engine=config.engine,
        particles=config.particle_cnt,
        dims=config.dims,
        iters=config.max_iter,
        runs=tuple(runs),
        trim=config.trim,
    )
    logger.info(
        "bench_completed",
        engine=config.engine,
        particles=config.particle_cnt,
        mean_seconds=record.mean_seconds,
        final_gbest_fit=record.final_gbest_fit,
    )
    if config.output is not None:
        write_csv([record], config.output)
    return record


def csv_rows(record: BenchRecord) -> list[dict[str, str]]:
    return [
        {
            "engine": record.engine,
            "particles": str(record.particles),
            "dims": str(record.dims),
            "iters": str(record.iters),
            "seed": str(run.seed),
            "run_idx": str(run.run_idx),
            # repr round-trips every double exactly
            "seconds": repr(run.seconds),
            "final_gbest_fit": repr(run.final_gbest_fit),
            "trace_checksum": run.trace_checksum,
        }
        for run in record.runs
    ]


def write_csv(records: Iterable[BenchRecord], path: Path) -> None:
    """Append rows to path, writing the header when the file is new or empty."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    try:
        with path.open("a", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            if new_file:
                writer.writeheader()
            count = 0
            for record in records:
                rows = csv_rows(record)
                writer.writerows(rows)
                count += len(rows)
    except OSError as e:
        logger.error("bench_csv_write_failed", path=str(path), error=str(e))
        raise
    logger.info("bench_record_written", path=str(path), rows=count)


def format_csv(records: Iterable[BenchRecord]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for record in records:
        for row in csv_rows(record):
            lines.append(",".join(row[c] for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def read_records(path: Path, trim: bool = True) -> list[BenchRecord]:
    """Rebuild BenchRecords from a CSV; consecutive runs of a cell form one record.

    The CSV does not carry the aggregation mode, so trim applies to every record.
    """
    grouped: dict[tuple[str, int, int, int], list[BenchRun]] = {}
    with Path(path).open(newline="") as f:
        for row in csv.DictReader(f):
            key = (row["engine"], int(row["particles"]), int(row["dims"]), int(row["iters"]))
            grouped.setdefault(key, []).append(
                BenchRun(
                    seed=int(row["seed"]),
                    run_idx=int(row["run_idx"]),
                    seconds=float(row["seconds"]),
                    final_gbest_fit=float(row["final_gbest_fit"]),
                    trace_checksum=row["trace_checksum"],
                )
            )
    return [
        BenchRecord(engine=engine, particles=particles, dims=dims, iters=iters, runs=tuple(runs), trim=trim)
        for (engine, particles, dims, iters), runs in grouped.items()
    ]


def _by_cell(records: Iterable[BenchRecord]) -> dict[tuple[int, int, int], dict[str, BenchRecord]]:
    cells: dict[tuple[int, int, int], dict[str, BenchRecord]] = {}
    for record in records:
        cells.setdefault(record.cell, {})[record.engine] = record
    return dict(sorted(cells.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2])))


def emit_table(records: Iterable[BenchRecord], fmt: str = "markdown") -> str:
    """Serial-vs-engine comparison, one row per (cell, engine)."""
    rows = []
    for (particles, dims, iters), engines in _by_cell(records).items():
        baseline = engines.get(BASELINE_ENGINE)
        if baseline is None:
            logger.error("missing_baseline", particles=particles, dims=dims, iters=iters)
            raise MissingBaselineError(f"no serial baseline for particles={particles}, dims={dims}, iters={iters}")
        serial_s = baseline.mean_seconds
        for name, record in engines.items():
            if name == BASELINE_ENGINE:
                continue
            engine_s = record.mean_seconds
            rows.append((particles, dims, iters, name, serial_s, engine_s, speedup(serial_s, engine_s)))

    if fmt == "csv":
        lines = ["particles,dims,iteration,engine,serial_seconds,engine_seconds,speedup_ratio"]
        lines += [f"{p},{d},{it},{e},{s!r},{g!r},{r!r}" for p, d, it, e, s, g, r in rows]
        return "\n".join(lines) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown table format '{fmt}'")

    lines = [
        "| Particles | Dims | Iteration | Engine | CPU (s) | Engine (s) | Speedup Ratio |",
        "|---:|---:|---:|:---|---:|---:|---:|",
    ]
    lines += [f"| {p:,} | {d} | {it:,} | {e} | {s:.3f} | {g:.3f} | {r:.2f} |" for p, d, it, e, s, g, r in rows]
    return "\n".join(lines) + "\n"


class EngineRank(NamedTuple):
    engine: str
    seconds: float
    vs_fastest: float
    vs_serial: Optional[float]


def rank_engines(records: Iterable[BenchRecord]) -> dict[tuple[int, int, int], list[EngineRank]]:
    """Engines of every cell ordered fastest first, with relative factors."""
    ranking = {}
    for cell, engines in _by_cell(records).items():
        ordered = sorted(engines.values(), key=lambda r: r.mean_seconds)
        fastest = ordered[0].mean_seconds
        serial = engines.get(BASELINE_ENGINE)
        ranking[cell] = [
            EngineRank(
                engine=r.engine,
                seconds=r.mean_seconds,
                vs_fastest=r.mean_seconds / fastest if fastest > 0 else float("inf"),
                vs_serial=speedup(serial.mean_seconds, r.mean_seconds) if serial else None,
            )
            for r in ordered
        ]
    return ranking


def format_ranking(records: Iterable[BenchRecord]) -> str:
    lines = []
    for (particles, dims, iters), ranks in rank_engines(records).items():
        lines.append(f"particles={particles:,} dims={dims} iters={iters:,}")
        for pos, r in enumerate(ranks, start=1):
            vs_serial = f", {r.vs_serial:.2f}x vs serial" if r.vs_serial is not None else ""
            lines.append(f"  {pos}. {r.engine}: {r.seconds:.3f} s ({r.vs_fastest:.2f}x fastest{vs_serial})")
    return "\n".join(lines) + ("\n" if lines else "")


# Preset sweeps: engines and (particles, dims, iters) cells
_HIGH_DIM_ROWS = (
    (128, 5000),
    (256, 4000),
    (512, 3000),
    (1024, 2000),
    (2048, 2000),
    (4096, 1500),
    (8192, 1000),
    (16384, 1000),
    (32768, 1000),
    (65536, 1000),
    (131072, 800),
)

SWEEPS: dict[str, tuple[tuple[str, ...], tuple[tuple[int, int, int], ...]]] = {
    "small-1d": (
        ("serial", "reduction", "unrolled", "queue", "queue-lock"),
        tuple((2**k, 1, FULL_SCALE_ITERS) for k in range(5, 12)),
    ),
    "large-1d": (
        ("serial", "queue-lock"),
        tuple((2**k, 1, FULL_SCALE_ITERS) for k in range(7, 18)),
    ),
    "large-120d": (
        ("serial", "queue"),
        tuple((particles, 120, iters) for particles, iters in _HIGH_DIM_ROWS),
    ),
}


def sweep_cells(name: str, paper_scale: bool = False, desk_iters: int = DESK_ITERS) -> list[tuple[int, int, int]]:
    """(particles, dims, iters) cells of a preset; iterations capped unless paper_scale."""
    if name not in SWEEPS:
        raise ConfigurationError(f"unknown sweep '{name}' (known: {', '.join(SWEEPS)})")
    _, cells = SWEEPS[name]
    if paper_scale:
        return list(cells)
    return [(p, d, min(it, desk_iters)) for p, d, it in cells]


def sweep_engines(name: str) -> tuple[str, ...]:
    return SWEEPS[name][0]
