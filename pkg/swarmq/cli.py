"""
swarmq benchmark command line.

Examples:

    swarmq --engine queue-lock --particles 1024 --iters 1000 --repeat 10
    swarmq --engine serial --engine queue --particles 4096 --dims 120 --markdown
    swarmq --sweep large-1d --out large-1d.csv --markdown
    swarmq --sweep small-1d --paper-scale --out small-1d.csv
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from swarmq.bench import (
    BASELINE_ENGINE,
    BenchConfig,
    BenchRecord,
    SWEEPS,
    emit_table,
    format_csv,
    format_ranking,
    run_bench,
    sweep_cells,
    sweep_engines,
)
from swarmq.config import DEFAULT_GROUP_SIZE, DEFAULT_REPEAT, DESK_ITERS, FULL_SCALE_ITERS
from swarmq.engines import ENGINES
from swarmq.errors import ConfigurationError, MissingBaselineError, UnknownNameError
from swarmq.fitness import FITNESS
from swarmq.log import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmq",
        description="Time PSO engines and compare them against the serial baseline",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument(
        "--engine",
        action="append",
        choices=list(ENGINES),
        help="Engine to run; repeat to compare several (default: queue-lock, or the sweep's engines)",
    )
    parser.add_argument("--particles", type=int, default=1024, help="Number of particles (default: 1024)")
    parser.add_argument("--dims", type=int, default=1, help="Number of axes (default: 1)")
    parser.add_argument(
        "--iters",
        type=int,
        default=None,
        help=f"Iterations per run (default: {DESK_ITERS}, or {FULL_SCALE_ITERS} with --paper-scale)",
    )
    parser.add_argument("--seed", type=int, action="append", help="Seed; repeatable (default: 1)")
    parser.add_argument(
        "--repeat", type=int, default=DEFAULT_REPEAT, help=f"Runs per seed (default: {DEFAULT_REPEAT})"
    )
    parser.add_argument("--fitness", choices=list(FITNESS), default="cubic", help="Fitness function (default: cubic)")
    parser.add_argument(
        "--group-size",
        type=int,
        default=DEFAULT_GROUP_SIZE,
        help=f"Lanes per worker group (default: {DEFAULT_GROUP_SIZE})",
    )
    parser.add_argument("--out", type=Path, default=None, help="Append CSV rows here (default: CSV to stdout)")
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="Use the full iteration counts of each preset instead of the desk cap",
    )
    parser.add_argument("--sweep", choices=list(SWEEPS), default=None, help="Run a preset sweep of cells")
    parser.add_argument(
        "--markdown",
        action="store_true",
        help="Print the serial-vs-engine speedup table and the engine ranking to stdout",
    )
    parser.add_argument("--workers", type=int, default=None, help="Group pool size (default: SWARMQ_WORKERS)")
    parser.add_argument(
        "--no-trim",
        dest="trim",
        action="store_false",
        help="Report the plain mean instead of dropping the min and max run",
    )
    return parser


def _plan(args: argparse.Namespace) -> tuple[list[str], list[tuple[int, int, int]]]:
    """Engines and (particles, dims, iters) cells an invocation covers."""
    if args.sweep:
        engines = list(args.engine or sweep_engines(args.sweep))
        desk_iters = DESK_ITERS if args.iters is None else args.iters
        cells = sweep_cells(args.sweep, paper_scale=args.paper_scale, desk_iters=desk_iters)
    else:
        engines = list(args.engine or ["queue-lock"])
        iters = args.iters
        if iters is None:
            iters = FULL_SCALE_ITERS if args.paper_scale else DESK_ITERS
        cells = [(args.particles, args.dims, iters)]

    # the speedup table needs a baseline in every cell
    if (args.markdown or args.sweep) and BASELINE_ENGINE not in engines:
        engines.insert(0, BASELINE_ENGINE)
    # de-duplicate, keep order
    return list(dict.fromkeys(engines)), cells


def run_plan(args: argparse.Namespace) -> list[BenchRecord]:
    engines, cells = _plan(args)
    seeds = tuple(args.seed or [1])
    records = []
    for particles, dims, iters in cells:
        for engine in engines:
            config = BenchConfig(
                engine=engine,
                particle_cnt=particles,
                dims=dims,
                max_iter=iters,
                seeds=seeds,
                repeat=args.repeat,
                fitness=args.fitness,
                group_size=args.group_size,
                output=args.out,
                trim=args.trim,
                workers=args.workers,
            )
            records.append(run_bench(config))
    return records


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        records = run_plan(args)
        if args.out is None:
            sys.stdout.write(format_csv(records))
        if args.markdown:
            sys.stdout.write(emit_table(records, fmt="markdown"))
            sys.stdout.write("\n")
            sys.stdout.write(format_ranking(records))
    except (ConfigurationError, UnknownNameError, MissingBaselineError, ValidationError) as e:
        logger.error("bench_usage_error", error=str(e))
        print(f"swarmq: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error("bench_io_error", error=str(e))
        print(f"swarmq: error: {e}", file=sys.stderr)
        return EXIT_IO

    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
