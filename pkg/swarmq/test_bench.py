"""
Unit tests for the benchmark harness
"""

import statistics
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from swarmq.bench import (
    CSV_COLUMNS,
    BenchConfig,
    BenchRecord,
    BenchRun,
    emit_table,
    format_ranking,
    rank_engines,
    read_records,
    run_bench,
    speedup,
    sweep_cells,
    sweep_engines,
    trimmed_mean,
    write_csv,
)
from swarmq.errors import MissingBaselineError, UnknownNameError


def make_record(
    engine: str, seconds, particles: int = 128, dims: int = 1, iters: int = 100_000, trim: bool = True
) -> BenchRecord:
    runs = tuple(
        BenchRun(seed=1, run_idx=i, seconds=s, final_gbest_fit=900_000.0, trace_checksum="abc")
        for i, s in enumerate(seconds)
    )
    return BenchRecord(engine=engine, particles=particles, dims=dims, iters=iters, runs=runs, trim=trim)


def small_config(**overrides) -> BenchConfig:
    values = dict(engine="queue-lock", particle_cnt=64, max_iter=5, repeat=3, seeds=(1,), group_size=16)
    values.update(overrides)
    return BenchConfig(**values)


class TestTrimmedMean:
    """Test the timing aggregate"""

    def test_three_runs(self):
        """Test {1, 2, 3} trims to 2"""
        assert trimmed_mean([1.0, 2.0, 3.0]) == 2.0

    def test_ten_runs(self):
        """Test one min and one max are dropped from ten runs"""
        times = [5.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]
        assert trimmed_mean(times) == 2.0

    def test_too_few_runs(self):
        """Test fewer than three runs fall back to the plain mean with a warning"""
        with patch("swarmq.bench.logger") as mock_logger:
            assert trimmed_mean([1.0, 2.0]) == 1.5
        mock_logger.warning.assert_called_once()

    def test_empty(self):
        """Test no timings is an error"""
        with pytest.raises(ValueError):
            trimmed_mean([])


class TestBenchConfig:
    """Test benchmark configuration"""

    def test_trim_needs_three_runs(self):
        """Test repeat < 3 is rejected when trimming"""
        with pytest.raises(ValidationError):
            small_config(repeat=2)

    def test_untrimmed_single_run(self):
        """Test repeat = 1 is fine without trimming"""
        assert small_config(repeat=1, trim=False).repeat == 1

    def test_defaults(self):
        """Test the protocol defaults"""
        config = BenchConfig(engine="serial", particle_cnt=8)
        assert config.repeat == 10
        assert config.fitness == "cubic"
        assert config.group_size == 128
        assert config.max_iter == 1000


class TestRunBench:
    """Test benchmark execution"""

    def test_record(self):
        """Test every seed runs repeat times"""
        record = run_bench(small_config(seeds=(1, 2)))
        assert len(record.runs) == 6
        assert [(r.seed, r.run_idx) for r in record.runs] == [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)]
        assert record.mean_seconds == trimmed_mean(record.seconds)

    def test_checksum_stable(self):
        """Test the same config and seed give one trace checksum"""
        record = run_bench(small_config())
        assert len({r.trace_checksum for r in record.runs}) == 1
        assert run_bench(small_config()).trace_checksums == record.trace_checksums

    def test_unknown_engine(self):
        """Test an unknown engine fails before running"""
        with pytest.raises(UnknownNameError):
            run_bench(small_config(engine="warp"))

    def test_unwritable_output(self, tmp_path):
        """Test a missing output directory surfaces as OSError"""
        with patch("swarmq.bench.logger") as mock_logger:
            with pytest.raises(OSError):
                run_bench(small_config(output=tmp_path / "missing" / "bench.csv"))
        mock_logger.error.assert_called_once()

    def test_csv_round_trip(self, tmp_path):
        """Test re-reading the CSV reproduces the records exactly"""
        out = tmp_path / "bench.csv"
        first = run_bench(small_config(output=out))
        second = run_bench(small_config(engine="serial", output=out))
        assert read_records(out) == [first, second]

    def test_csv_header_once(self, tmp_path):
        """Test appending keeps a single header line"""
        out = tmp_path / "bench.csv"
        write_csv([make_record("serial", [1.0, 2.0, 3.0])], out)
        write_csv([make_record("queue", [0.5, 0.6, 0.7])], out)
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert sum(line.startswith("engine,") for line in lines) == 1
        assert len(lines) == 7

    def test_untrimmed_record_reports_plain_mean(self):
        """Test a record taken without trimming keeps the min and max"""
        assert make_record("queue", [1.0, 2.0, 6.0], trim=False).mean_seconds == 3.0
        assert make_record("queue", [1.0, 2.0, 6.0]).mean_seconds == 2.0

    def test_untrimmed_run(self):
        """Test trim=False reaches the record with three or more runs"""
        record = run_bench(small_config(repeat=3, trim=False))
        assert record.trim is False
        assert record.mean_seconds == statistics.fmean(record.seconds)

    def test_read_records_untrimmed(self, tmp_path):
        """Test read-back applies the requested aggregation"""
        out = tmp_path / "bench.csv"
        write_csv([make_record("serial", [1.0, 2.0, 6.0])], out)
        assert read_records(out)[0].mean_seconds == 2.0
        assert read_records(out, trim=False)[0].mean_seconds == 3.0


class TestEmitTable:
    """Test the speedup table"""

    def test_ratio(self):
        """Test serial 0.385 s against 0.220 s gives 1.75"""
        records = [make_record("serial", [0.3, 0.385, 0.5]), make_record("queue-lock", [0.1, 0.22, 0.3])]
        table = emit_table(records)
        assert "| 128 | 1 | 100,000 | queue-lock | 0.385 | 0.220 | 1.75 |" in table

    def test_equal_times(self):
        """Test equal times give ratio 1"""
        assert speedup(2.0, 2.0) == 1.0

    def test_csv_format(self):
        """Test the CSV table carries the same columns"""
        records = [make_record("serial", [1.0, 2.0, 3.0]), make_record("queue", [0.5, 1.0, 1.5])]
        lines = emit_table(records, fmt="csv").splitlines()
        assert lines[0] == "particles,dims,iteration,engine,serial_seconds,engine_seconds,speedup_ratio"
        assert lines[1] == "128,1,100000,queue,2.0,1.0,2.0"

    def test_missing_baseline(self):
        """Test a cell without serial is refused"""
        with patch("swarmq.bench.logger"):
            with pytest.raises(MissingBaselineError):
                emit_table([make_record("queue", [1.0, 2.0, 3.0])])

    def test_rows_ordered_by_size(self):
        """Test cells are listed by dims then particles"""
        records = [
            make_record("serial", [1.0, 1.0, 1.0], particles=1024),
            make_record("queue", [1.0, 1.0, 1.0], particles=1024),
            make_record("serial", [1.0, 1.0, 1.0], particles=128),
            make_record("queue", [1.0, 1.0, 1.0], particles=128),
        ]
        rows = emit_table(records).splitlines()[2:]
        assert rows[0].startswith("| 128 ")
        assert rows[1].startswith("| 1,024 ")


class TestRanking:
    """Test the engine ranking"""

    def test_order_and_factors(self):
        """Test engines are ordered fastest first with factors against the fastest and serial"""
        records = [
            make_record("serial", [4.0, 4.0, 4.0]),
            make_record("queue", [1.0, 1.0, 1.0]),
            make_record("reduction", [2.0, 2.0, 2.0]),
        ]
        ranks = rank_engines(records)[(128, 1, 100_000)]
        assert [r.engine for r in ranks] == ["queue", "reduction", "serial"]
        assert [r.vs_fastest for r in ranks] == [1.0, 2.0, 4.0]
        assert [r.vs_serial for r in ranks] == [4.0, 2.0, 1.0]
        assert "1. queue: 1.000 s (1.00x fastest, 4.00x vs serial)" in format_ranking(records)


class TestSweeps:
    """Test the preset sweeps"""

    def test_particle_column(self):
        """Test the 1D queue-lock sweep covers 128 to 131,072 particles in 11 rows"""
        cells = sweep_cells("large-1d")
        assert [p for p, _, _ in cells] == [2**k for k in range(7, 18)]
        assert len(cells) == 11
        assert sweep_engines("large-1d") == ("serial", "queue-lock")

    def test_desk_cap(self):
        """Test iterations are capped unless running at full scale"""
        assert {it for _, _, it in sweep_cells("small-1d")} == {1000}
        assert {it for _, _, it in sweep_cells("small-1d", paper_scale=True)} == {100_000}

    def test_high_dimensional_rows(self):
        """Test the 120D sweep keeps its per-row iteration counts"""
        cells = sweep_cells("large-120d", paper_scale=True)
        assert cells[0] == (128, 120, 5000)
        assert cells[-1] == (131_072, 120, 800)
        assert sweep_cells("large-120d")[0] == (128, 120, 1000)
        assert sweep_cells("large-120d")[-1] == (131_072, 120, 800)
