"""Tests for the command line."""

from __future__ import annotations

from collections.abc import Callable
import json
import logging
from pathlib import Path

import numpy as np
import pytest

from quorum_allpairs.cli import build_parser, exit_code_for, main, setup_logging
from quorum_allpairs.const import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED, VERSION
from quorum_allpairs.quorum_core import (
    AllPairsViolationError,
    BudgetExceededError,
    DifferenceSet,
    InvalidInputError,
    QuorumSystem,
    ScheduleError,
    dump_quorum_system,
    generate,
    ingest,
    load_quorum_system,
    load_schedule,
)


@pytest.fixture
def count_file(tmp_path: Path) -> Path:
    """Index-only input with 100 elements."""
    path = tmp_path / "n.txt"
    path.write_text("100\n")
    return path


@pytest.fixture
def fano_file(tmp_path: Path, fano: QuorumSystem) -> Path:
    """Quorum file for {0,1,3} mod 7."""
    path = tmp_path / "fano.json"
    dump_quorum_system(fano, path)
    return path


class TestExitCodes:
    """Tests for the error-to-status mapping."""

    @pytest.mark.parametrize(
        ("err", "code"),
        [
            (AllPairsViolationError((0, 3)), EXIT_VERIFICATION_FAILED),
            (ScheduleError("missing"), EXIT_VERIFICATION_FAILED),
            (InvalidInputError("bad"), EXIT_USAGE),
            (BudgetExceededError(31, 6, 10), EXIT_USAGE),
        ],
    )
    def test_mapping(self, err: Exception, code: int) -> None:
        """Test verification failures map to 1 and everything else to 2."""
        assert exit_code_for(err) == code

    def test_unknown_subcommand(self) -> None:
        """Test argparse errors become status 2."""
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test --version prints and exits 0."""
        assert main(["--version"]) == EXIT_OK
        assert VERSION in capsys.readouterr().out


class TestSearchCommand:
    """Tests for `search`."""

    def test_fano(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the summary line for p=7."""
        assert main(["search", "--p", "7"]) == EXIT_OK
        out = capsys.readouterr().out.strip()
        assert out.startswith("k=3 {0,1,3} lower_bound=3 optimal=yes")
        assert "perfect=yes" in out

    def test_not_perfect(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test p=16 reaches the bound without being a perfect set."""
        assert main(["search", "--p", "16", "--no-cache"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("k=5 {0,1,2,5,8} lower_bound=5 optimal=yes")
        assert "perfect=no" in out

    def test_writes_cache_and_json(self, tmp_path: Path, isolated_cache: Path) -> None:
        """Test --out and the default cache location."""
        out = tmp_path / "ds.json"
        assert main(["search", "--p", "13", "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data["elements"] == [0, 1, 3, 9]
        assert data["optimal"] is True
        assert isolated_cache.read_text() == "13 4 0,1,3,9\n"

    def test_budget_exhausted(self) -> None:
        """Test an exhausted budget without fallback exits 2."""
        assert main(["search", "--p", "31", "--budget", "10", "--no-cache"]) == EXIT_USAGE

    def test_fallback(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the fallback is labeled in the output."""
        code = main(["search", "--p", "31", "--budget", "10", "--no-cache", "--allow-fallback"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "k=16" in out
        assert "source=fallback" in out

    def test_invalid_p(self) -> None:
        """Test p=0 is a usage error."""
        assert main(["search", "--p", "0"]) == EXIT_USAGE

    def test_uncertified_cache_hit_is_labeled(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test a cache record that could not be re-checked prints its source."""
        cache = tmp_path / "diffsets.txt"
        cache.write_text("7 4 0,1,2,3\n")
        assert main(["search", "--p", "7", "--budget", "1", "--cache", str(cache)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("k=4 {0,1,2,3} lower_bound=3 optimal=no")
        assert "source=cache" in out

    def test_stale_cache_hit_is_searched_again(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test a non-minimal cache record is replaced by the search result."""
        cache = tmp_path / "diffsets.txt"
        cache.write_text("7 4 0,1,2,3\n")
        assert main(["search", "--p", "7", "--cache", str(cache)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("k=3 {0,1,3}")
        assert "source=" not in out
        assert cache.read_text() == "7 3 0,1,3\n"


class TestGenAndVerify:
    """Tests for `gen` and `verify`."""

    def test_gen_prints_quorums(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test quorum lines use 1-based labels."""
        assert main(["gen", "--p", "7"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "S_1: D_1 D_2 D_4"
        assert len(lines) == 7

    def test_search_gen_verify_chain(self, tmp_path: Path) -> None:
        """Test subcommands compose through files."""
        ds_file = tmp_path / "ds.json"
        q_file = tmp_path / "q.json"
        assert main(["search", "--p", "13", "--out", str(ds_file)]) == EXIT_OK
        assert main(["gen", "--diffset", str(ds_file), "--out", str(q_file)]) == EXIT_OK
        assert load_quorum_system(q_file).base == DifferenceSet(13, (0, 1, 3, 9))
        assert main(["verify", "--quorums", str(q_file)]) == EXIT_OK

    def test_gen_needs_source(self) -> None:
        """Test gen without --p, --base or --diffset."""
        assert main(["gen"]) == EXIT_USAGE

    def test_gen_inline_base(self, tmp_path: Path) -> None:
        """Test --base takes a set in braces and shifts it to start at 0."""
        q_file = tmp_path / "q.json"
        assert main(["gen", "--p", "7", "--base", "{1,2,4}", "--out", str(q_file)]) == EXIT_OK
        quorums = load_quorum_system(q_file)
        assert quorums.base == DifferenceSet(7, (0, 1, 3))
        assert quorums.quorums[0] == (0, 1, 3)

    @pytest.mark.parametrize(
        "argv",
        [
            ["gen", "--base", "0,1,3"],
            ["gen", "--p", "7", "--base", "0,1"],
            ["gen", "--p", "7", "--base", "0,x"],
        ],
        ids=["missing_p", "not_a_difference_set", "not_integers"],
    )
    def test_gen_inline_base_errors(self, argv: list[str]) -> None:
        """Test bad inline bases are usage errors."""
        assert main(argv) == EXIT_USAGE

    def test_verify_valid(self, fano_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test every property is reported."""
        assert main(["verify", "--quorums", str(fano_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "coverage=yes" in out
        assert "all_pairs=yes" in out

    def test_verify_mutated(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a broken system exits 1 and names a counterexample."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"p": 4, "quorums": [[0, 1], [1, 2], [0, 2], [0, 1]]}))
        assert main(["verify", "--quorums", str(path)]) == EXIT_VERIFICATION_FAILED
        out = capsys.readouterr().out
        assert "all_pairs=no" in out
        assert "counterexample=(D_1, D_4)" in out

    def test_verify_malformed(self, tmp_path: Path) -> None:
        """Test an unparseable file exits 2."""
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert main(["verify", "--quorums", str(path)]) == EXIT_USAGE

    def test_verify_report(self, fano_file: Path, tmp_path: Path) -> None:
        """Test the JSON property report."""
        out = tmp_path / "verify.json"
        assert main(["verify", "--quorums", str(fano_file), "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text())["all_hold"] is True


class TestScheduleCommand:
    """Tests for `schedule`."""

    def test_balance_line(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the summary for the p=4 square."""
        assert main(["schedule", "--p", "4", "--n", "8"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "policy=balanced" in out
        assert "block_pairs=10" in out
        assert "element_pairs=28" in out
        assert "max_over_mean=1.2857" in out

    def test_writes_schedule(self, fano_file: Path, tmp_path: Path) -> None:
        """Test --out from a quorum file."""
        out = tmp_path / "schedule.json"
        args = ["schedule", "--quorums", str(fano_file), "--n", "70", "--out", str(out)]
        assert main(args) == EXIT_OK
        assert len(load_schedule(out).owner) == 28

    def test_p_conflicts_with_file(self, fano_file: Path) -> None:
        """Test --p must agree with --quorums."""
        assert main(["schedule", "--quorums", str(fano_file), "--p", "5", "--n", "10"]) == EXIT_USAGE

    def test_violating_system(self, tmp_path: Path) -> None:
        """Test a system without the all-pairs property exits 1."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"p": 4, "quorums": [[0, 1], [1, 2], [0, 2], [0, 1]]}))
        assert main(["schedule", "--quorums", str(path), "--n", "8"]) == EXIT_VERIFICATION_FAILED

    def test_p_larger_than_n(self) -> None:
        """Test too few elements exits 2."""
        assert main(["schedule", "--p", "7", "--n", "3"]) == EXIT_USAGE


class TestRunCommand:
    """Tests for `run`."""

    def test_handshake_count(self, count_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test 100 elements over p=7 give 4950 pairs."""
        args = ["run", "--input", str(count_file), "--format", "count", "--p", "7"]
        assert main(args) == EXIT_OK
        assert "pairs=4950" in capsys.readouterr().out

    def test_count_out_file(self, count_file: Path, tmp_path: Path) -> None:
        """Test the decimal count output."""
        out = tmp_path / "count.txt"
        args = ["run", "--input", str(count_file), "--format", "count", "--p", "7", "--out", str(out)]
        assert main(args) == EXIT_OK
        assert out.read_text() == "4950\n"

    def test_pearson_prints_small_matrix(
        self, linear_csv: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test a 3x3 correlation matrix is printed."""
        args = ["run", "--input", str(linear_csv), "--kernel", "pearson", "--p", "1"]
        assert main(args) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4
        first = [float(v) for v in lines[0].split(",")]
        assert first == pytest.approx([1.0, 1.0, -1.0])
        assert lines[3] == "n=3 kernel=pearson-correlation pairs=3 flagged=0"

    def test_binary_output_independent_of_workers(
        self, random_csv: Callable[..., Path], tmp_path: Path
    ) -> None:
        """Test --out bytes are identical for different worker counts."""
        data = random_csv(60)
        outputs = []
        for workers in (1, 4):
            out = tmp_path / f"corr_{workers}.bin"
            args = [
                "run", "--input", str(data), "--kernel", "pearson", "--p", "7",
                "--workers", str(workers), "--out", str(out),
            ]  # fmt: skip
            assert main(args) == EXIT_OK
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        matrix = ingest(tmp_path / "corr_1.bin", "bin").values
        assert matrix.shape == (60, 60)
        np.testing.assert_allclose(
            matrix, np.corrcoef(ingest(data, "csv").values), rtol=1e-12, atol=1e-12
        )

    def test_pipeline_through_files(
        self, random_csv: Callable[..., Path], tmp_path: Path
    ) -> None:
        """Test run with quorum and schedule files written by earlier commands."""
        data = random_csv(40)
        q_file = tmp_path / "q.json"
        s_file = tmp_path / "s.json"
        report = tmp_path / "report.json"
        assert main(["gen", "--p", "13", "--out", str(q_file)]) == EXIT_OK
        assert main(["schedule", "--quorums", str(q_file), "--n", "40", "--out", str(s_file)]) == 0
        args = [
            "run", "--input", str(data), "--kernel", "sad", "--quorums", str(q_file),
            "--schedule", str(s_file), "--out", str(tmp_path / "sad.bin"), "--report", str(report),
        ]  # fmt: skip
        assert main(args) == EXIT_OK
        data_report = json.loads(report.read_text())
        assert data_report["run"]["total_element_pairs"] == 780
        assert data_report["difference_set"]["source"] == "import"

    def test_pearson_on_count_input(self, count_file: Path) -> None:
        """Test a numeric kernel on index-only input exits 2."""
        args = ["run", "--input", str(count_file), "--format", "count", "--kernel", "pearson", "--p", "7"]
        assert main(args) == EXIT_USAGE

    def test_missing_input(self, tmp_path: Path) -> None:
        """Test an unreadable input exits 2."""
        assert main(["run", "--input", str(tmp_path / "absent.csv"), "--p", "1"]) == EXIT_USAGE

    def test_schedule_for_other_system(self, count_file: Path, tmp_path: Path) -> None:
        """Test a schedule that does not fit the quorum system exits 1."""
        s_file = tmp_path / "s.json"
        assert main(["schedule", "--p", "7", "--n", "100", "--out", str(s_file)]) == EXIT_OK
        q = generate(DifferenceSet(7, (0, 1, 3)))
        quorums = list(q.quorums)
        quorums[0], quorums[1] = quorums[1], quorums[0]
        q_file = tmp_path / "swapped.json"
        q_file.write_text(json.dumps({"p": 7, "quorums": [list(x) for x in quorums]}))
        args = [
            "run", "--input", str(count_file), "--format", "count",
            "--quorums", str(q_file), "--schedule", str(s_file),
        ]  # fmt: skip
        assert main(args) == EXIT_VERIFICATION_FAILED


class TestBenchAndReplication:
    """Tests for `bench` and `replication`."""

    def test_bench_rows(
        self, random_csv: Callable[..., Path], tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test one line per width and a JSON table."""
        data = random_csv(30)
        out = tmp_path / "bench.json"
        args = [
            "bench", "--input", str(data), "--kernel", "pearson", "--p", "7",
            "--workers-list", "1,2", "--repeats", "1", "--out", str(out),
        ]  # fmt: skip
        assert main(args) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert [line.split()[0] for line in lines] == ["workers=1", "workers=2"]
        assert len(json.loads(out.read_text())["rows"]) == 2

    def test_bench_rejects_zero_repeats(self, count_file: Path) -> None:
        """Test repeats < 1 exits 2."""
        args = ["bench", "--input", str(count_file), "--format", "count", "--p", "7", "--repeats", "0"]
        assert main(args) == EXIT_USAGE

    def test_bench_rejects_bad_widths(self, count_file: Path) -> None:
        """Test a malformed width list exits 2."""
        args = ["bench", "--input", str(count_file), "--format", "count", "--p", "7", "--workers-list", "a"]
        assert main(args) == EXIT_USAGE

    def test_replication(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test p=16, n=1600."""
        assert main(["replication", "--p", "16", "--n", "1600"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "max_elements=500" in out
        assert "fraction=0.3125" in out
        assert "reduction_vs_full=0.6875" in out


class TestSetupLogging:
    """Tests for console logging setup."""

    def test_handler_replaced(self) -> None:
        """Test repeated setup keeps a single console handler."""
        setup_logging()
        setup_logging(debug=True)
        root = logging.getLogger()
        names = [h.get_name() for h in root.handlers]
        assert names.count("quorum-allpairs-console") == 1
        assert root.level == logging.DEBUG
        setup_logging()

    def test_parser_requires_subcommand(self) -> None:
        """Test a bare invocation is a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])
