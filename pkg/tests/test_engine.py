"""Tests for shared-nothing execution and replication accounting."""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable
import math

import numpy as np
import pytest

from quorum_allpairs.quorum_core import (
    ConfigurationError,
    DifferenceSet,
    ElementTable,
    IsolationError,
    QuorumSystem,
    Schedule,
    ScheduleError,
    async_run,
    build_schedule,
    generate,
    get_kernel,
    replication_report,
    run,
    search_minimal,
    split,
)
from quorum_allpairs.quorum_core import engine
from quorum_allpairs.quorum_core.engine import _QuorumWorker

from .conftest import LINEAR_ROWS
from .oracles import all_element_pairs, pearson_matrix, sum_abs_diff_matrix

type TableFactory = Callable[..., ElementTable]


def _setup(n: int, p: int) -> tuple[QuorumSystem, Schedule]:
    q = generate(search_minimal(p))
    return q, build_schedule(q, split(n, p))


class TestHandshake:
    """Tests for the counting kernel."""

    def test_square_counts_all_pairs(self, square4: QuorumSystem) -> None:
        """Test n=8 over p=4 counts 28 pairs."""
        schedule = build_schedule(square4, split(8, 4))
        result = run(ElementTable.index_only(8), square4, schedule, get_kernel("handshake"))
        assert result.total == 28
        assert result.matrix is None

    @pytest.mark.parametrize(("n", "p"), [(1, 1), (2, 2), (100, 7), (1000, 16), (97, 13)])
    def test_total_is_n_choose_2(self, n: int, p: int) -> None:
        """Test the handshake total for several shapes."""
        q, schedule = _setup(n, p)
        result = run(ElementTable.index_only(n), q, schedule, get_kernel("handshake"))
        assert result.total == n * (n - 1) // 2

    def test_values_ignored(self, random_table: TableFactory) -> None:
        """Test a valued table also works for counting."""
        q, schedule = _setup(30, 7)
        result = run(random_table(30), q, schedule, get_kernel("handshake"))
        assert result.total == 435


class TestNumericKernels:
    """Tests for merged N x N outputs."""

    def test_linear_rows_single_worker(self) -> None:
        """Test perfectly correlated rows with p=1."""
        q = generate(DifferenceSet(1, (0,)))
        schedule = build_schedule(q, split(3, 1))
        result = run(ElementTable.from_rows(LINEAR_ROWS), q, schedule, get_kernel("pearson"))
        assert result.matrix[0, 1] == pytest.approx(1.0)
        assert result.matrix[0, 2] == pytest.approx(-1.0)
        assert result.matrix[1, 2] == pytest.approx(-1.0)
        np.testing.assert_array_equal(np.diag(result.matrix), 1.0)
        assert result.report.flagged_entries == 0

    @pytest.mark.parametrize(("n", "p"), [(50, 7), (64, 13), (33, 4), (40, 16)])
    def test_pearson_matches_corrcoef(
        self, random_table: TableFactory, n: int, p: int
    ) -> None:
        """Test the decomposed result equals the direct computation."""
        table = random_table(n)
        q, schedule = _setup(n, p)
        result = run(table, q, schedule, get_kernel("pearson"), workers=3)
        np.testing.assert_allclose(
            result.matrix, pearson_matrix(table.values), rtol=1e-12, atol=1e-12
        )

    @pytest.mark.parametrize(("n", "p"), [(50, 7), (21, 5)])
    def test_sum_abs_diff_matches_loop(
        self, random_table: TableFactory, n: int, p: int
    ) -> None:
        """Test the decomposed result equals a double loop."""
        table = random_table(n)
        q, schedule = _setup(n, p)
        result = run(table, q, schedule, get_kernel("sum-abs-diff"))
        np.testing.assert_allclose(
            result.matrix, sum_abs_diff_matrix(table.values), rtol=1e-12, atol=1e-12
        )

    def test_result_is_symmetric(self, random_table: TableFactory) -> None:
        """Test matrix[x, y] == matrix[y, x] exactly."""
        q, schedule = _setup(45, 7)
        result = run(random_table(45), q, schedule, get_kernel("pearson"))
        np.testing.assert_array_equal(result.matrix, result.matrix.T)

    def test_identical_across_worker_counts(self, random_table: TableFactory) -> None:
        """Test outputs do not depend on how many workers run at once."""
        table = random_table(70)
        q, schedule = _setup(70, 13)
        kernel = get_kernel("pearson")
        results = [run(table, q, schedule, kernel, workers=w).matrix for w in (1, 2, 13)]
        assert np.array_equal(results[0], results[1])
        assert np.array_equal(results[0], results[2])

    def test_constant_rows_flagged(self) -> None:
        """Test correlations with a constant row are flagged and zeroed."""
        table = ElementTable.from_rows([[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [3.0, 1.0, 2.0]])
        q = generate(DifferenceSet(1, (0,)))
        result = run(table, q, build_schedule(q, split(3, 1)), get_kernel("pearson"))
        assert result.report.flagged_entries == 2
        assert result.flags[0, 1]
        assert result.flags[2, 0]
        assert not result.flags[1, 2]
        assert result.matrix[0, 2] == 0.0

    def test_constant_row_diagonal_zeroed(self) -> None:
        """Test a constant row has a flagged 0.0 diagonal while other rows keep 1.0."""
        table = ElementTable.from_rows([[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [3.0, 1.0, 2.0]])
        q = generate(DifferenceSet(1, (0,)))
        result = run(table, q, build_schedule(q, split(3, 1)), get_kernel("pearson"))
        assert result.flags[0, 0]
        assert result.matrix[0, 0] == 0.0
        assert not result.flags[1, 1]
        assert result.matrix[1, 1] == 1.0
        assert result.report.flagged_entries == 2

    async def test_async_run(self, random_table: TableFactory) -> None:
        """Test the coroutine entry point."""
        q, schedule = _setup(20, 7)
        result = await async_run(random_table(20), q, schedule, get_kernel("sad"), workers=4)
        assert result.matrix.shape == (20, 20)
        assert result.report.workers == 4


class TestIsolationAndCoverage:
    """Tests for per-worker data access and exact-once evaluation."""

    @pytest.mark.parametrize(("n", "p"), [(40, 7), (31, 13), (50, 16)])
    def test_reads_match_quorum_blocks(self, n: int, p: int) -> None:
        """Test each worker reads exactly the elements of its quorum."""
        q, schedule = _setup(n, p)
        result = run(ElementTable.index_only(n), q, schedule, get_kernel("handshake"), record=True)
        part = schedule.partition
        for worker, reads in result.reads_by_worker.items():
            expected = {x for block in q.quorums[worker] for x in part.block_range(block)}
            assert reads == expected

    def test_out_of_quorum_block_raises(self, fano: QuorumSystem) -> None:
        """Test a worker cannot touch a block it does not hold."""
        part = split(14, 7)
        worker = _QuorumWorker(
            0,
            fano.quorums[0],
            [(0, 2)],
            ElementTable.index_only(14),
            part,
            get_kernel("handshake"),
            record=False,
        )
        with pytest.raises(IsolationError, match="block 2"):
            worker.execute()

    @pytest.mark.parametrize(("n", "p"), [(23, 7), (40, 16), (12, 4), (5, 1)])
    def test_each_pair_once(self, n: int, p: int) -> None:
        """Test element pairs across all workers form every pair exactly once."""
        q, schedule = _setup(n, p)
        result = run(ElementTable.index_only(n), q, schedule, get_kernel("handshake"), record=True)
        seen = Counter(pair for pairs in result.pairs_by_worker.values() for pair in pairs)
        assert set(seen) == all_element_pairs(n)
        assert set(seen.values()) == {1}

    def test_conservation_and_memory_bound(self) -> None:
        """Test per-worker pair counts match the schedule and footprints stay bounded."""
        n, p = 103, 13
        q, schedule = _setup(n, p)
        result = run(ElementTable.index_only(n), q, schedule, get_kernel("handshake"))
        stats = result.report.worker_stats
        assert [s.element_pairs for s in stats] == list(schedule.workload)
        assert result.report.total_element_pairs == n * (n - 1) // 2
        bound = q.k * math.ceil(n / p)
        assert all(s.elements_held <= bound for s in stats)


class TestReplicationReport:
    """Tests for replication accounting."""

    def test_p16(self) -> None:
        """Test p=16, n=1600 holds 500 elements per worker."""
        report = replication_report(generate(search_minimal(16)), split(1600, 16))
        assert report.per_worker_elements == (500,) * 16
        assert report.fraction == pytest.approx(0.3125)
        assert report.reduction_vs_full == pytest.approx(0.6875)

    def test_single_worker(self) -> None:
        """Test p=1 replicates everything."""
        report = replication_report(generate(DifferenceSet(1, (0,))), split(10, 1))
        assert report.fraction == 1.0
        assert report.max_elements == 10

    def test_force_baseline(self, fano: QuorumSystem) -> None:
        """Test p=7, n=700 against 2N/sqrt(P)."""
        report = replication_report(fano, split(700, 7))
        assert report.max_elements == 300
        assert report.force_baseline == pytest.approx(529.150, abs=1e-3)
        assert report.atom_baseline == pytest.approx(100.0)

    @pytest.mark.parametrize("p", [7, 13, 21, 31])
    def test_beats_force_decomposition(self, p: int) -> None:
        """Test Singer orders hold at most 60% of the dual-array footprint."""
        report = replication_report(generate(search_minimal(p)), split(100 * p, p))
        assert report.max_elements == report.k * 100
        assert report.max_elements <= 0.6 * report.force_baseline

    def test_p_mismatch(self, fano: QuorumSystem) -> None:
        """Test partition and quorum system must agree."""
        with pytest.raises(ConfigurationError):
            replication_report(fano, split(10, 5))

    def test_as_dict(self, fano: QuorumSystem) -> None:
        """Test the report document."""
        data = replication_report(fano, split(70, 7)).as_dict()
        assert data["full_baseline"] == 70
        assert data["max_elements"] == 30
        assert data["per_worker_elements"] == [30] * 7


class TestRunErrors:
    """Tests for input validation."""

    def test_index_only_with_numeric_kernel(self, fano: QuorumSystem) -> None:
        """Test pearson on a count-only table."""
        schedule = build_schedule(fano, split(14, 7))
        with pytest.raises(ConfigurationError, match="index-only"):
            run(ElementTable.index_only(14), fano, schedule, get_kernel("pearson"))

    def test_schedule_p_mismatch(self, fano: QuorumSystem, square4: QuorumSystem) -> None:
        """Test a schedule built for another system."""
        schedule = build_schedule(square4, split(14, 4))
        with pytest.raises(ConfigurationError):
            run(ElementTable.index_only(14), fano, schedule, get_kernel("handshake"))

    def test_table_size_mismatch(self, fano: QuorumSystem) -> None:
        """Test the schedule partition must cover the table."""
        schedule = build_schedule(fano, split(14, 7))
        with pytest.raises(ConfigurationError):
            run(ElementTable.index_only(15), fano, schedule, get_kernel("handshake"))

    def test_infeasible_schedule(self, fano: QuorumSystem) -> None:
        """Test infeasible schedules are rejected before any work."""
        schedule = build_schedule(fano, split(14, 7))
        owner = dict(schedule.owner)
        owner[(0, 1)] = 2
        bad = Schedule(p=7, policy=schedule.policy, owner=owner, partition=schedule.partition)
        with pytest.raises(ScheduleError):
            run(ElementTable.index_only(14), fano, bad, get_kernel("handshake"))

    def test_zero_workers(self, fano: QuorumSystem) -> None:
        """Test at least one concurrent worker is required."""
        schedule = build_schedule(fano, split(14, 7))
        with pytest.raises(ConfigurationError):
            run(ElementTable.index_only(14), fano, schedule, get_kernel("handshake"), workers=0)


class TestEngineExports:
    """Tests for the engine module surface."""

    def test_exports_are_defined_here(self) -> None:
        """Test engine re-exports nothing from sibling modules."""
        for name in engine.__all__:
            assert getattr(engine, name).__module__ == engine.__name__, name
        assert "pearson" not in engine.__all__
