"""Shared-nothing execution of an all-pairs kernel over a quorum decomposition.

Logical worker i copies exactly the blocks of quorum i, evaluates the kernel on
the block pairs the schedule assigns to it, and hands its private outputs to a
single merge step. Numeric results land in disjoint cells of the N x N output
and counts are summed in worker-index order, so the result does not depend on
how many workers run at once or in which order they finish.
"""

from __future__ import annotations

import asyncio
from dataclasses import dataclass, field
import logging
import math
import time
from typing import Any

import numpy as np

from .exceptions import ConfigurationError, IsolationError
from .kernels import BlockOutput, Kernel
from .partition import ElementTable, Partition
from .quorum import BlockPair, QuorumSystem
from .schedule import Schedule, validate_schedule

_LOGGER = logging.getLogger(__name__)

__all__ = [
    "ReplicationReport",
    "RunReport",
    "RunResult",
    "WorkerStats",
    "async_run",
    "replication_report",
    "run",
]


@dataclass
class ReplicationReport:
    """Per-worker data footprint compared with the usual decompositions."""

    p: int
    n: int
    k: int
    per_worker_elements: tuple[int, ...]
    fraction: float
    atom_baseline: float
    force_baseline: float

    @property
    def max_elements(self) -> int:
        return max(self.per_worker_elements)

    @property
    def mean_elements(self) -> float:
        return sum(self.per_worker_elements) / len(self.per_worker_elements)

    @property
    def reduction_vs_full(self) -> float:
        """Share of the dataset a worker does not hold, relative to full replication."""
        return 1.0 - self.max_elements / self.n

    @property
    def max_over_force(self) -> float:
        """Largest worker footprint relative to the dual-array baseline 2N/sqrt(P)."""
        return self.max_elements / self.force_baseline

    def as_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "per_worker_elements": list(self.per_worker_elements),
            "max_elements": self.max_elements,
            "mean_elements": self.mean_elements,
            "fraction": self.fraction,
            "full_baseline": self.n,
            "atom_baseline": self.atom_baseline,
            "force_baseline": self.force_baseline,
            "reduction_vs_full": self.reduction_vs_full,
            "max_over_force": self.max_over_force,
        }


def replication_report(q: QuorumSystem, part: Partition) -> ReplicationReport:
    """Account the elements each worker materializes.

    Raises:
        ConfigurationError: If part.p != q.p

    """
    if part.p != q.p:
        raise ConfigurationError(f"Partition has p={part.p} but quorum system has p={q.p}")
    per_worker = tuple(sum(part.block_size(b) for b in quorum) for quorum in q.quorums)
    k = q.k if q.k is not None else max(len(quorum) for quorum in q.quorums)
    return ReplicationReport(
        p=q.p,
        n=part.n,
        k=k,
        per_worker_elements=per_worker,
        fraction=k / q.p,
        atom_baseline=part.n / q.p,
        force_baseline=2 * part.n / math.sqrt(q.p),
    )


@dataclass
class WorkerStats:
    worker: int
    blocks_held: tuple[int, ...]
    elements_held: int
    block_pairs: int
    element_pairs: int
    kernel_seconds: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "worker": self.worker,
            "blocks_held": list(self.blocks_held),
            "elements_held": self.elements_held,
            "block_pairs": self.block_pairs,
            "element_pairs": self.element_pairs,
            "kernel_seconds": self.kernel_seconds,
        }


@dataclass
class RunReport:
    kernel: str
    p: int
    n: int
    policy: str
    workers: int
    worker_stats: list[WorkerStats]
    replication: ReplicationReport
    flagged_entries: int = 0
    wall_seconds: float = 0.0

    @property
    def total_element_pairs(self) -> int:
        return sum(stats.element_pairs for stats in self.worker_stats)

    def as_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel,
            "p": self.p,
            "n": self.n,
            "policy": self.policy,
            "workers": self.workers,
            "total_element_pairs": self.total_element_pairs,
            "flagged_entries": self.flagged_entries,
            "wall_seconds": self.wall_seconds,
            "worker_stats": [stats.as_dict() for stats in self.worker_stats],
            "replication": self.replication.as_dict(),
        }


@dataclass
class RunResult:
    """Merged kernel output plus the run report.

    `matrix`/`flags` are set for numeric kernels, `total` for counting kernels.
    `pairs_by_worker` and `reads_by_worker` are only filled by instrumented runs.
    """

    report: RunReport
    total: int | None = None
    matrix: np.ndarray | None = None
    flags: np.ndarray | None = None
    pairs_by_worker: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    reads_by_worker: dict[int, frozenset[int]] = field(default_factory=dict)


@dataclass
class _WorkerOutcome:
    worker: int
    outputs: list[tuple[BlockPair, BlockOutput]]
    stats: WorkerStats
    pairs: list[tuple[int, int]] | None
    reads: frozenset[int] | None


class _QuorumWorker:
    """One logical worker holding private copies of its quorum's blocks."""

    def __init__(
        self,
        index: int,
        quorum: tuple[int, ...],
        owned: list[BlockPair],
        table: ElementTable,
        partition: Partition,
        kernel: Kernel,
        record: bool,
    ) -> None:
        self.index = index
        self.quorum = quorum
        self.owned = owned
        self._table = table
        self._partition = partition
        self._kernel = kernel
        self._record = record
        self._held: dict[int, np.ndarray | None] = {}
        self._reads: set[int] = set()

    def _materialize(self) -> None:
        for block in self.quorum:
            rows = self._partition.block_slice(block)
            if self._table.values is not None and self._kernel.needs_values:
                self._held[block] = self._table.values[rows].copy()
            else:
                self._held[block] = None
            if self._record:
                self._reads.update(self._partition.block_range(block))

    def block(self, block: int) -> np.ndarray | None:
        if block not in self._held:
            raise IsolationError(
                f"Worker {self.index} has no copy of block {block} (quorum {list(self.quorum)})"
            )
        return self._held[block]

    def _element_pairs(self, pair: BlockPair) -> list[tuple[int, int]]:
        j, k = pair
        rows = self._partition.block_range(j)
        if j == k:
            return [(x, y) for pos, x in enumerate(rows) for y in rows[pos + 1 :]]
        cols = self._partition.block_range(k)
        return [(x, y) for x in rows for y in cols]

    def execute(self) -> _WorkerOutcome:
        started = time.perf_counter()
        self._materialize()
        outputs: list[tuple[BlockPair, BlockOutput]] = []
        pairs: list[tuple[int, int]] | None = [] if self._record else None
        for pair in self.owned:
            j, k = pair
            output = self._kernel.evaluate(
                self.block(j),
                self.block(k),
                self._partition.block_size(j),
                self._partition.block_size(k),
                j == k,
            )
            outputs.append((pair, output))
            if pairs is not None:
                pairs.extend(self._element_pairs(pair))
        elapsed = time.perf_counter() - started
        stats = WorkerStats(
            worker=self.index,
            blocks_held=tuple(self.quorum),
            elements_held=sum(self._partition.block_size(b) for b in self.quorum),
            block_pairs=len(self.owned),
            element_pairs=sum(output.pair_count for _, output in outputs),
            kernel_seconds=elapsed,
        )
        _LOGGER.debug(
            "[Engine] Worker %d finished %d block pairs (%d element pairs) in %.4fs",
            self.index,
            stats.block_pairs,
            stats.element_pairs,
            elapsed,
        )
        return _WorkerOutcome(
            worker=self.index,
            outputs=outputs,
            stats=stats,
            pairs=pairs,
            reads=frozenset(self._reads) if self._record else None,
        )


def _check_inputs(table: ElementTable, q: QuorumSystem, s: Schedule, kernel: Kernel, workers: int) -> None:
    if workers < 1:
        raise ConfigurationError(f"Need at least one concurrent worker, got {workers}")
    if kernel.needs_values and not table.has_values:
        raise ConfigurationError(f"Kernel {kernel.name} needs feature values; input is index-only")
    if s.p != q.p:
        raise ConfigurationError(f"Schedule has p={s.p} but quorum system has p={q.p}")
    if table.n < q.p:
        raise ConfigurationError(f"Need n >= p, got n={table.n}, p={q.p}")
    if s.partition.n != table.n:
        raise ConfigurationError(
            f"Schedule partitions {s.partition.n} elements but the table holds {table.n}"
        )
    validate_schedule(s, q)


def _merge(
    outcomes: list[_WorkerOutcome], kernel: Kernel, partition: Partition, n: int
) -> tuple[int, np.ndarray | None, np.ndarray | None]:
    total = 0
    matrix: np.ndarray | None = None
    flags: np.ndarray | None = None
    if kernel.needs_values:
        matrix = np.zeros((n, n), dtype=np.float64)
        flags = np.zeros((n, n), dtype=bool)

    for outcome in sorted(outcomes, key=lambda o: o.worker):
        total += outcome.stats.element_pairs
        if matrix is None or flags is None:
            continue
        for (j, k), output in outcome.outputs:
            if output.values is None:
                continue
            rows = partition.block_slice(j)
            cols = partition.block_slice(k)
            block_flags = (
                output.flags if output.flags is not None else np.zeros_like(output.values, bool)
            )
            if j != k:
                matrix[rows, cols] = output.values
                matrix[cols, rows] = output.values.T
                flags[rows, cols] = block_flags
                flags[cols, rows] = block_flags.T
                continue
            sub = matrix[rows, rows]
            sub_flags = flags[rows, rows]
            upper = np.triu_indices(output.values.shape[0], 1)
            lower = (upper[1], upper[0])
            sub[upper] = output.values[upper]
            sub[lower] = output.values[upper]
            sub_flags[upper] = block_flags[upper]
            sub_flags[lower] = block_flags[upper]
            diagonal = np.diag_indices(output.values.shape[0])
            # Flagged cells read 0.0, the diagonal of a constant row included
            sub[diagonal] = np.where(block_flags[diagonal], 0.0, kernel.diagonal)
            sub_flags[diagonal] = block_flags[diagonal]
    return total, matrix, flags


async def async_run(
    table: ElementTable,
    q: QuorumSystem,
    s: Schedule,
    kernel: Kernel,
    workers: int = 1,
    record: bool = False,
) -> RunResult:
    """Execute the kernel over all element pairs using p logical workers.

    Args:
        table: Element data (index-only is enough for counting kernels)
        q: Quorum system; worker i holds the blocks of quorum i
        s: Feasible schedule for q
        kernel: Kernel to evaluate
        workers: How many logical workers may run at the same time
        record: Record per-worker element pairs and read sets

    Raises:
        ConfigurationError: If the inputs disagree or the kernel needs values the table lacks
        ScheduleError: If the schedule is not total and feasible for q

    """
    _check_inputs(table, q, s, kernel, workers)
    partition = s.partition
    started = time.perf_counter()

    pool = [
        _QuorumWorker(i, q.quorums[i], s.owned_by(i), table, partition, kernel, record)
        for i in range(q.p)
    ]
    semaphore = asyncio.Semaphore(workers)

    async def _execute(worker: _QuorumWorker) -> _WorkerOutcome:
        async with semaphore:
            return await asyncio.to_thread(worker.execute)

    _LOGGER.debug(
        "[Engine] Running %s over n=%d with p=%d workers (width %d)",
        kernel.name,
        table.n,
        q.p,
        workers,
    )
    outcomes = list(await asyncio.gather(*(_execute(worker) for worker in pool)))
    total, matrix, flags = _merge(outcomes, kernel, partition, table.n)
    wall = time.perf_counter() - started

    flagged = int(np.count_nonzero(np.triu(flags, 1))) if flags is not None else 0
    if flagged:
        _LOGGER.warning("[Engine] %d correlation entries flagged (constant rows)", flagged)

    ordered = sorted(outcomes, key=lambda o: o.worker)
    report = RunReport(
        kernel=kernel.name,
        p=q.p,
        n=table.n,
        policy=s.policy,
        workers=workers,
        worker_stats=[outcome.stats for outcome in ordered],
        replication=replication_report(q, partition),
        flagged_entries=flagged,
        wall_seconds=wall,
    )
    _LOGGER.info(
        "[Engine] %s finished: %d element pairs across %d workers in %.3fs",
        kernel.name,
        report.total_element_pairs,
        q.p,
        wall,
    )
    return RunResult(
        report=report,
        total=total if not kernel.needs_values else None,
        matrix=matrix,
        flags=flags,
        pairs_by_worker={o.worker: o.pairs for o in ordered if o.pairs is not None},
        reads_by_worker={o.worker: o.reads for o in ordered if o.reads is not None},
    )


def run(
    table: ElementTable,
    q: QuorumSystem,
    s: Schedule,
    kernel: Kernel,
    workers: int = 1,
    record: bool = False,
) -> RunResult:
    """Run async_run to completion from synchronous code."""
    return asyncio.run(async_run(table, q, s, kernel, workers=workers, record=record))
