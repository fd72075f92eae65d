"""Pipeline coordinator: cache -> search -> quorum -> partition -> schedule -> run."""

from __future__ import annotations

import asyncio
from dataclasses import dataclass
import logging
from pathlib import Path

from .const import (
    DEFAULT_KERNEL,
    DEFAULT_POLICY,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_WORKERS,
    MAX_WORKERS,
    MIN_SEARCH_BUDGET,
    MIN_WORKERS,
    POLICIES,
)
from .helpers import log_debug, log_info, log_warning
from .quorum_core import (
    BudgetExceededError,
    ConfigurationError,
    DifferenceSet,
    DifferenceSetCache,
    ElementTable,
    Partition,
    QuorumSystem,
    RunResult,
    Schedule,
    async_run,
    build_schedule,
    exists_difference_set,
    fallback_consecutive,
    generate,
    get_kernel,
    minimal_k_lower_bound,
    search_minimal,
    split,
)

_LOGGER = logging.getLogger(__name__)

SOURCE_CACHE = "cache"
SOURCE_SEARCH = "search"
SOURCE_FALLBACK = "fallback"
SOURCE_IMPORT = "import"


@dataclass(frozen=True)
class PipelineConfig:
    """Settings shared by every pipeline stage."""

    p: int
    policy: str = DEFAULT_POLICY
    kernel: str = DEFAULT_KERNEL
    workers: int = DEFAULT_WORKERS
    budget: int | None = DEFAULT_SEARCH_BUDGET
    cache_path: Path | None = None
    allow_fallback: bool = False

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ConfigurationError(f"p must be a positive integer, got {self.p}")
        if self.policy not in POLICIES:
            raise ConfigurationError(f"Unknown policy {self.policy!r}; expected one of {POLICIES}")
        if not MIN_WORKERS <= self.workers <= MAX_WORKERS:
            raise ConfigurationError(
                f"workers must be between {MIN_WORKERS} and {MAX_WORKERS}, got {self.workers}"
            )
        if self.budget is not None and self.budget < MIN_SEARCH_BUDGET:
            raise ConfigurationError(
                f"budget must be >= {MIN_SEARCH_BUDGET}, got {self.budget}"
            )


@dataclass
class ResolvedDifferenceSet:
    """A difference set plus where it came from."""

    ds: DifferenceSet
    source: str
    # Cache hits only: no smaller set exists for p
    certified: bool = False

    @property
    def minimal(self) -> bool:
        """Whether the set is proven minimal, by the search or a certified cache record."""
        return self.source == SOURCE_SEARCH or (self.source == SOURCE_CACHE and self.certified)


@dataclass
class Pipeline:
    """Every artifact built for one run."""

    resolved: ResolvedDifferenceSet | None
    quorums: QuorumSystem
    partition: Partition
    schedule: Schedule


class PipelineCoordinator:
    """Builds pipeline stages for one configuration and keeps intermediate results."""

    def __init__(self, config: PipelineConfig, quorums: QuorumSystem | None = None) -> None:
        """Initialize the coordinator.

        Args:
            config: Pipeline settings; `cache_path=None` disables the cache
            quorums: Imported quorum system; skips difference-set resolution

        Raises:
            ConfigurationError: If an imported system disagrees with config.p

        """
        if quorums is not None and quorums.p != config.p:
            raise ConfigurationError(
                f"Quorum system has p={quorums.p} but the configuration asks for p={config.p}"
            )
        self.config = config
        self._cache = DifferenceSetCache(config.cache_path) if config.cache_path else None
        self._quorums = quorums
        self._resolved: ResolvedDifferenceSet | None = None
        if quorums is not None and quorums.base is not None:
            self._resolved = ResolvedDifferenceSet(quorums.base, SOURCE_IMPORT)

        log_debug(
            _LOGGER,
            "[Coordinator]",
            "Configured",
            p=config.p,
            policy=config.policy,
            kernel=config.kernel,
            workers=config.workers,
            budget=config.budget,
            cache=config.cache_path,
            imported=quorums is not None,
        )

    async def async_resolve_difference_set(self) -> ResolvedDifferenceSet:
        """Return a difference set for p from the cache, a search, or the fallback.

        A cache hit above the counting bound is re-checked one level down. A stale
        record triggers a fresh search; one that cannot be checked within the budget
        is used but not reported as minimal.

        Raises:
            BudgetExceededError: If the search runs out of budget and fallback is not allowed
            CacheError: If the cache file is corrupt

        """
        if self._resolved is not None:
            return self._resolved
        p = self.config.p

        if self._cache is not None:
            cached = await self._cache.async_get(p)
            if cached is not None:
                log_debug(_LOGGER, "[Coordinator]", "Cache hit", p=p, elements=cached.as_text())
                certified = await self._async_certify(cached)
                if certified is not None:
                    self._resolved = ResolvedDifferenceSet(cached, SOURCE_CACHE, certified)
                    return self._resolved

        try:
            ds = await asyncio.to_thread(search_minimal, p, self.config.budget)
        except BudgetExceededError as err:
            if not self.config.allow_fallback:
                raise
            ds = fallback_consecutive(p)
            log_warning(
                _LOGGER,
                "[Coordinator]",
                "Search budget exhausted, using the consecutive fallback set (not minimal)",
                p=p,
                last_k=err.last_k,
                k=ds.k,
            )
            self._resolved = ResolvedDifferenceSet(ds, SOURCE_FALLBACK)
            return self._resolved

        log_info(
            _LOGGER, "[Coordinator]", "Difference set resolved", p=p, k=ds.k, elements=ds.as_text()
        )
        if self._cache is not None:
            self._cache.put(ds)
            await self._cache.async_save()
        self._resolved = ResolvedDifferenceSet(ds, SOURCE_SEARCH)
        return self._resolved

    async def _async_certify(self, cached: DifferenceSet) -> bool | None:
        """Check that no set smaller than a cached record exists.

        Returns:
            True when certified, False when the budget ran out first, and None when
            a smaller set exists so the record is stale and a fresh search is needed

        """
        p = cached.p
        if cached.k <= minimal_k_lower_bound(p):
            return True
        try:
            smaller = await asyncio.to_thread(
                exists_difference_set, p, cached.k - 1, self.config.budget
            )
        except BudgetExceededError:
            log_warning(
                _LOGGER,
                "[Coordinator]",
                "Could not certify cached set within budget, using it unverified",
                p=p,
                k=cached.k,
            )
            return False
        if smaller is None:
            return True
        log_warning(
            _LOGGER,
            "[Coordinator]",
            "Cached set is not minimal, searching again",
            p=p,
            cached=cached.as_text(),
            smaller=smaller.as_text(),
        )
        return None

    async def async_quorum_system(self) -> QuorumSystem:
        if self._quorums is None:
            resolved = await self.async_resolve_difference_set()
            self._quorums = generate(resolved.ds)
        return self._quorums

    async def async_build(self, n: int, schedule: Schedule | None = None) -> Pipeline:
        """Build quorums, partition and schedule for n elements.

        Args:
            n: Element count
            schedule: Precomputed schedule to use instead of building one

        Raises:
            PartitionError: If p > n
            AllPairsViolationError: If an imported quorum system lacks the all-pairs property

        """
        quorums = await self.async_quorum_system()
        if schedule is None:
            partition = split(n, self.config.p)
            schedule = build_schedule(quorums, partition, self.config.policy)
        return Pipeline(
            resolved=self._resolved,
            quorums=quorums,
            partition=schedule.partition,
            schedule=schedule,
        )

    async def async_run(
        self,
        table: ElementTable,
        schedule: Schedule | None = None,
        workers: int | None = None,
    ) -> tuple[Pipeline, RunResult]:
        """Build the pipeline for a table and execute the configured kernel."""
        kernel = get_kernel(self.config.kernel)
        pipeline = await self.async_build(table.n, schedule)
        result = await async_run(
            table,
            pipeline.quorums,
            pipeline.schedule,
            kernel,
            workers=workers or self.config.workers,
        )
        return pipeline, result
