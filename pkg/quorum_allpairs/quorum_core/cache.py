"""Difference-set cache file.

One record per line, `p k a_1,a_2,...,a_k` in decimal, sorted by p. Lines starting
with `#` and blank lines are ignored. Every record is re-verified when loaded and
must start at 0 with k no smaller than the counting bound; a failing record is an
error, never silently skipped.
"""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path

from .constants import CACHE_COMMENT
from .diffset import DifferenceSet, minimal_k_lower_bound, verify_difference_set
from .exceptions import CacheError, InvalidDifferenceSetError

_LOGGER = logging.getLogger(__name__)


def parse_cache_text(text: str) -> dict[int, DifferenceSet]:
    """Parse and validate cache records.

    Raises:
        CacheError: On a malformed, duplicate or failing record

    """
    entries: dict[int, DifferenceSet] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(CACHE_COMMENT):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise CacheError(f"Expected 'p k a_1,...,a_k', got {line!r}", line_number)
        try:
            p = int(fields[0])
            k = int(fields[1])
            elements = tuple(int(a) for a in fields[2].split(","))
        except ValueError as err:
            raise CacheError(f"Non-integer field in {line!r}", line_number) from err
        if len(elements) != k:
            raise CacheError(f"Record declares k={k} but lists {len(elements)} elements", line_number)
        if p in entries:
            raise CacheError(f"Duplicate record for p={p}", line_number)
        if p < 1:
            raise CacheError(f"Modulus must be positive, got p={p}", line_number)
        lower = minimal_k_lower_bound(p)
        if k < lower:
            raise CacheError(
                f"Record k={k} is below the lower bound {lower} for p={p}",
                line_number,
            )
        ds = DifferenceSet(p, elements)
        if not ds.is_canonical:
            raise CacheError(f"Record {ds.as_text()} does not start at 0", line_number)
        try:
            valid = verify_difference_set(ds)
        except InvalidDifferenceSetError as err:
            raise CacheError(str(err), line_number) from err
        if not valid:
            raise CacheError(
                f"Record {ds.as_text()} is not a difference set mod {p}", line_number
            )
        entries[p] = ds
    return entries


def format_cache_text(entries: dict[int, DifferenceSet]) -> str:
    """Render records sorted by p."""
    return "".join(
        f"{p} {ds.k} {','.join(str(a) for a in ds.elements)}\n"
        for p, ds in sorted(entries.items())
    )


class DifferenceSetCache:
    """Lazily loaded store of searched difference sets keyed by p."""

    def __init__(self, path: str | Path) -> None:
        """Initialize the cache.

        Args:
            path: Cache file location. A missing file is an empty cache.

        """
        self._path = Path(path)
        self._entries: dict[int, DifferenceSet] = {}
        self._loaded = False
        self._dirty = False

    @property
    def path(self) -> Path:
        return self._path

    def _read(self) -> str | None:
        """Read the cache file (runs in thread pool)."""
        if not self._path.exists():
            return None
        return self._path.read_text(encoding="utf-8")

    def _write(self, content: str) -> None:
        """Write the cache file atomically (runs in thread pool)."""
        self._path.parent.mkdir(parents=True, exist_ok=True)
        tmp_path = self._path.with_suffix(self._path.suffix + ".tmp")
        tmp_path.write_text(content, encoding="utf-8")
        tmp_path.replace(self._path)

    async def async_load(self) -> None:
        """Load and validate the cache file.

        Safe to call multiple times - will only load once.

        Raises:
            CacheError: If the file is unreadable or holds an invalid record

        """
        if self._loaded:
            return
        try:
            text = await asyncio.to_thread(self._read)
        except OSError as err:
            raise CacheError(f"Cannot read cache file {self._path}: {err}") from err

        if text is None:
            _LOGGER.debug("[Cache] No cache file at %s, starting empty", self._path)
        else:
            # Records put before the first load take precedence
            self._entries = {**parse_cache_text(text), **self._entries}
            _LOGGER.debug("[Cache] Loaded %d records from %s", len(self._entries), self._path)
        self._loaded = True

    async def async_get(self, p: int) -> DifferenceSet | None:
        """Return the cached set for p, loading the file on first use."""
        await self.async_load()
        return self._entries.get(p)

    def put(self, ds: DifferenceSet) -> None:
        """Record a verified canonical set; anything else is rejected."""
        if not ds.is_canonical:
            raise InvalidDifferenceSetError(f"{ds.as_text()} does not start at 0")
        if not verify_difference_set(ds):
            raise InvalidDifferenceSetError(f"{ds.as_text()} is not a difference set mod {ds.p}")
        if self._entries.get(ds.p) != ds:
            self._entries[ds.p] = ds
            self._dirty = True

    def entries(self) -> dict[int, DifferenceSet]:
        return dict(self._entries)

    async def async_save(self) -> None:
        """Persist records if anything changed since loading."""
        if not self._dirty:
            return
        await self.async_load()
        try:
            await asyncio.to_thread(self._write, format_cache_text(self._entries))
        except OSError as err:
            raise CacheError(f"Cannot write cache file {self._path}: {err}") from err
        self._dirty = False
        _LOGGER.debug("[Cache] Saved %d records to %s", len(self._entries), self._path)
