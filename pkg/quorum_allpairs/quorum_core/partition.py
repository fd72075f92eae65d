"""Element ingestion and contiguous near-equal block partitioning."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
import logging
import math
from pathlib import Path

import numpy as np

from .constants import (
    BINARY_HEADER_BYTES,
    BINARY_HEADER_DTYPE,
    BINARY_VALUE_DTYPE,
    FORMAT_ALIASES,
    FORMAT_BINARY,
    FORMAT_COUNT,
    FORMAT_CSV,
)
from .exceptions import IngestionError, InvalidInputError, PartitionError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ElementTable:
    """N elements, either with an n x dim float64 feature matrix or index-only."""

    n: int
    dim: int = 0
    values: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"Element table needs n >= 1, got {self.n}")
        if self.values is not None:
            values = np.array(self.values, dtype=np.float64, copy=True)
            if values.ndim != 2 or values.shape != (self.n, self.dim):
                raise InvalidInputError(
                    f"Values shape {values.shape} does not match n={self.n}, dim={self.dim}"
                )
            values.flags.writeable = False
            object.__setattr__(self, "values", values)

    @property
    def has_values(self) -> bool:
        return self.values is not None

    @classmethod
    def index_only(cls, n: int) -> ElementTable:
        return cls(n=n)

    @classmethod
    def from_rows(cls, rows: np.ndarray | list[list[float]]) -> ElementTable:
        values = np.asarray(rows, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInputError(f"Rows must form a 2-D matrix, got shape {values.shape}")
        _check_finite(values)
        return cls(n=values.shape[0], dim=values.shape[1], values=values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ElementTable):
            return NotImplemented
        if (self.n, self.dim, self.has_values) != (other.n, other.dim, other.has_values):
            return False
        if self.values is None or other.values is None:
            return True
        return bool(np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class Partition:
    """Block b holds element indices [boundaries[b], boundaries[b+1])."""

    p: int
    boundaries: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(
            self.boundaries[b + 1] - self.boundaries[b] for b in range(self.p)
        )

    def block_size(self, block: int) -> int:
        return self.boundaries[block + 1] - self.boundaries[block]

    def block_range(self, block: int) -> range:
        return range(self.boundaries[block], self.boundaries[block + 1])

    def block_slice(self, block: int) -> slice:
        return slice(self.boundaries[block], self.boundaries[block + 1])

    def block_of(self, index: int) -> int:
        """Block holding an element index."""
        if not 0 <= index < self.n:
            raise InvalidInputError(f"Element index {index} outside [0, {self.n})")
        return bisect_right(self.boundaries, index) - 1


def split(n: int, p: int) -> Partition:
    """Split n elements into p contiguous blocks whose sizes differ by at most one.

    The first n mod p blocks get ceil(n/p) elements, the rest floor(n/p).

    Raises:
        PartitionError: If n < 1, p < 1 or p > n

    """
    if n < 1 or p < 1:
        raise PartitionError(f"Need n >= 1 and p >= 1, got n={n}, p={p}")
    if p > n:
        raise PartitionError(f"Cannot split {n} elements into {p} non-empty blocks (p > n)")
    base, extra = divmod(n, p)
    boundaries = [0]
    for b in range(p):
        boundaries.append(boundaries[-1] + base + (1 if b < extra else 0))
    return Partition(p=p, boundaries=tuple(boundaries))


def _check_finite(values: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        row, col = (int(v) for v in bad[0])
        raise IngestionError(
            f"Non-finite value {values[row, col]!r}", location=f"row {row + 1}, column {col + 1}"
        )


def _ingest_csv(path: Path) -> ElementTable:
    rows: list[list[float]] = []
    dim: int | None = None
    with path.open(encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = line.split(",")
            if dim is None:
                dim = len(cells)
            elif len(cells) != dim:
                raise IngestionError(
                    f"Ragged row: expected {dim} columns, found {len(cells)}",
                    location=f"line {line_number}",
                )
            row: list[float] = []
            for column, cell in enumerate(cells, start=1):
                try:
                    value = float(cell)
                except ValueError as err:
                    raise IngestionError(
                        f"Non-numeric cell {cell.strip()!r}",
                        location=f"line {line_number}, column {column}",
                    ) from err
                if not math.isfinite(value):
                    raise IngestionError(
                        f"Non-finite value {cell.strip()!r}",
                        location=f"line {line_number}, column {column}",
                    )
                row.append(value)
            rows.append(row)
    if not rows or dim is None:
        raise IngestionError("CSV input holds no rows", location=str(path))
    return ElementTable(n=len(rows), dim=dim, values=np.array(rows, dtype=np.float64))


def _ingest_binary(path: Path) -> ElementTable:
    data = path.read_bytes()
    if len(data) < BINARY_HEADER_BYTES:
        raise IngestionError(
            f"Truncated header: {len(data)} of {BINARY_HEADER_BYTES} bytes",
            location="byte offset 0",
        )
    n, dim = (int(v) for v in np.frombuffer(data, dtype=BINARY_HEADER_DTYPE, count=2))
    if n < 1 or dim < 1:
        raise IngestionError(f"Header declares n={n}, dim={dim}", location="byte offset 0")
    payload = data[BINARY_HEADER_BYTES:]
    expected = n * dim * BINARY_VALUE_DTYPE.itemsize
    if len(payload) < expected:
        raise IngestionError(
            f"Truncated payload: header declares {n * dim} values, found "
            f"{len(payload) // BINARY_VALUE_DTYPE.itemsize}",
            location=f"byte offset {BINARY_HEADER_BYTES + len(payload)}",
        )
    if len(payload) > expected:
        raise IngestionError(
            f"{len(payload) - expected} trailing bytes after {n * dim} values",
            location=f"byte offset {BINARY_HEADER_BYTES + expected}",
        )
    values = np.frombuffer(payload, dtype=BINARY_VALUE_DTYPE).reshape(n, dim)
    _check_finite(values)
    return ElementTable(n=n, dim=dim, values=values.astype(np.float64))


def _ingest_count(path: Path) -> ElementTable:
    text = path.read_text(encoding="utf-8").strip()
    try:
        n = int(text)
    except ValueError as err:
        raise IngestionError(f"Expected a single integer, got {text[:40]!r}", location="line 1") from err
    if n < 1:
        raise IngestionError(f"Element count must be >= 1, got {n}", location="line 1")
    return ElementTable.index_only(n)


def ingest(source: str | Path, fmt: str) -> ElementTable:
    """Read element data.

    Args:
        source: File path
        fmt: "csv", "bin" (binary-matrix) or "count" (index-only)

    Raises:
        IngestionError: On unreadable, malformed, truncated or non-finite input

    """
    canonical = FORMAT_ALIASES.get(fmt)
    if canonical is None:
        raise InvalidInputError(f"Unknown input format {fmt!r}")
    path = Path(source)
    readers = {FORMAT_CSV: _ingest_csv, FORMAT_BINARY: _ingest_binary, FORMAT_COUNT: _ingest_count}
    try:
        table = readers[canonical](path)
    except OSError as err:
        raise IngestionError(f"Cannot read {path}: {err}", location=str(path)) from err
    except UnicodeDecodeError as err:
        raise IngestionError(f"Input is not UTF-8 text: {err}", location=str(path)) from err
    _LOGGER.debug("[Partition] Ingested %s (%s): n=%d, dim=%d", path, canonical, table.n, table.dim)
    return table


def encode_binary_matrix(values: np.ndarray) -> bytes:
    """Serialize a 2-D matrix in the binary-matrix layout."""
    matrix = np.ascontiguousarray(values, dtype=BINARY_VALUE_DTYPE)
    if matrix.ndim != 2:
        raise InvalidInputError(f"Binary matrix export needs 2-D values, got shape {matrix.shape}")
    header = np.array(matrix.shape, dtype=BINARY_HEADER_DTYPE)
    return header.tobytes() + matrix.tobytes()


def write_binary_matrix(values: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(encode_binary_matrix(values))
