"""Common fixtures for quorum-allpairs tests."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from quorum_allpairs.const import ENV_CACHE_PATH
from quorum_allpairs.quorum_core import (
    DifferenceSet,
    ElementTable,
    QuorumSystem,
    generate,
)

# Pearson rows: perfectly linear and anti-linear
LINEAR_ROWS = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 2.0, 1.0]]

# Singer orders p = q^2 + q + 1 and their exact minimal k
SINGER_ORDERS = {3: 2, 7: 3, 13: 4, 21: 5, 31: 6}


@pytest.fixture(autouse=True)
def isolated_cache(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Path:
    """Point the default cache at a per-test file."""
    path = tmp_path / "cache" / "diffsets.txt"
    monkeypatch.setenv(ENV_CACHE_PATH, str(path))
    return path


@pytest.fixture
def fano_set() -> DifferenceSet:
    """Perfect difference set {0,1,3} mod 7."""
    return DifferenceSet(7, (0, 1, 3))


@pytest.fixture
def fano(fano_set: DifferenceSet) -> QuorumSystem:
    """Cyclic quorum system generated by {0,1,3} mod 7."""
    return generate(fano_set)


@pytest.fixture
def square4() -> QuorumSystem:
    """Cyclic quorum system generated by {0,1,2} mod 4."""
    return generate(DifferenceSet(4, (0, 1, 2)))


@pytest.fixture
def linear_csv(tmp_path: Path) -> Path:
    """Three-row CSV with exactly +-1 correlations."""
    path = tmp_path / "linear.csv"
    path.write_text("\n".join(",".join(str(v) for v in row) for row in LINEAR_ROWS) + "\n")
    return path


@pytest.fixture
def random_table() -> Callable[..., ElementTable]:
    """Return a factory for seeded random element tables."""

    def _make(n: int, dim: int = 6, seed: int = 7) -> ElementTable:
        rng = np.random.default_rng(seed)
        return ElementTable.from_rows(rng.normal(size=(n, dim)))

    return _make


@pytest.fixture
def random_csv(tmp_path: Path) -> Callable[..., Path]:
    """Return a factory writing a seeded random CSV file."""

    def _make(n: int, dim: int = 5, seed: int = 11) -> Path:
        rng = np.random.default_rng(seed)
        values = rng.uniform(-10.0, 10.0, size=(n, dim))
        path = tmp_path / f"random_{n}x{dim}.csv"
        path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in values) + "\n")
        return path

    return _make
