"""Pairwise kernels evaluated over block pairs.

Each kernel is symmetric and pure: the value for elements x and y depends only on
their two feature rows. Block evaluation returns a |D_j| x |D_k| matrix whose
entries follow fixed row-major order, so results never depend on which worker or
thread produced them.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
import logging

import numpy as np

from .constants import KERNEL_ALIASES, KERNEL_HANDSHAKE, KERNEL_PEARSON, KERNEL_SUM_ABS_DIFF
from .exceptions import ConfigurationError, KernelError, UndefinedCorrelationError

_LOGGER = logging.getLogger(__name__)


@dataclass
class BlockOutput:
    """Kernel output for one block pair."""

    pair_count: int
    values: np.ndarray | None = None
    flags: np.ndarray | None = None


def _pair_count(left: int, right: int, same_block: bool) -> int:
    return left * (left - 1) // 2 if same_block else left * right


class Kernel(ABC):
    """All-pairs kernel."""

    name: str
    needs_values: bool = True
    # Value placed on the diagonal of the N x N result
    diagonal: float = 0.0

    @abstractmethod
    def evaluate(
        self,
        left: np.ndarray | None,
        right: np.ndarray | None,
        left_size: int,
        right_size: int,
        same_block: bool,
    ) -> BlockOutput:
        """Evaluate every element pair of a block pair."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class HandshakeKernel(Kernel):
    """Emits 1 per element pair; reduction is a sum."""

    name = KERNEL_HANDSHAKE
    needs_values = False

    def evaluate(
        self,
        left: np.ndarray | None,
        right: np.ndarray | None,
        left_size: int,
        right_size: int,
        same_block: bool,
    ) -> BlockOutput:
        return BlockOutput(pair_count=_pair_count(left_size, right_size, same_block))


def constant_rows(values: np.ndarray) -> np.ndarray:
    """Boolean mask of rows with zero spread."""
    return np.ptp(values, axis=1) == 0


def standardize_rows(values: np.ndarray) -> np.ndarray:
    """Center each row and scale it to unit norm; constant rows become zero rows."""
    centered = values - values.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    constant = constant_rows(values)
    safe = np.where(constant, 1.0, norms)
    standardized = centered / safe[:, None]
    standardized[constant] = 0.0
    return standardized


class PearsonKernel(Kernel):
    """Sample Pearson correlation; entries involving a constant row are flagged and set to 0."""

    name = KERNEL_PEARSON
    diagonal = 1.0

    def evaluate(
        self,
        left: np.ndarray | None,
        right: np.ndarray | None,
        left_size: int,
        right_size: int,
        same_block: bool,
    ) -> BlockOutput:
        if left is None or right is None:
            raise ConfigurationError("Pearson kernel needs feature values")
        if left.shape[1] < 2:
            raise KernelError(f"Pearson correlation needs dim >= 2, got {left.shape[1]}")
        z_left = standardize_rows(left)
        z_right = z_left if same_block else standardize_rows(right)
        # einsum keeps a fixed summation order (no BLAS threading)
        corr = np.clip(np.einsum("if,jf->ij", z_left, z_right), -1.0, 1.0)
        flags = constant_rows(left)[:, None] | constant_rows(right)[None, :]
        corr[flags] = 0.0
        return BlockOutput(
            pair_count=_pair_count(left_size, right_size, same_block),
            values=corr,
            flags=flags,
        )


class SumAbsDiffKernel(Kernel):
    """Sum over features of |x_f - y_f|."""

    name = KERNEL_SUM_ABS_DIFF

    def evaluate(
        self,
        left: np.ndarray | None,
        right: np.ndarray | None,
        left_size: int,
        right_size: int,
        same_block: bool,
    ) -> BlockOutput:
        if left is None or right is None:
            raise ConfigurationError("Sum-abs-diff kernel needs feature values")
        out = np.empty((left_size, right_size), dtype=np.float64)
        for row in range(left_size):
            out[row] = np.abs(right - left[row]).sum(axis=1)
        return BlockOutput(pair_count=_pair_count(left_size, right_size, same_block), values=out)


_KERNELS: dict[str, type[Kernel]] = {
    KERNEL_HANDSHAKE: HandshakeKernel,
    KERNEL_PEARSON: PearsonKernel,
    KERNEL_SUM_ABS_DIFF: SumAbsDiffKernel,
}


def get_kernel(name: str) -> Kernel:
    """Return a kernel by name or alias ("handshake", "pearson", "sum-abs-diff").

    Raises:
        ConfigurationError: If the name is unknown

    """
    canonical = KERNEL_ALIASES.get(name)
    if canonical is None:
        raise ConfigurationError(f"Unknown kernel {name!r}; expected one of {sorted(KERNEL_ALIASES)}")
    return _KERNELS[canonical]()


def pearson(x: np.ndarray | list[float], y: np.ndarray | list[float]) -> float:
    """Sample Pearson correlation of two feature rows.

    Raises:
        KernelError: If the rows differ in length or have fewer than 2 features
        UndefinedCorrelationError: If either row is constant

    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or yv.ndim != 1 or xv.shape != yv.shape:
        raise KernelError(f"Rows must be 1-D and of equal length, got {xv.shape} and {yv.shape}")
    if xv.size < 2:
        raise KernelError(f"Pearson correlation needs dim >= 2, got {xv.size}")
    rows = np.vstack([xv, yv])
    if constant_rows(rows).any():
        raise UndefinedCorrelationError("Pearson correlation is undefined for a constant row")
    z = standardize_rows(rows)
    return float(np.clip(np.dot(z[0], z[1]), -1.0, 1.0))
