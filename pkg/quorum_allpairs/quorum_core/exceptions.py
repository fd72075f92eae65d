"""Exceptions for the quorum-allpairs core library."""

from __future__ import annotations


class QuorumAllPairsError(Exception):
    """Base exception for the core library."""


class InvalidInputError(QuorumAllPairsError):
    """Structurally invalid input value."""


class InvalidDifferenceSetError(InvalidInputError):
    """Difference set with out-of-range or duplicate residues, or without full coverage."""


class IngestionError(InvalidInputError):
    """Element data file could not be ingested."""

    def __init__(self, message: str, location: str | None = None) -> None:
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


class BudgetExceededError(QuorumAllPairsError):
    """Difference-set search ran out of steps before finding a set."""

    def __init__(self, p: int, last_k: int, steps: int) -> None:
        self.p = p
        self.last_k = last_k
        self.steps = steps
        super().__init__(
            f"Search budget exhausted for p={p} after {steps} steps (last k attempted: {last_k})"
        )


class CacheError(QuorumAllPairsError):
    """Corrupt or unreadable difference-set cache."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        super().__init__(f"{message} (line {line_number})" if line_number else message)


class PartitionError(QuorumAllPairsError):
    """Element count cannot be split into the requested blocks."""


class AllPairsViolationError(QuorumAllPairsError):
    """Quorum system does not cover every block pair."""

    def __init__(self, counterexample: tuple[int, int]) -> None:
        self.counterexample = counterexample
        super().__init__(
            f"Block pair ({counterexample[0]}, {counterexample[1]}) is not contained in any quorum"
        )


class ScheduleError(QuorumAllPairsError):
    """Schedule is partial, infeasible or does not match its inputs."""


class ConfigurationError(QuorumAllPairsError):
    """Run inputs do not fit together."""


class KernelError(QuorumAllPairsError):
    """Kernel inputs are invalid."""


class UndefinedCorrelationError(KernelError):
    """Pearson correlation is undefined for a constant row."""


class IsolationError(QuorumAllPairsError):
    """A worker accessed a block outside its quorum."""
