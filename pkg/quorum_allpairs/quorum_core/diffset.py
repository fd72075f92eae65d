"""Relaxed difference sets: verification, minimal search and fallback construction.

A relaxed (p, k)-difference set is a set of k residues mod p whose pairwise
differences realize every nonzero residue at least once. Its cyclic translates
form a quorum system with the all-pairs property, so the set size k directly
determines how much of the data every worker has to hold.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import logging
from typing import Any

from .exceptions import BudgetExceededError, InvalidDifferenceSetError, InvalidInputError

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DifferenceSet:
    """Residues mod p, stored sorted ascending."""

    p: int
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        """Normalize elements to a sorted tuple of ints (duplicates are kept for validation)."""
        object.__setattr__(self, "elements", tuple(sorted(int(e) for e in self.elements)))

    @property
    def k(self) -> int:
        """Set size."""
        return len(self.elements)

    @property
    def is_canonical(self) -> bool:
        """True when the first element is 0."""
        return bool(self.elements) and self.elements[0] == 0

    def translate(self, t: int) -> DifferenceSet:
        """Return the set shifted by t mod p."""
        return DifferenceSet(self.p, tuple((a + t) % self.p for a in self.elements))

    def canonical(self) -> DifferenceSet:
        """Return the translate that contains 0 as its smallest element."""
        if self.is_canonical:
            return self
        return self.translate(-self.elements[0])

    def differences(self) -> set[int]:
        """Return all nonzero residues realized as (a_i - a_j) mod p."""
        return {(a - b) % self.p for a in self.elements for b in self.elements if a != b}

    def as_text(self) -> str:
        """Render as `{0,1,3}`."""
        return "{" + ",".join(str(a) for a in self.elements) + "}"


def check_structure(candidate: DifferenceSet) -> None:
    """Raise InvalidDifferenceSetError unless residues are in range and distinct."""
    if candidate.p < 1:
        raise InvalidDifferenceSetError(f"Modulus must be positive, got p={candidate.p}")
    if not candidate.elements:
        raise InvalidDifferenceSetError(f"Difference set mod {candidate.p} is empty")
    for a in candidate.elements:
        if not 0 <= a < candidate.p:
            raise InvalidDifferenceSetError(
                f"Element {a} out of range [0, {candidate.p}) for p={candidate.p}"
            )
    if len(set(candidate.elements)) != len(candidate.elements):
        raise InvalidDifferenceSetError(
            f"Duplicate elements in {list(candidate.elements)} for p={candidate.p}"
        )


def _full_mask(p: int) -> int:
    """Bits 1..p-1 set."""
    return ((1 << p) - 1) & ~1


def _coverage_mask(p: int, elements: tuple[int, ...]) -> int:
    mask = 0
    for a in elements:
        for b in elements:
            if a != b:
                mask |= 1 << ((a - b) % p)
    return mask


def minimal_k_lower_bound(p: int) -> int:
    """Return the smallest k with k(k-1)+1 >= p.

    A relaxed difference set of size k has at most k(k-1) nonzero differences,
    so no set smaller than this bound can cover the p-1 nonzero residues.
    """
    if p < 1:
        raise InvalidInputError(f"p must be a positive integer, got {p}")
    k = 1
    while k * (k - 1) + 1 < p:
        k += 1
    return k


def verify_difference_set(candidate: DifferenceSet) -> bool:
    """Return True iff every residue 1..p-1 is a difference of two elements.

    Raises:
        InvalidDifferenceSetError: If the candidate is structurally invalid.

    """
    check_structure(candidate)
    full = _full_mask(candidate.p)
    return _coverage_mask(candidate.p, candidate.elements) & full == full


def difference_multiplicities(ds: DifferenceSet) -> dict[int, int]:
    """Count the ordered element pairs realizing each nonzero residue."""
    counts = Counter((a - b) % ds.p for a in ds.elements for b in ds.elements if a != b)
    return {d: counts.get(d, 0) for d in range(1, ds.p)}


def is_perfect(ds: DifferenceSet) -> bool:
    """True when every nonzero residue is realized exactly once (Singer-type set)."""
    return all(count == 1 for count in difference_multiplicities(ds).values())


def _is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    factor = 2
    while factor * factor <= q and q % factor:
        factor += 1
    if q % factor:
        return True  # q is prime
    while q % factor == 0:
        q //= factor
    return q == 1


def is_singer_order(p: int) -> bool:
    """True when p = q^2 + q + 1 for a prime power q (q = 1 admits the trivial p = 3)."""
    q = 1
    while q * q + q + 1 < p:
        q += 1
    return q * q + q + 1 == p and (q == 1 or _is_prime_power(q))


class _StepCounter:
    """Shared step budget across search levels."""

    def __init__(self, p: int, budget: int | None) -> None:
        self.p = p
        self.budget = budget
        self.steps = 0
        self.k = 0

    def step(self) -> None:
        self.steps += 1
        if self.budget is not None and self.steps > self.budget:
            raise BudgetExceededError(self.p, self.k, self.budget)


def _extend(
    prefix: list[int],
    covered: int,
    k: int,
    p: int,
    full: int,
    half: int,
    counter: _StepCounter,
) -> list[int] | None:
    """Depth-first lexicographic extension of an ascending prefix."""
    size = len(prefix)
    if size == k:
        return list(prefix) if covered & full == full else None

    remaining = k - size
    # Coverage is symmetric (d and p-d together), so count uncovered classes d <= p/2.
    # Each new pair of elements can close at most one class.
    missing = (half & ~covered).bit_count()
    if missing > size * remaining + remaining * (remaining - 1) // 2:
        return None

    for x in range(prefix[-1] + 1, p - remaining + 1):
        counter.step()
        extended = covered
        for a in prefix:
            d = x - a
            extended |= (1 << d) | (1 << (p - d))
        prefix.append(x)
        found = _extend(prefix, extended, k, p, full, half, counter)
        prefix.pop()
        if found is not None:
            return found
    return None


def _search_level(p: int, k: int, counter: _StepCounter) -> DifferenceSet | None:
    counter.k = k
    if k > p:
        return None
    full = _full_mask(p)
    half = 0
    for d in range(1, p // 2 + 1):
        half |= 1 << d
    found = _extend([0], 0, k, p, full, half, counter)
    return DifferenceSet(p, tuple(found)) if found is not None else None


def exists_difference_set(p: int, k: int, budget: int | None = None) -> DifferenceSet | None:
    """Return the lexicographically smallest canonical k-set mod p, or None if none exists.

    Raises:
        BudgetExceededError: If the step budget runs out before the level is decided.

    """
    if p < 1:
        raise InvalidInputError(f"p must be a positive integer, got {p}")
    return _search_level(p, k, _StepCounter(p, budget))


def search_minimal(p: int, budget: int | None = None) -> DifferenceSet:
    """Find a minimum-size relaxed difference set mod p by exhaustive search.

    Levels are tried from minimal_k_lower_bound(p) upward; within a level the
    first set found in lexicographic order (with 0 fixed as first element) is
    returned, so the result is deterministic.

    Args:
        p: Modulus (number of blocks/workers), p >= 1
        budget: Optional limit on candidate-prefix extensions across all levels

    Raises:
        BudgetExceededError: If the budget runs out; carries the last k attempted

    """
    lower = minimal_k_lower_bound(p)
    counter = _StepCounter(p, budget)
    k = lower
    while True:
        _LOGGER.debug("[Search] p=%d: trying k=%d (steps so far=%d)", p, k, counter.steps)
        found = _search_level(p, k, counter)
        if found is not None:
            if _LOGGER.isEnabledFor(logging.DEBUG):
                _LOGGER.debug(
                    "[Search] p=%d: found %s with k=%d in %d steps (lower bound %d, perfect=%s)",
                    p,
                    found.as_text(),
                    k,
                    counter.steps,
                    lower,
                    is_perfect(found),
                )
            return found
        k += 1


def fallback_consecutive(p: int) -> DifferenceSet:
    """Return {0, 1, ..., floor(p/2)}, a valid but generally non-minimal set.

    A run of m consecutive residues realizes +-1..+-(m-1); with m = floor(p/2)+1
    these cover every nonzero residue mod p.
    """
    if p < 1:
        raise InvalidInputError(f"p must be a positive integer, got {p}")
    return DifferenceSet(p, tuple(range(p // 2 + 1)))


def difference_set_to_dict(ds: DifferenceSet) -> dict[str, Any]:
    return {"p": ds.p, "k": ds.k, "elements": list(ds.elements)}


def difference_set_from_dict(data: Any) -> DifferenceSet:
    """Rebuild a difference set from a JSON document with `p` and `elements`.

    Raises:
        InvalidInputError: If fields are missing or mistyped
        InvalidDifferenceSetError: If the residues are out of range or repeated

    """
    if not isinstance(data, dict):
        raise InvalidInputError("Difference-set document must be a JSON object")
    p = data.get("p")
    elements = data.get("elements")
    if not isinstance(p, int) or isinstance(p, bool):
        raise InvalidInputError(f"Field 'p' must be an integer, got {p!r}")
    if not isinstance(elements, list) or not all(
        isinstance(a, int) and not isinstance(a, bool) for a in elements
    ):
        raise InvalidInputError("Field 'elements' must be a list of integers")
    ds = DifferenceSet(p, tuple(elements))
    check_structure(ds)
    return ds
