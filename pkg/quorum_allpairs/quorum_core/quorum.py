"""Cyclic quorum systems and their property verifiers.

Quorum i is the translate of the base difference set by i (mod p). Indices are
0-based throughout; 1-based labels D_1..D_P are a presentation concern of the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
from typing import Any

from .diffset import DifferenceSet, check_structure, verify_difference_set
from .exceptions import InvalidDifferenceSetError, InvalidInputError

_LOGGER = logging.getLogger(__name__)

type BlockPair = tuple[int, int]


@dataclass(frozen=True)
class QuorumSystem:
    """P quorums over block indices 0..p-1, optionally with the generating base set."""

    p: int
    quorums: tuple[tuple[int, ...], ...]
    base: DifferenceSet | None = None

    @property
    def k(self) -> int | None:
        """Common quorum size, or None when sizes differ."""
        sizes = {len(quorum) for quorum in self.quorums}
        return sizes.pop() if len(sizes) == 1 else None

    def quorum_sets(self) -> list[frozenset[int]]:
        return [frozenset(quorum) for quorum in self.quorums]

    def containing(self, block: int) -> list[int]:
        """Indices of the quorums holding the block."""
        return [i for i, quorum in enumerate(self.quorums) if block in quorum]


@dataclass
class AllPairsResult:
    """Outcome of the all-pairs check."""

    holds: bool
    witnesses: dict[BlockPair, tuple[int, ...]]
    counterexample: BlockPair | None = None


@dataclass
class QuorumPropertyReport:
    """One flag per quorum-set property plus the all-pairs outcome."""

    coverage: bool
    pairwise_intersection: bool
    equal_size: bool
    equal_responsibility: bool
    all_pairs: bool
    counterexample: BlockPair | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return (
            self.coverage
            and self.pairwise_intersection
            and self.equal_size
            and self.equal_responsibility
            and self.all_pairs
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "coverage": self.coverage,
            "pairwise_intersection": self.pairwise_intersection,
            "equal_size": self.equal_size,
            "equal_responsibility": self.equal_responsibility,
            "all_pairs": self.all_pairs,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            **self.details,
        }


def check_quorum_structure(q: QuorumSystem) -> None:
    """Raise InvalidInputError unless every quorum lists distinct indices in [0, p)."""
    if q.p < 1:
        raise InvalidInputError(f"Quorum system must have p >= 1, got {q.p}")
    for i, quorum in enumerate(q.quorums):
        if len(set(quorum)) != len(quorum):
            raise InvalidInputError(f"Quorum {i} lists a block twice: {list(quorum)}")
        for block in quorum:
            if not 0 <= block < q.p:
                raise InvalidInputError(f"Quorum {i} holds block {block} outside [0, {q.p})")


def generate(base: DifferenceSet) -> QuorumSystem:
    """Build the p cyclic translates of a verified difference set.

    The base is first shifted so that it contains 0, which places block i in quorum i.

    Raises:
        InvalidDifferenceSetError: If the base is malformed or does not cover all differences

    """
    if not verify_difference_set(base):
        raise InvalidDifferenceSetError(
            f"{base.as_text()} is not a relaxed difference set mod {base.p}"
        )
    canonical = base.canonical()
    if canonical != base:
        _LOGGER.debug("[Quorum] Shifted base %s to %s", base.as_text(), canonical.as_text())
    p = canonical.p
    quorums = tuple(
        tuple(sorted((a + i) % p for a in canonical.elements)) for i in range(p)
    )
    _LOGGER.debug("[Quorum] Generated %d quorums of size %d", p, canonical.k)
    return QuorumSystem(p=p, quorums=quorums, base=canonical)


def verify_all_pairs(q: QuorumSystem) -> AllPairsResult:
    """Check that every block pair (j, k), j <= k, shares a quorum.

    Returns every containing quorum per pair (ascending), or the first uncovered
    pair in lexicographic order.
    """
    check_quorum_structure(q)
    collected: dict[BlockPair, list[int]] = {}
    for i, quorum in enumerate(q.quorums):
        members = sorted(quorum)
        for pos, j in enumerate(members):
            for k in members[pos:]:
                collected.setdefault((j, k), []).append(i)

    counterexample: BlockPair | None = None
    for j in range(q.p):
        for k in range(j, q.p):
            if (j, k) not in collected:
                counterexample = (j, k)
                break
        if counterexample:
            break

    witnesses = {pair: tuple(owners) for pair, owners in sorted(collected.items())}
    if counterexample is not None:
        _LOGGER.debug("[Quorum] All-pairs violated: %s uncovered", counterexample)
        return AllPairsResult(holds=False, witnesses=witnesses, counterexample=counterexample)
    return AllPairsResult(holds=True, witnesses=witnesses)


def verify_quorum_properties(q: QuorumSystem) -> QuorumPropertyReport:
    """Check coverage, pairwise intersection, equal size, equal responsibility and all-pairs."""
    check_quorum_structure(q)
    sets = q.quorum_sets()

    covered = set().union(*sets) if sets else set()
    coverage = covered == set(range(q.p))

    pairwise_intersection = all(
        sets[i] & sets[j] for i in range(len(sets)) for j in range(i, len(sets))
    )

    sizes = [len(s) for s in sets]
    equal_size = len(sets) == q.p and len(set(sizes)) <= 1

    responsibility = [sum(1 for s in sets if block in s) for block in range(q.p)]
    # No quorums at all leaves every block at 0
    equal_responsibility = (
        len(set(responsibility)) == 1
        and responsibility[0] > 0
        and (not equal_size or responsibility[0] == sizes[0])
    )

    all_pairs = verify_all_pairs(q)
    return QuorumPropertyReport(
        coverage=coverage,
        pairwise_intersection=pairwise_intersection,
        equal_size=equal_size,
        equal_responsibility=equal_responsibility,
        all_pairs=all_pairs.holds,
        counterexample=all_pairs.counterexample,
        details={
            "p": q.p,
            "quorum_count": len(sets),
            "quorum_sizes": sorted(set(sizes)),
            "responsibility": sorted(set(responsibility)),
        },
    )


def quorum_system_to_dict(q: QuorumSystem) -> dict[str, Any]:
    return {
        "p": q.p,
        "base": list(q.base.elements) if q.base else None,
        "quorums": [list(quorum) for quorum in q.quorums],
    }


def quorum_system_from_dict(data: Any) -> QuorumSystem:
    """Build a structurally valid QuorumSystem from its JSON document.

    Raises:
        InvalidInputError: If fields are missing, mistyped or out of range

    """
    if not isinstance(data, dict):
        raise InvalidInputError("Quorum document must be a JSON object")
    try:
        p = data["p"]
        raw_quorums = data["quorums"]
        raw_base = data.get("base")
    except KeyError as err:
        raise InvalidInputError(f"Quorum document is missing field {err}") from err

    if not isinstance(p, int) or isinstance(p, bool):
        raise InvalidInputError(f"Field 'p' must be an integer, got {p!r}")
    if not isinstance(raw_quorums, list) or not all(
        isinstance(quorum, list)
        and all(isinstance(b, int) and not isinstance(b, bool) for b in quorum)
        for quorum in raw_quorums
    ):
        raise InvalidInputError("Field 'quorums' must be a list of integer lists")

    base = None
    if raw_base is not None:
        if not isinstance(raw_base, list) or not all(
            isinstance(a, int) and not isinstance(a, bool) for a in raw_base
        ):
            raise InvalidInputError("Field 'base' must be a list of integers or null")
        base = DifferenceSet(p, tuple(raw_base))
        check_structure(base)

    q = QuorumSystem(
        p=p, quorums=tuple(tuple(sorted(quorum)) for quorum in raw_quorums), base=base
    )
    check_quorum_structure(q)
    return q


def dump_quorum_system(q: QuorumSystem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(quorum_system_to_dict(q), indent=2) + "\n", encoding="utf-8")


def load_quorum_system(path: str | Path) -> QuorumSystem:
    """Read a quorum system JSON file.

    Raises:
        InvalidInputError: If the file is unreadable, not JSON, or structurally invalid

    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise InvalidInputError(f"Cannot read quorum file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InvalidInputError(f"Quorum file {path} is not valid JSON: {err}") from err
    return quorum_system_from_dict(data)
