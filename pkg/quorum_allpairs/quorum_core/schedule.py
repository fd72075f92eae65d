"""Static ownership of block pairs.

Every unordered block pair (j, k), j <= k, is computed by exactly one worker whose
quorum holds both blocks. Costs are counted in element pairs: |D_j|*|D_k| for
cross pairs and |D_i|*(|D_i|-1)/2 for self pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
from typing import Any

from .constants import POLICIES, POLICY_BALANCED, POLICY_FIRST_WITNESS
from .exceptions import (
    AllPairsViolationError,
    ConfigurationError,
    InvalidInputError,
    ScheduleError,
)
from .partition import Partition
from .quorum import BlockPair, QuorumSystem, verify_all_pairs

_LOGGER = logging.getLogger(__name__)


def pair_cost(partition: Partition, pair: BlockPair) -> int:
    """Element pairs contained in a block pair."""
    j, k = pair
    if j == k:
        size = partition.block_size(j)
        return size * (size - 1) // 2
    return partition.block_size(j) * partition.block_size(k)


@dataclass(frozen=True)
class Schedule:
    """Owner per block pair, computed against a partition."""

    p: int
    policy: str
    owner: dict[BlockPair, int]
    partition: Partition
    workload: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        loads = [0] * self.p
        for pair, worker in self.owner.items():
            loads[worker] += pair_cost(self.partition, pair)
        object.__setattr__(self, "workload", tuple(loads))

    def owned_by(self, worker: int) -> list[BlockPair]:
        """Pairs owned by a worker in lexicographic order."""
        return sorted(pair for pair, owner in self.owner.items() if owner == worker)

    def block_pair_counts(self) -> tuple[int, ...]:
        counts = [0] * self.p
        for worker in self.owner.values():
            counts[worker] += 1
        return tuple(counts)


@dataclass
class BalanceReport:
    """Per-worker load figures for a schedule."""

    policy: str
    block_pairs: tuple[int, ...]
    element_pairs: tuple[int, ...]
    max_over_mean: float
    max_over_min: float | None

    @property
    def total_block_pairs(self) -> int:
        return sum(self.block_pairs)

    @property
    def total_element_pairs(self) -> int:
        return sum(self.element_pairs)

    def as_dict(self) -> dict[str, Any]:
        return {
            "policy": self.policy,
            "block_pairs": list(self.block_pairs),
            "element_pairs": list(self.element_pairs),
            "total_block_pairs": self.total_block_pairs,
            "total_element_pairs": self.total_element_pairs,
            "max_over_mean": self.max_over_mean,
            "max_over_min": self.max_over_min,
        }


def _self_owner(q: QuorumSystem, block: int, witnesses: tuple[int, ...]) -> int:
    # Block i sits in quorum i for every cyclic system built from a base containing 0
    if block < len(q.quorums) and block in q.quorums[block]:
        return block
    return witnesses[0]


def _refine(
    order: list[BlockPair],
    witnesses: dict[BlockPair, tuple[int, ...]],
    owner: dict[BlockPair, int],
    loads: list[int],
    costs: dict[BlockPair, int],
) -> int:
    """Move pairs while a move strictly lowers the larger of the two loads involved.

    Every accepted move strictly lowers the sum of squared loads, so the loop ends.
    """
    moves = 0
    improved = True
    while improved:
        improved = False
        for pair in order:
            cost = costs[pair]
            current = owner[pair]
            if cost == 0:
                continue
            target = min(witnesses[pair], key=lambda i: (loads[i], i))
            if target != current and loads[target] + cost < loads[current]:
                loads[current] -= cost
                loads[target] += cost
                owner[pair] = target
                moves += 1
                improved = True
    return moves


def build_schedule(
    q: QuorumSystem,
    partition: Partition,
    policy: str = POLICY_BALANCED,
) -> Schedule:
    """Assign every block pair to one worker whose quorum contains both blocks.

    Args:
        q: Quorum system with the all-pairs property
        partition: Block layout used for element-pair costs (partition.p == q.p)
        policy: "first-witness" (lowest containing quorum) or "balanced" (greedy
            least-loaded candidate in descending cost order, then single-move refinement)

    Raises:
        AllPairsViolationError: If some block pair has no containing quorum
        ConfigurationError: If the policy is unknown or partition.p != q.p

    """
    if policy not in POLICIES:
        raise ConfigurationError(f"Unknown policy {policy!r}; expected one of {POLICIES}")
    if partition.p != q.p:
        raise ConfigurationError(f"Partition has p={partition.p} but quorum system has p={q.p}")
    result = verify_all_pairs(q)
    if result.counterexample is not None:
        raise AllPairsViolationError(result.counterexample)
    if len(q.quorums) != q.p:
        raise ConfigurationError(f"Need one quorum per worker: p={q.p}, quorums={len(q.quorums)}")
    witnesses = result.witnesses

    owner: dict[BlockPair, int] = {}
    loads = [0] * q.p
    costs = {pair: pair_cost(partition, pair) for pair in witnesses}
    for block in range(q.p):
        pair = (block, block)
        owner[pair] = _self_owner(q, block, witnesses[pair])
        loads[owner[pair]] += costs[pair]

    cross = [pair for pair in witnesses if pair[0] != pair[1]]
    if policy == POLICY_FIRST_WITNESS:
        for pair in cross:
            owner[pair] = witnesses[pair][0]
    else:
        order = sorted(cross, key=lambda pair: (-costs[pair], pair))
        for pair in order:
            chosen = min(witnesses[pair], key=lambda i: (loads[i], i))
            owner[pair] = chosen
            loads[chosen] += costs[pair]
        moves = _refine(order, witnesses, owner, loads, costs)
        _LOGGER.debug("[Schedule] Refinement applied %d moves", moves)

    schedule = Schedule(
        p=q.p,
        policy=policy,
        owner=dict(sorted(owner.items())),
        partition=partition,
    )
    _LOGGER.debug(
        "[Schedule] Built %s schedule: %d block pairs, workload=%s",
        policy,
        len(owner),
        schedule.workload,
    )
    return schedule


def validate_schedule(s: Schedule, q: QuorumSystem) -> None:
    """Check totality and feasibility of a schedule against a quorum system.

    Raises:
        ScheduleError: On a missing, extra or infeasible assignment

    """
    if s.p != q.p or s.partition.p != q.p:
        raise ScheduleError(f"Schedule has p={s.p} but quorum system has p={q.p}")
    expected = {(j, k) for j in range(q.p) for k in range(j, q.p)}
    missing = expected - s.owner.keys()
    if missing:
        raise ScheduleError(f"Schedule misses block pair {min(missing)}")
    extra = s.owner.keys() - expected
    if extra:
        raise ScheduleError(f"Schedule holds invalid block pair {min(extra)}")
    for (j, k), worker in s.owner.items():
        if not 0 <= worker < len(q.quorums):
            raise ScheduleError(f"Pair ({j}, {k}) assigned to unknown worker {worker}")
        quorum = q.quorums[worker]
        if j not in quorum or k not in quorum:
            raise ScheduleError(
                f"Pair ({j}, {k}) assigned to worker {worker} whose quorum {list(quorum)} lacks it"
            )


def balance_report(s: Schedule) -> BalanceReport:
    """Summarize block-pair counts, element-pair costs and load ratios per worker."""
    costs = s.workload
    top = max(costs)
    bottom = min(costs)
    mean = sum(costs) / len(costs)
    max_over_mean = top / mean if mean else 1.0
    if bottom:
        max_over_min: float | None = top / bottom
    else:
        max_over_min = 1.0 if top == 0 else None
    return BalanceReport(
        policy=s.policy,
        block_pairs=s.block_pair_counts(),
        element_pairs=costs,
        max_over_mean=max_over_mean,
        max_over_min=max_over_min,
    )


def schedule_to_dict(s: Schedule) -> dict[str, Any]:
    return {
        "p": s.p,
        "policy": s.policy,
        "boundaries": list(s.partition.boundaries),
        "owner": [[j, k, worker] for (j, k), worker in sorted(s.owner.items())],
    }


def schedule_from_dict(data: Any) -> Schedule:
    """Rebuild a schedule from its JSON document.

    Raises:
        InvalidInputError: If the document is malformed

    """
    if not isinstance(data, dict):
        raise InvalidInputError("Schedule document must be a JSON object")
    try:
        p = int(data["p"])
        policy = str(data["policy"])
        boundaries = tuple(int(b) for b in data["boundaries"])
        rows = data["owner"]
        owner = {(int(j), int(k)): int(worker) for j, k, worker in rows}
    except (KeyError, TypeError, ValueError) as err:
        raise InvalidInputError(f"Malformed schedule document: {err}") from err
    if len(boundaries) != p + 1 or boundaries[0] != 0 or any(
        a >= b for a, b in zip(boundaries, boundaries[1:], strict=False)
    ):
        raise InvalidInputError(f"Schedule boundaries {list(boundaries)} do not describe {p} blocks")
    if any(not 0 <= j <= k < p for j, k in owner):
        raise InvalidInputError("Schedule lists a block pair outside 0 <= j <= k < p")
    if any(not 0 <= worker < p for worker in owner.values()):
        raise InvalidInputError("Schedule assigns a pair to a worker outside [0, p)")
    if len(owner) != len(rows):
        raise InvalidInputError("Schedule lists a block pair twice")
    return Schedule(p=p, policy=policy, owner=owner, partition=Partition(p, boundaries))


def dump_schedule(s: Schedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule_to_dict(s), indent=2) + "\n", encoding="utf-8")


def load_schedule(path: str | Path) -> Schedule:
    """Read a schedule JSON file.

    Raises:
        InvalidInputError: If the file is unreadable or malformed

    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise InvalidInputError(f"Cannot read schedule file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InvalidInputError(f"Schedule file {path} is not valid JSON: {err}") from err
    return schedule_from_dict(data)
