"""JSON-ready summaries of searches, schedules, runs and replication."""

from __future__ import annotations

from typing import Any

from .const import BALANCE_TOLERANCE, NAME, VERSION
from .coordinator import Pipeline, ResolvedDifferenceSet
from .helpers import block_label
from .quorum_core import (
    QuorumPropertyReport,
    ReplicationReport,
    RunResult,
    Schedule,
    balance_report,
    difference_multiplicities,
    is_perfect,
    is_singer_order,
    minimal_k_lower_bound,
)


def search_diagnostics(resolved: ResolvedDifferenceSet) -> dict[str, Any]:
    ds = resolved.ds
    lower = minimal_k_lower_bound(ds.p)
    return {
        "p": ds.p,
        "k": ds.k,
        "elements": list(ds.elements),
        "lower_bound": lower,
        "optimal": ds.k == lower,
        "perfect": is_perfect(ds),
        "singer_order": is_singer_order(ds.p),
        "source": resolved.source,
        "minimal": resolved.minimal,
        "multiplicities": {str(d): m for d, m in sorted(difference_multiplicities(ds).items())},
    }


def verify_diagnostics(report: QuorumPropertyReport) -> dict[str, Any]:
    data = report.as_dict()
    data["all_hold"] = report.all_hold
    if report.counterexample is not None:
        data["counterexample_labels"] = [block_label(b) for b in report.counterexample]
    return data


def schedule_diagnostics(schedule: Schedule) -> dict[str, Any]:
    report = balance_report(schedule)
    data = report.as_dict()
    data["within_tolerance"] = report.max_over_mean <= BALANCE_TOLERANCE
    data["tolerance"] = BALANCE_TOLERANCE
    return data


def replication_diagnostics(report: ReplicationReport) -> dict[str, Any]:
    return report.as_dict()


def run_diagnostics(pipeline: Pipeline, result: RunResult) -> dict[str, Any]:
    """Return the full run document written by `run --report`."""
    data = {
        "tool": NAME,
        "version": VERSION,
        "difference_set": search_diagnostics(pipeline.resolved) if pipeline.resolved else None,
        "quorums": [list(quorum) for quorum in pipeline.quorums.quorums],
        "partition": {
            "n": pipeline.partition.n,
            "boundaries": list(pipeline.partition.boundaries),
        },
        "balance": schedule_diagnostics(pipeline.schedule),
        "run": result.report.as_dict(),
    }
    if result.total is not None:
        data["run"]["total"] = result.total
    return data
