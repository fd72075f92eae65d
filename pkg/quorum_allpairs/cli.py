"""Command line for quorum-allpairs.

Subcommands compose through files, mirroring the pipeline:

    quorum-allpairs search --p 7 --out ds.json
    quorum-allpairs gen --diffset ds.json --out quorums.json
    quorum-allpairs gen --p 7 --base 0,1,3
    quorum-allpairs verify --quorums quorums.json
    quorum-allpairs schedule --quorums quorums.json --n 700 --out schedule.json
    quorum-allpairs run --input data.csv --quorums quorums.json --schedule schedule.json --kernel pearson --out corr.bin
    quorum-allpairs bench --input data.csv --p 7 --kernel pearson --workers-list 1,2,4
    quorum-allpairs replication --n 1600 --p 16

Exit status: 0 on success, 1 when a verification fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import asyncio
from collections.abc import Awaitable, Callable, Sequence
import json
import logging
from pathlib import Path
import sys
import time
from typing import Any

import colorlog
import numpy as np

from .const import (
    DEFAULT_FORMAT,
    DEFAULT_KERNEL,
    DEFAULT_POLICY,
    DEFAULT_REPEATS,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_WORKERS,
    DEFAULT_WORKERS_LIST,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION_FAILED,
    FORMAT_ALIASES,
    KERNEL_ALIASES,
    LOG_COLORS,
    LOG_FORMAT,
    MAX_PRINTED_MATRIX,
    MIN_REPEATS,
    NAME,
    POLICIES,
    VERSION,
)
from .coordinator import PipelineConfig, PipelineCoordinator
from .diagnostics import (
    replication_diagnostics,
    run_diagnostics,
    schedule_diagnostics,
    search_diagnostics,
    verify_diagnostics,
)
from .helpers import (
    block_label,
    format_block_pair,
    format_ratio,
    format_residues,
    log_debug,
    log_error,
    parse_int_list,
    parse_residues,
    resolve_cache_path,
)
from .quorum_core import (
    AllPairsViolationError,
    ConfigurationError,
    DifferenceSet,
    InvalidInputError,
    QuorumAllPairsError,
    QuorumSystem,
    Schedule,
    ScheduleError,
    difference_set_from_dict,
    difference_set_to_dict,
    dump_quorum_system,
    dump_schedule,
    generate,
    ingest,
    load_quorum_system,
    load_schedule,
    minimal_k_lower_bound,
    quorum_system_to_dict,
    replication_report,
    split,
    verify_quorum_properties,
    write_binary_matrix,
)

_LOGGER = logging.getLogger(__name__)

# Marks the console handler installed by setup_logging so repeated calls replace it
_HANDLER_NAME = "quorum-allpairs-console"

type Handler = Callable[[argparse.Namespace], Awaitable[int]]


def setup_logging(debug: bool = False) -> None:
    """Install a colored stderr handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == _HANDLER_NAME:
            root.removeHandler(handler)
    handler = colorlog.StreamHandler(sys.stderr)
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT, log_colors=LOG_COLORS))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if debug else logging.INFO)


def exit_code_for(err: BaseException) -> int:
    """Map an error to the exit status contract."""
    if isinstance(err, AllPairsViolationError | ScheduleError):
        return EXIT_VERIFICATION_FAILED
    return EXIT_USAGE


def _yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def _write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _load_json(path: str | Path, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise InvalidInputError(f"Cannot read {what} file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InvalidInputError(f"{what.capitalize()} file {path} is not valid JSON: {err}") from err


def _config_from_args(args: argparse.Namespace, p: int) -> PipelineConfig:
    return PipelineConfig(
        p=p,
        policy=getattr(args, "policy", DEFAULT_POLICY),
        kernel=getattr(args, "kernel", DEFAULT_KERNEL),
        workers=getattr(args, "workers", DEFAULT_WORKERS),
        budget=args.budget,
        cache_path=resolve_cache_path(args.cache, disabled=args.no_cache),
        allow_fallback=args.allow_fallback,
    )


async def _coordinator_from_args(args: argparse.Namespace) -> PipelineCoordinator:
    """Build a coordinator from `--quorums` or `--p`."""
    quorums: QuorumSystem | None = None
    if getattr(args, "quorums", None):
        quorums = await asyncio.to_thread(load_quorum_system, args.quorums)
        if args.p is not None and args.p != quorums.p:
            raise ConfigurationError(
                f"--p {args.p} disagrees with the quorum file (p={quorums.p})"
            )
        return PipelineCoordinator(_config_from_args(args, quorums.p), quorums)
    if args.p is None:
        raise ConfigurationError("Either --p or --quorums is required")
    return PipelineCoordinator(_config_from_args(args, args.p))


async def cmd_search(args: argparse.Namespace) -> int:
    """Search a minimal difference set and compare its size with the lower bound."""
    coordinator = PipelineCoordinator(_config_from_args(args, args.p))
    resolved = await coordinator.async_resolve_difference_set()
    summary = search_diagnostics(resolved)
    if args.out:
        _write_json(args.out, {**difference_set_to_dict(resolved.ds), **summary})
    line = (
        f"k={resolved.ds.k} {resolved.ds.as_text()} "
        f"lower_bound={summary['lower_bound']} optimal={_yes_no(summary['optimal'])} "
        f"perfect={_yes_no(summary['perfect'])}"
    )
    if not resolved.minimal:
        line += f" source={resolved.source}"
    print(line)
    return EXIT_OK


async def cmd_gen(args: argparse.Namespace) -> int:
    """Generate the cyclic quorum system from a difference-set file, --base or --p."""
    if args.diffset:
        ds = difference_set_from_dict(_load_json(args.diffset, "difference-set"))
        quorums = generate(ds)
    elif args.base is not None:
        if args.p is None:
            raise ConfigurationError("--base needs --p")
        quorums = generate(DifferenceSet(args.p, parse_residues(args.base)))
    elif args.p is not None:
        quorums = await PipelineCoordinator(_config_from_args(args, args.p)).async_quorum_system()
    else:
        raise ConfigurationError("One of --p, --base or --diffset is required")

    if args.out:
        dump_quorum_system(quorums, args.out)
    else:
        for i, quorum in enumerate(quorums.quorums, start=1):
            print(f"S_{i}: " + " ".join(block_label(b) for b in quorum))
    log_debug(_LOGGER, "[CLI]", "Generated quorum system", p=quorums.p, k=quorums.k)
    return EXIT_OK


async def cmd_verify(args: argparse.Namespace) -> int:
    """Check every quorum-set property of a quorum file."""
    quorums = await asyncio.to_thread(load_quorum_system, args.quorums)
    report = verify_quorum_properties(quorums)
    if args.out:
        _write_json(args.out, verify_diagnostics(report))
    print(
        f"coverage={_yes_no(report.coverage)} "
        f"intersection={_yes_no(report.pairwise_intersection)} "
        f"equal_size={_yes_no(report.equal_size)} "
        f"equal_responsibility={_yes_no(report.equal_responsibility)} "
        f"all_pairs={_yes_no(report.all_pairs)}"
    )
    if report.counterexample is not None:
        print(f"counterexample={format_block_pair(report.counterexample)}")
    return EXIT_OK if report.all_hold else EXIT_VERIFICATION_FAILED


async def cmd_schedule(args: argparse.Namespace) -> int:
    """Build a schedule for n elements and report its balance."""
    coordinator = await _coordinator_from_args(args)
    pipeline = await coordinator.async_build(args.n)
    if args.out:
        dump_schedule(pipeline.schedule, args.out)
    balance = schedule_diagnostics(pipeline.schedule)
    print(
        f"policy={balance['policy']} block_pairs={balance['total_block_pairs']} "
        f"element_pairs={balance['total_element_pairs']} "
        f"max_over_mean={format_ratio(balance['max_over_mean'])} "
        f"max_over_min={format_ratio(balance['max_over_min'])}"
    )
    return EXIT_OK


def _load_schedule_arg(args: argparse.Namespace) -> Schedule | None:
    return load_schedule(args.schedule) if getattr(args, "schedule", None) else None


def _print_matrix(matrix: np.ndarray) -> None:
    for row in matrix:
        print(",".join(repr(float(v)) for v in row))


async def cmd_run(args: argparse.Namespace) -> int:
    """Execute a kernel over every element pair."""
    table = await asyncio.to_thread(ingest, args.input, args.format)
    coordinator = await _coordinator_from_args(args)
    schedule = await asyncio.to_thread(_load_schedule_arg, args)
    pipeline, result = await coordinator.async_run(table, schedule=schedule)

    if result.total is not None:
        if args.out:
            Path(args.out).write_text(f"{result.total}\n", encoding="utf-8")
        print(f"pairs={result.total}")
    elif result.matrix is not None:
        if args.out:
            write_binary_matrix(result.matrix, args.out)
        elif table.n <= MAX_PRINTED_MATRIX:
            _print_matrix(result.matrix)
        print(
            f"n={table.n} kernel={result.report.kernel} "
            f"pairs={result.report.total_element_pairs} flagged={result.report.flagged_entries}"
        )
    if args.report:
        _write_json(args.report, run_diagnostics(pipeline, result))
    return EXIT_OK


async def cmd_bench(args: argparse.Namespace) -> int:
    """Time runs across concurrency widths and report median wall time."""
    if args.repeats < MIN_REPEATS:
        raise ConfigurationError(f"--repeats must be >= {MIN_REPEATS}, got {args.repeats}")
    widths = parse_int_list(args.workers_list)
    table = await asyncio.to_thread(ingest, args.input, args.format)
    coordinator = await _coordinator_from_args(args)
    pipeline = await coordinator.async_build(table.n)
    replication = replication_report(pipeline.quorums, pipeline.partition)

    rows: list[dict[str, Any]] = []
    for width in widths:
        timings: list[float] = []
        for _ in range(args.repeats):
            started = time.perf_counter()
            await coordinator.async_run(table, schedule=pipeline.schedule, workers=width)
            timings.append(time.perf_counter() - started)
        row = {
            "workers": width,
            "repeats": args.repeats,
            "median_seconds": float(np.median(timings)),
            "replication_fraction": replication.fraction,
            "max_elements": replication.max_elements,
        }
        rows.append(row)
        print(
            f"workers={width} median_seconds={row['median_seconds']:.6f} "
            f"replication_fraction={format_ratio(replication.fraction)} "
            f"max_elements={replication.max_elements}"
        )
    if args.out:
        _write_json(args.out, {"p": pipeline.quorums.p, "n": table.n, "rows": rows})
    return EXIT_OK


async def cmd_replication(args: argparse.Namespace) -> int:
    """Report per-worker data footprint for n elements over p workers."""
    coordinator = await _coordinator_from_args(args)
    quorums = await coordinator.async_quorum_system()
    report = replication_report(quorums, split(args.n, quorums.p))
    if args.out:
        _write_json(args.out, replication_diagnostics(report))
    base = quorums.base.elements if quorums.base else ()
    print(
        f"p={report.p} n={report.n} k={report.k} base={format_residues(base)} "
        f"lower_bound={minimal_k_lower_bound(report.p)}"
    )
    print(
        f"max_elements={report.max_elements} fraction={format_ratio(report.fraction)} "
        f"reduction_vs_full={format_ratio(report.reduction_vs_full)} "
        f"atom_baseline={format_ratio(report.atom_baseline, 1)} "
        f"force_baseline={format_ratio(report.force_baseline, 1)} "
        f"max_over_force={format_ratio(report.max_over_force)}"
    )
    return EXIT_OK


def _add_search_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET, help="Search step limit")
    parser.add_argument("--cache", help="Difference-set cache file")
    parser.add_argument("--no-cache", action="store_true", help="Do not read or write the cache")
    parser.add_argument(
        "--allow-fallback",
        action="store_true",
        help="Use the consecutive (non-minimal) set when the search budget runs out",
    )


def _add_pipeline_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, help="Number of workers/blocks")
    parser.add_argument("--quorums", help="Quorum system JSON (instead of --p)")
    parser.add_argument("--policy", choices=POLICIES, default=DEFAULT_POLICY)
    _add_search_options(parser)


def _add_input_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="Element data file")
    parser.add_argument("--format", choices=sorted(FORMAT_ALIASES), default=DEFAULT_FORMAT)
    parser.add_argument("--kernel", choices=sorted(KERNEL_ALIASES), default=DEFAULT_KERNEL)
    parser.add_argument("--schedule", help="Schedule JSON to use instead of building one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=NAME,
        description="Cyclic quorum systems for shared-nothing all-pairs computation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    search = sub.add_parser("search", help="Search a minimal relaxed difference set")
    search.add_argument("--p", type=int, required=True)
    search.add_argument("--out", help="Write the difference set as JSON")
    _add_search_options(search)
    search.set_defaults(handler=cmd_search)

    gen = sub.add_parser("gen", help="Generate a cyclic quorum system")
    gen.add_argument("--p", type=int)
    gen.add_argument("--diffset", help="Difference-set JSON written by `search --out`")
    gen.add_argument("--base", help='Difference set given inline, e.g. "0,1,3" (needs --p)')
    gen.add_argument("--out", help="Write the quorum system as JSON")
    _add_search_options(gen)
    gen.set_defaults(handler=cmd_gen)

    verify = sub.add_parser("verify", help="Verify the properties of a quorum system file")
    verify.add_argument("--quorums", required=True)
    verify.add_argument("--out", help="Write the property report as JSON")
    verify.set_defaults(handler=cmd_verify)

    schedule = sub.add_parser("schedule", help="Assign block pairs to workers")
    schedule.add_argument("--n", type=int, required=True, help="Element count")
    schedule.add_argument("--out", help="Write the schedule as JSON")
    _add_pipeline_options(schedule)
    schedule.set_defaults(handler=cmd_schedule)

    run = sub.add_parser("run", help="Run a kernel over all element pairs")
    _add_input_options(run)
    _add_pipeline_options(run)
    run.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    run.add_argument("--out", help="Binary matrix (numeric kernels) or decimal count")
    run.add_argument("--report", help="Write the run report as JSON")
    run.set_defaults(handler=cmd_run)

    bench = sub.add_parser("bench", help="Median wall time per concurrency width")
    _add_input_options(bench)
    _add_pipeline_options(bench)
    bench.add_argument("--workers-list", default=DEFAULT_WORKERS_LIST)
    bench.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    bench.add_argument("--out", help="Write the timing table as JSON")
    bench.set_defaults(handler=cmd_bench)

    replication = sub.add_parser("replication", help="Per-worker data footprint")
    replication.add_argument("--n", type=int, required=True, help="Element count")
    replication.add_argument("--out", help="Write the report as JSON")
    _add_pipeline_options(replication)
    replication.set_defaults(handler=cmd_replication)

    return parser


async def async_main(args: argparse.Namespace) -> int:
    handler: Handler = args.handler
    try:
        return await handler(args)
    except QuorumAllPairsError as err:
        code = exit_code_for(err)
        log_error(_LOGGER, "[CLI]", str(err), command=args.command, exit=code)
        return code
    except OSError as err:
        log_error(_LOGGER, "[CLI]", f"I/O error: {err}", command=args.command)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE
    setup_logging(args.debug)
    return asyncio.run(async_main(args))


def run_cli() -> None:
    sys.exit(main())
