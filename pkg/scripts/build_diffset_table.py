#!/usr/bin/env python3
"""Precompute minimal relaxed difference sets and write them as a cache file.

The output can be passed to the CLI with `--cache` so later runs skip the search.
Optionally prints a markdown table of k against the lower bound.

Usage:
    python scripts/build_diffset_table.py --max-p 64 --out diffsets.txt --markdown
"""

import argparse
import logging
from pathlib import Path
import sys
import time

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from quorum_allpairs.quorum_core import (
    BudgetExceededError,
    DifferenceSet,
    format_cache_text,
    is_perfect,
    is_singer_order,
    minimal_k_lower_bound,
    search_minimal,
)

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(levelname)s - %(message)s",
)
_LOGGER = logging.getLogger(__name__)


def build_table(max_p: int, budget: int | None) -> dict[int, DifferenceSet]:
    """Search every p in [1, max_p]; stop at the first p the budget cannot finish."""
    found: dict[int, DifferenceSet] = {}
    for p in range(1, max_p + 1):
        started = time.perf_counter()
        try:
            ds = search_minimal(p, budget)
        except BudgetExceededError as err:
            _LOGGER.warning("Stopping at p=%d: %s", p, err)
            break
        found[p] = ds
        _LOGGER.info("p=%d k=%d %s (%.3fs)", p, ds.k, ds.as_text(), time.perf_counter() - started)
    return found


def markdown_table(found: dict[int, DifferenceSet]) -> str:
    lines = ["| p | k | lower bound | perfect | Singer order | set |", "|---|---|---|---|---|---|"]
    for p, ds in sorted(found.items()):
        lines.append(
            f"| {p} | {ds.k} | {minimal_k_lower_bound(p)} | "
            f"{'yes' if is_perfect(ds) else 'no'} | {'yes' if is_singer_order(p) else 'no'} | "
            f"`{ds.as_text()}` |"
        )
    return "\n".join(lines)


def main():
    parser = argparse.ArgumentParser(description="Precompute minimal difference sets")
    parser.add_argument("--max-p", type=int, default=40, help="Largest p to search")
    parser.add_argument("--budget", type=int, default=None, help="Step limit per p")
    parser.add_argument("--out", type=Path, required=True, help="Cache file to write")
    parser.add_argument("--markdown", action="store_true", help="Print a markdown summary")
    args = parser.parse_args()

    if args.max_p < 1:
        print("Error: --max-p must be >= 1")
        sys.exit(2)

    found = build_table(args.max_p, args.budget)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(format_cache_text(found), encoding="utf-8")
    print(f"Wrote {len(found)} records to {args.out}")
    if args.markdown:
        print()
        print(markdown_table(found))


if __name__ == "__main__":
    main()
