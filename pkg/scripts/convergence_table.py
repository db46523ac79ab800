#!/usr/bin/env python3
"""Refinement study for the harmonic benchmark across coordinate kinds.

Solves -Laplace(u) = 0, u = sin(x)exp(y) on trapezoid meshes of the unit
square and tabulates L2/H1 errors and observed rates, one table per
(coordinate kind, offset) combination, so the kinds can be compared side by
side.  Rates should approach 3 (L2) and 2 (H1) as n grows.

Example:
    python3 scripts/convergence_table.py --levels 2,4,8,16,32 \
        --kinds meanvalue,wachspress --offsets 0.25,0.0
"""

from __future__ import annotations

import argparse
import time

from polyserend import CoordinateKind, convergence_study


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", default="2,4,8,16",
                        help="comma-separated mesh resolutions (default 2,4,8,16)")
    parser.add_argument("--kinds", default="meanvalue,wachspress,triangulation",
                        help="comma-separated coordinate kinds")
    parser.add_argument("--offsets", default="0.25",
                        help="comma-separated trapezoid offsets in [0, 0.5)")
    return parser.parse_args()


def fmt_rate(rate: float | None) -> str:
    return "-" if rate is None else f"{rate:.3f}"


def main() -> None:
    args = parse_args()
    levels = [int(s) for s in args.levels.split(",") if s]
    kinds = [CoordinateKind(s.strip()) for s in args.kinds.split(",") if s]
    offsets = [float(s) for s in args.offsets.split(",") if s]

    for offset in offsets:
        for kind in kinds:
            start = time.monotonic()
            rows = convergence_study(levels, kind, offset)
            elapsed = time.monotonic() - start
            print(f"\n## kind={kind.value} offset={offset}  ({elapsed:.1f}s)")
            print("| n | dofs | L2 error | rate | H1 error | rate |")
            print("|---|------|----------|------|----------|------|")
            for row in rows:
                print(f"| {row.n} | {row.dofs} | {row.l2_error:.3e} "
                      f"| {fmt_rate(row.l2_rate)} | {row.h1_error:.3e} "
                      f"| {fmt_rate(row.h1_rate)} |")


if __name__ == "__main__":
    main()
