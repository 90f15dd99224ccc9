"""Standalone renderer: metrics CSVs in, figure files out.

Exit codes: 0 success, 2 input error (missing file, schema violation,
empty or mismatched frames).
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_bond_heatmap, plot_correlator, plot_cost
from .frame import load_frame

EXIT_OK = 0
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz",
        description="Render correlator, bond-heatmap, and cost figures from metrics CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    correlator = sub.add_parser("correlator", help="overlay both engines' correlator series")
    correlator.add_argument("--tebd", required=True, help="tebd metrics CSV")
    correlator.add_argument("--tdvp", required=True, help="tdvp metrics CSV")
    correlator.add_argument("--out", required=True, help="output image path")
    correlator.add_argument(
        "--chi-max", type=int, default=None,
        help="bond cap; marks the step where either run first hits it",
    )

    heatmap = sub.add_parser("heatmap", help="bond dimension over (step, bond)")
    heatmap.add_argument("--frame", required=True, help="metrics CSV")
    heatmap.add_argument("--out", required=True, help="output image path")
    heatmap.add_argument(
        "--chi-max", type=int, default=None,
        help="bond cap; outlines saturated cells",
    )

    cost = sub.add_parser("cost", help="contraction cost per step, log y")
    cost.add_argument("--tebd", required=True, help="tebd metrics CSV")
    cost.add_argument("--tdvp", required=True, help="tdvp metrics CSV")
    cost.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "correlator":
            out = plot_correlator(
                load_frame(args.tebd), load_frame(args.tdvp), args.out, chi_max=args.chi_max
            )
        elif args.command == "heatmap":
            out = plot_bond_heatmap(load_frame(args.frame), args.out, chi_max=args.chi_max)
        else:
            out = plot_cost(load_frame(args.tebd), load_frame(args.tdvp), args.out)
    except (OSError, ValueError) as err:
        print(f"plotviz: {err}", file=sys.stderr)
        return EXIT_INPUT
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
