"""Command line entry: render a bounds or experiment figure from CSV files."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render_bounds_figure, render_experiment_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dperm-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--csv", action="append", required=True,
                        help="input CSV; repeat for one panel per file (bounds only)")
    shared.add_argument("--out", required=True, help="output image path (.png)")
    shared.add_argument("--log-x", action="store_true")
    shared.add_argument("--linear-y", action="store_true",
                        help="linear y axis (default is log)")
    shared.add_argument("--title", action="append", default=[],
                        help="panel title; repeat per panel")
    shared.add_argument("--dpi", type=int, default=150)

    p = sub.add_parser("bounds", parents=[shared],
                       help="rate curves, one panel per CSV")
    p.add_argument("--x-label", default="n")
    p.set_defaults(kind="bounds")

    p = sub.add_parser("experiment", parents=[shared],
                       help="mean +- std per method with lower bound, one panel per budget kind")
    p.set_defaults(kind="experiment")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csvs=tuple(args.csv),
        output_path=args.out,
        log_x=args.log_x,
        log_y=not args.linear_y,
        x_label=getattr(args, "x_label", "axis value"),
        panel_titles=tuple(args.title),
        dpi=args.dpi,
    )
    if args.kind == "bounds":
        render_bounds_figure(spec)
    else:
        render_experiment_figure(spec)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
