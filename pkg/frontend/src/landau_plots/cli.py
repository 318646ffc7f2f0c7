"""CLI: landau-plots render --input <csv> --out <dir> [--figures ...]
[--tmin <t>] [--report <check report>]. Exit 0 on success, 2 on usage or
schema errors."""

import argparse
import sys

from .csvdata import SchemaError
from .figures import FIGURES, PlotSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(prog="landau-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render figures from a time-series CSV")
    p.add_argument("--input", action="append", required=True,
                   help="time-series CSV (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--figures", nargs="+", default=list(FIGURES),
                   choices=list(FIGURES))
    p.add_argument("--tmin", type=float, default=0.05)
    p.add_argument("--report", default=None,
                   help="check report; enables the l2_window envelope overlay")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(inputs=args.input, out_dir=args.out,
                        figures=tuple(args.figures), t_min=args.tmin,
                        report=args.report)
        written = render(spec)
    except (SchemaError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
