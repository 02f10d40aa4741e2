"""`plot` command: heatmap and study renderers."""

from __future__ import annotations

import argparse
import logging
import sys

from .heatmap import plot_heatmap
from .io import SchemaError
from .study import STUDY_KINDS, plot_study


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    ap = argparse.ArgumentParser(prog="plot")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("heatmap", help="render the relative-efficiency heatmap")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("study", help="render an operating-point study")
    p.add_argument("--kind", choices=STUDY_KINDS, required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--out", required=True)

    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.cmd == "heatmap":
            for path in plot_heatmap(args.csv, args.out):
                print(f"wrote {path}")
        else:
            for path in plot_study(args.dir, args.kind, args.out):
                print(f"wrote {path}")
        return 0
    except (SchemaError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
