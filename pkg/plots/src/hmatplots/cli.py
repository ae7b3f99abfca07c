"""Command line entry point: ``hmat-plots render --csv <path> --out <dir>``."""

from __future__ import annotations

import argparse
import sys

from .data import MalformedCsvError
from .render import render

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hmat-plots",
        description="Render figure panels from a benchmark CSV.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="draw every panel the CSV supports")
    p_render.add_argument("--csv", required=True, help="benchmark CSV to read")
    p_render.add_argument("--out", required=True, help="directory for the PNG panels")
    args = parser.parse_args(argv)

    try:
        written = render(args.csv, args.out)
    except FileNotFoundError:
        print(f"hmat-plots: no such file: {args.csv}", file=sys.stderr)
        return 1
    except MalformedCsvError as exc:
        print(f"hmat-plots: {args.csv}: {exc}", file=sys.stderr)
        return 1
    if written:
        print(f"wrote {len(written)} panel(s) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
