"""Command line for rendering export figures.

  eagga-plots front --out fig.png front1.csv [front2.csv ...]
  eagga-plots hv    --out fig.png trace1.csv [trace2.csv ...]

Exit codes: 0 success, 1 usage error, 2 ill-formed input.
"""
from __future__ import annotations

import argparse
import sys

from .figures import plot_front, plot_hv
from .io import ExportFormatError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def build_parser() -> _Parser:
    parser = _Parser(prog="eagga-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_front = sub.add_parser("front", help="Pareto-front scatter panels")
    p_front.add_argument("fronts", nargs="+")
    p_front.add_argument("--out", required=True)
    p_hv = sub.add_parser("hv", help="anytime hypervolume curves")
    p_hv.add_argument("traces", nargs="+")
    p_hv.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "front":
            plot_front(args.fronts, args.out)
        else:
            warnings = plot_hv(args.traces, args.out)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ExportFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
