"""Command line: render benchmark summaries into one convergence figure.

    igd-figures plot --summary results/summary.json --out fig.png [--y best|gap]

``--summary`` may repeat to merge matrices (the clean and noisy halves of
the full grid). Exit codes follow the harness convention: 0 on success, 1
when nothing could be rendered, 2 for unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys

import matplotlib.pyplot as plt

from .render import AllSeriesMissingError, figure_spec_from_summaries, render

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igd-figures",
        description="Render convergence panels from benchmark CSV traces.")
    sub = parser.add_subparsers(dest="command", required=True)

    plot = sub.add_parser("plot", help="render one figure from summaries")
    plot.add_argument("--summary", action="append", required=True,
                      metavar="FILE", help="summary.json path, repeatable")
    plot.add_argument("--out", required=True, metavar="FILE",
                      help="output image path")
    plot.add_argument("--y", choices=("best", "gap"), default="best",
                      help="y axis: best value so far, or gap to the optimum")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = figure_spec_from_summaries(args.summary, y_mode=args.y)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        fig = render(spec, args.out)
    except AllSeriesMissingError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    plt.close(fig)
    print(f"wrote {args.out}: {len(spec.cells)} panels")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
