"""Command-line front end: render one sweep CSV into one figure."""

import argparse
import sys

from .figure import FigureSpec, FigureSpecError, render


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fdplot",
        description="Render sweep CSVs into per-scheme mean-rate figures.")
    commands = parser.add_subparsers(dest="command", required=True)
    plot = commands.add_parser(
        "plot", help="draw one line per scheme, mean rate vs axis value")
    plot.add_argument("--csv", required=True, help="input sweep CSV path")
    plot.add_argument("--x", required=True, metavar="ldr_db|snr_db",
                      help="sweep axis providing the x values")
    plot.add_argument("--out", required=True,
                      help="output image path; extension picks the format")
    plot.add_argument("--title", help="figure title")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    spec = FigureSpec(csv_path=args.csv, x_axis=args.x, out_path=args.out,
                      title=args.title)
    try:
        path = render(spec)
    except FigureSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
