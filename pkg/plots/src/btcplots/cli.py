"""Command-line driver: ``btc-plots <kind> --in <csv...> [--fits <json>] --out <image>``."""

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .io import GridError, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btc-plots",
        description="Render figures from btc-sense CSV/JSON outputs.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="input data files")
    parser.add_argument("--fits", help="fit JSON to overlay where supported")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--log-y", action="store_true")
    parser.add_argument("--no-rescale", dest="rescale", action="store_false",
                        help="plot raw values instead of per-spin ones")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    spec = FigureSpec(
        kind=args.kind,
        inputs=args.inputs,
        out_path=args.out,
        fits=args.fits,
        log_x=args.log_x,
        log_y=args.log_y,
        rescale_by_n=args.rescale,
        dpi=args.dpi,
    )
    try:
        render(spec)
    except (SchemaError, GridError, FileNotFoundError, ValueError) as exc:
        print(f"btc-plots: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"btc-plots: I/O error: {exc}", file=sys.stderr)
        return 3
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
