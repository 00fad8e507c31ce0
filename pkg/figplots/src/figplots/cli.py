"""Command-line entry point: figplots <figure-id> --data DIR --out FILE."""

import argparse
import json
import sys
from typing import Optional, Sequence

from .figures import FIGURES, render
from .io import FigplotsError


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figplots",
        description="render figures from cavity-vacua CSV artifacts")
    parser.add_argument("figure", choices=sorted(FIGURES))
    parser.add_argument("--data", required=True,
                        help="directory with the CSV artifacts")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        meta = render(args.figure, args.data, args.out)
    except FigplotsError as exc:
        print(f"figplots: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"figplots: {exc}", file=sys.stderr)
        return 4
    print(json.dumps({"figure": args.figure, "out": args.out, **meta},
                     sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
