"""loggas-report --manifest RUN --kind KIND --out FIG.{png,svg}"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureSpec, ReportError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loggas-report", description=__doc__)
    p.add_argument("--manifest", type=Path, required=True,
                   help="run manifest (or its directory)")
    p.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    p.add_argument("--out", type=Path, required=True,
                   help="output image path (.png or .svg)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path, info = render(FigureSpec(args.manifest, args.kind, args.out))
    except ReportError as exc:
        print(f"loggas-report: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"figure": str(path), **info}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
