"""Command-line figure generation: ``liftplots plot --kind <k> --in <files> --out <img>``."""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .io import EmptyInput, SchemaMismatch
from .plots import KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftplots",
        description="Render figures from simulator trace and aggregate files.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("plot", help="render one figure (PNG + SVG)")
    p.add_argument("--kind", required=True, choices=KINDS,
                   help="figure kind")
    p.add_argument("--in", dest="inputs", required=True, nargs="+",
                   help="input trace (.ndjson[.gz]) or aggregate (.csv) files")
    p.add_argument("--out", required=True,
                   help="output image path (PNG written here, SVG sibling)")
    p.add_argument("--dpi", type=int, default=150, help="PNG resolution")
    p.add_argument("--title", help="optional figure title")
    p.add_argument("--warmup", type=float, default=5.0,
                   help="seconds of trace discarded by distribution kinds")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(
        inputs=list(args.inputs),
        kind=args.kind,
        out=args.out,
        dpi=args.dpi,
        title=args.title,
        warmup=args.warmup,
    )
    try:
        written = render(job)
    except (SchemaMismatch, EmptyInput, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
