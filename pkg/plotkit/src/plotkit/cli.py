"""Command-line wrapper: plot --input <csv> --kind <panel> --out <img>."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .render import EmptyInput, MissingColumn, PANEL_KINDS, PlotSpec, render


def parse_ticks(text: str) -> dict:
    """Parse 'Gamma=0.0,X=3.14' into an ordered label-to-position map."""
    ticks = {}
    for item in text.split(","):
        if not item:
            continue
        label, _, value = item.partition("=")
        if not _:
            raise ValueError(f"tick {item!r} must look like LABEL=POSITION")
        ticks[label.strip()] = float(value)
    return ticks


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render band diagrams from solver CSV output"
    )
    parser.add_argument("command", choices=("plot",))
    parser.add_argument("--input", required=True, type=Path, help="CSV produced by the solver")
    parser.add_argument("--kind", required=True, choices=PANEL_KINDS)
    parser.add_argument("--out", required=True, type=Path, help="image file (.png or .svg)")
    parser.add_argument("--ticks", default="", help="symmetry-point ticks, e.g. 'X=0,Gamma=3.14'")
    parser.add_argument("--omega", type=float, default=None,
                        help="folding frequency used to break wrapped band lines")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(
            input_csv=args.input,
            kind=args.kind,
            output=args.out,
            ticks=parse_ticks(args.ticks),
            omega=args.omega,
        )
        summary = render(spec)
    except (MissingColumn, EmptyInput, ValueError, OSError) as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
