"""Console entry points: one script per figure family.

Each takes an input CSV and an output image path; schema failures exit
nonzero with the column diff on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import (
    FigureSpec,
    plot_bounds,
    plot_density,
    plot_lattice,
    plot_map,
    plot_section,
)
from .io import SchemaError


def _parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("input", type=Path, help="gcmchaos CSV file")
    p.add_argument("output", type=Path, help="image file to write")
    p.add_argument("--title", default=None)
    p.add_argument("--marker-size", type=float, default=None)
    p.add_argument("--dpi", type=int, default=150)
    return p


def _spec(args, **defaults) -> FigureSpec:
    base = FigureSpec(**defaults)
    return FigureSpec(
        marker_size=args.marker_size if args.marker_size is not None
        else base.marker_size,
        colormap=base.colormap,
        masked_color=base.masked_color,
        dpi=args.dpi,
        figsize=base.figsize,
        title=args.title,
    )


def _run(fn, args, **defaults) -> int:
    try:
        result = fn(args.input, args.output, spec=_spec(args, **defaults))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"{result.output} ({result.n_points} points)")
    return 0


def main_lattice(argv=None) -> int:
    p = _parser("Scatter a Peres lattice (E vs operator average).")
    p.add_argument("--operator", default="p_l2",
                   choices=["p_l2", "p_hprime", "p_h0"])
    args = p.parse_args(argv)
    try:
        result = plot_lattice(args.input, args.output, operator=args.operator,
                              spec=_spec(args))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"{result.output} ({result.n_points} points)")
    return 0


def main_section(argv=None) -> int:
    args = _parser("Plot a Poincare section from crossing rows.").parse_args(argv)
    return _run(plot_section, args, marker_size=0.8)


def main_map(argv=None) -> int:
    args = _parser("Render a classical <L^2> section map.").parse_args(argv)
    return _run(plot_map, args)


def main_density(argv=None) -> int:
    args = _parser("Render a squared-wave-function density grid.").parse_args(argv)
    return _run(plot_density, args, colormap="gray_r")


def main_bounds(argv=None) -> int:
    args = _parser("Plot classical <L^2> bounds versus B.").parse_args(argv)
    return _run(plot_bounds, args)


if __name__ == "__main__":
    sys.exit(main_lattice())
