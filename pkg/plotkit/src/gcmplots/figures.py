"""File-to-image transforms for each gcmchaos figure family.

These functions never recompute physics: they read the CSV products and
render.  Output is deterministic: a checked-in style file, fixed savefig
metadata, and no timestamps, so identical inputs give byte-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, as_grid, read_table

_STYLE = resources.files("gcmplots") / "style" / "gcmplots.mplstyle"
_METADATA = {"Software": "gcmplots"}

LATTICE_COLUMNS = ("index", "energy", "p_l2", "p_hprime", "p_h0")
SECTION_COLUMNS = ("traj_id", "x", "px")
MAP_COLUMNS = ("x", "px", "value", "mask")
BOUNDS_COLUMNS = ("B", "l2_min", "l2_max", "n_converged_samples")

_AXIS_LABELS = {
    "p_l2": r"$\langle L^2\rangle$",
    "p_hprime": r"$\langle H'\rangle$",
    "p_h0": r"$\langle H_0\rangle$",
}


@dataclass(frozen=True)
class FigureSpec:
    """Presentation knobs shared by the figure families."""

    marker_size: float = 3.0
    colormap: str = "gray"
    masked_color: str = "#bb4444"
    dpi: int = 150
    figsize: tuple[float, float] = (6.0, 4.5)
    title: str | None = None
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None


@dataclass(frozen=True)
class RenderResult:
    output: Path
    n_points: int


def _new_figure(spec: FigureSpec):
    plt.style.use(str(_STYLE))
    return plt.subplots(figsize=spec.figsize)


def _finish(fig, ax, spec: FigureSpec, output: Path, n_points: int):
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=spec.dpi, metadata=_METADATA)
    plt.close(fig)
    return RenderResult(output, n_points)


def plot_lattice(input_path, output_path, operator: str = "p_l2",
                 spec: FigureSpec = FigureSpec()) -> RenderResult:
    """Scatter of (E_i, <P>_i) for one Peres operator column."""
    table = read_table(Path(input_path), LATTICE_COLUMNS)
    if operator not in _AXIS_LABELS:
        raise SchemaError(f"unknown operator column {operator!r}; "
                          f"expected one of {sorted(_AXIS_LABELS)}")
    fig, ax = _new_figure(spec)
    ax.scatter(table["energy"], table[operator], s=spec.marker_size,
               c="black", linewidths=0)
    ax.set_xlabel("E")
    ax.set_ylabel(_AXIS_LABELS[operator])
    return _finish(fig, ax, spec, output_path, table.n_rows)


def plot_section(input_path, output_path,
                 spec: FigureSpec = FigureSpec(marker_size=0.8)) -> RenderResult:
    """Poincare section: one dot per crossing, shaded per trajectory."""
    table = read_table(Path(input_path), SECTION_COLUMNS)
    fig, ax = _new_figure(spec)
    tid = table["traj_id"]
    shade = (tid % 7) / 7.0 * 0.6  # stable trajectory shading, still dark
    ax.scatter(table["x"], table["px"], s=spec.marker_size, c=shade,
               cmap="gray", vmin=0.0, vmax=1.0, linewidths=0)
    ax.set_xlabel("x")
    ax.set_ylabel(r"$p_x$")
    return _finish(fig, ax, spec, output_path, table.n_rows)


def plot_map(input_path, output_path,
             spec: FigureSpec = FigureSpec()) -> RenderResult:
    """Grayscale map of classical <L^2> with inaccessible cells set off."""
    table = read_table(Path(input_path), MAP_COLUMNS)
    x, px, values = as_grid(table, "x", "px", "value")
    _, _, mask = as_grid(table, "x", "px", "mask")
    masked = np.ma.masked_where(mask > 0.5, values)
    fig, ax = _new_figure(spec)
    cmap = matplotlib.colormaps[spec.colormap].copy()
    cmap.set_bad(spec.masked_color)
    im = ax.pcolormesh(x, px, masked, cmap=cmap, shading="nearest")
    fig.colorbar(im, ax=ax, label=r"$\langle L^2\rangle_{\mathrm{c}}$")
    ax.set_xlabel("x")
    ax.set_ylabel(r"$p_x$")
    return _finish(fig, ax, spec, output_path, int((mask < 0.5).sum()))


def plot_density(input_path, output_path,
                 spec: FigureSpec = FigureSpec(colormap="gray_r")) -> RenderResult:
    """Squared-wave-function grid (Cartesian or sector coordinates)."""
    path = Path(input_path)
    last_err = None
    for names in (("x", "y", "density"), ("beta", "gamma", "density")):
        try:
            table = read_table(path, names)
            break
        except SchemaError as exc:
            last_err = exc
    else:
        raise SchemaError(f"{path.name}: not a density grid ({last_err})")
    xn, yn, _ = names
    x, y, values = as_grid(table, xn, yn, "density")
    fig, ax = _new_figure(spec)
    im = ax.pcolormesh(x, y, values, cmap=spec.colormap, shading="nearest")
    fig.colorbar(im, ax=ax, label=r"$|\Psi|^2$")
    ax.set_xlabel(xn)
    ax.set_ylabel(yn)
    return _finish(fig, ax, spec, output_path, table.n_rows)


def plot_bounds(input_path, output_path,
                spec: FigureSpec = FigureSpec()) -> RenderResult:
    """Lower (solid) and upper (dashed) classical <L^2> bounds versus B."""
    table = read_table(Path(input_path), BOUNDS_COLUMNS)
    if np.any(table["l2_min"] > table["l2_max"]):
        raise SchemaError(
            f"{Path(input_path).name}: l2_min exceeds l2_max on some rows"
        )
    fig, ax = _new_figure(spec)
    ax.plot(table["B"], table["l2_min"], "k-", label="lower bound")
    ax.plot(table["B"], table["l2_max"], "k--", label="upper bound")
    ax.set_xlabel("B")
    ax.set_ylabel(r"$\langle L^2\rangle_{\mathrm{c}}$")
    ax.legend()
    return _finish(fig, ax, spec, output_path, table.n_rows)
