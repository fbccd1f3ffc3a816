"""Offline figure generation for gcmchaos CSV outputs."""

__version__ = "0.1.0"

from .figures import (
    FigureSpec,
    RenderResult,
    plot_bounds,
    plot_density,
    plot_lattice,
    plot_map,
    plot_section,
)
from .io import SchemaError, Table, read_table

__all__ = [
    "FigureSpec", "RenderResult", "SchemaError", "Table", "read_table",
    "plot_bounds", "plot_density", "plot_lattice", "plot_map", "plot_section",
]
