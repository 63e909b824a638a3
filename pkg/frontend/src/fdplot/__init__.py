"""Batch figure emitter for beamforming sweep CSVs."""

from .figure import FigureSpec, FigureSpecError, aggregate, build_figure, \
    read_rows, render

__all__ = [
    "FigureSpec",
    "FigureSpecError",
    "aggregate",
    "build_figure",
    "read_rows",
    "render",
]
