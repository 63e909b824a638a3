"""Aggregate sweep CSV rows into per-scheme mean curves and draw them.

The input is the simulator's sweep CSV: one row per (scheme, axis value,
realization) with the achieved weighted sum rate. A figure shows one
line per scheme, x sorted ascending, y the arithmetic mean over the
realization rows. Everything is deterministic given the FigureSpec and
the file contents; no pyplot state is touched, so rendering works
headless.
"""

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from matplotlib.figure import Figure

# Marker cycle keeps lines tellable apart in grayscale print.
_MARKERS = ("o", "s", "^", "v", "D", "*", "P", "X")

_DEFAULT_Y_LABEL = "average weighted sum rate (bits / channel use)"


class FigureSpecError(ValueError):
    """A figure spec references data the CSV does not provide."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: which file, which sweep axis, where to write.

    x_axis names the sweep axis whose rows supply the x values (the CSV
    stores the axis name and value in the axis / axis_value columns).
    labels optionally maps scheme ids to legend text and fixes the line
    order; schemes listed there but absent from the data are skipped
    with a warning. Only mean aggregation over realizations is defined.
    """

    csv_path: str
    x_axis: str
    out_path: str
    group_by: str = "scheme"
    y_column: str = "wsr_bits"
    aggregation: str = "mean"
    labels: dict = None
    title: str = None
    x_label: str = None
    y_label: str = None


def read_rows(path):
    """Parse a sweep CSV into (header tuple, list of row dicts)."""
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                raise FigureSpecError(f"{path}: empty file")
            return tuple(reader.fieldnames), list(reader)
    except OSError as exc:
        raise FigureSpecError(f"cannot read csv: {exc}") from exc


def _float(row, column):
    try:
        return float(row[column])
    except (TypeError, ValueError) as exc:
        raise FigureSpecError(
            f"column {column!r}: non-numeric value {row[column]!r}") from exc


def aggregate(header, rows, spec):
    """Per-scheme mean curves: {scheme: (x ascending, y means)}.

    Rows are filtered to spec.x_axis; within a scheme the y values of
    each axis value are averaged arithmetically. Raises FigureSpecError
    when a referenced column is missing, the aggregation is not "mean",
    or no row matches the axis.
    """
    if spec.aggregation != "mean":
        raise FigureSpecError(
            f"aggregation {spec.aggregation!r}: only 'mean' is defined")
    needed = (spec.group_by, "axis", "axis_value", spec.y_column)
    missing = [name for name in needed if name not in header]
    if missing:
        raise FigureSpecError(
            "missing column(s): " + ", ".join(sorted(set(missing))))

    selected = [row for row in rows if row["axis"] == spec.x_axis]
    if not selected:
        raise FigureSpecError(f"no rows with axis {spec.x_axis!r}")

    buckets = {}
    for row in selected:
        scheme = row[spec.group_by]
        point = (_float(row, "axis_value"), _float(row, spec.y_column))
        buckets.setdefault(scheme, []).append(point)

    order = sorted(buckets) if spec.labels is None else list(spec.labels)
    series = {}
    for scheme in order:
        if scheme not in buckets:
            warnings.warn(
                f"scheme {scheme!r}: no rows for axis {spec.x_axis!r}; "
                "skipped")
            continue
        per_x = {}
        for x, y in buckets[scheme]:
            per_x.setdefault(x, []).append(y)
        xs = np.array(sorted(per_x))
        ys = np.array([np.mean(per_x[x]) for x in xs])
        series[scheme] = (xs, ys)
    return series


def build_figure(spec):
    """Read, aggregate, and draw; returns (figure, series)."""
    header, rows = read_rows(spec.csv_path)
    series = aggregate(header, rows, spec)
    fig = Figure()
    ax = fig.add_subplot(111)
    for i, (scheme, (xs, ys)) in enumerate(series.items()):
        label = scheme if spec.labels is None else spec.labels[scheme]
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], label=label)
    ax.set_xlabel(spec.x_label or spec.x_axis)
    ax.set_ylabel(spec.y_label or _DEFAULT_Y_LABEL)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.4)
    if series:
        ax.legend()
    return fig, series


def render(spec):
    """Write the figure to spec.out_path (format from the extension)."""
    fig, _ = build_figure(spec)
    fig.savefig(spec.out_path)
    return spec.out_path
