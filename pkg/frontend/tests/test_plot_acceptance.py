"""Render the bundled distortion-sweep CSV and check the figure shape.

The fixture under data/ was produced by the simulator CLI: desk-scale
system, strong loopback path, base-station distortion swept from -120 dB
to 0 dB with five paired realizations per point.
"""

import csv
import math
import pathlib

import numpy as np

from fdplot import FigureSpec, build_figure, render

DATA = pathlib.Path(__file__).parent / "data" / "ldr_sweep.csv"

FD_SCHEMES = ("digital-fd", "hybf-um")
HD = "digital-hd-ideal"


def spec_for(out_path="unused.png"):
    return FigureSpec(csv_path=str(DATA), x_axis="ldr_db",
                      out_path=str(out_path))


def csv_means():
    sums = {}
    with open(DATA, newline="") as handle:
        for row in csv.DictReader(handle):
            key = (row["scheme"], float(row["axis_value"]))
            sums.setdefault(key, []).append(float(row["wsr_bits"]))
    return {key: math.fsum(vals) / len(vals) for key, vals in sums.items()}


class TestLdrSweepFigure:
    def test_line_means_equal_csv_means_within_1e12(self):
        fig, series = build_figure(spec_for())
        oracle = csv_means()
        assert len(fig.axes[0].lines) == len(series) == 3
        for scheme, (xs, ys) in series.items():
            for x, y in zip(xs, ys):
                assert abs(y - oracle[(scheme, x)]) <= 1e-12

    def test_fd_above_hd_at_low_distortion_converging_at_zero(self):
        _, series = build_figure(spec_for())
        hd_x, hd_y = series[HD]
        assert hd_x[0] == -120.0 and hd_x[-1] == 0.0
        for scheme in FD_SCHEMES:
            xs, ys = series[scheme]
            np.testing.assert_array_equal(xs, hd_x)
            # well above the half-duplex line while distortion is negligible
            assert ys[0] > 1.2 * hd_y[0]
            # and closing most of that gap by 0 dB
            assert abs(ys[-1] - hd_y[-1]) < 0.15 * hd_y[-1]
            assert abs(ys[-1] - hd_y[-1]) < 0.2 * (ys[0] - hd_y[0])

    def test_render_writes_the_figure(self, tmp_path):
        out = tmp_path / "ldr.png"
        assert render(spec_for(out)) == str(out)
        assert out.read_bytes().startswith(b"\x89PNG")
