"""CLI behavior: exit codes, stderr messages, written files."""

import pytest

from fdplot.cli import main

from test_plot_figure import HEADER, sweep_rows, write_csv


def demo_csv(tmp_path):
    rows = sweep_rows("digital-fd", "ldr_db",
                      [(-40.0, 0, 4.0), (0.0, 0, 2.0)]) \
        + sweep_rows("digital-hd-ideal", "ldr_db",
                     [(-40.0, 0, 3.0), (0.0, 0, 3.0)])
    return write_csv(tmp_path / "sweep.csv", rows)


class TestPlot:
    def test_writes_figure_and_reports_path(self, tmp_path, capsys):
        csv_path = demo_csv(tmp_path)
        out = tmp_path / "fig.png"
        code = main(["plot", "--csv", str(csv_path), "--x", "ldr_db",
                     "--out", str(out)])
        assert code == 0
        assert out.read_bytes().startswith(b"\x89PNG")
        assert f"wrote {out}" in capsys.readouterr().out

    def test_title_flag_is_accepted(self, tmp_path):
        csv_path = demo_csv(tmp_path)
        out = tmp_path / "fig.png"
        code = main(["plot", "--csv", str(csv_path), "--x", "ldr_db",
                     "--out", str(out), "--title", "saturation"])
        assert code == 0
        assert out.exists()

    def test_svg_extension_writes_vector_output(self, tmp_path):
        csv_path = demo_csv(tmp_path)
        out = tmp_path / "fig.svg"
        assert main(["plot", "--csv", str(csv_path), "--x", "ldr_db",
                     "--out", str(out)]) == 0
        assert b"<svg" in out.read_bytes()


class TestExitCodes:
    def test_missing_column_exits_one(self, tmp_path, capsys):
        header = HEADER.replace("wsr_bits,", "")
        rows = [("a", "ldr_db", -40.0, 0, 7, 1.386, 12, 0.5, 0.0)]
        csv_path = write_csv(tmp_path / "bad.csv", rows, header=header)
        code = main(["plot", "--csv", str(csv_path), "--x", "ldr_db",
                     "--out", str(tmp_path / "fig.png")])
        assert code == 1
        err = capsys.readouterr().err
        assert "error:" in err and "wsr_bits" in err

    def test_missing_file_exits_one(self, tmp_path, capsys):
        code = main(["plot", "--csv", str(tmp_path / "absent.csv"),
                     "--x", "ldr_db", "--out", str(tmp_path / "fig.png")])
        assert code == 1
        assert "cannot read" in capsys.readouterr().err

    def test_axis_without_rows_exits_one(self, tmp_path, capsys):
        csv_path = demo_csv(tmp_path)
        code = main(["plot", "--csv", str(csv_path), "--x", "snr_db",
                     "--out", str(tmp_path / "fig.png")])
        assert code == 1
        assert "snr_db" in capsys.readouterr().err

    def test_out_flag_is_required(self, tmp_path, capsys):
        csv_path = demo_csv(tmp_path)
        with pytest.raises(SystemExit) as excinfo:
            main(["plot", "--csv", str(csv_path), "--x", "ldr_db"])
        assert excinfo.value.code == 2
        assert "--out" in capsys.readouterr().err
