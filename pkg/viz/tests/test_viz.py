import hashlib
import json
import os

import numpy as np
import pytest

from ddviz.cli import main as cli_main
from ddviz.heatmap import plot_heatmap
from ddviz.io import HEATMAP_COLUMNS, SchemaError, read_heatmap_csv
from ddviz.study import plot_study

NU = [0, 100, 400, 800, 1200, 1600, 2000]
TAU = [0.0, 1.15, 2.3, 4.13, 4.7]


def synthetic_csv(path, drop=None, blank=None):
    rng = np.random.default_rng(3)
    lines = [",".join(HEATMAP_COLUMNS)]
    for nu in NU:
        for tau in TAU:
            if drop and (nu, tau) == drop:
                continue
            ratio = round(float(rng.uniform(0.8, 2.2)), 4)
            se_o = 1.1
            se_z = ratio * se_o
            r = f"{ratio:.6g}"
            if blank and (nu, tau) == blank:
                r = ""
            lines.append(
                f"{nu},{tau:g},{se_z:.6g},{se_o:.6g},{r},2000,gauss_sinc,4,-5,15000,0,5,4"
            )
    path.write_text("\n".join(lines) + "\n")
    return path


class TestReader:
    def test_reads_35_cells(self, tmp_path):
        p = synthetic_csv(tmp_path / "h.csv")
        table = read_heatmap_csv(str(p))
        assert len(table.nu_values) == 7 and len(table.tau_values_us) == 5
        assert sum(v is not None for v in table.ratio.values()) == 35

    def test_rejects_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError):
            read_heatmap_csv(str(p))

    def test_missing_cell_becomes_blank(self, tmp_path, caplog):
        p = synthetic_csv(tmp_path / "h.csv", drop=(400, 2.3))
        with caplog.at_level("WARNING", logger="ddviz"):
            table = read_heatmap_csv(str(p))
        assert table.ratio[(400.0, 2.3)] is None
        assert any("missing cell" in r.message for r in caplog.records)


class TestHeatmap:
    def test_annotations_match_input(self, tmp_path):
        import matplotlib.pyplot as plt

        from ddviz.heatmap import build_figure

        p = synthetic_csv(tmp_path / "h.csv")
        table = read_heatmap_csv(str(p))
        fig = build_figure(table)
        ax = fig.axes[0]
        rendered = {
            (round(t.get_position()[0]), round(t.get_position()[1])): t.get_text()
            for t in ax.texts
        }
        assert len(rendered) == 35
        for i, nu in enumerate(table.nu_values):
            for j, tau in enumerate(table.tau_values_us):
                assert rendered[(j, i)] == f"{table.ratio[(nu, tau)]:.2f}"
        plt.close(fig)

    def test_input_unchanged_and_outputs_written(self, tmp_path):
        p = synthetic_csv(tmp_path / "h.csv")
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        written = plot_heatmap(str(p), str(tmp_path / "o.png"))
        assert hashlib.sha256(p.read_bytes()).hexdigest() == digest
        assert sorted(os.path.splitext(w)[1] for w in written) == [".png", ".svg"]
        for w in written:
            assert os.path.getsize(w) > 1000

    def test_deterministic_output(self, tmp_path):
        p = synthetic_csv(tmp_path / "h.csv")
        a = plot_heatmap(str(p), str(tmp_path / "a.png"))
        b = plot_heatmap(str(p), str(tmp_path / "b.png"))
        for pa, pb in zip(a, b):
            assert open(pa, "rb").read() == open(pb, "rb").read()

    def test_blank_ratio_cell(self, tmp_path):
        p = synthetic_csv(tmp_path / "h.csv", blank=(800, 4.7))
        table = read_heatmap_csv(str(p))
        assert table.ratio[(800.0, 4.7)] is None
        written = plot_heatmap(str(p), str(tmp_path / "o.png"))
        assert written


def study_payload(tmp_path, missing_series=False):
    d = tmp_path / "stud" / "studies"
    os.makedirs(d, exist_ok=True)
    series = {"nu_p=2kHz": [1.0, 1.2, 1.1], "nu_p=12kHz": [0.9, 1.0, 1.3]}
    if missing_series:
        series["broken"] = [1.0]  # wrong length, should be skipped
    payload = {"study": "se_vs_tau", "x": [0.0, 1.15, 2.3], "xlabel": "tau_s_us", "series": series}
    with open(d / "se_vs_tau.json", "w") as f:
        json.dump(payload, f)
    return tmp_path / "stud"


class TestStudy:
    def test_full_data(self, tmp_path):
        d = study_payload(tmp_path)
        written = plot_study(str(d), "se_vs_tau", str(tmp_path / "s.png"))
        assert all(os.path.exists(w) for w in written)

    def test_missing_series_skipped(self, tmp_path, caplog):
        d = study_payload(tmp_path, missing_series=True)
        with caplog.at_level("WARNING", logger="ddviz"):
            plot_study(str(d), "se_vs_tau", str(tmp_path / "s.png"))
        assert any("skipping series" in r.message for r in caplog.records)

    def test_empty_dir_errors(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            plot_study(str(tmp_path), "se_vs_tau", str(tmp_path / "s.png"))


class TestCli:
    def test_heatmap_roundtrip(self, tmp_path, capsys):
        p = synthetic_csv(tmp_path / "h.csv")
        rc = cli_main(["heatmap", "--csv", str(p), "--out", str(tmp_path / "x.png")])
        assert rc == 0
        assert "wrote" in capsys.readouterr().out

    def test_schema_error_exit(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("x,y\n")
        rc = cli_main(["heatmap", "--csv", str(p), "--out", str(tmp_path / "x.png")])
        assert rc == 1

    def test_study_cli(self, tmp_path):
        d = study_payload(tmp_path)
        rc = cli_main(
            ["study", "--kind", "se_vs_tau", "--dir", str(d), "--out", str(tmp_path / "s.png")]
        )
        assert rc == 0
