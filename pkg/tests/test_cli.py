import csv
import os
import xml.etree.ElementTree as ET

import pytest

from kaczmarz_lab.cli import main

SMALL = ["--n", "80", "--shift", "10", "--iters", "600", "--seed", "42"]


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_compare_writes_all_outputs(tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["compare", *SMALL, "--out", str(out), "--plot"]) == 0
    names = sorted(os.listdir(out))
    assert names == ["comparison.csv", "comparison.svg", "trace_greedy.csv", "trace_partial.csv",
                     "trace_two-sample.csv", "trace_uniform.csv"]
    rows = read_csv(out / "trace_partial.csv")
    assert list(rows[0]) == ["k", "selected_row", "residual_used", "residuals_evaluated", "error"]
    assert len(rows) == 600
    comp = read_csv(out / "comparison.csv")
    assert list(comp[0]) == ["k", "uniform", "partial", "two-sample", "greedy"]
    assert comp[-1]["k"] == "600"
    head = (out / "trace_partial.csv").read_text().splitlines()[:8]
    assert "# seed=42" in head and "# strategy=partial" in head and "# m=80, n=80" in head
    assert head[0].startswith("# kaczmarz-lab ")
    root = ET.parse(out / "comparison.svg").getroot()
    lines = [el for el in root.iter() if el.tag.endswith("polyline")]
    colors = {el.get("data-strategy"): el.get("stroke") for el in lines}
    assert colors == {"uniform": "blue", "partial": "green", "two-sample": "orange", "greedy": "red"}


def test_compare_is_byte_identical(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", *SMALL, "--out", str(a), "--plot"]) == 0
    monkeypatch.setenv("KACZMARZ_LAB_THREADS", "1")
    assert main(["compare", *SMALL, "--out", str(b), "--plot"]) == 0
    for name in os.listdir(a):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_compare_unwritable_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["compare", *SMALL, "--out", str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err


def test_hist_table_and_csv(tmp_path, capsys):
    out = tmp_path / "h"
    assert main(["hist", "--n", "300", "--shift", "30", "--iters", "4000", "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out / "residual_counts.csv")
    counts = [int(r["count"]) for r in rows]
    assert counts == list(range(2, counts[-1] + 1))
    assert sum(int(r["frequency"]) for r in rows) == 4000
    printed = capsys.readouterr().out
    assert printed.startswith("# residuals |")


def test_hist_requires_partial(tmp_path, capsys):
    assert main(["hist", "--n", "20", "--strategies", "greedy", "--out", str(tmp_path)]) == 1
    assert "requires the partial strategy" in capsys.readouterr().err


def test_verify_exit_zero(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("[PASS]") >= 6


def test_run_from_config(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("kind=challenging\nn=60\nseed=5\niterations=300\nstrategies=cyclic,partial\nplot=true\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "comparison.svg").exists()
    assert read_csv(out / "comparison.csv")[0].keys() == {"k", "cyclic", "partial"}


def test_weighted_p_flag(tmp_path):
    out = tmp_path / "w"
    assert main(["compare", "--n", "40", "--iters", "100", "--strategies", "weighted-p,greedy", "--p", "5",
                 "--out", str(out)]) == 0
    assert (out / "trace_weighted-p5.csv").exists()
    assert main(["compare", "--n", "40", "--iters", "100", "--strategies", "weighted-p", "--out", str(out)]) == 1


def test_numpy_backend_flag(tmp_path):
    out = tmp_path / "np"
    assert main(["--backend", "numpy", "compare", "--n", "30", "--iters", "50", "--out", str(out)]) == 0
    assert "# backend=numpy" in (out / "comparison.csv").read_text()


@pytest.mark.parametrize("argv", [["compare", "--scenario", "bogus"], []])
def test_bad_arguments(argv):
    with pytest.raises(SystemExit):
        main(argv)
