import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from curveflow import fixtures
from curveflow.cli import main
from curveflow.curve_core import read_curve_csv, write_curve_csv


@pytest.fixture
def invoke():
    runner = CliRunner()

    def call(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return call


def write_manifest(path, seed="perturbed_semicircle", t_end=2e-4, extra=""):
    path.write_text(f'seed = "{seed}"\noutput = "out"\n[flow]\nalpha = {math.pi / 2!r}\n'
                    f"t_end = {t_end!r}\n{extra}")
    return path


def test_simulate(tmp_path, invoke):
    cfg = tmp_path / "flow.toml"
    cfg.write_text(f"alpha = {math.pi / 2!r}\nt_end = 2e-4\n")
    res = invoke("simulate", "--config", cfg, "--out", tmp_path / "sim", "--svg")
    assert res.exit_code == 0, res.output
    assert res.output.startswith("completed")
    assert (tmp_path / "sim" / "movie.svg").is_file()
    assert (tmp_path / "sim" / "report.json").is_file()


def test_simulate_blowup_exit_code(tmp_path, invoke):
    cfg = tmp_path / "flow.toml"
    cfg.write_text(f"alpha = {math.pi / 2!r}\nkappa_l2_threshold = 0.1\n")
    res = invoke("simulate", "--config", cfg, "--out", tmp_path / "o", "--seed", "semicircle")
    assert res.exit_code == 2


def test_simulate_config_error(tmp_path, invoke):
    cfg = tmp_path / "flow.toml"
    cfg.write_text("alpha = -1.0\n")
    assert invoke("simulate", "--config", cfg, "--out", tmp_path / "o").exit_code == 4
    cfg.write_text(f"alpha = {math.pi / 2!r}\n")
    res = invoke("simulate", "--config", cfg, "--out", tmp_path / "o", "--seed", "segment")
    assert res.exit_code == 4


def test_run_and_extend(tmp_path, invoke):
    m = write_manifest(tmp_path / "m.toml")
    res = invoke("run", "--manifest", m)
    assert res.exit_code == 0, res.output
    assert (tmp_path / "out" / "curves.svg").is_file()
    res = invoke("extend", "--manifest", m, "--restart-at", 1e-4, "--out", tmp_path / "ext")
    assert res.exit_code == 0, res.output
    assert "restart at t" in res.output
    report = json.loads((tmp_path / "ext" / "report.json").read_text())
    assert len(report["seams"]) == 1


def test_smooth_and_chart_check(tmp_path, invoke):
    write_curve_csv(fixtures.semicircle(800), tmp_path / "c.csv")
    res = invoke("smooth", "--in", tmp_path / "c.csv", "--epsilon", 1e-4, "--out", tmp_path / "ref.csv",
                 "--alpha", math.pi / 2, "--n", 400)
    assert res.exit_code == 0, res.output
    assert read_curve_csv(tmp_path / "ref.csv").n == 400
    res = invoke("chart-check", "--ref", tmp_path / "ref.csv", "--alpha", math.pi / 2,
                 "--report", tmp_path / "chart.json", "--curve", tmp_path / "ref.csv")
    assert res.exit_code == 0, res.output
    assert json.loads((tmp_path / "chart.json").read_text())
    # the exact semicircle is curved at its ends and fails the strict check
    res = invoke("chart-check", "--ref", tmp_path / "c.csv", "--alpha", math.pi / 2,
                 "--report", tmp_path / "bad.json")
    assert res.exit_code != 0


def test_extract_height(tmp_path, invoke):
    write_curve_csv(fixtures.semicircle(400), tmp_path / "ref.csv")
    write_curve_csv(fixtures.perturbed_semicircle(400), tmp_path / "c.csv")
    res = invoke("extract-height", "--ref", tmp_path / "ref.csv", "--curve", tmp_path / "c.csv",
                 "--out", tmp_path / "h.csv", "--no-strict")
    assert res.exit_code == 0, res.output
    rows = (tmp_path / "h.csv").read_text().strip().splitlines()
    assert len(rows) == 402


def test_rate_probe(tmp_path, invoke):
    write_curve_csv(fixtures.segment(), tmp_path / "seg.csv")
    res = invoke("rate-probe", "--in", tmp_path / "seg.csv", "--epsilons", "1e-4,1e-5,1e-6")
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["observed"]["c0"] is None


def test_norms(tmp_path, invoke):
    t = np.linspace(0, 1, 33)
    (tmp_path / "d.csv").write_text("t,u\n" + "".join(f"{a!r},{a!r}\n" for a in t.tolist()))
    res = invoke("norms", "--diag", tmp_path / "d.csv", "--column", "u", "--s", 0.5, "--mu", 1.0)
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["lp"] == pytest.approx(1 / math.sqrt(3), rel=1e-10)
    assert out["seminorm"] == pytest.approx(math.sqrt(0.5), rel=1e-4)
    res = invoke("norms", "--diag", tmp_path / "d.csv", "--column", "nope")
    assert res.exit_code != 0
