import json
import math
import re

import numpy as np
import pytest

from curveflow import fixtures, flow_engine as fe, lab
from curveflow.chart import verify_reference
from curveflow.curve_core import (
    SampledCurve,
    arclength,
    read_curve_csv,
    resample_uniform_arclength,
    translate,
)
from curveflow.errors import ConfigError, NoAdmissibleEpsilon

RIGHT = math.pi / 2


def manifest(tmp_path, seed="perturbed_semicircle", t_end=1e-3, **restart):
    return lab.manifest_from_mapping(
        {"seed": seed, "flow": {"alpha": RIGHT, "t_end": t_end},
         "restart": restart or {"policy": "never"}},
        base_dir=tmp_path, output=tmp_path / "out")


@pytest.fixture(scope="module")
def semicircle_bundle():
    cfg = fe.FlowConfig(alpha=RIGHT)
    return lab.restart_prepare(fe.init_state(fixtures.semicircle(200), cfg), cfg)


@pytest.fixture(scope="module")
def perturbed_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    plain = lab.extend_run(manifest(base))
    seamed = lab.extend_run(manifest(base, policy="at-time", time=5e-4))
    return plain, seamed


def test_semicircle_reconstruction(semicircle_bundle):
    f_tilde = semicircle_bundle.f_tilde
    assert np.max(np.abs(f_tilde.points - fixtures.semicircle(200).points)) < 1e-6
    audit = semicircle_bundle.audit
    assert audit["tangent_norm_arclength"] == pytest.approx(math.sqrt(math.pi), abs=1e-4)
    assert audit["ds_norm"] == pytest.approx(audit["ds_norm_expected"], rel=1e-10)
    assert audit["ds_norm"] == pytest.approx(math.pi, abs=1e-4)
    assert audit["d2s_norm"] == pytest.approx(audit["d2s_norm_expected"], rel=1e-3)


def test_reconstruction_of_uniform_curve_from_origin():
    c = resample_uniform_arclength(fixtures.perturbed_semicircle(300))
    c = translate(c, -float(c.points[0, 0]))
    back = lab.reconstruct_from_curvature(c)
    assert np.max(np.abs(back.points - c.points)) < 1e-6


def test_reconstruction_matches_resampling():
    c = fixtures.nonuniform_semicircle(400, warp=0.2)
    back = lab.reconstruct_from_curvature(c)
    ref = resample_uniform_arclength(c)
    shift = ref.points[0] - back.points[0]
    assert np.max(np.abs(back.points + shift - ref.points)) < 1e-5 * arclength(c)


def test_restart_after_relaxation_passes(perturbed_runs):
    plain, _ = perturbed_runs
    cfg = plain.manifest.flow
    bundle = lab.restart_prepare(plain.trajectory[-1], cfg)
    assert bundle.epsilon in lab.DEFAULT_EPSILONS
    assert verify_reference(bundle.chart, bundle.f_tilde).passed
    f_tilde, chart, height = bundle
    assert f_tilde is bundle.f_tilde and chart is bundle.chart and height is bundle.height


def test_restart_of_self_intersecting_curve_fails():
    c = fixtures.loop_witness()
    cfg = fe.FlowConfig(alpha=math.pi / 6)
    scan = lab.SmootherScan(epsilons=(1e-4, 1e-6))
    with pytest.raises(NoAdmissibleEpsilon):
        lab.restart_prepare(fe.init_state(c, cfg), cfg, scan=scan)


def test_semicircle_seam(tmp_path):
    m = manifest(tmp_path, seed="semicircle", policy="at-time", time=5e-4)
    res = lab.extend_run(m)
    assert res.verdict.status == fe.COMPLETED
    assert len(res.seams) == 1
    assert res.seams[0].jumps["E"] < 1e-6


def test_perturbed_seam(perturbed_runs):
    plain, seamed = perturbed_runs
    seam = seamed.seams[0]
    assert seam.jumps["area"] < 1e-6
    for key in ("E", "L", "area", "kappa_l2"):
        assert seam.jumps[key + "_relative"] < 1e-4
    L = plain.trajectory[-1].row["L"]
    assert seam.hausdorff < 1e-5 * L
    e_plain, e_seamed = plain.diag[-1]["E"], seamed.diag[-1]["E"]
    assert abs(e_seamed - e_plain) / e_plain < 1e-4
    assert seamed.diag.seams == [seam.index]


def test_policy_never_equals_run(tmp_path, perturbed_runs):
    plain, _ = perturbed_runs
    cfg = plain.manifest.flow
    traj, verdict = fe.run(fe.init_state(fixtures.perturbed_semicircle(), cfg), cfg)
    assert verdict == plain.verdict
    assert np.array_equal(traj[-1].curve.points, plain.trajectory[-1].curve.points)
    assert traj[-1].diag.rows == plain.diag.rows


def test_blowup_suspect_policy_needs_threshold(tmp_path):
    m = manifest(tmp_path, policy="on-blowup-suspect")
    with pytest.raises(ConfigError):
        lab.extend_run(m)


def test_emit_outputs(tmp_path, perturbed_runs):
    _, seamed = perturbed_runs
    out = tmp_path / "emit"
    report = lab.emit_outputs(seamed, out)
    rows = (out / "diag.csv").read_text().strip().splitlines()
    assert len(rows) - 1 == len(seamed.trajectory) == len(report["snapshots"])
    for snap, st in zip(report["snapshots"], seamed.trajectory):
        assert np.array_equal(read_curve_csv(out / snap["file"]).points, st.curve.points)
    svg = (out / "curves.svg").read_text()
    assert len(re.findall(r"<polyline", svg)) == len(seamed.trajectory)
    loaded = json.loads((out / "report.json").read_text())
    lab.validate_report(loaded)
    assert loaded["format"] == lab.REPORT_FORMAT
    assert len(loaded["seams"]) == 1
    steps = (out / "steps.csv").read_text().strip().splitlines()
    assert len(steps) - 1 == len(seamed.diag)


def test_report_schema_rejects_missing_keys():
    with pytest.raises(ValueError):
        lab.validate_report({"format": lab.REPORT_FORMAT})


def test_determinism(tmp_path):
    texts = []
    for k in range(2):
        m = manifest(tmp_path, t_end=2e-4)
        lab.emit_outputs(lab.extend_run(m), tmp_path / f"d{k}", svg_name=None)
        texts.append((tmp_path / f"d{k}" / "diag.csv").read_bytes())
    assert texts[0] == texts[1]


def test_hausdorff_distance():
    a = fixtures.semicircle(200)
    assert lab.hausdorff_distance(a, a) == 0.0
    b = SampledCurve(np.asarray(a.points) * 1.01)
    assert lab.hausdorff_distance(a, b) == pytest.approx(0.01, rel=1e-3)


def test_manifest_loading(tmp_path):
    (tmp_path / "defaults.toml").write_text("alpha = 1.0\nt_end = 2e-4\n")
    (tmp_path / "m.toml").write_text(
        'seed = "semicircle"\noutput = "res"\n'
        '[flow]\nconfig = "defaults.toml"\nn = 100\n'
        '[chart]\nlambda = 0.1\n'
        '[restart]\npolicy = "at-time"\ntime = 1e-4\n')
    m = lab.load_manifest(tmp_path / "m.toml")
    assert m.flow.alpha == 1.0 and m.flow.t_end == 2e-4 and m.flow.n == 100
    assert m.chart.lam == 0.1
    assert m.output == tmp_path / "res"
    assert m.restart.policy == "at-time" and m.restart.time == 1e-4
    assert m.seed_curve().n == 200


@pytest.mark.parametrize("raw", [
    {"seed": "semicircle", "mystery": 1},
    {"seed": "no_such_curve.csv"},
    {"seed": "semicircle", "restart": {"policy": "sometimes"}},
    {"seed": "semicircle", "restart": {"policy": "at-time"}},
    {"seed": "semicircle", "smoother": {"epsilons": [-1.0]}},
    {"seed": "semicircle", "chart": {"n": 2}},
])
def test_manifest_errors(tmp_path, raw):
    with pytest.raises(ConfigError):
        m = lab.manifest_from_mapping(raw, base_dir=tmp_path, output=tmp_path / "o")
        m.seed_curve()


def test_seed_from_csv(tmp_path):
    from curveflow.curve_core import write_curve_csv
    write_curve_csv(fixtures.ellipse_arc(100), tmp_path / "e.csv")
    m = lab.manifest_from_mapping({"seed": "e.csv"}, base_dir=tmp_path, output=tmp_path / "o")
    assert np.array_equal(m.seed_curve().points, fixtures.ellipse_arc(100).points)
