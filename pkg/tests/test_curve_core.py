import math

import numpy as np
import pytest

from curveflow import fixtures
from curveflow.curve_core import (
    SampledCurve,
    arclength,
    curvature_l2,
    differential_data,
    energy,
    enclosed_area,
    kappabound_ratio,
    read_curve_csv,
    resample_uniform_arclength,
    translate,
    write_curve_csv,
)
from curveflow.errors import AngleMismatch, DegenerateCurve, EndpointsOffAxis, InvalidAngle


def test_sampled_curve_validates_shape_and_size():
    with pytest.raises(ValueError):
        SampledCurve(np.zeros((5, 2)))
    with pytest.raises(ValueError):
        SampledCurve(np.zeros((20, 3)))
    with pytest.raises(ValueError):
        SampledCurve(np.full((20, 2), np.nan))
    c = fixtures.semicircle(16)
    assert c.n == 16
    assert c.sigma[0] == 0.0 and c.sigma[-1] == 1.0
    with pytest.raises(ValueError):
        c.points[0, 0] = 3.0


def test_frame_is_orthonormal():
    d = differential_data(fixtures.ellipse_arc(200))
    assert np.allclose(np.hypot(*d.tangent.T), 1.0, atol=1e-12)
    assert np.allclose(np.hypot(*d.normal.T), 1.0, atol=1e-12)
    assert np.max(np.abs(np.sum(d.tangent * d.normal, axis=1))) < 1e-12


def test_semicircle_curvature_magnitude_and_tangent():
    # left-to-right traversal is clockwise, so kappa = -1 with n = R tau
    d = differential_data(fixtures.semicircle(200))
    assert np.max(np.abs(np.abs(d.kappa) - 1.0)) < 1e-3
    assert np.all(d.kappa < 0)
    assert np.allclose(d.tangent[0], [0.0, 1.0], atol=1e-4)


def test_segment_is_flat():
    d = differential_data(fixtures.segment())
    assert np.max(np.abs(d.kappa)) < 1e-12
    assert np.allclose(d.tangent, [1.0, 0.0])
    assert np.allclose(d.normal, [0.0, 1.0])


def test_ellipse_curvature_matches_closed_form():
    # ab / (a^2 sin^2 t + b^2 cos^2 t)^(3/2); at the apex t = pi/2 this is 2/8
    c = fixtures.ellipse_arc(400)
    d = differential_data(c)
    t = np.linspace(math.pi / 4, 3 * math.pi / 4, 401)
    exact = 2.0 / (4 * np.sin(t) ** 2 + np.cos(t) ** 2) ** 1.5
    assert np.max(np.abs(np.abs(d.kappa) - exact)) < 1e-3
    assert abs(abs(d.kappa[200]) - 0.25) < 1e-6


def test_curvature_converges_at_second_order():
    errs = []
    ns = [100, 200, 400, 800, 1600]
    for n in ns:
        errs.append(np.max(np.abs(np.abs(differential_data(fixtures.semicircle(n)).kappa) - 1.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9), orders


@pytest.mark.parametrize("curve, expected, tol", [
    (fixtures.semicircle(200), math.pi, 1e-4),
    (fixtures.segment(), 1.0, 0.0),
    (fixtures.quarter_circle(400), math.pi, 1e-4),
])
def test_arclength(curve, expected, tol):
    assert abs(arclength(curve) - expected) <= tol


def test_energy_examples():
    c = fixtures.semicircle(200)
    assert abs(energy(c, math.pi / 2) - math.pi) < 1e-4
    back = fixtures.segment(50, a=(1.0, 0.0), b=(-1.0, 0.0))
    assert energy(back, math.pi / 3) == pytest.approx(3.0, abs=1e-14)
    assert abs(energy(c, math.pi / 4) - (math.pi - math.sqrt(2))) < 1e-4
    with pytest.raises(InvalidAngle):
        energy(c, 0.0)


def test_curvature_l2_examples():
    assert abs(curvature_l2(fixtures.semicircle(200)) - math.sqrt(math.pi)) < 1e-3
    assert curvature_l2(fixtures.segment()) == 0.0
    r, theta = 2.0, 2 * math.pi / 3
    arc = fixtures.circular_arc(theta / 2, 400, radius=r)
    assert abs(curvature_l2(arc) - math.sqrt(theta / r)) < 1e-3


def test_kappabound_ratio():
    ratio = kappabound_ratio(fixtures.semicircle(200), math.pi / 2)
    assert abs(ratio - math.sqrt(2) / math.pi) < 1e-3
    assert kappabound_ratio(fixtures.circular_arc(math.pi / 4, 200), math.pi / 4) <= 1.0
    tight = [kappabound_ratio(fixtures.circular_arc(math.pi / 2, 200, radius=r), math.pi / 2) for r in (1.0, 0.1)]
    assert tight[0] == pytest.approx(tight[1], rel=1e-6)  # scale invariant
    with pytest.raises(AngleMismatch):
        kappabound_ratio(fixtures.semicircle(200), math.pi / 3)


def test_kappabound_ratio_vanishes_for_sharp_bump():
    # growing curvature at fixed length drives the ratio to zero
    ratios = []
    for amp in (0.1, 0.3, 0.6):
        s = np.linspace(0, 1, 801)
        base = fixtures.semicircle(800).points
        r = 1 + amp * np.exp(-((s - 0.5) / 0.01) ** 2)
        ratios.append(kappabound_ratio(SampledCurve(base * r[:, None]), math.pi / 2))
    assert ratios[0] > ratios[1] > ratios[2]


def test_enclosed_area():
    assert abs(enclosed_area(fixtures.semicircle(400)) - math.pi / 2) < 1e-4
    assert enclosed_area(fixtures.segment()) == 0.0
    t = np.linspace(0, 1, 401)
    tri = np.c_[t, 1 - np.abs(2 * t - 1)]
    assert abs(enclosed_area(SampledCurve(tri)) - 0.5) < 1e-3
    lifted = np.array(fixtures.semicircle(50).points)
    lifted[0, 1] = 1e-3
    with pytest.raises(EndpointsOffAxis):
        enclosed_area(SampledCurve(lifted))


def test_resample_is_idempotent_on_uniform_curve():
    c = fixtures.semicircle(200)
    assert np.max(np.abs(resample_uniform_arclength(c).points - c.points)) < 1e-10


def test_resample_nonuniform_semicircle():
    c = fixtures.nonuniform_semicircle(400, warp=0.3)
    r = resample_uniform_arclength(c)
    h = np.hypot(*np.diff(r.points, axis=0).T)
    assert np.ptp(h) / h.mean() < 1e-10
    assert abs(arclength(r) - math.pi) < 1e-4
    # nodes are on the circle at equally spaced angles
    ang = np.arctan2(r.y, r.x)
    assert np.max(np.abs(ang - np.linspace(math.pi, 0, 401))) < 1e-5


def test_resample_preserves_length_and_area():
    c = fixtures.perturbed_semicircle(200)
    r = resample_uniform_arclength(c, 300)
    L = arclength(c)
    assert abs(arclength(r) - L) / L < 1e-5
    assert abs(enclosed_area(r) - enclosed_area(c)) < 1e-5 * L**2
    assert abs(energy(r, math.pi / 2) - energy(c, math.pi / 2)) / energy(c, math.pi / 2) < 1e-5


def test_translate():
    c = fixtures.semicircle(200)
    t = translate(c, 3.0)
    assert np.allclose(t.points[[0, -1]], [[2.0, 0.0], [4.0, 0.0]])
    assert energy(t, math.pi / 3) == pytest.approx(energy(c, math.pi / 3), abs=1e-13)
    assert translate(c, 0.0) is c
    assert np.max(np.abs(differential_data(t).kappa - differential_data(c).kappa)) < 1e-10


def test_degenerate_curve_rejected():
    pts = np.array(fixtures.semicircle(20).points)
    pts[5] = pts[6]
    pts[4] = pts[6]
    pts[7] = pts[6]
    with pytest.raises(DegenerateCurve):
        differential_data(SampledCurve(pts))


def test_csv_round_trip_is_bit_exact(tmp_path):
    c = fixtures.perturbed_semicircle(123)
    path = tmp_path / "c.csv"
    write_curve_csv(c, path)
    back = read_curve_csv(path)
    assert np.array_equal(back.points, c.points)


def test_csv_reader_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n0,0,0\n")
    with pytest.raises(ValueError):
        read_curve_csv(path)
