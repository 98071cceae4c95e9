"""Discrete differential geometry of open planar curves.

A curve is stored as ``n + 1`` nodes over the uniform parameter grid
``sigma = linspace(0, 1, n + 1)``.  Orientation is left to right along the
x-axis, so the first node is the left contact point.

Sign conventions
----------------
The unit normal is ``n = R tau`` with ``R`` the counterclockwise quarter
rotation, and the scalar curvature is ``kappa = <f'', n> / |f'|**2`` so that
the curvature vector equals ``kappa * n``.  With this convention a circular
cap traversed left to right (clockwise) has negative curvature ``-1/r``; a
counterclockwise circle has ``+1/r``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AngleMismatch, DegenerateCurve, EndpointsOffAxis, InvalidAngle, IoFailure

METRIC_FLOOR = 1e-10
MIN_INTERVALS = 8


def rotate90(v: np.ndarray) -> np.ndarray:
    """Counterclockwise quarter rotation applied along the last axis."""
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def check_angle(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < math.pi) or not math.isfinite(alpha):
        raise InvalidAngle(f"contact angle {alpha!r} not in (0, pi)")
    return alpha


@dataclass(frozen=True)
class SampledCurve:
    """Planar curve sampled on a uniform parameter grid.

    Parameters
    ----------
    points : array_like, shape (n + 1, 2)
        Node positions ordered from the left endpoint to the right endpoint.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n+1, 2), got {pts.shape}")
        if pts.shape[0] - 1 < MIN_INTERVALS:
            raise ValueError(f"need at least {MIN_INTERVALS} intervals, got {pts.shape[0] - 1}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.points.shape[0] - 1

    @property
    def sigma(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def with_points(self, points) -> "SampledCurve":
        return SampledCurve(points)


@dataclass(frozen=True)
class DifferentialData:
    """Per-node tangent, normal, curvature and metric of a sampled curve."""

    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    metric: np.ndarray
    second: np.ndarray = field(repr=False)

    @property
    def curvature_vector(self) -> np.ndarray:
        return self.kappa[:, None] * self.normal


def first_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order centered differences, one-sided second order at the ends."""
    return np.gradient(values, h, axis=0, edge_order=2)


def second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second derivative: centered interior, one-sided second order ends."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
    out[0] = 2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
    out[-1] = 2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]
    return out / (h * h)


def differential_data(curve: SampledCurve) -> DifferentialData:
    """Finite-difference tangent, normal and curvature.

    Parameters
    ----------
    curve : SampledCurve

    Returns
    -------
    DifferentialData
        ``tangent`` and ``normal = R tangent`` are unit vectors,
        ``kappa = <f'', normal> / metric**2`` and ``metric = |f'|``.

    Raises
    ------
    DegenerateCurve
        If the metric falls below ``1e-10`` at any node.
    """
    h = 1.0 / curve.n
    d1 = first_derivative(curve.points, h)
    d2 = second_derivative(curve.points, h)
    metric = np.hypot(d1[:, 0], d1[:, 1])
    bad = np.flatnonzero(metric < METRIC_FLOOR)
    if bad.size:
        raise DegenerateCurve(f"metric {metric[bad[0]]:.3e} below {METRIC_FLOOR} at node {bad[0]}")
    tau = d1 / metric[:, None]
    nrm = rotate90(tau)
    kappa = np.einsum("ij,ij->i", d2, nrm) / metric**2
    return DifferentialData(tangent=tau, normal=nrm, kappa=kappa, metric=metric, second=d2)


def chord_lengths(curve: SampledCurve) -> np.ndarray:
    seg = np.diff(curve.points, axis=0)
    return np.hypot(seg[:, 0], seg[:, 1])


def arclength_coordinates(curve: SampledCurve) -> np.ndarray:
    """Cumulative arc length at the nodes, starting from zero."""
    return np.concatenate(([0.0], np.cumsum(chord_lengths(curve))))


def arclength(curve: SampledCurve) -> float:
    """Length of the curve.

    The metric of the piecewise linear interpolant is constant on each cell,
    so the composite trapezoid rule integrates it exactly; the result is the
    polyline length.

    Raises
    ------
    DegenerateCurve
        If two consecutive nodes coincide.
    """
    c = chord_lengths(curve)
    if np.min(c) < METRIC_FLOOR / curve.n:
        raise DegenerateCurve("coincident consecutive nodes")
    return float(np.sum(c))


def energy(curve: SampledCurve, alpha: float) -> float:
    """Contact-angle energy ``L + cos(alpha) * (x(0) - x(1))``."""
    alpha = check_angle(alpha)
    return arclength(curve) + math.cos(alpha) * float(curve.x[0] - curve.x[-1])


def curvature_l2(curve: SampledCurve, data: DifferentialData | None = None) -> float:
    """``(int_0^L kappa^2 ds)^(1/2)`` by the trapezoid rule in arc length."""
    data = differential_data(curve) if data is None else data
    s = arclength_coordinates(curve)
    k2 = data.kappa**2
    return float(math.sqrt(np.sum(0.5 * (k2[1:] + k2[:-1]) * np.diff(s))))


def endpoint_angle_errors(curve: SampledCurve, alpha: float,
                          data: DifferentialData | None = None) -> tuple[float, float]:
    """Angles between the endpoint tangents and (cos a, sin a), (cos a, -sin a)."""
    data = differential_data(curve) if data is None else data
    t0, t1 = data.tangent[0], data.tangent[-1]
    a0 = math.atan2(t0[1], t0[0])
    a1 = math.atan2(t1[1], t1[0])
    e0 = abs(math.remainder(a0 - alpha, 2 * math.pi))
    e1 = abs(math.remainder(a1 + alpha, 2 * math.pi))
    return e0, e1


def kappabound_ratio(curve: SampledCurve, alpha: float, tol: float = 1e-2) -> float:
    """Ratio of the two sides of the length/curvature lower bound.

    Returns ``(1/L) / (max|kappa| / (sqrt(2) sin(alpha)))``, which is at most
    one for curves meeting the axis at angle ``alpha``.

    Raises
    ------
    AngleMismatch
        If an endpoint tangent deviates from the contact direction by more
        than ``tol`` radians.
    """
    alpha = check_angle(alpha)
    data = differential_data(curve)
    e0, e1 = endpoint_angle_errors(curve, alpha, data)
    if max(e0, e1) > tol:
        raise AngleMismatch(f"endpoint tangent errors {e0:.3e}, {e1:.3e} exceed {tol}")
    kmax = float(np.max(np.abs(data.kappa)))
    if kmax == 0.0:
        return 0.0
    rhs = kmax / (math.sqrt(2.0) * math.sin(alpha))
    return (1.0 / arclength(curve)) / rhs


def enclosed_area(curve: SampledCurve, tol: float = 1e-8) -> float:
    """Signed area between the curve and the axis segment joining its ends.

    Positive for a curve above the axis traversed left to right.

    Raises
    ------
    EndpointsOffAxis
        If ``|y|`` exceeds ``tol`` at either endpoint.
    """
    y0, y1 = curve.y[0], curve.y[-1]
    if abs(y0) > tol or abs(y1) > tol:
        raise EndpointsOffAxis(f"endpoint heights {y0:.3e}, {y1:.3e}")
    x, y = curve.x, curve.y
    # shoelace of the closed polygon written as int y dx; the closing axis
    # segment contributes nothing
    return float(0.5 * np.sum((y[1:] + y[:-1]) * np.diff(x)))


def _spline(curve: SampledCurve) -> CubicSpline:
    return CubicSpline(curve.sigma, curve.points, bc_type="natural", axis=0)


def _spline_arclength(spl: CubicSpline, n: int, sub: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Dense arc-length table of a spline on [0, 1] (Gauss-Legendre per cell)."""
    gx, gw = np.polynomial.legendre.leggauss(5)
    edges = np.linspace(0.0, 1.0, n * sub + 1)
    a, b = edges[:-1], edges[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * gx[None, :]
    d = spl(nodes.ravel(), 1)
    speed = np.hypot(d[:, 0], d[:, 1]).reshape(nodes.shape)
    cell = half * (speed @ gw)
    return edges, np.concatenate(([0.0], np.cumsum(cell)))


def resample_uniform_arclength(curve: SampledCurve, n: int | None = None,
                               tol: float = 1e-14, maxiter: int = 60) -> SampledCurve:
    """Resample to ``n`` equal chords along the interpolating cubic spline.

    The natural cubic spline through the nodes (parameter ``sigma``) is
    sampled so that consecutive output nodes are equidistant.  An input that
    already has equal chords is reproduced.

    Parameters
    ----------
    curve : SampledCurve
    n : int, optional
        Number of output intervals; defaults to ``curve.n``.

    Raises
    ------
    DegenerateCurve
        If the input is not regular.
    """
    n = curve.n if n is None else int(n)
    differential_data(curve)  # regularity check
    spl = _spline(curve)
    edges, s_tab = _spline_arclength(spl, curve.n)
    targets = np.linspace(0.0, s_tab[-1], n + 1)
    u = np.interp(targets, s_tab, edges)
    u[0], u[-1] = 0.0, 1.0
    for _ in range(maxiter):
        pts = spl(u)
        c = np.hypot(*np.diff(pts, axis=0).T)
        cum = np.concatenate(([0.0], np.cumsum(c)))
        goal = np.linspace(0.0, cum[-1], n + 1)
        u_new = np.interp(goal, cum, u)
        u_new[0], u_new[-1] = 0.0, 1.0
        if np.any(np.diff(u_new) <= 0):
            raise DegenerateCurve("arc-length inversion lost monotonicity")
        step = np.max(np.abs(u_new - u))
        u = u_new
        if step < tol:
            break
    pts = spl(u)
    pts[0] = curve.points[0]
    pts[-1] = curve.points[-1]
    return SampledCurve(pts)


def translate(curve: SampledCurve, h: float) -> SampledCurve:
    """Shift every node by ``(h, 0)``."""
    if h == 0:
        return curve
    pts = np.array(curve.points)
    pts[:, 0] += h
    return SampledCurve(pts)


# ---------------------------------------------------------------- CSV format

def write_curve_csv(curve: SampledCurve, path) -> None:
    """Write ``sigma,x,y`` rows with round-trip exact float formatting."""
    buf = io.StringIO()
    buf.write("sigma,x,y\n")
    for s, (x, y) in zip(curve.sigma, curve.points):
        buf.write(f"{float(s)!r},{float(x)!r},{float(y)!r}\n")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_curve_csv(path) -> SampledCurve:
    """Read a curve written by :func:`write_curve_csv`.

    The ``sigma`` column must be the uniform grid on [0, 1].
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header != ["sigma", "x", "y"]:
                raise ValueError(f"{path}: expected header sigma,x,y, got {header}")
            rows = [[float(v) for v in row] for row in reader if row]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    arr = np.array(rows)
    curve = SampledCurve(arr[:, 1:3])
    if not np.allclose(arr[:, 0], curve.sigma, atol=1e-12, rtol=0):
        raise ValueError(f"{path}: sigma column is not the uniform grid on [0, 1]")
    return curve
