"""Curvilinear coordinates around a reference curve and height functions.

A reference curve ``Phi`` (parametrized proportionally to arc length on
[0, 1], meeting the x-axis at angle ``alpha`` with zero curvature at its
ends) defines the map

    Psi(sigma, q) = Phi(sigma) + q (n(sigma) + cot(alpha) eta(sigma) tau(sigma)),

where ``eta`` switches from -1 near ``sigma = 0`` to +1 near ``sigma = 1``
so that the fibres through the endpoints stay on the axis.  A nearby curve
``f0`` is written as ``f0(phi(sigma)) = Psi(sigma, rho(sigma))`` with a height
function ``rho`` and a reparametrization ``phi``.

This module evaluates the chart, the explicit admissibility constants, the
Jacobian bound of the chart, the height extraction and the complete
reference-curve verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline
from scipy.spatial import cKDTree

from .curve_core import (
    SampledCurve,
    arclength,
    check_angle,
    chord_lengths,
    endpoint_angle_errors,
    resample_uniform_arclength,
    rotate90,
)
from .errors import InvalidChart, NewtonDivergence, NonMonotone, OutOfTube, OutsideTube

ENDPOINT_TOL = 1e-8
INITIAL_ANGLE_TOL = 5e-2
DENSE = 16  # samples per interval for sup norms of the reference curve
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def cot_alpha(alpha: float) -> float:
    """``cot(alpha)``, exactly zero at ``alpha = pi/2`` (to a few ulps)."""
    alpha = check_angle(alpha)
    if abs(alpha - math.pi / 2) <= 4 * np.finfo(float).eps:
        return 0.0
    return math.cos(alpha) / math.sin(alpha)


# ---------------------------------------------------------------- cutoff eta

_SMOOTHSTEPS = {
    5: (lambda t: t**3 * (10 - 15 * t + 6 * t**2), lambda t: 30 * t**2 * (1 - t) ** 2, 15 / 8),
    7: (lambda t: t**4 * (35 - 84 * t + 70 * t**2 - 20 * t**3),
        lambda t: 140 * t**3 * (1 - t) ** 3, 35 / 16),
}


@dataclass(frozen=True)
class EtaSpec:
    """Monotone cutoff: -1 on [0, 1/6), 0 on [2/6, 4/6), +1 on [5/6, 1].

    The transitions are polynomial smoothsteps of odd ``degree`` (5 or 7),
    which makes ``eta`` at least twice continuously differentiable.
    """

    degree: int = 5

    def __post_init__(self):
        if self.degree not in _SMOOTHSTEPS:
            raise ValueError(f"smoothstep degree must be one of {sorted(_SMOOTHSTEPS)}")

    def __call__(self, sigma):
        step = _SMOOTHSTEPS[self.degree][0]
        s = np.asarray(sigma, dtype=float)
        left = step(np.clip(6.0 * s - 1.0, 0.0, 1.0))
        right = step(np.clip(6.0 * s - 4.0, 0.0, 1.0))
        return left - 1.0 + right

    def derivative(self, sigma):
        dstep = _SMOOTHSTEPS[self.degree][1]
        s = np.asarray(sigma, dtype=float)
        t1 = 6.0 * s - 1.0
        t2 = 6.0 * s - 4.0
        d = np.where((t1 > 0) & (t1 < 1), 6.0 * dstep(np.clip(t1, 0, 1)), 0.0)
        return d + np.where((t2 > 0) & (t2 < 1), 6.0 * dstep(np.clip(t2, 0, 1)), 0.0)

    @property
    def prime_norm(self) -> float:
        """``max |eta'|``: peak smoothstep slope divided by the band width 1/6."""
        return 6.0 * _SMOOTHSTEPS[self.degree][2]


def make_eta(degree: int = 5) -> EtaSpec:
    return EtaSpec(degree)


# ------------------------------------------------------------------ constants

C_HAT_READINGS = ("inverse", "direct")


@dataclass(frozen=True)
class ConstantsReport:
    """All admissibility constants of a chart.

    ``K1`` and the cot-dependent limits are ``inf`` (respectively take the
    value 1) at ``alpha = pi/2``.  ``xi1`` uses ``xi1_length`` as length
    factor, which is the reference length unless told otherwise.
    """

    alpha: float
    C_alpha: float
    C_alpha_bar: float
    d: float
    K0: float
    K1: float
    xi0: float
    xi1: float
    lam: float
    lambda_max: float
    lambda_limit_angle: float
    lambda_limit_small: float
    eta_prime_norm: float
    kappa_norm: float
    L_phi: float
    xi1_length: float
    c_hat: float
    c_hat_reading: str

    def to_mapping(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def chart_constants(alpha: float, kappa_norm: float, length: float, eta_prime_norm: float,
                    lam: float | None = None, c_hat_reading: str = "inverse",
                    xi1_length: float | None = None) -> ConstantsReport:
    """Evaluate every admissibility constant from the chart data.

    Parameters
    ----------
    alpha : float
        Contact angle.
    kappa_norm : float
        ``max |kappa|`` of the reference curve.
    length : float
        Length of the reference curve.
    eta_prime_norm : float
        ``max |eta'|``.
    lam : float, optional
        Shrink factor of the tube; defaults to ``0.9 * lambda_max``.
    c_hat_reading : {"inverse", "direct"}
        ``"inverse"`` uses ``C_hat = 1 / (sqrt(2) sin(alpha))`` (the constant of
        the length/curvature bound), ``"direct"`` uses ``sqrt(2) sin(alpha)``.
    xi1_length : float, optional
        Length factor of ``xi1``; defaults to ``length``.  Pass a lower bound
        for the length of the initial curve to get the variant phrased in
        the parametrization of the initial curve.
    """
    if c_hat_reading not in C_HAT_READINGS:
        raise ValueError(f"c_hat_reading must be one of {C_HAT_READINGS}")
    if not (kappa_norm > 0 and length > 0 and eta_prime_norm >= 0):
        raise ValueError("need kappa_norm > 0, length > 0, eta_prime_norm >= 0")
    c = cot_alpha(alpha)
    ac = abs(c)
    sin_a = math.sin(alpha)
    c_hat = math.sqrt(2.0) * sin_a
    if c_hat_reading == "inverse":
        c_hat = 1.0 / c_hat
    bracket = 1.0 + c * c + c_hat * ac * eta_prime_norm
    C_alpha = 1.0 / bracket
    d = C_alpha / kappa_norm
    K0 = 1.0 / (2.0 * kappa_norm * bracket)
    K1 = math.inf if ac == 0.0 else length / (12.0 * ac)
    root = math.sqrt(c * c + 1.0)
    tiny = 1.0 if ac == 0.0 else math.sin(1.0 / (2.0 * (4 * 144) ** 2 * c * c))
    limit_angle = min(math.sin((root - ac) / 4.0), tiny) / (C_alpha * root)
    limit_small = min(1.0 / (6.0 * root), 1.0 if ac == 0.0 else 1.0 / (144.0 * ac))
    lambda_max = min(limit_angle, limit_small)
    lam = 0.9 * lambda_max if lam is None else float(lam)
    lc = lam * C_alpha
    C_bar = 1.0 - math.sqrt((lc * c) ** 2 + (1.0 - lc) ** 2)
    xi0 = min(C_bar, sin_a**2 / 2.0) / kappa_norm
    xi1_len = length if xi1_length is None else float(xi1_length)
    xi1 = min((root - ac) / 4.0, 1.0 if ac == 0.0 else 1.0 / (2.0 * (4 * 144) ** 2 * c * c),
              sin_a / 2.0) * xi1_len
    return ConstantsReport(alpha=float(alpha), C_alpha=C_alpha, C_alpha_bar=C_bar, d=d, K0=K0, K1=K1,
                           xi0=xi0, xi1=xi1, lam=lam, lambda_max=lambda_max,
                           lambda_limit_angle=limit_angle, lambda_limit_small=limit_small,
                           eta_prime_norm=float(eta_prime_norm), kappa_norm=float(kappa_norm),
                           L_phi=float(length), xi1_length=xi1_len, c_hat=c_hat,
                           c_hat_reading=c_hat_reading)


# ---------------------------------------------------------------------- chart

@dataclass(frozen=True)
class Frame:
    """Reference curve data at a set of parameters."""

    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    metric: np.ndarray


@dataclass(frozen=True)
class ChartSpec:
    """Reference curve with its cutoff, tube half-width and shrink factor.

    Build instances with :func:`make_chart`.  The reference curve is
    interpolated by a not-a-knot quintic spline through its nodes; tangent,
    normal and curvature come from that spline.
    """

    phi_star: SampledCurve
    alpha: float
    eta: EtaSpec
    d: float
    lam: float
    kappa_norm: float
    length: float
    c_hat_reading: str = "inverse"
    spline: object = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.phi_star.n

    @property
    def sigma(self) -> np.ndarray:
        return self.phi_star.sigma

    @property
    def cot(self) -> float:
        return cot_alpha(self.alpha)

    def frame(self, sigma) -> Frame:
        s = np.atleast_1d(np.asarray(sigma, dtype=float))
        p = self.spline(s)
        d1 = self.spline(s, 1)
        d2 = self.spline(s, 2)
        m = np.hypot(d1[:, 0], d1[:, 1])
        tau = d1 / m[:, None]
        nrm = rotate90(tau)
        kap = np.einsum("ij,ij->i", d2, nrm) / m**2
        return Frame(p, tau, nrm, kap, m)

    def fibre(self, sigma) -> np.ndarray:
        """Direction ``n + cot(alpha) eta tau`` of the coordinate lines ``sigma = const``."""
        fr = self.frame(sigma)
        return fr.normal + (self.cot * self.eta(np.atleast_1d(sigma)))[:, None] * fr.tangent

    @property
    def tube(self) -> float:
        """Half-width ``lam * d`` of the shrunken tube."""
        return self.lam * self.d


def _quintic(curve: SampledCurve):
    return make_interp_spline(curve.sigma, np.asarray(curve.points), k=5)


def endpoint_geometry(curve: SampledCurve, alpha: float) -> dict:
    """Endpoint angle errors and curvatures from a quintic interpolant."""
    spl = _quintic(curve)
    e = np.array([0.0, 1.0])
    d1, d2 = spl(e, 1), spl(e, 2)
    m = np.hypot(d1[:, 0], d1[:, 1])
    kap = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / m**3
    a0 = math.atan2(d1[0, 1], d1[0, 0])
    a1 = math.atan2(d1[1, 1], d1[1, 0])
    return {
        "angle_error": (abs(math.remainder(a0 - alpha, 2 * math.pi)),
                        abs(math.remainder(a1 + alpha, 2 * math.pi))),
        "kappa": (float(kap[0]), float(kap[1])),
        "y": (float(curve.y[0]), float(curve.y[-1])),
        "tangent_angle": (a0, a1),
    }


def _spline_length(spl, n: int) -> float:
    edges = np.linspace(0.0, 1.0, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 / n
    q = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    d1 = spl(q, 1)
    speed = np.hypot(d1[:, 0], d1[:, 1]).reshape(n, -1)
    return float(np.sum(speed @ _GL_WEIGHTS) * half)


def make_chart(phi_star: SampledCurve, alpha: float, eta: EtaSpec | None = None,
               lam="auto", strict: bool = True, c_hat_reading: str = "inverse",
               angle_tol: float = 1e-6, kappa_tol: float = 1e-6, uniform_tol: float = 1e-8) -> ChartSpec:
    """Validate a reference curve and build its chart.

    Parameters
    ----------
    phi_star : SampledCurve
        Reference curve with (numerically) equal chords, see
        :func:`curveflow.curve_core.resample_uniform_arclength`.
    alpha : float
    eta : EtaSpec, optional
        Defaults to the quintic cutoff.
    lam : float or "auto"
        Shrink factor; ``"auto"`` takes ``0.9 * lambda_max``.
    strict : bool
        Require the endpoint angle and zero endpoint curvature within
        ``angle_tol`` and ``kappa_tol``.  With ``strict=False`` any regular
        curve with endpoints on the axis is accepted (useful for exact
        circular arcs, whose endpoint curvature is not zero).

    Raises
    ------
    InvalidChart
    """
    alpha = check_angle(alpha)
    eta = make_eta() if eta is None else eta
    y0, y1 = abs(phi_star.y[0]), abs(phi_star.y[-1])
    if max(y0, y1) > ENDPOINT_TOL:
        raise InvalidChart(f"reference endpoints off the axis: |y| = {y0:.3e}, {y1:.3e}")
    h = chord_lengths(phi_star)
    spread = float(np.ptp(h) / h.mean())
    if spread > uniform_tol:
        raise InvalidChart(f"reference curve not proportional to arc length (chord spread {spread:.2e}); "
                           "resample it first")
    if strict:
        geo = endpoint_geometry(phi_star, alpha)
        if max(geo["angle_error"]) > angle_tol:
            raise InvalidChart(f"endpoint angle errors {geo['angle_error']} exceed {angle_tol}")
        if max(map(abs, geo["kappa"])) > kappa_tol:
            raise InvalidChart(f"endpoint curvatures {geo['kappa']} exceed {kappa_tol}")
    spl = _quintic(phi_star)
    length = _spline_length(spl, phi_star.n)
    dense = np.linspace(0.0, 1.0, DENSE * phi_star.n + 1)
    d1, d2 = spl(dense, 1), spl(dense, 2)
    m = np.hypot(d1[:, 0], d1[:, 1])
    if m.min() < 1e-10:
        raise InvalidChart("reference curve is not regular")
    kappa_norm = float(np.max(np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / m**3))
    if kappa_norm == 0.0:
        raise InvalidChart("straight reference curve: tube half-width is unbounded")
    base = chart_constants(alpha, kappa_norm, length, eta.prime_norm, None, c_hat_reading)
    if lam == "auto":
        lam_val = base.lam
    else:
        lam_val = float(lam)
        if not 0.0 < lam_val < 1.0:
            raise InvalidChart("lambda must lie in (0, 1)")
        if strict and lam_val >= base.lambda_max:
            raise InvalidChart(f"lambda {lam_val} violates the limit {base.lambda_max:.6g}")
    return ChartSpec(phi_star=phi_star, alpha=alpha, eta=eta, d=base.d, lam=lam_val,
                     kappa_norm=kappa_norm, length=length, c_hat_reading=c_hat_reading, spline=spl)


def constants(chart: ChartSpec, xi1_length: float | None = None) -> ConstantsReport:
    """Admissibility constants of ``chart``."""
    return chart_constants(chart.alpha, chart.kappa_norm, chart.length, chart.eta.prime_norm,
                           chart.lam, chart.c_hat_reading, xi1_length)


def chart_eval(chart: ChartSpec, sigma, q) -> np.ndarray:
    """Evaluate ``Psi(sigma, q)``; ``sigma`` and ``q`` broadcast.

    Raises
    ------
    OutOfTube
        If some ``|q| >= d``.
    """
    s, qq = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(q, dtype=float))
    if np.any(np.abs(qq) >= chart.d):
        raise OutOfTube(f"|q| = {np.max(np.abs(qq)):.6g} not below d = {chart.d:.6g}")
    shape = s.shape
    s, qq = s.ravel(), qq.ravel()
    fr = chart.frame(s)
    fib = fr.normal + (chart.cot * chart.eta(s))[:, None] * fr.tangent
    out = fr.point + qq[:, None] * fib
    return out.reshape(shape + (2,))


def jacobian_det(chart: ChartSpec, sigma, q) -> np.ndarray:
    """``|det D Psi|`` in closed form.

    With metric ``m``, ``c = cot(alpha)``:
    ``det = m (1 - q kappa (1 + c^2 eta^2)) + q c eta'``.
    """
    s, qq = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(q, dtype=float))
    shape = s.shape
    s, qq = s.ravel(), qq.ravel()
    fr = chart.frame(s)
    c = chart.cot
    eta = chart.eta(s)
    det = fr.metric * (1.0 - qq * fr.kappa * (1.0 + (c * eta) ** 2)) + qq * c * chart.eta.derivative(s)
    return np.abs(det).reshape(shape)


@dataclass(frozen=True)
class JacobianReport:
    min_det: float
    bound: float
    passed: bool
    argmin: tuple


def chart_jacobian_check(chart: ChartSpec, n_sigma: int = 200, n_q: int = 50,
                         rtol: float = 1e-6) -> JacobianReport:
    """Sample ``|det D Psi|`` on ``[0, 1] x [-lam d, lam d]``.

    The verdict compares the minimum with ``(1 - lam) L``.  The sampled grid
    includes the closed edge ``|q| = lam d``, where the bound can be attained
    exactly, so the comparison allows a relative slack ``rtol``.
    """
    s = np.linspace(0.0, 1.0, n_sigma)
    q = np.linspace(-chart.tube, chart.tube, n_q)
    S, Q = np.meshgrid(s, q, indexing="ij")
    det = jacobian_det(chart, S, Q)
    k = int(np.argmin(det))
    i, j = np.unravel_index(k, det.shape)
    bound = (1.0 - chart.lam) * chart.length
    mn = float(det[i, j])
    return JacobianReport(mn, bound, mn >= bound * (1.0 - rtol), (float(s[i]), float(q[j])))


# ------------------------------------------------------------ height extraction

@dataclass(frozen=True)
class HeightField:
    """Height ``rho`` and reparametrization ``phi`` of a curve over a chart."""

    rho: np.ndarray
    phi: np.ndarray
    chart: ChartSpec = field(repr=False)
    residual: float = 0.0
    certificate: float = math.nan

    @property
    def sigma(self) -> np.ndarray:
        return self.chart.sigma

    def drho(self) -> np.ndarray:
        return np.gradient(self.rho, self.sigma, edge_order=2)

    def curve(self) -> SampledCurve:
        return build_curve(self.chart, self.rho)


def build_curve(chart: ChartSpec, rho) -> SampledCurve:
    """The curve ``sigma -> Psi(sigma, rho(sigma))`` on the chart grid."""
    return SampledCurve(chart_eval(chart, chart.sigma, np.asarray(rho, dtype=float)))


class _Extended:
    """Cubic spline of a curve in its parameter, extended linearly beyond [0, 1]."""

    def __init__(self, curve: SampledCurve):
        self.spl = CubicSpline(curve.sigma, np.asarray(curve.points), axis=0)
        self.p0, self.p1 = self.spl(0.0), self.spl(1.0)
        self.d0, self.d1 = self.spl(0.0, 1), self.spl(1.0, 1)

    def __call__(self, t: float):
        if t < 0.0:
            return self.p0 + t * self.d0, self.d0
        if t > 1.0:
            return self.p1 + (t - 1.0) * self.d1, self.d1
        return self.spl(t), self.spl(t, 1)


def _tube_precheck(chart: ChartSpec, f0: SampledCurve):
    dense = np.linspace(0.0, 1.0, DENSE * chart.n + 1)
    tree = cKDTree(chart.spline(dense))
    dist, _ = tree.query(np.asarray(f0.points))
    reach = chart.d * math.sqrt(1.0 + chart.cot**2)
    worst = int(np.argmax(dist))
    if dist[worst] >= reach:
        raise OutsideTube(f"curve point {worst} is {dist[worst]:.4g} from the reference curve, "
                          f"beyond the chart reach {reach:.4g}")


def extract_height(chart: ChartSpec, f0: SampledCurve, damping: float = 0.5,
                   max_iter: int = 50, tol: float = 1e-12) -> HeightField:
    """Write ``f0`` as a height function over ``chart``.

    For each chart node ``sigma_i`` solves ``f0(phi_i) = Psi(sigma_i, rho_i)``
    by damped Newton on ``(phi_i, rho_i)``, starting at ``phi = 0`` with the
    height that moves the reference endpoint onto the endpoint of ``f0``
    along the (horizontal) endpoint fibre, and continuing node by node with
    linear extrapolation of the previous solutions.  The step is shortened by
    ``damping`` until the residual decreases.

    Raises
    ------
    OutsideTube
        If ``f0`` leaves the chart domain ``|q| < d``.
    NewtonDivergence
        If a node does not converge to ``tol * L`` within ``max_iter``
        iterations.
    NonMonotone
        If the recovered ``phi`` is not strictly increasing.
    """
    _tube_precheck(chart, f0)
    f = _Extended(f0)
    s = chart.sigma
    fr = chart.frame(s)
    fib = fr.normal + (chart.cot * chart.eta(s))[:, None] * fr.tangent
    scale = tol * chart.length
    npts = s.size
    phi = np.empty(npts)
    rho = np.empty(npts)
    cert = np.empty(npts)
    worst = 0.0
    p0 = np.asarray(f0.points[0])
    # endpoint fibre: solve Phi(0) + rho v = f0(0) in least squares
    v0 = fib[0]
    guess = (0.0, float(np.dot(p0 - fr.point[0], v0) / np.dot(v0, v0)))
    for i in range(npts):
        if i >= 2:
            guess = (2 * phi[i - 1] - phi[i - 2], 2 * rho[i - 1] - rho[i - 2])
        elif i == 1:
            guess = (phi[0] + (s[1] - s[0]), rho[0])
        t, q = guess
        val, der = f(t)
        F = val - fr.point[i] - q * fib[i]
        res = math.hypot(F[0], F[1])
        for it in range(max_iter + 1):
            if res <= scale:
                break
            if it == max_iter:
                raise NewtonDivergence(f"no convergence at sigma={s[i]:.6g} (residual {res:.3e})")
            J = np.array([[der[0], -fib[i, 0]], [der[1], -fib[i, 1]]])
            try:
                dt_, dq = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError as exc:
                raise NewtonDivergence(f"singular Newton matrix at sigma={s[i]:.6g}") from exc
            step = 1.0
            while True:
                t_new, q_new = t + step * dt_, q + step * dq
                val_n, der_n = f(t_new)
                F_new = val_n - fr.point[i] - q_new * fib[i]
                res_new = math.hypot(F_new[0], F_new[1])
                if res_new < res or step < 1e-6:
                    break
                step *= damping
            t, q, val, der, F, res = t_new, q_new, val_n, der_n, F_new, res_new
        if abs(q) >= chart.d:
            raise OutsideTube(f"height {q:.6g} at sigma={s[i]:.6g} outside the chart (d={chart.d:.6g})")
        phi[i], rho[i] = t, q
        worst = max(worst, res)
        nf = rotate90(der / math.hypot(der[0], der[1]))
        cert[i] = float(np.dot(nf, fib[i]))
    dphi = np.diff(phi)
    if np.any(dphi <= 0):
        k = int(np.argmax(dphi <= 0))
        raise NonMonotone(float(s[k + 1]), "reparametrization is not strictly increasing")
    return HeightField(rho=rho, phi=phi, chart=chart, residual=worst / chart.length,
                       certificate=float(cert.min()))


# -------------------------------------------------------------- verification

@dataclass(frozen=True)
class Check:
    """One condition of the reference-curve verdict.

    ``kind`` is ``"required"`` (part of the verdict), ``"sufficient"`` (a
    sufficient condition for extraction and bounds, reported with its
    margin) or ``"info"``.  ``sense`` tells whether the measured value must
    lie below (``"<"``) or above (``">"``) the threshold; the margin is
    positive when the condition holds.
    """

    name: str
    kind: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    sense: str = "<"

    @property
    def margin(self) -> float:
        if self.sense == ">":
            return self.value - self.threshold
        return self.threshold - self.value

    def to_mapping(self) -> dict:
        return {"name": self.name, "kind": self.kind, "passed": self.passed, "value": self.value,
                "threshold": self.threshold, "sense": self.sense, "margin": self.margin,
                "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple
    constants: ConstantsReport
    height: HeightField | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.kind == "required")

    @property
    def sufficient(self) -> bool:
        return all(c.passed for c in self.checks if c.kind == "sufficient")

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def first_failure(self) -> str | None:
        for c in self.checks:
            if c.kind == "required" and not c.passed:
                return c.name
        return None

    def to_mapping(self) -> dict:
        return {"passed": self.passed, "sufficient": self.sufficient,
                "first_failure": self.first_failure(),
                "checks": [c.to_mapping() for c in self.checks],
                "constants": self.constants.to_mapping()}


def _level_crossings(chart: ChartSpec, level: float):
    """Smallest and largest parameter where the reference height equals ``level``."""
    dense = np.linspace(0.0, 1.0, DENSE * chart.n + 1)
    y = chart.spline(dense)[:, 1] - level
    idx = np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:]))
    if idx.size == 0:
        return None, None

    def root(k):
        a, b = dense[k], dense[k + 1]
        return a + (b - a) * y[k] / (y[k] - y[k + 1])

    return root(idx[0]), root(idx[-1])


def verify_reference(chart: ChartSpec, f0: SampledCurve, xi1_variant: str = "reference") -> VerificationReport:
    """Decide whether ``chart`` is a reference curve for ``f0``.

    Required checks, in order: endpoint conditions of ``f0``, height
    extraction, ``|rho| < K0/3`` and ``|d rho| < K1/3``.  Sufficient
    conditions guaranteeing the extraction (C^0 and C^1 balls after aligning
    both curves to arc length, positivity near the ends, the shrunken tube)
    are reported with their margins but do not decide the verdict; they can
    fail for admissible curves whose height lies close to ``K0/3``.

    Parameters
    ----------
    xi1_variant : {"reference", "initial"}
        Length factor of the C^1 ball: the reference length, or the length
        of ``f0`` reduced by the length defect ``max(0, L[f0] - L[Phi])``.
    """
    alpha = chart.alpha
    checks = []
    if xi1_variant == "reference":
        consts = constants(chart)
    elif xi1_variant == "initial":
        lf = arclength(f0)
        consts = constants(chart, xi1_length=lf - max(0.0, lf - chart.length))
    else:
        raise ValueError("xi1_variant must be 'reference' or 'initial'")

    # endpoint conditions of f0
    yerr = max(abs(f0.y[0]), abs(f0.y[-1]))
    try:
        aerr = max(endpoint_angle_errors(f0, alpha))
    except ValueError as exc:
        aerr = math.inf
        detail = str(exc)
    else:
        detail = f"|y_end| = {yerr:.3e}"
    ok = yerr <= ENDPOINT_TOL and aerr <= INITIAL_ANGLE_TOL
    checks.append(Check("initial_condition", "required", ok, aerr, INITIAL_ANGLE_TOL, detail))

    # C^0 / C^1 balls after alignment
    aligned = resample_uniform_arclength(f0, chart.n)
    ref = np.asarray(chart.phi_star.points)
    a = np.asarray(aligned.points)
    c0 = float(np.max(np.hypot(*(a - ref).T)))
    checks.append(Check("c0_ball", "sufficient", c0 < consts.xi0, c0, consts.xi0))
    s = chart.sigma
    da = np.gradient(a, s, axis=0, edge_order=2)
    dr = chart.spline(s, 1)
    c1 = float(np.max(np.hypot(*(da - dr).T)))
    checks.append(Check("c1_ball", "sufficient", c1 < consts.xi1, c1, consts.xi1))

    # positivity near the ends
    x, y = _level_crossings(chart, consts.xi0)
    if x is None:
        checks.append(Check("boundary_positivity", "sufficient", False, math.nan, 0.0,
                            "reference height never reaches xi0"))
    else:
        near = ((s > 0) & (s < x)) | ((s > y) & (s < 1))
        low = float(np.min(a[near, 1])) if np.any(near) else math.inf
        checks.append(Check("boundary_positivity", "sufficient", low > 0, low, 0.0,
                            f"end zones (0, {x:.4g}) and ({y:.4g}, 1)", ">"))

    # extraction and height bounds
    height = None
    try:
        height = extract_height(chart, f0)
    except (OutsideTube, NewtonDivergence, NonMonotone) as exc:
        checks.append(Check("extraction", "required", False, math.nan, 0.0, f"{type(exc).__name__}: {exc}"))
    else:
        checks.append(Check("extraction", "required", True, height.residual, 1e-10,
                            f"min d phi = {np.min(np.diff(height.phi)) * chart.n:.4g}"))
    if height is not None:
        rmax = float(np.max(np.abs(height.rho)))
        checks.append(Check("tube", "sufficient", rmax < chart.tube, rmax, chart.tube))
        checks.append(Check("rho_bound", "required", rmax < consts.K0 / 3, rmax, consts.K0 / 3))
        drho = height.drho()
        dmax = float(np.max(np.abs(drho)))
        checks.append(Check("drho_bound", "required", dmax < consts.K1 / 3, dmax, consts.K1 / 3))
        comp = float(max(abs(drho[0]), abs(drho[-1])))
        checks.append(Check("compatibility", "info", comp < 1e-6, comp, 1e-6))
        checks.append(Check("injectivity", "info", height.certificate > 0.5, height.certificate, 0.5,
                            "min <n_f0, d_q Psi>", ">"))
    else:
        for name, thr in (("rho_bound", consts.K0 / 3), ("drho_bound", consts.K1 / 3)):
            checks.append(Check(name, "required", False, math.nan, thr, "no height function"))
    return VerificationReport(tuple(checks), consts, height)
