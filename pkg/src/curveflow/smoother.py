"""Smooth reference curves from a sixth-order linear parabolic problem.

Given a rough initial curve ``f0`` on the parameter interval [0, 1], solve

    d_t f = d_x^6 f,   f = f0,  d_x f = d_x f0,  d_x^2 f = 0  at x in {0, 1},

up to a short time ``epsilon``.  The boundary data are carried by a
corrector ``xi`` (a quintic per component), so that ``u = f - xi`` solves
``d_t u = d_x^6 u + h`` with homogeneous conditions and ``h = d_x^6 xi``
(zero for a quintic).  The smoothed curve keeps the endpoints and endpoint
tangents of ``f0`` and has zero curvature at both ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .curve_core import SampledCurve, check_angle, differential_data, resample_uniform_arclength
from .errors import DegenerateCurve, InsufficientSamples, LinearSolveFailure

# weights of the exact first derivative at x_0 of the quintic through six nodes
_ONE_SIDED_D1 = np.array([-137.0, 300.0, -300.0, 200.0, -75.0, 12.0]) / 60.0
_STENCIL6 = np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])
# relative size below which f0 - xi counts as zero
ROUNDOFF = 1e-12


def endpoint_derivatives(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """First derivative at both ends from six-point one-sided differences."""
    d0 = _ONE_SIDED_D1 @ values[:6] / h
    d1 = -(_ONE_SIDED_D1 @ values[::-1][:6]) / h
    return d0, d1


def quintic_corrector(sigma: np.ndarray, p0, p1, d0, d1) -> np.ndarray:
    """Quintic with values ``p0, p1``, slopes ``d0, d1`` and zero curvature at 0 and 1.

    Works per component; ``p0`` etc. may be arrays of shape (2,).
    """
    s = np.asarray(sigma, dtype=float)[:, None]
    p0, p1, d0, d1 = (np.atleast_1d(np.asarray(v, dtype=float))[None, :] for v in (p0, p1, d0, d1))
    # Hermite basis for value/slope/second derivative data on [0, 1]
    h00 = 1 - 10 * s**3 + 15 * s**4 - 6 * s**5
    h10 = s - 6 * s**3 + 8 * s**4 - 3 * s**5
    h01 = 10 * s**3 - 15 * s**4 + 6 * s**5
    h11 = -4 * s**3 + 7 * s**4 - 3 * s**5
    return h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1


@dataclass(frozen=True)
class SmootherProblem:
    """Homogenized smoothing problem for one initial curve.

    Attributes
    ----------
    f0 : SampledCurve
    xi : ndarray, shape (n + 1, 2)
        Quintic corrector carrying the boundary data of ``f0``.
    u0 : ndarray, shape (n + 1, 2)
        ``f0 - xi``; vanishes with its first derivative at both ends.
    h : ndarray, shape (n + 1, 2)
        Sixth derivative of ``xi`` (identically zero for the quintic).
    end_slopes : ndarray, shape (2, 2)
        Parameter derivatives of ``f0`` imposed at the two ends.
    mu : float
        Regularity parameter used by :func:`rate_probe`.
    alpha : float or None
        Contact angle the endpoint slopes were projected onto, if any.
    """

    f0: SampledCurve
    xi: np.ndarray = field(repr=False)
    u0: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    end_slopes: np.ndarray = field(repr=False)
    mu: float = 1.0
    alpha: float | None = None

    @property
    def grid(self) -> np.ndarray:
        return self.f0.sigma

    @property
    def n(self) -> int:
        return self.f0.n

    def corrector_residual(self) -> float:
        """Largest violation of the six endpoint conditions by ``xi``."""
        p = np.asarray(self.f0.points)
        res = [np.abs(self.xi[0] - p[0]).max(), np.abs(self.xi[-1] - p[-1]).max()]
        # exact derivatives of the quintic at the ends
        e = np.array([0.0, 1.0])
        d = _quintic_derivatives(self, e)
        res.append(np.abs(d[0][0] - self.end_slopes[0]).max())
        res.append(np.abs(d[0][1] - self.end_slopes[1]).max())
        res.append(np.abs(d[1]).max())
        return float(max(res))


def _quintic_derivatives(problem: SmootherProblem, at: np.ndarray):
    """First and second derivatives of the corrector at the parameters ``at``."""
    p0, p1 = problem.f0.points[0], problem.f0.points[-1]
    d0, d1 = problem.end_slopes
    s = np.asarray(at, dtype=float)[:, None]
    dh00 = -30 * s**2 + 60 * s**3 - 30 * s**4
    dh10 = 1 - 18 * s**2 + 32 * s**3 - 15 * s**4
    dh01 = -dh00
    dh11 = -12 * s**2 + 28 * s**3 - 15 * s**4
    ddh00 = -60 * s + 180 * s**2 - 120 * s**3
    ddh10 = -36 * s + 96 * s**2 - 60 * s**3
    ddh01 = -ddh00
    ddh11 = -24 * s + 84 * s**2 - 60 * s**3
    first = dh00 * p0 + dh10 * d0 + dh01 * p1 + dh11 * d1
    second = ddh00 * p0 + ddh10 * d0 + ddh01 * p1 + ddh11 * d1
    return first, second


def build_corrector(f0: SampledCurve, mu: float = 1.0, alpha: float | None = None) -> SmootherProblem:
    """Set up the smoothing problem for ``f0``.

    Parameters
    ----------
    f0 : SampledCurve
    mu : float
        Regularity parameter in (7/8, 1], only used for the theoretical
        exponents reported by :func:`rate_probe`.
    alpha : float, optional
        If given, the endpoint slopes are the six-point estimates projected
        onto the exact contact directions ``(cos a, sin a)`` and
        ``(cos a, -sin a)``, so that the smoothed curve meets the axis at
        exactly this angle.

    Raises
    ------
    DegenerateCurve
        If ``f0`` is not regular.
    """
    if not (7.0 / 8.0 < mu <= 1.0):
        raise ValueError(f"mu must lie in (7/8, 1], got {mu}")
    differential_data(f0)  # regularity check
    pts = np.asarray(f0.points)
    hgrid = 1.0 / f0.n
    d0, d1 = endpoint_derivatives(pts, hgrid)
    if alpha is not None:
        alpha = check_angle(alpha)
        e0 = np.array([math.cos(alpha), math.sin(alpha)])
        e1 = np.array([math.cos(alpha), -math.sin(alpha)])
        d0, d1 = max(d0 @ e0, 0.0) * e0, max(d1 @ e1, 0.0) * e1
        if min(np.linalg.norm(d0), np.linalg.norm(d1)) < 1e-10:
            raise DegenerateCurve("endpoint tangent opposite to the contact direction")
    xi = quintic_corrector(f0.sigma, pts[0], pts[-1], d0, d1)
    xi[0], xi[-1] = pts[0], pts[-1]
    u0 = pts - xi
    u0[0] = u0[-1] = 0.0
    if np.max(np.abs(u0)) <= ROUNDOFF * max(1.0, float(np.max(np.abs(pts)))):
        # f0 is itself a quintic (a segment, say): the problem is stationary
        u0[:] = 0.0
        xi = pts.copy()
    return SmootherProblem(f0=f0, xi=xi, u0=u0, h=np.zeros_like(xi),
                           end_slopes=np.array([d0, d1]), mu=mu, alpha=alpha)


def sixth_derivative_bands(n: int) -> np.ndarray:
    """Banded matrix of the discrete sixth derivative on interior nodes.

    The seven-point stencil is closed at each end with two ghost nodes
    eliminated through fourth-order central conditions for ``u' = 0`` and
    ``u'' = 0`` (with ``u = 0`` at the boundary node):
    ``u_-1 = u_2 / 4 - 3 u_1`` and ``u_-2 = 3 u_2 - 32 u_1``.

    Returns
    -------
    ab : ndarray, shape (7, n - 1)
        Storage for ``scipy.linalg.solve_banded((3, 3), ...)``, scaled by
        ``n**6``.
    """
    m = n - 1
    if m < 7:
        raise InsufficientSamples("sixth-order smoothing needs at least 8 intervals")
    ab = np.zeros((7, m))

    def add(i, j, v):
        ab[3 + i - j, j] += v

    ghosts = {-1: ((0, -3.0), (1, 0.25)), -2: ((0, -32.0), (1, 3.0))}
    for i in range(m):
        node = i + 1
        for off, c in zip(range(-3, 4), _STENCIL6):
            k = node + off
            if 1 <= k <= n - 1:
                add(i, k - 1, c)
            elif k in (0, n):
                continue
            else:
                mirror = k if k < 0 else n - k
                for j, w in ghosts[mirror]:
                    add(i, j if k < 0 else m - 1 - j, c * w)
    return ab * float(n) ** 6


def discrete_h3_seminorm(u: np.ndarray, n: int) -> float:
    """``(h sum |D^3 u|^2)^(1/2)`` over the full grid, boundary values included."""
    d3 = np.diff(u, n=3, axis=0) * float(n) ** 3
    return float(math.sqrt(np.sum(d3**2) / n))


def smooth(problem: SmootherProblem, epsilon: float, dt: float | None = None,
           n: int | None = None, record=None) -> SampledCurve:
    """Evolve the smoothing problem to time ``epsilon`` with backward Euler.

    Parameters
    ----------
    problem : SmootherProblem
    epsilon : float
        Smoothing time, positive.
    dt : float, optional
        Time step; defaults to ``epsilon / 64``.  The last step is shortened
        to land on ``epsilon``.
    n : int, optional
        Spatial intervals.  If it differs from the grid of ``problem`` the
        initial curve is interpolated with a cubic spline and the problem is
        rebuilt on the new grid.
    record : list, optional
        If given, receives ``(t, u)`` after every step.

    Returns
    -------
    SampledCurve
        ``f(epsilon)`` on the problem grid (not reparametrized).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if n is not None and n != problem.n:
        spl = CubicSpline(problem.grid, problem.f0.points, axis=0)
        f0 = SampledCurve(spl(np.linspace(0.0, 1.0, n + 1)))
        problem = build_corrector(f0, problem.mu, problem.alpha)
    if not np.any(problem.u0) and not np.any(problem.h):
        return SampledCurve(problem.f0.points)
    dt = epsilon / 64.0 if dt is None else float(dt)
    if not dt > 0:
        raise ValueError("dt must be positive")
    nint = problem.n
    A = sixth_derivative_bands(nint)
    u = np.array(problem.u0[1:-1])
    src = problem.h[1:-1]
    t = 0.0
    steps = max(1, int(math.ceil(epsilon / dt - 1e-9)))
    mats = {}
    for k in range(steps):
        tau = min(dt, epsilon - t) if k == steps - 1 else dt
        key = round(tau / dt, 12)
        if key not in mats:
            M = -tau * A
            M[3] += 1.0
            mats[key] = M
        try:
            u = solve_banded((3, 3), mats[key], u + tau * src, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise LinearSolveFailure(f"smoothing solve failed: {exc}") from exc
        t += tau
        if record is not None:
            full = np.zeros_like(problem.u0)
            full[1:-1] = u
            record.append((t, full))
    f = np.array(problem.xi)
    f[1:-1] += u
    f[0], f[-1] = problem.f0.points[0], problem.f0.points[-1]
    return SampledCurve(f)


def boundary_residuals(problem: SmootherProblem, curve: SampledCurve) -> dict:
    """Endpoint value, slope and curvature residuals of a smoothed curve.

    Derivatives are six-point one-sided differences of ``u = f - xi`` (exact
    for quintics), added to the exact derivatives of the corrector.
    """
    u = np.asarray(curve.points) - problem.xi
    n = curve.n
    h = 1.0 / n
    du0, du1 = endpoint_derivatives(u, h)
    w2 = np.array([225.0, -770.0, 1070.0, -780.0, 305.0, -50.0]) / 60.0  # 2nd derivative, 6 nodes
    ddu0 = w2 @ u[:6] / h**2
    ddu1 = w2 @ u[::-1][:6] / h**2
    (d_xi, dd_xi) = _quintic_derivatives(problem, np.array([0.0, 1.0]))
    p = np.asarray(curve.points)
    f0 = np.asarray(problem.f0.points)
    return {
        "value": float(max(np.abs(p[0] - f0[0]).max(), np.abs(p[-1] - f0[-1]).max())),
        "slope": float(max(np.abs(du0 + d_xi[0] - problem.end_slopes[0]).max(),
                           np.abs(du1 + d_xi[1] - problem.end_slopes[1]).max())),
        "second": float(max(np.abs(ddu0 + dd_xi[0]).max(), np.abs(ddu1 + dd_xi[1]).max())),
    }


def theoretical_exponents(mu: float) -> dict:
    """Rate exponents of the smoothing estimates for regularity ``mu``.

    ``c0`` and ``c1`` are convergence orders of ``|f(eps) - f0|`` in C^0 and
    C^1; ``c2`` is the (negative) growth exponent of ``|f(eps)|_{C^2}``.
    """
    return {"c0": 2 * mu / 3 - 5 / 12, "c1": 2 * mu / 3 - 7 / 12, "c2": -(0.75 - 2 * mu / 3)}


def _c_norms(problem: SmootherProblem, f: np.ndarray) -> tuple[float, float, float]:
    s = problem.grid
    f0 = np.asarray(problem.f0.points)
    diff = f - f0
    d1 = np.gradient(diff, s, axis=0, edge_order=2)
    df = np.gradient(f, s, axis=0, edge_order=2)
    ddf = np.gradient(df, s, axis=0, edge_order=2)
    c0 = float(np.max(np.hypot(diff[:, 0], diff[:, 1])))
    c1 = max(c0, float(np.max(np.hypot(d1[:, 0], d1[:, 1]))))
    c2 = max(float(np.max(np.hypot(f[:, 0], f[:, 1]))), float(np.max(np.hypot(df[:, 0], df[:, 1]))),
             float(np.max(np.hypot(ddf[:, 0], ddf[:, 1]))))
    return c0, c1, c2


@dataclass(frozen=True)
class RateReport:
    """Observed log-log slopes against the smoothing time.

    ``observed`` maps ``c0``, ``c1`` (convergence orders, positive means the
    distance shrinks with ``epsilon``) and ``c2`` (growth exponent of the C^2
    norm) to fitted slopes, or ``None`` when the distances vanish.
    ``tail`` holds the same slopes between the two smallest epsilons, which
    shows the asymptotic rate when the largest epsilons already sit on the
    plateau where ``f(eps)`` has relaxed to the corrector.
    """

    epsilons: tuple
    c0: tuple
    c1: tuple
    c2: tuple
    observed: dict
    theory: dict
    mu: float
    tail: dict = field(default_factory=dict)

    def to_mapping(self) -> dict:
        return {"epsilons": list(self.epsilons), "c0_distance": list(self.c0),
                "c1_distance": list(self.c1), "c2_norm": list(self.c2),
                "observed": dict(self.observed), "tail": dict(self.tail),
                "theory": dict(self.theory), "mu": self.mu}


def _slope(eps: np.ndarray, vals: np.ndarray):
    if np.any(vals <= 0):
        return None
    return float(np.polyfit(np.log(eps), np.log(vals), 1)[0])


def rate_probe(problem: SmootherProblem, epsilons, steps_per_epsilon: int = 64) -> RateReport:
    """Fit the rates at which ``f(eps)`` approaches ``f0`` and its C^2 norm grows.

    Parameters
    ----------
    problem : SmootherProblem
    epsilons : sequence of float
        At least three smoothing times forming a geometric sequence.
    steps_per_epsilon : int
        Backward Euler steps used for each smoothing time.

    Raises
    ------
    InsufficientSamples
        If fewer than three epsilons are given or they are not geometric.
    """
    eps = np.sort(np.asarray(list(epsilons), dtype=float))[::-1]
    if eps.size < 3:
        raise InsufficientSamples("rate_probe needs at least three epsilons")
    if np.any(eps <= 0):
        raise InsufficientSamples("epsilons must be positive")
    ratios = eps[1:] / eps[:-1]
    if np.ptp(np.log(ratios)) > 1e-6 * max(1.0, abs(np.log(ratios).mean())):
        raise InsufficientSamples("epsilons must form a geometric sequence")
    rows = []
    for e in eps:
        f = smooth(problem, e, dt=e / steps_per_epsilon)
        rows.append(_c_norms(problem, np.asarray(f.points)))
    c0, c1, c2 = (np.array(col) for col in zip(*rows))
    if not np.any(problem.u0) and not np.any(problem.h):
        observed = {"c0": None, "c1": None, "c2": None}
        tail = dict(observed)
    else:
        observed = {"c0": _slope(eps, c0), "c1": _slope(eps, c1), "c2": _slope(eps, c2)}
        tail = {"c0": _slope(eps[-2:], c0[-2:]), "c1": _slope(eps[-2:], c1[-2:]),
                "c2": _slope(eps[-2:], c2[-2:])}
    return RateReport(tuple(eps), tuple(c0), tuple(c1), tuple(c2), observed,
                      theoretical_exponents(problem.mu), problem.mu, tail)


def smoothed_reference(f0: SampledCurve, epsilon: float, alpha: float | None = None,
                       n: int | None = None, source_n: int | None = None) -> SampledCurve:
    """Smooth ``f0`` and resample the result proportionally to arc length.

    ``source_n`` sets the grid of the smoothing solve and ``n`` the grid of
    the returned curve.  Smoothing on a finer grid than the output keeps the
    endpoint curvature of the result small enough for a strict chart.
    """
    prob = build_corrector(f0, alpha=alpha)
    f = smooth(prob, epsilon, n=source_n)
    return resample_uniform_arclength(f, n)
