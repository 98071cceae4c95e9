"""Time integration of the curve diffusion flow with contact-angle ends.

The curve moves with normal velocity ``V = -d_ss kappa``.  Its endpoints
slide on the x-axis, it meets the axis at the fixed angle ``alpha``, and
``d_s kappa = 0`` holds at both ends (no flux), so the enclosed area is
conserved and the energy ``E = L + cos(alpha) (x(0) - x(1))`` decreases.

Discretization
--------------
Each step is linearly implicit with all geometric coefficients frozen at
the old polygon.  The unknowns are the position increments and the nodal
curvatures, coupled through the weak forms of ``kappa n = d_ss X`` and
``V = -d_ss kappa`` on piecewise linear elements with lumped mass.  The
contact-angle condition and the no-flux condition are the natural boundary
terms of these two forms, and ``y = 0`` at the endpoints replaces the
corresponding rows.  The resulting system is banded and solved directly.
Tangential node motion is not prescribed; the lumped-mass formulation
moves nodes toward equal spacing on its own, which serves as the
redistribution.  Optionally the polygon is additionally resampled to equal
chords every ``redistribution_k`` steps.

The scheme dissipates the polygonal energy for every step size, and the
step acceptance test (energy may not grow by more than ``1e-10 |E|``)
guards against round-off pathologies.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .curve_core import (
    SampledCurve,
    arclength,
    arclength_coordinates,
    check_angle,
    curvature_l2,
    differential_data,
    enclosed_area,
    endpoint_angle_errors,
    energy,
    resample_uniform_arclength,
)
from .errors import (
    ConfigError,
    DegenerateCurve,
    IncompatibleInitialCurve,
    InvalidAngle,
    LinearSolveFailure,
    StepFailure,
)

log = logging.getLogger(__name__)

ENERGY_SLACK = 1e-10
MAX_RETRIES = 20
ENDPOINT_TOL = 1e-8
ANGLE_TOL = 5e-2

COMPLETED = "completed"
BLOWUP = "blowup_suspected"
STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of a flow run.

    Attributes
    ----------
    alpha : float
        Contact angle in (0, pi).
    n : int
        Number of intervals of the polygon.
    dt_init : float
        Initial (and maximal) time step.
    dt_min : float
        The run aborts with :class:`StepFailure` below this step.
    t_end : float
        Final time.
    cfl : float
        Recovery factor (> 1) applied to the step after each accepted step
        following a retry, until ``dt_init`` is reached again.
    kappa_l2_threshold : float
        Blow-up monitor threshold on ``||kappa||_L2`` in arc length.
    redistribution : {"every-step", "every-k-steps"}
        ``"every-step"`` relies on the implicit tangential motion of the
        scheme alone; ``"every-k-steps"`` also resamples to equal chords
        every ``redistribution_k`` steps.
    redistribution_k : int
    snapshot_every : int
        Stride (in accepted steps) between stored snapshots.
    """

    alpha: float
    n: int = 200
    dt_init: float = 1e-5
    dt_min: float = 1e-14
    t_end: float = 1e-3
    cfl: float = 2.0
    kappa_l2_threshold: float = math.inf
    redistribution: str = "every-step"
    redistribution_k: int = 50
    snapshot_every: int = 10

    def __post_init__(self):
        try:
            check_angle(self.alpha)
        except InvalidAngle as exc:
            raise ConfigError(str(exc)) from exc
        if not (0 < self.dt_min <= self.dt_init):
            raise ConfigError("need 0 < dt_min <= dt_init")
        if not self.kappa_l2_threshold > 0:
            raise ConfigError("kappa_l2_threshold must be positive")
        if self.n < 8:
            raise ConfigError("n must be at least 8")
        if self.t_end < 0:
            raise ConfigError("t_end must be non-negative")
        if self.cfl < 1:
            raise ConfigError("cfl must be >= 1")
        if self.redistribution not in ("every-step", "every-k-steps"):
            raise ConfigError(f"unknown redistribution {self.redistribution!r}")
        if self.redistribution == "every-k-steps" and self.redistribution_k < 1:
            raise ConfigError("redistribution_k must be >= 1")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")

    @classmethod
    def from_mapping(cls, data: dict) -> "FlowConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown flow keys: {sorted(unknown)}")
        if "alpha" not in data:
            raise ConfigError("flow config needs 'alpha'")
        kwargs = dict(data)
        for key in ("alpha", "dt_init", "dt_min", "t_end", "cfl", "kappa_l2_threshold"):
            if key in kwargs:
                kwargs[key] = float(kwargs[key])
        for key in ("n", "redistribution_k", "snapshot_every"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return dataclasses.asdict(self)


DIAG_COLUMNS = (
    "step", "t", "E", "L", "area", "kappa_l2", "kappa_max", "dt", "retries",
    "y_residual", "angle_residual", "angle_error_fd", "dskappa_residual", "dskappa_bound",
)


class DiagnosticsRecord:
    """Append-only table of per-step diagnostics."""

    def __init__(self):
        self._rows: list[dict] = []
        self.seams: list[int] = []

    def append(self, row: dict) -> None:
        """Append a row; its time must exceed the previous one.

        The first row after a seam may repeat the previous time, since it
        describes the restarted curve at the restart instant.
        """
        at_seam = bool(self.seams) and self.seams[-1] == len(self._rows)
        if self._rows:
            prev = self._rows[-1]["t"]
            ok = row["t"] >= prev if at_seam else row["t"] > prev
            if not ok:
                raise ValueError("diagnostics timestamps must increase strictly")
        self._rows.append({k: row[k] for k in DIAG_COLUMNS})

    def mark_seam(self) -> None:
        """Mark the boundary between the last row and the next one."""
        self.seams.append(len(self._rows))

    def __len__(self):
        return len(self._rows)

    def __getitem__(self, i):
        return self._rows[i]

    @property
    def rows(self) -> list[dict]:
        return list(self._rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self._rows], dtype=float)

    def last(self) -> dict:
        return self._rows[-1]


@dataclass
class FlowState:
    """Curve, time and step size of a run plus its diagnostics."""

    curve: SampledCurve
    t: float
    dt: float
    diag: DiagnosticsRecord = field(repr=False)
    step_index: int = 0
    kappa: np.ndarray | None = field(default=None, repr=False)
    dt_recover: bool = False
    row_index: int = 0

    @property
    def row(self) -> dict:
        """Diagnostics row belonging to this state."""
        return self.diag[self.row_index]


@dataclass(frozen=True)
class RunVerdict:
    """Outcome of a run or of :func:`detect_blowup`.

    ``status`` is one of ``"completed"``, ``"blowup_suspected"`` and
    ``"step_failure"``.  ``index`` and ``time`` locate the witnessing
    diagnostics row (``None`` for completed runs).
    """

    status: str
    index: int | None = None
    time: float | None = None
    reason: str = ""

    @property
    def candidate_blowup(self) -> bool:
        return self.status in (BLOWUP, STEP_FAILURE)


def _one_sided_slope(s: np.ndarray, v: np.ndarray) -> float:
    """Three-point derivative at ``s[0]`` on a non-uniform grid."""
    s0, s1, s2 = s
    return (v[0] * (2 * s0 - s1 - s2) / ((s0 - s1) * (s0 - s2))
            + v[1] * (s0 - s2) / ((s1 - s0) * (s1 - s2))
            + v[2] * (s0 - s1) / ((s2 - s0) * (s2 - s1)))


def _diagnostics(curve: SampledCurve, alpha: float, t: float, dt: float, step: int,
                 retries: int = 0, kappa_scheme=None, angle_residual: float = 0.0) -> dict:
    data = differential_data(curve)
    L = arclength(curve)
    s = arclength_coordinates(curve)
    kap = data.kappa if kappa_scheme is None else kappa_scheme
    ds0 = _one_sided_slope(s[:3], kap[:3])
    ds1 = _one_sided_slope(s[::-1][:3], kap[::-1][:3])
    kmax = float(np.max(np.abs(data.kappa)))
    return {
        "step": step,
        "t": t,
        "E": energy(curve, alpha),
        "L": L,
        "area": enclosed_area(curve),
        "kappa_l2": curvature_l2(curve, data),
        "kappa_max": kmax,
        "dt": dt,
        "retries": retries,
        "y_residual": float(max(abs(curve.y[0]), abs(curve.y[-1]))),
        "angle_residual": angle_residual,
        "angle_error_fd": float(max(endpoint_angle_errors(curve, alpha, data))),
        "dskappa_residual": float(max(abs(ds0), abs(ds1))),
        "dskappa_bound": 1e-3 * kmax / L,
    }


def _project_endpoints(points: np.ndarray) -> np.ndarray:
    pts = np.array(points, dtype=float)
    pts[0, 1] = 0.0
    pts[-1, 1] = 0.0
    return pts


def init_state(curve: SampledCurve, config: FlowConfig, t0: float = 0.0,
               diag: DiagnosticsRecord | None = None, step0: int = 0) -> FlowState:
    """Validate an initial curve and prepare the flow state.

    The curve is resampled to ``config.n`` equal chords and its endpoints
    are projected onto the axis.  A restart passes the time ``t0``, the step
    counter ``step0`` and the diagnostics record of the interrupted run; the
    record then gets a seam before the first row of the new curve.

    Raises
    ------
    IncompatibleInitialCurve
        If an endpoint is more than ``1e-8`` off the axis or an endpoint
        tangent deviates from the contact direction by more than ``5e-2``.
    """
    alpha = config.alpha
    y0, y1 = float(curve.y[0]), float(curve.y[-1])
    if max(abs(y0), abs(y1)) > ENDPOINT_TOL:
        raise IncompatibleInitialCurve("endpoints on axis", f"|y| = {abs(y0):.3e}, {abs(y1):.3e}")
    try:
        e0, e1 = endpoint_angle_errors(curve, alpha)
    except DegenerateCurve as exc:
        raise IncompatibleInitialCurve("regularity", str(exc)) from exc
    if max(e0, e1) > ANGLE_TOL:
        raise IncompatibleInitialCurve(
            "contact angle", f"tangent errors {e0:.3e}, {e1:.3e} rad exceed {ANGLE_TOL}")
    start = SampledCurve(_project_endpoints(curve.points))
    start = SampledCurve(_project_endpoints(resample_uniform_arclength(start, config.n).points))
    if diag is None:
        diag = DiagnosticsRecord()
    else:
        diag.mark_seam()
    diag.append(_diagnostics(start, alpha, t0, config.dt_init, step0))
    return FlowState(curve=start, t=t0, dt=config.dt_init, diag=diag, step_index=step0,
                     row_index=len(diag) - 1)


def _contact_residual(old: np.ndarray, new: np.ndarray, kappa: np.ndarray, cos_alpha: float) -> float:
    """Residual of the discrete contact-angle rows actually imposed."""
    # first node: (X1 - X0)_x / h0 - kappa_0 omega_0x = cos(alpha)
    seg = old[1] - old[0]
    left = (new[1, 0] - new[0, 0]) / math.hypot(*seg) + 0.5 * kappa[0] * seg[1]
    # last node: (XN - XN-1)_x / h + kappa_N omega_Nx = cos(alpha)
    seg = old[-1] - old[-2]
    right = (new[-1, 0] - new[-2, 0]) / math.hypot(*seg) - 0.5 * kappa[-1] * seg[1]
    return float(max(abs(left - cos_alpha), abs(right - cos_alpha)))


def step(state: FlowState, config: FlowConfig) -> FlowState:
    """Advance by one accepted time step.

    Returns a new state sharing the (append-only) diagnostics record.

    Raises
    ------
    StepFailure
        If the step falls below ``dt_min`` or twenty halvings do not
        produce an acceptable step.
    LinearSolveFailure
        If the linear system is singular.
    """
    alpha = config.alpha
    cos_a = math.cos(alpha)
    old = np.asarray(state.curve.points)
    e_old = energy(state.curve, alpha)
    dt = min(state.dt, config.dt_init)
    remaining = config.t_end - state.t
    if remaining > 0:
        dt = min(dt, remaining)
    retries = 0
    while True:
        if dt < config.dt_min:
            raise StepFailure(state.t, dt)
        try:
            new, kap = kernels.implicit_step(old, dt, cos_a)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailure(f"singular step system at t={state.t:.6e}: {exc}") from exc
        ok = bool(np.all(np.isfinite(new)))
        if ok:
            new = _project_endpoints(new)
            try:
                curve = SampledCurve(new)
                e_new = energy(curve, alpha)
                ok = e_new <= e_old + ENERGY_SLACK * abs(e_old)
            except (DegenerateCurve, ValueError):
                ok = False
        if ok:
            break
        retries += 1
        if retries > MAX_RETRIES:
            raise StepFailure(state.t, dt, f"no acceptable step after {MAX_RETRIES} halvings")
        dt *= 0.5
    t_new = state.t + dt
    if config.t_end - t_new < 1e-12 * max(config.t_end, 1.0):
        t_new = max(t_new, config.t_end) if remaining > 0 else t_new
    step_index = state.step_index + 1
    angle_res = _contact_residual(old, np.asarray(curve.points), kap, cos_a)
    if config.redistribution == "every-k-steps" and step_index % config.redistribution_k == 0:
        curve = SampledCurve(_project_endpoints(resample_uniform_arclength(curve).points))
        kap = None
    # step size for the next step
    recovering = state.dt_recover or retries > 0
    next_dt = state.dt if retries == 0 else dt
    if retries == 0 and recovering:
        next_dt = min(config.dt_init, state.dt * config.cfl)
    recovering = next_dt < config.dt_init
    state.diag.append(_diagnostics(curve, alpha, t_new, dt, step_index, retries, kap, angle_res))
    return FlowState(curve=curve, t=t_new, dt=next_dt, diag=state.diag,
                     step_index=step_index, kappa=kap, dt_recover=recovering,
                     row_index=len(state.diag) - 1)


def detect_blowup(diag, config: FlowConfig) -> RunVerdict:
    """Classify a diagnostics record.

    ``blowup_suspected`` if ``kappa_l2`` exceeded the threshold (the first
    such row is the witness); ``step_failure`` if the step size collapsed
    to ``dt_min``; ``completed`` otherwise.

    Parameters
    ----------
    diag : DiagnosticsRecord or mapping of column arrays
        Needs the ``kappa_l2`` and ``dt`` columns; ``t`` is optional.
    """
    if isinstance(diag, DiagnosticsRecord):
        kap, dts, ts = diag.column("kappa_l2"), diag.column("dt"), diag.column("t")
    else:
        kap = np.asarray(diag["kappa_l2"], dtype=float)
        dts = np.asarray(diag.get("dt", np.full(kap.shape, config.dt_init)), dtype=float)
        ts = np.asarray(diag.get("t", np.arange(kap.size)), dtype=float)
    if kap.size == 0:
        raise ValueError("empty diagnostics record")
    over = np.flatnonzero(kap > config.kappa_l2_threshold)
    if over.size:
        i = int(over[0])
        return RunVerdict(BLOWUP, i, float(ts[i]),
                          f"||kappa||_L2 = {kap[i]:.6g} exceeds {config.kappa_l2_threshold:.6g}")
    small = np.flatnonzero(dts <= config.dt_min)
    if small.size:
        i = int(small[0])
        return RunVerdict(STEP_FAILURE, i, float(ts[i]),
                          f"step size collapsed to {dts[i]:.3e} (candidate blow-up)")
    return RunVerdict(COMPLETED)


def self_intersects(points: np.ndarray) -> bool:
    """True if two non-adjacent segments of the polyline cross."""
    p = np.asarray(points)
    a, b = p[:-1], p[1:]
    d = b - a

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    r = a[None, :, :] - a[:, None, :]
    den = cross(d[:, None, :], d[None, :, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = cross(r, d[None, :, :]) / den
        u = cross(r, d[:, None, :]) / den
    m = len(d)
    ii, jj = np.triu_indices(m, k=2)
    hit = (np.abs(den[ii, jj]) > 0) & (s[ii, jj] > 0) & (s[ii, jj] < 1) & (u[ii, jj] > 0) & (u[ii, jj] < 1)
    return bool(np.any(hit))


def run(state: FlowState, config: FlowConfig) -> tuple[list[FlowState], RunVerdict]:
    """Integrate until ``t_end``, a threshold crossing or a step failure.

    Returns
    -------
    trajectory : list of FlowState
        The initial state, every ``snapshot_every``-th accepted state and the
        final state.
    verdict : RunVerdict
    """
    trajectory = [state]
    warned = False
    verdict = detect_blowup_row(state.diag.last(), config, len(state.diag) - 1)
    if verdict is not None:
        return trajectory, verdict
    horizon = config.t_end * (1 - 1e-13)
    while state.t < horizon:
        try:
            state = step(state, config)
        except StepFailure as exc:
            if trajectory[-1] is not state:
                trajectory.append(state)
            return trajectory, RunVerdict(STEP_FAILURE, len(state.diag) - 1, exc.t, str(exc))
        row = state.diag.last()
        if state.step_index % config.snapshot_every == 0:
            trajectory.append(state)
            if not warned and self_intersects(state.curve.points):
                log.warning("polyline self-intersects at t=%.6e", state.t)
                warned = True
        verdict = detect_blowup_row(row, config, len(state.diag) - 1)
        if verdict is not None:
            if trajectory[-1] is not state:
                trajectory.append(state)
            return trajectory, verdict
    if trajectory[-1] is not state:
        trajectory.append(state)
    return trajectory, RunVerdict(COMPLETED)


def detect_blowup_row(row: dict, config: FlowConfig, index: int) -> RunVerdict | None:
    if row["kappa_l2"] > config.kappa_l2_threshold:
        return RunVerdict(BLOWUP, index, row["t"],
                          f"||kappa||_L2 = {row['kappa_l2']:.6g} exceeds {config.kappa_l2_threshold:.6g}")
    return None
