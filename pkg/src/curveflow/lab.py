"""Experiment orchestration: manifests, restarts and output files.

A run is described by a TOML manifest::

    seed = "perturbed_semicircle"     # fixture name or path to a curve CSV
    output = "out/"

    [seed_options]                    # keyword arguments of the fixture
    bump = 0.01

    [flow]                            # FlowConfig fields; ``config`` may name
    alpha = 1.5707963267948966        # a TOML file with defaults
    t_end = 1e-3

    [smoother]
    epsilons = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
    source_n = 800

    [chart]
    n = 400
    lambda = "auto"

    [restart]
    policy = "at-time"                # "never", "at-time" or "on-blowup-suspect"
    time = 5e-4

Relative paths are resolved against the directory of the manifest.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import fixtures
from .chart import ChartSpec, HeightField, constants, extract_height, make_chart, make_eta, verify_reference
from .curve_core import (
    SampledCurve,
    arclength,
    chord_lengths,
    curvature_l2,
    read_curve_csv,
    second_derivative,
    translate,
    write_curve_csv,
)
from .errors import ConfigError, CurveflowError, IoFailure, NoAdmissibleEpsilon
from .flow_engine import (
    BLOWUP,
    COMPLETED,
    DIAG_COLUMNS,
    FlowConfig,
    FlowState,
    RunVerdict,
    init_state,
    run,
)
from .smoother import smoothed_reference

log = logging.getLogger(__name__)

RESTART_POLICIES = ("never", "at-time", "on-blowup-suspect")
DEFAULT_EPSILONS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


# ------------------------------------------------------------------ manifest

@dataclass(frozen=True)
class SmootherScan:
    """Smoothing times tried by a restart, largest first."""

    epsilons: tuple = DEFAULT_EPSILONS
    source_n: int = 800

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(not e > 0 for e in eps):
            raise ConfigError("smoother epsilons must be positive")
        object.__setattr__(self, "epsilons", tuple(sorted(eps, reverse=True)))
        if self.source_n < 8:
            raise ConfigError("smoother source_n must be at least 8")


@dataclass(frozen=True)
class ChartOptions:
    n: int = 400
    lam: float | str = "auto"
    c_hat_reading: str = "inverse"
    eta_degree: int = 5
    xi1_variant: str = "reference"

    def __post_init__(self):
        if self.n < 8:
            raise ConfigError("chart n must be at least 8")
        if self.c_hat_reading not in ("inverse", "direct"):
            raise ConfigError(f"unknown c_hat_reading {self.c_hat_reading!r}")
        if self.eta_degree not in (5, 7):
            raise ConfigError("eta_degree must be 5 or 7")
        if self.xi1_variant not in ("reference", "initial"):
            raise ConfigError(f"unknown xi1_variant {self.xi1_variant!r}")


@dataclass(frozen=True)
class RestartPolicy:
    """When to restart.

    ``"at-time"`` restarts once at ``time``.  ``"on-blowup-suspect"`` restarts
    once when ``||kappa||_L2`` first exceeds ``fraction`` times the blow-up
    threshold of the flow configuration, that is just before the crossing.
    """

    policy: str = "never"
    time: float | None = None
    fraction: float = 0.9

    def __post_init__(self):
        if self.policy not in RESTART_POLICIES:
            raise ConfigError(f"restart policy must be one of {RESTART_POLICIES}, got {self.policy!r}")
        if self.policy == "at-time" and (self.time is None or not self.time > 0):
            raise ConfigError("restart policy 'at-time' needs a positive time")
        if not 0.0 < self.fraction < 1.0:
            raise ConfigError("restart fraction must lie in (0, 1)")


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one experiment."""

    flow: FlowConfig
    output: Path
    seed: str = "semicircle"
    seed_options: dict = field(default_factory=dict)
    smoother: SmootherScan = SmootherScan()
    chart: ChartOptions = ChartOptions()
    restart: RestartPolicy = RestartPolicy()
    base_dir: Path = Path(".")

    def seed_curve(self) -> SampledCurve:
        """Load or build the initial curve."""
        if self.seed in fixtures.FIXTURES:
            try:
                return fixtures.FIXTURES[self.seed](**self.seed_options)
            except TypeError as exc:
                raise ConfigError(f"bad seed_options for {self.seed}: {exc}") from exc
        path = self.base_dir / self.seed
        if not path.is_file():
            raise ConfigError(f"seed {self.seed!r} is neither a fixture nor an existing file")
        try:
            return read_curve_csv(path)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def with_restart(self, **kwargs) -> "RunManifest":
        return dataclasses.replace(self, restart=dataclasses.replace(self.restart, **kwargs))

    def to_mapping(self) -> dict:
        return {
            "seed": self.seed,
            "seed_options": dict(self.seed_options),
            "output": str(self.output),
            "flow": self.flow.to_mapping(),
            "smoother": {"epsilons": list(self.smoother.epsilons), "source_n": self.smoother.source_n},
            "chart": dataclasses.asdict(self.chart),
            "restart": dataclasses.asdict(self.restart),
        }


def _load_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _flow_config(table: dict, base: Path) -> FlowConfig:
    table = dict(table)
    merged = {}
    if "config" in table:
        ref = base / table.pop("config")
        if not ref.is_file():
            raise ConfigError(f"flow config {ref} does not exist")
        loaded = _load_toml(ref)
        merged.update(loaded.get("flow", loaded))
    merged.update(table)
    if "alpha" not in merged:
        merged["alpha"] = math.pi / 2
    try:
        return FlowConfig.from_mapping(merged)
    except TypeError as exc:
        raise ConfigError(f"unknown flow setting: {exc}") from exc


def load_manifest(path, output=None) -> RunManifest:
    """Read a manifest file.

    Raises
    ------
    ConfigError
        For unknown keys, invalid values, missing files or an output
        directory that cannot be written.
    """
    path = Path(path)
    raw = _load_toml(path)
    return manifest_from_mapping(raw, base_dir=path.parent, output=output)


def manifest_from_mapping(raw: dict, base_dir=".", output=None) -> RunManifest:
    base = Path(base_dir)
    known = {"seed", "seed_options", "output", "flow", "smoother", "chart", "restart"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown manifest keys: {sorted(extra)}")
    flow = _flow_config(raw.get("flow", {}), base)
    try:
        sm = raw.get("smoother", {})
        scan = SmootherScan(epsilons=tuple(sm.get("epsilons", DEFAULT_EPSILONS)),
                            source_n=int(sm.get("source_n", 800)))
        ch = dict(raw.get("chart", {}))
        if "lambda" in ch:
            ch["lam"] = ch.pop("lambda")
        chart = ChartOptions(**ch)
        restart = RestartPolicy(**raw.get("restart", {}))
    except TypeError as exc:
        raise ConfigError(f"unknown setting: {exc}") from exc
    out = Path(output) if output is not None else base / raw.get("output", "out")
    manifest = RunManifest(flow=flow, output=out, seed=str(raw.get("seed", "semicircle")),
                           seed_options=dict(raw.get("seed_options", {})), smoother=scan,
                           chart=chart, restart=restart, base_dir=base)
    manifest.seed_curve()
    _check_writable(out)
    return manifest


def _check_writable(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")


# ------------------------------------------------------------------- restart

def reconstruct_from_curvature(curve: SampledCurve, n: int | None = None) -> SampledCurve:
    """Rebuild the arc-length parametrization by integrating curvature twice.

    With ``s`` the normalized arc length and ``L`` the length, the curve
    reparametrized proportionally to arc length satisfies

        f(s) = L * int_0^s ( tau(0) + int_0^r kappa_vec(y) L dy ) dr.

    The discrete version works on the polygon: ``kappa_vec L`` at a node is
    the turn of the unit chord direction divided by the mean adjacent
    normalized chord length, ``tau(0)`` is the first chord direction, and
    both integrals are cumulative sums.  The sums invert the differencing
    exactly, so the nodes come back at their arc-length positions ``s_i``.
    A cubic spline in ``s`` then evaluates the result on the uniform grid of
    ``n`` intervals.  The result starts at the origin.
    """
    n = curve.n if n is None else int(n)
    pts = np.asarray(curve.points)
    seg = np.diff(pts, axis=0)
    h = np.hypot(seg[:, 0], seg[:, 1])
    L = float(h.sum())
    ds = h / L
    tau = seg / h[:, None]
    # curvature vector times L at interior nodes (normalized arc length)
    weight = 0.5 * (ds[:-1] + ds[1:])
    kappa_L = np.diff(tau, axis=0) / weight[:, None]
    # inner integral: unit tangent on each chord
    tangent = np.vstack([tau[:1], tau[0] + np.cumsum(kappa_L * weight[:, None], axis=0)])
    # outer integral: node positions
    nodes = np.vstack([np.zeros((1, 2)), L * np.cumsum(tangent * ds[:, None], axis=0)])
    s = np.concatenate([[0.0], np.cumsum(ds)])
    s[-1] = 1.0
    out = CubicSpline(s, nodes, axis=0)(np.linspace(0.0, 1.0, n + 1))
    out[0], out[-1] = nodes[0], nodes[-1]
    return SampledCurve(out)


def parametrization_audit(f_tilde: SampledCurve) -> dict:
    """Measured norms of the first two derivatives of ``f_tilde``.

    ``f_tilde`` must be parametrized proportionally to arc length on
    [0, 1].  Then ``|d_s f| = L`` pointwise, so the L2(0, 1) norm of
    ``d_s f`` equals ``L`` and the L2 norm of the unit tangent over the arc
    length interval (0, L) equals ``sqrt(L)``.  The second derivative is
    ``L^2 kappa_vec``, whose L2(0, 1) norm is ``L^1.5 ||kappa||_L2(0, L)``.
    """
    pts = np.asarray(f_tilde.points)
    n = f_tilde.n
    h = 1.0 / n
    L = arclength(f_tilde)
    speed = chord_lengths(f_tilde) / h
    ds_norm = float(np.sqrt(np.sum(speed**2) * h))
    tangent_norm = float(np.sqrt(np.sum((speed / L) ** 2) * h * L))
    d2 = second_derivative(pts, h)
    mag2 = np.sum(d2**2, axis=1)
    d2_norm = float(np.sqrt(np.sum(0.5 * (mag2[:-1] + mag2[1:])) * h))
    kappa = curvature_l2(f_tilde)
    return {
        "length": L,
        "ds_norm": ds_norm,
        "ds_norm_expected": L,
        "ds_norm_stated": math.sqrt(L),
        "tangent_norm_arclength": tangent_norm,
        "d2s_norm": d2_norm,
        "d2s_norm_expected": L**1.5 * kappa,
        "kappa_l2": kappa,
    }


@dataclass
class RestartBundle:
    """Result of :func:`restart_prepare`.

    Iterating yields ``(f_tilde, chart, height)``.
    """

    f_tilde: SampledCurve
    chart: ChartSpec
    height: HeightField
    epsilon: float
    audit: dict
    scan: list
    report: object = field(repr=False, default=None)

    def __iter__(self):
        return iter((self.f_tilde, self.chart, self.height))

    def restart_curve(self) -> SampledCurve:
        """``Psi(., rho)`` on the chart grid, already in the original position."""
        return self.height.curve()


def restart_prepare(state: FlowState, config: FlowConfig, scan: SmootherScan | None = None,
                    chart_options: ChartOptions | None = None) -> RestartBundle:
    """Prepare a restart of the flow from ``state``.

    The curve is rebuilt from its curvature by double integration and
    translated back onto its left endpoint.  The smoother is then scanned
    from the largest to the smallest smoothing time; the first reference
    curve that passes :func:`curveflow.chart.verify_reference` is accepted
    and the height of the rebuilt curve over it is extracted.

    Raises
    ------
    NoAdmissibleEpsilon
        If no smoothing time of the scan gives an admissible reference.
    """
    scan = SmootherScan() if scan is None else scan
    opts = ChartOptions() if chart_options is None else chart_options
    curve = state.curve
    f_tilde = reconstruct_from_curvature(curve)
    f_tilde = translate(f_tilde, float(curve.points[0, 0]))
    pts = np.array(f_tilde.points)
    pts[[0, -1], 1] = 0.0
    f_tilde = f_tilde.with_points(pts)
    audit = parametrization_audit(f_tilde)
    eta = make_eta(opts.eta_degree)
    log_rows = []
    for eps in scan.epsilons:
        entry = {"epsilon": eps, "passed": False, "failure": None}
        log_rows.append(entry)
        try:
            ref = smoothed_reference(f_tilde, eps, alpha=config.alpha, n=opts.n, source_n=scan.source_n)
            chart = make_chart(ref, config.alpha, eta=eta, lam=opts.lam, c_hat_reading=opts.c_hat_reading)
            report = verify_reference(chart, f_tilde, opts.xi1_variant)
        except CurveflowError as exc:
            entry["failure"] = f"{type(exc).__name__}: {exc}"
            continue
        if not report.passed:
            entry["failure"] = report.first_failure()
            continue
        height = report.height if report.height is not None else extract_height(chart, f_tilde)
        entry["passed"] = True
        return RestartBundle(f_tilde=f_tilde, chart=chart, height=height, epsilon=eps,
                             audit=audit, scan=log_rows, report=report)
    raise NoAdmissibleEpsilon(
        "no smoothing time gives an admissible reference: "
        + "; ".join(f"{r['epsilon']:.1e}: {r['failure']}" for r in log_rows))


def hausdorff_distance(a: SampledCurve, b: SampledCurve) -> float:
    """Hausdorff distance between two polylines."""

    def directed(p, q):
        pts = np.asarray(p.points)
        q0 = np.asarray(q.points)[:-1]
        seg = np.diff(np.asarray(q.points), axis=0)
        len2 = np.sum(seg**2, axis=1)
        rel = pts[:, None, :] - q0[None, :, :]
        w = np.clip(np.sum(rel * seg[None], axis=2) / len2[None], 0.0, 1.0)
        d = rel - w[..., None] * seg[None]
        return float(np.sqrt(np.min(np.sum(d**2, axis=2), axis=1)).max())

    return max(directed(a, b), directed(b, a))


@dataclass
class SeamRecord:
    """What changed across one restart."""

    index: int
    t: float
    epsilon: float
    jumps: dict
    hausdorff: float
    bundle: RestartBundle = field(repr=False)

    def to_mapping(self) -> dict:
        rep = self.bundle.report
        return {
            "index": self.index,
            "t": self.t,
            "epsilon": self.epsilon,
            "jumps": dict(self.jumps),
            "hausdorff": self.hausdorff,
            "constants": constants(self.bundle.chart).to_mapping(),
            "checks": rep.to_mapping() if rep is not None else None,
            "audit": dict(self.bundle.audit),
            "scan": list(self.bundle.scan),
            "extraction_residual": self.bundle.height.residual,
        }


@dataclass
class ExtendedRun:
    """Trajectory of a run, possibly spanning restarts."""

    trajectory: list
    verdict: RunVerdict
    seams: list
    manifest: RunManifest | None = None

    @property
    def diag(self):
        return self.trajectory[-1].diag


def _restart(state: FlowState, config: FlowConfig, manifest: RunManifest) -> tuple[FlowState, SeamRecord]:
    bundle = restart_prepare(state, config, manifest.smoother, manifest.chart)
    new = init_state(bundle.restart_curve(), config, t0=state.t, diag=state.diag, step0=state.step_index)
    before, after = state.row, new.row
    jumps = {}
    for key in ("E", "L", "area", "kappa_l2"):
        jumps[key] = abs(after[key] - before[key])
        jumps[key + "_relative"] = jumps[key] / max(abs(before[key]), 1e-300)
    seam = SeamRecord(index=new.row_index, t=state.t, epsilon=bundle.epsilon, jumps=jumps,
                      hausdorff=hausdorff_distance(state.curve, new.curve), bundle=bundle)
    log.info("restart at t=%.6e with epsilon=%.1e, E jump %.3e", state.t, bundle.epsilon, jumps["E"])
    return new, seam


def extend_run(manifest: RunManifest, state: FlowState | None = None) -> ExtendedRun:
    """Run the flow of ``manifest``, restarting once if the policy says so.

    At the trigger the current curve goes through :func:`restart_prepare`,
    the flow is re-initialized from ``Psi(., rho)`` and continues to
    ``t_end``.  Diagnostics of both parts share one record with a seam.
    """
    config = manifest.flow
    if state is None:
        state = init_state(manifest.seed_curve(), config)
    policy = manifest.restart
    if policy.policy == "never":
        traj, verdict = run(state, config)
        return ExtendedRun(traj, verdict, [], manifest)
    if policy.policy == "at-time":
        if policy.time >= config.t_end:
            traj, verdict = run(state, config)
            return ExtendedRun(traj, verdict, [], manifest)
        first_cfg = dataclasses.replace(config, t_end=policy.time)
        traj, verdict = run(state, first_cfg)
        if verdict.status != COMPLETED:
            return ExtendedRun(traj, verdict, [], manifest)
    else:
        if not math.isfinite(config.kappa_l2_threshold):
            raise ConfigError("restart policy 'on-blowup-suspect' needs a finite kappa_l2_threshold")
        watch = dataclasses.replace(config, kappa_l2_threshold=policy.fraction * config.kappa_l2_threshold)
        traj, verdict = run(state, watch)
        if verdict.status != BLOWUP:
            return ExtendedRun(traj, verdict, [], manifest)
        if traj[-1].row["kappa_l2"] > config.kappa_l2_threshold:
            verdict = RunVerdict(BLOWUP, verdict.index, verdict.time,
                                 f"||kappa||_L2 = {traj[-1].row['kappa_l2']:.6g} exceeds "
                                 f"{config.kappa_l2_threshold:.6g} before a restart was possible")
            return ExtendedRun(traj, verdict, [], manifest)
    new, seam = _restart(traj[-1], config, manifest)
    rest, verdict = run(new, config)
    return ExtendedRun(traj + rest, verdict, [seam], manifest)


# ------------------------------------------------------------------- outputs

REPORT_SCHEMA = {
    "format": str,
    "manifest": dict,
    "verdict": {"status": str, "index": (int, type(None)), "time": (float, type(None)), "reason": str},
    "flow_constants": {"alpha": float, "initial_energy": float, "length_bound": float},
    "snapshots": list,
    "seams": list,
}
REPORT_FORMAT = "curveflow-report-1"


def validate_report(obj: dict, schema: dict = REPORT_SCHEMA, where: str = "report") -> None:
    """Check ``obj`` against :data:`REPORT_SCHEMA`; raise ``ValueError`` if it does not fit."""
    if not isinstance(obj, dict):
        raise ValueError(f"{where} must be an object")
    for key, kind in schema.items():
        if key not in obj:
            raise ValueError(f"{where}.{key} missing")
        value = obj[key]
        if isinstance(kind, dict):
            validate_report(value, kind, f"{where}.{key}")
        elif kind is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"{where}.{key} must be a number")
        elif isinstance(kind, tuple) and float in kind:
            if value is not None and (not isinstance(value, (int, float)) or isinstance(value, bool)):
                raise ValueError(f"{where}.{key} must be a number or null")
        elif not isinstance(value, kind):
            raise ValueError(f"{where}.{key} has the wrong type")
    if obj is not None and where == "report" and obj["format"] != REPORT_FORMAT:
        raise ValueError(f"unknown report format {obj['format']!r}")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def diag_table(rows, seams=(), extra=None) -> str:
    """CSV text of diagnostics rows with a ``segment`` column.

    ``segment`` counts the restarts before a row; ``extra`` maps a leading
    column name to its values.
    """
    extra = extra or {}
    header = list(extra) + ["segment"] + list(DIAG_COLUMNS)
    lines = [",".join(header)]
    for i, (row, seg) in enumerate(rows):
        vals = [_fmt(v[i]) for v in extra.values()] + [str(seg)] + [_fmt(row[c]) for c in DIAG_COLUMNS]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def _segment_of(index: int, seams) -> int:
    return sum(1 for s in seams if index >= s)


def curves_svg(curves, alpha: float, width: int = 800) -> str:
    """SVG overlay of ``curves`` with the axis line and contact-angle glyphs.

    Each curve becomes one ``polyline``; the glyphs mark the prescribed
    contact direction at both endpoints of the last curve.
    """
    allpts = np.vstack([np.asarray(c.points) for c in curves])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    pad = 0.08 * span
    lo = lo - pad
    hi = hi + pad
    scale = width / float(hi[0] - lo[0])
    height = max(int(math.ceil((hi[1] - lo[1]) * scale)), 1)

    def xy(p):
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<line class="axis" x1="0" y1="{xy((0, 0))[1]:.3f}" x2="{width}" y2="{xy((0, 0))[1]:.3f}" '
           'stroke="#888" stroke-width="1"/>']
    k = len(curves)
    for i, c in enumerate(curves):
        shade = int(200 * (1 - i / max(k - 1, 1)))
        colour = f"#{shade:02x}{shade:02x}ff" if i < k - 1 else "#d62728"
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in map(xy, np.asarray(c.points)))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{pts}"/>')
    last = np.asarray(curves[-1].points)
    arm = 0.08 * span
    for end, direction in ((last[0], (math.cos(alpha), math.sin(alpha))),
                           (last[-1], (-math.cos(alpha), math.sin(alpha)))):
        x0, y0 = xy(end)
        x1, y1 = xy((end[0] + arm * direction[0], end[1] + arm * direction[1]))
        out.append(f'<path class="contact-angle" d="M {x0:.3f} {y0:.3f} L {x1:.3f} {y1:.3f}" '
                   'stroke="#2ca02c" stroke-width="2" fill="none"/>')
        out.append(f'<circle cx="{x0:.3f}" cy="{y0:.3f}" r="3" fill="#2ca02c"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(result: ExtendedRun, out_dir=None, svg_name: str = "curves.svg") -> dict:
    """Write the files of a run into ``out_dir``.

    Files: ``diag.csv`` with one diagnostics row per snapshot,
    ``steps.csv`` with every accepted step, ``snap_<k>.csv`` per snapshot,
    ``report.json`` and an SVG overlay (skipped if ``svg_name`` is None).

    Returns
    -------
    dict
        The report written to ``report.json``.

    Raises
    ------
    IoFailure
    """
    manifest = result.manifest
    out = Path(out_dir) if out_dir is not None else manifest.output
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    traj = result.trajectory
    diag = result.diag
    seams = diag.seams
    snaps = []
    for k, st in enumerate(traj):
        name = f"snap_{k:04d}.csv"
        write_curve_csv(st.curve, out / name)
        snaps.append({"k": k, "t": st.t, "step": st.step_index, "file": name})
    rows = [(st.row, _segment_of(st.row_index, seams)) for st in traj]
    _write_text(out / "diag.csv", diag_table(rows, extra={"snapshot": list(range(len(traj)))}))
    all_rows = [(r, _segment_of(i, seams)) for i, r in enumerate(diag.rows)]
    _write_text(out / "steps.csv", diag_table(all_rows))
    config = manifest.flow if manifest is not None else None
    alpha = config.alpha if config is not None else math.nan
    e0 = diag[0]["E"]
    report = {
        "format": REPORT_FORMAT,
        "manifest": manifest.to_mapping() if manifest is not None else {},
        "verdict": dataclasses.asdict(result.verdict),
        "flow_constants": {
            "alpha": alpha,
            "initial_energy": e0,
            "length_bound": e0 / (1.0 - abs(math.cos(alpha))) if config is not None else math.nan,
        },
        "snapshots": snaps,
        "seams": [s.to_mapping() for s in result.seams],
    }
    report = _json_safe(report)
    validate_report(report)
    _write_text(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    if svg_name:
        _write_text(out / svg_name, curves_svg([st.curve for st in traj], alpha))
    return report
