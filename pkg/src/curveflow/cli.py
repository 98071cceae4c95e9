"""Command line interface: ``curveflow <command> ...``.

Exit codes of the flow commands: 0 completed, 2 blow-up suspected,
3 step failure, 4 configuration error.  Other failures exit with 1.
"""
from __future__ import annotations

import json
import logging
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import chart as chartmod
from . import lab, norms, smoother
from .curve_core import SampledCurve, read_curve_csv, write_curve_csv
from .errors import ConfigError, CurveflowError, IncompatibleInitialCurve
from .flow_engine import BLOWUP, COMPLETED, STEP_FAILURE

EXIT_CODES = {COMPLETED: 0, BLOWUP: 2, STEP_FAILURE: 3}
EXIT_CONFIG = 4
EXIT_FAILURE = 1


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (ConfigError, IncompatibleInitialCurve)):
        sys.exit(EXIT_CONFIG)
    sys.exit(EXIT_FAILURE)


def _read_curve(path) -> SampledCurve:
    try:
        return read_curve_csv(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _finish_run(result: lab.ExtendedRun, out, svg_name) -> None:
    lab.emit_outputs(result, out, svg_name=svg_name)
    v = result.verdict
    line = f"{v.status}: t = {result.trajectory[-1].t:.6e}, {len(result.trajectory)} snapshots"
    if v.reason:
        line += f" ({v.reason})"
    for seam in result.seams:
        line += f"; restart at t = {seam.t:.6e} with epsilon = {seam.epsilon:.1e}"
    click.echo(line)
    sys.exit(EXIT_CODES[v.status])


def _estimate_alpha(curve: SampledCurve) -> float:
    geo = chartmod.endpoint_geometry(curve, math.pi / 2)
    return float(geo["tangent_angle"][0])


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Curve diffusion flow laboratory."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True,
              help="TOML file whose keys mirror FlowConfig (top level or a [flow] table).")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--seed", default=None, help="Fixture name or curve CSV; overrides a 'seed' key in the config.")
@click.option("--svg", is_flag=True, help="Also write movie.svg.")
def simulate(config_path, out, seed, svg):
    """Run the flow without restarts."""
    try:
        raw = lab._load_toml(Path(config_path))
        flow = dict(raw.get("flow", {k: v for k, v in raw.items() if k not in ("seed", "seed_options")}))
        mapping = {"flow": flow, "seed": seed or raw.get("seed", "semicircle"),
                   "seed_options": raw.get("seed_options", {})}
        manifest = lab.manifest_from_mapping(mapping, base_dir=Path(config_path).parent, output=out)
        result = lab.extend_run(manifest)
    except CurveflowError as exc:
        _fail(exc)
    _finish_run(result, out, "movie.svg" if svg else None)


@main.command()
@click.option("--in", "src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--epsilon", type=float, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--alpha", type=float, default=None, help="Project the endpoint slopes onto this contact angle.")
@click.option("--n", type=int, default=None, help="Intervals of the output curve.")
@click.option("--source-n", type=int, default=None, help="Intervals of the smoothing grid.")
def smooth(src, epsilon, out, alpha, n, source_n):
    """Smooth a curve and write the arc-length resampled result."""
    try:
        ref = smoother.smoothed_reference(_read_curve(src), epsilon, alpha=alpha, n=n, source_n=source_n)
        write_curve_csv(ref, out)
    except (CurveflowError, ValueError) as exc:
        _fail(exc)


@main.command("rate-probe")
@click.option("--in", "src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--mu", type=float, default=1.0)
@click.option("--epsilons", default="1e-4,1e-5,1e-6,1e-7", help="Comma separated smoothing times.")
def rate_probe(src, mu, epsilons):
    """Measure convergence rates of the smoother; prints JSON."""
    try:
        eps = [float(e) for e in epsilons.split(",")]
        problem = smoother.build_corrector(_read_curve(src), mu=mu)
        report = smoother.rate_probe(problem, eps)
    except (CurveflowError, ValueError) as exc:
        _fail(exc)
    click.echo(json.dumps(lab._json_safe(report.to_mapping()), indent=2))


@main.command("chart-check")
@click.option("--ref", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--alpha", type=float, required=True)
@click.option("--lambda", "lam", default="auto", help='Shrink factor or "auto".')
@click.option("--report", "report_path", type=click.Path(dir_okay=False), required=True)
@click.option("--curve", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Also verify the reference against this initial curve.")
@click.option("--strict/--no-strict", default=True)
@click.option("--c-hat", "c_hat", type=click.Choice(["inverse", "direct"]), default="inverse")
def chart_check(ref, alpha, lam, report_path, curve, strict, c_hat):
    """Validate a reference curve, report its constants and Jacobian bound."""
    try:
        lam_val = lam if lam == "auto" else float(lam)
        spec = chartmod.make_chart(_read_curve(ref), alpha, lam=lam_val, strict=strict, c_hat_reading=c_hat)
        jac = chartmod.chart_jacobian_check(spec)
        report = {"constants": chartmod.constants(spec).to_mapping(),
                  "jacobian": {"passed": jac.passed, "min_det": jac.min_det, "bound": jac.bound,
                               "argmin": list(jac.argmin)}}
        passed = jac.passed
        if curve is not None:
            ver = chartmod.verify_reference(spec, _read_curve(curve))
            report["verification"] = ver.to_mapping()
            passed = passed and ver.passed
        report["passed"] = passed
        lab._write_text(Path(report_path), json.dumps(lab._json_safe(report), indent=2, sort_keys=True) + "\n")
    except (CurveflowError, ValueError) as exc:
        _fail(exc)
    click.echo("passed" if passed else "failed")
    sys.exit(0 if passed else EXIT_FAILURE)


@main.command("extract-height")
@click.option("--ref", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--curve", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--alpha", type=float, default=None,
              help="Contact angle; estimated from the reference tangent at the left end if omitted.")
@click.option("--strict/--no-strict", default=True)
def extract_height(ref, curve, out, alpha, strict):
    """Write the height function sigma, rho, phi of a curve over a reference."""
    try:
        phi_star = _read_curve(ref)
        a = _estimate_alpha(phi_star) if alpha is None else alpha
        spec = chartmod.make_chart(phi_star, a, strict=strict)
        hf = chartmod.extract_height(spec, _read_curve(curve))
        lines = ["sigma,rho,phi"] + [f"{float(s)!r},{float(r)!r},{float(p)!r}"
                                     for s, r, p in zip(hf.sigma, hf.rho, hf.phi)]
        lab._write_text(Path(out), "\n".join(lines) + "\n")
    except (CurveflowError, ValueError) as exc:
        _fail(exc)
    click.echo(f"max |rho| = {np.max(np.abs(hf.rho)):.6e}, residual = {hf.residual:.3e}")


def _read_column(path, column):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    names = data.dtype.names or ()
    if "t" not in names or column not in names:
        raise ConfigError(f"{path} needs columns 't' and {column!r}")
    t = np.atleast_1d(data["t"])
    v = np.atleast_1d(data[column])
    # a restart repeats the seam time; keep the restarted row
    keep = np.r_[np.diff(t) > 0, True]
    return t[keep], v[keep]


@main.command("norms")
@click.option("--diag", "diag_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--column", default="kappa_l2")
@click.option("--s", "s", type=float, default=0.5)
@click.option("--p", "p", type=float, default=2.0)
@click.option("--mu", type=float, default=1.0)
@click.option("--T", "T", type=float, default=None, help="Interval end; defaults to the last time.")
def norms_cmd(diag_path, column, s, p, mu, T):
    """Weighted norms of one diagnostics column over time; prints JSON."""
    try:
        t, v = _read_column(diag_path, column)
        spec = norms.NormSpec(s=s, p=p, mu=mu, T=float(t[-1]) if T is None else T)
        series = norms.TimeSeries(t, v)
        out = {"column": column, "s": s, "p": p, "mu": mu, "T": spec.T,
               "lp": norms.weighted_lp_norm(series, norms.NormSpec(0.0, p, mu, spec.T)),
               "norm": norms.sobolev_slobodetskii_norm(series, spec)}
        frac = s - math.floor(s)
        if frac > 0:
            cur = series
            for _ in range(int(math.floor(s))):
                cur = cur.derivative()
            sem = norms.slobodetskii_seminorm(cur, norms.NormSpec(frac, p, mu, spec.T), with_error=True)
            out["seminorm"], out["seminorm_error"] = sem.value, sem.error
    except (CurveflowError, ValueError) as exc:
        _fail(exc)
    click.echo(json.dumps(out, indent=2))


@main.command("run")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Overrides the manifest output.")
def run_cmd(manifest, out):
    """Run the experiment of a manifest, with its restart policy."""
    try:
        m = lab.load_manifest(manifest, output=out)
        result = lab.extend_run(m)
    except CurveflowError as exc:
        _fail(exc)
    _finish_run(result, m.output, "curves.svg")


@main.command("extend")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--restart-at", type=float, required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def extend_cmd(manifest, restart_at, out):
    """Run a manifest with a single restart at the given time."""
    try:
        m = lab.load_manifest(manifest, output=out).with_restart(policy="at-time", time=restart_at)
        result = lab.extend_run(m)
    except CurveflowError as exc:
        _fail(exc)
    _finish_run(result, m.output, "curves.svg")


if __name__ == "__main__":  # pragma: no cover
    main()
