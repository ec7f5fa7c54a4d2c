"""Command-line front end.

Exit codes: 0 success, 2 infeasible or unsolved control problem, 3 oracle
gap above the bound, 4 invalid input.
"""

import math
import sys
from pathlib import Path

import click
import numpy as np

from . import report as rp
from .dp import DEFAULT_RESOLUTION, MAX_SAMPLES, dp_solve
from .errors import (
    BracketNotSignChanging,
    DegenerateCycle,
    EcoDriveError,
    InfeasibleAtSample,
    MaxIterationsExceeded,
    NoFeasiblePath,
    NonFiniteState,
    ParseError,
    ValidationError,
    VelocityFloorBreach,
)
from .route import KMH, builtin_route, load_cycle, load_route, save_cycle, synthetic_cycle
from .sim import TRACE_HEADER, assess_cycle, event_samples, run_trip
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, CostWeights, SegmentProblem, solve_costate
from .vehicle import TruckConfig

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_GAP = 3
EXIT_INPUT = 4

_INFEASIBLE = (InfeasibleAtSample, MaxIterationsExceeded, BracketNotSignChanging,
               NonFiniteState, NoFeasiblePath, VelocityFloorBreach)
_INPUT = (ValidationError, ParseError, DegenerateCycle)


def parse_phi_list(text):
    try:
        values = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ValidationError(f"--phi expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise ValidationError("--phi needs at least one value")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ValidationError("phi values must be positive")
    return values


def _load_truck(path):
    return TruckConfig.from_file(path) if path else TruckConfig()


def _load_scenario(path):
    return load_route(path) if path else builtin_route()


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _samples_for(cfg, ev, samples):
    if samples is not None:
        if samples < 2:
            raise ValidationError("--samples must be at least 2")
        return samples
    return event_samples(cfg, ev.horizon, ev.v_entry, ev.v_target)


def _solve(cfg, prob, tol, max_iter):
    return solve_costate(cfg, prob, tol=tol, max_iter=max_iter)


def truck_option(f):
    return click.option("--truck", type=click.Path(dir_okay=False), default=None,
                        help="Truck parameter file (defaults to the built-in truck).")(f)


def out_option(default):
    return click.option("--out", type=click.Path(file_okay=False), default=default,
                        show_default=True, help="Output directory.")


def phi_option(default):
    return click.option("--phi", default=default, show_default=True,
                        help="Comma-separated time-weight ratios w_t / w_f.")


samples_option = click.option("--samples", type=int, default=None,
                              help="Samples per event (default: at most 0.25 m each, shorter for slow events).")
tol_option = click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True,
                          help="Start-velocity tolerance [m/s].")
max_iter_option = click.option("--max-iter", type=int, default=DEFAULT_MAX_ITER,
                               show_default=True, help="Bisection iteration limit.")
scenario_option = click.option("--scenario", type=click.Path(dir_okay=False), default=None,
                               help="Route file (defaults to the built-in motorway-to-urban route).")


@click.group()
def cli():
    """Eco-driving advice: solve, simulate and assess deceleration profiles."""


@cli.command()
@truck_option
@scenario_option
@click.option("--event", type=int, default=1, show_default=True, help="Event number (1-based).")
@phi_option("15")
@samples_option
@tol_option
@max_iter_option
@out_option("out/solve")
def solve(truck, scenario, event, phi, samples, tol, max_iter, out):
    """Solve one deceleration event and write the profile."""
    cfg = _load_truck(truck)
    route = _load_scenario(scenario)
    phis = parse_phi_list(phi)
    if not 1 <= event <= len(route.events):
        raise ValidationError(f"--event must be within 1..{len(route.events)}")
    ev = route.events[event - 1]
    n = _samples_for(cfg, ev, samples)
    out = _out_dir(out)
    summary = {"event": event, "samples": n, "tol": tol, "runs": []}
    for p in phis:
        prob = SegmentProblem(s0=ev.trigger_s, sf=ev.end_s, v0=ev.v_entry, vf=ev.v_target,
                              n=n, weights=CostWeights.from_phi(p))
        try:
            res = _solve(cfg, prob, tol, max_iter)
        except EcoDriveError as exc:
            raise click.ClickException(f"phi={p:g}: {exc}") from exc
        rp.write_table(out / f"profile_phi{rp.fmt_phi(p)}.tsv", rp.PROFILE_HEADER,
                       rp.profile_rows(res))
        summary["runs"].append({
            "phi": p, "cost": res.cost_J, "lambda_N": res.lambda_N, "error_ms": res.error,
            "iterations": res.iterations, "converged": res.converged,
            "fuel_g": res.total_fuel, "time_s": res.total_time,
            "v_start_ms": float(res.v[0]),
            "modes": sorted({str(m) for m in res.modes}),
        })
        click.echo(f"phi={p:g}: J={res.cost_J:.3f} fuel={res.total_fuel:.2f} g "
                   f"time={res.total_time:.2f} s iterations={res.iterations} e={res.error:+.4f} m/s")
    rp.write_json(out / "summary.json", summary)
    return EXIT_OK


def _solve_route(cfg, route, weights, samples, tol, max_iter):
    out = {}
    for i, ev in enumerate(route.events):
        prob = SegmentProblem(s0=ev.trigger_s, sf=ev.end_s, v0=ev.v_entry, vf=ev.v_target,
                              n=_samples_for(cfg, ev, samples), weights=weights)
        out[i] = _solve(cfg, prob, tol, max_iter)
    return out


@cli.command()
@truck_option
@scenario_option
@phi_option("15,30,60")
@samples_option
@tol_option
@max_iter_option
@click.option("--substeps", type=int, default=10, show_default=True)
@out_option("out/trip")
def trip(truck, scenario, phi, samples, tol, max_iter, substeps, out):
    """Drive a route with advice disabled and once per phi with advice enabled."""
    cfg = _load_truck(truck)
    route = _load_scenario(scenario)
    phis = parse_phi_list(phi)
    out = _out_dir(out)
    base = run_trip(cfg, route, None, False, substeps=substeps, record_trace=True)
    rp.write_table(out / "trace_disabled.tsv", TRACE_HEADER, rp.trace_rows(base))
    rp.write_table(out / "report_disabled.tsv", rp.TRIP_HEADER, rp.trip_rows(base))
    enabled = []
    for p in phis:
        try:
            sols = _solve_route(cfg, route, CostWeights.from_phi(p), samples, tol, max_iter)
        except _INFEASIBLE as exc:
            raise click.ClickException(f"phi={p:g}: {exc}") from exc
        rep = run_trip(cfg, route, sols, True, substeps=substeps, record_trace=True,
                       baseline=base, phi=p)
        tag = rp.fmt_phi(p)
        rp.write_table(out / f"trace_phi{tag}.tsv", TRACE_HEADER, rp.trace_rows(rep))
        rp.write_table(out / f"report_phi{tag}.tsv", rp.TRIP_HEADER, rp.trip_rows(rep))
        enabled.append(rep)
    header, rows = rp.trip_table(base, enabled)
    rp.write_table(out / "trip_table.tsv", header, rows)
    summary = {
        "route": route.name,
        "baseline_driver": "latest engine braking in the highest usable gear (interpretation)",
        "runs": [{"run": "disabled" if r is base else "enabled", "phi": r.phi,
                  "time_s": r.route_time, "fuel_g": r.route_fuel,
                  "time_incr_pct": r.time_incr_pct(), "fuel_saved_pct": r.fuel_saved_pct()}
                 for r in [base, *enabled]],
    }
    rp.write_json(out / "summary.json", summary)
    click.echo(rp.format_table(header[:2] + ["route_time_s", "route_time_incr_pct", "route_fuel_g",
                                             "route_fuel_saved_pct"],
                               [r[:2] + r[-4:] for r in rows]), nl=False)
    return EXIT_OK


@cli.command()
@truck_option
@click.option("--cycle", "cycle_paths", multiple=True, type=click.Path(dir_okay=False),
              help="Cycle file; repeat for several parts.")
@click.option("--synthetic", multiple=True, type=click.Choice(["rural", "motorway"]),
              help="Synthetic cycle part; used when no --cycle is given (default: both).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=600.0, show_default=True)
@phi_option("15,30,60")
@tol_option
@max_iter_option
@out_option("out/cycle")
def cycle(truck, cycle_paths, synthetic, seed, duration, phi, tol, max_iter, out):
    """Assess advice over drive cycles (per-part totals)."""
    cfg = _load_truck(truck)
    phis = parse_phi_list(phi)
    out = _out_dir(out)
    parts = []
    for path in cycle_paths:
        c = load_cycle(path)
        parts.append((Path(path).stem, c))
    if not cycle_paths:
        for part in synthetic or ("rural", "motorway"):
            parts.append((part, synthetic_cycle(part, seed=seed, duration=duration)))
    rows = []
    summary = {"seed": seed, "parts": []}
    for name, c in parts:
        rep = assess_cycle(cfg, c, phis, solve_kw={"tol": tol, "max_iter": max_iter})
        rows += rp.cycle_rows(name, rep)
        header, srows = rp.cycle_section_rows(rep)
        rp.write_table(out / f"sections_{name}.tsv", header, srows)
        summary["parts"].append({
            "part": name, "distance_m": rep.distance, "decel_share": rep.decel_share,
            "sections": rep.n_sections, "events": rep.n_events,
            "runs": [{"run": r.label, "phi": r.phi, "time_s": r.time, "fuel_g": r.fuel,
                      "time_incr_pct": rep.time_incr_pct(r), "fuel_saved_pct": rep.fuel_saved_pct(r),
                      "advised": r.advised, "skipped": r.skipped}
                     for r in [rep.disabled, *rep.enabled]],
        })
    rp.write_table(out / "cycle_table.tsv", rp.CYCLE_HEADER, rows)
    rp.write_json(out / "summary.json", summary)
    click.echo(rp.format_table(rp.CYCLE_HEADER, rows), nl=False)
    return EXIT_OK


def _random_instances(count, seed, phis, samples):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        v0 = rng.uniform(40.0, 90.0) * KMH
        vf = v0 - rng.uniform(10.0, 30.0) * KMH
        length = rng.uniform(500.0, 1500.0)
        out.append(SegmentProblem(0.0, length, v0, vf, samples,
                                  CostWeights.from_phi(phis[i % len(phis)])))
    return out


@cli.command()
@truck_option
@scenario_option
@click.option("--instances", type=int, default=10, show_default=True,
              help="Random instances when neither --scenario nor --v0/--vf is given.")
@click.option("--v0", type=float, default=None, help="Entry speed [km/h] of a single instance.")
@click.option("--vf", type=float, default=None, help="Target speed [km/h] of a single instance.")
@click.option("--length", type=float, default=1000.0, show_default=True,
              help="Length [m] of a single instance.")
@click.option("--seed", type=int, default=0, show_default=True)
@phi_option("15")
@click.option("--samples", type=int, default=MAX_SAMPLES, show_default=True)
@click.option("--resolution", type=float, default=DEFAULT_RESOLUTION, show_default=True,
              help="Oracle velocity grid spacing [m/s].")
@tol_option
@max_iter_option
@click.option("--gap", "gap_bound", type=float, default=2.0, show_default=True,
              help="Largest accepted gap J_pmp / J_dp - 1 [%].")
@out_option("out/verify")
def verify(truck, scenario, instances, v0, vf, length, seed, phi, samples, resolution, tol,
           max_iter, gap_bound, out):
    """Compare the shooting solver with the dynamic-programming oracle."""
    cfg = _load_truck(truck)
    phis = parse_phi_list(phi)
    if samples > MAX_SAMPLES or samples < 2:
        raise ValidationError(f"--samples must be within 2..{MAX_SAMPLES} for the oracle")
    if (v0 is None) != (vf is None):
        raise ValidationError("--v0 and --vf go together")
    if v0 is not None:
        probs = [SegmentProblem(0.0, length, v0 * KMH, vf * KMH, samples, CostWeights.from_phi(p))
                 for p in phis]
    elif scenario:
        route = load_route(scenario)
        probs = [SegmentProblem(e.trigger_s, e.end_s, e.v_entry, e.v_target, samples,
                                CostWeights.from_phi(p))
                 for e in route.events for p in phis]
    else:
        probs = _random_instances(instances, seed, phis, samples)
    out = _out_dir(out)
    rows = []
    failed = False
    for i, prob in enumerate(probs):
        status = "ok"
        res = solve_costate(cfg, prob, tol=tol, max_iter=max_iter, raise_on_failure=False)
        if not res.converged:
            status = "pmp_unconverged"
        try:
            j_dp = dp_solve(cfg, prob, v_resolution=resolution, tol=tol).cost
        except NoFeasiblePath:
            j_dp, gap, status = math.nan, math.nan, "oracle_infeasible"
        else:
            gap = 100.0 * (res.cost_J - j_dp) / j_dp
            if gap > gap_bound:
                status = "gap_exceeded"
                failed = True
        rows.append([i + 1, prob.sf - prob.s0, prob.v0, prob.vf, prob.weights.phi, prob.n,
                     j_dp, res.cost_J, gap, status])
    rp.write_table(out / "verify.tsv", rp.VERIFY_HEADER, rows)
    rp.write_json(out / "summary.json", {"gap_bound_pct": gap_bound, "instances": len(rows),
                                         "failed": failed,
                                         "max_gap_pct": max((r[8] for r in rows if r[8] == r[8]),
                                                            default=math.nan)})
    click.echo(rp.format_table(rp.VERIFY_HEADER, rows), nl=False)
    return EXIT_GAP if failed else EXIT_OK


@cli.command("gen-cycle")
@click.option("--part", type=click.Choice(["rural", "motorway"]), default="rural", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=600.0, show_default=True)
@out_option("out/cycles")
def gen_cycle(part, seed, duration, out):
    """Write a synthetic drive cycle file."""
    c = synthetic_cycle(part, seed=seed, duration=duration)
    path = _out_dir(out) / f"{c.name}.cycle"
    save_cycle(c, path)
    click.echo(str(path))
    return EXIT_OK


def main(argv=None):
    try:
        code = cli.main(args=argv, prog_name="ecodrive", standalone_mode=False)
    except click.exceptions.Exit as exc:
        code = exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        code = 1
    except click.ClickException as exc:
        exc.show()
        cause = exc.__cause__
        if isinstance(cause, _INFEASIBLE):
            code = EXIT_INFEASIBLE
        elif isinstance(cause, _INPUT) or isinstance(exc, click.UsageError):
            code = EXIT_INPUT
        else:
            code = EXIT_INFEASIBLE if isinstance(cause, EcoDriveError) else EXIT_INPUT
    except _INPUT as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INPUT
    except _INFEASIBLE as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INFEASIBLE
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INPUT
    sys.exit(code or 0)
