"""Plain-text tables and JSON summaries with fixed formatting.

Every float goes through :func:`fmt`, so identical runs produce
byte-identical files.
"""

import json
import math

import numpy as np


TRIP_HEADER = ("section", "time_s", "time_incr_pct", "fuel_g", "fuel_saved_pct")
PROFILE_HEADER = ("s_m", "v_ms", "v_kmh", "lambda", "mode", "gear", "omega_rpm", "torque_nm",
                  "fuel_g", "time_s")
CYCLE_HEADER = ("part", "run", "phi", "time_s", "time_incr_pct", "fuel_g", "fuel_saved_pct")
VERIFY_HEADER = ("instance", "length_m", "v0_ms", "vf_ms", "phi", "samples", "J_dp", "J_pmp",
                 "gap_pct", "status")
DECIMALS = 6


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.{DECIMALS}f}"
    # avoid "-0.000000"
    return out[1:] if out.startswith("-") and float(out) == 0.0 else out


def format_table(header, rows, sep="\t"):
    lines = [sep.join(header)]
    lines += [sep.join(fmt(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_table(path, header, rows):
    path.write_text(format_table(header, rows))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return round(x, DECIMALS) if math.isfinite(x) else str(x)
    return obj


def dumps_json(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    path.write_text(dumps_json(obj))


def profile_rows(result):
    """One row per boundary; per-sample columns are blank on the final boundary."""
    rows = []
    for k in range(result.n + 1):
        v = result.v[k]
        row = [result.s[k], v, v * 3.6, result.lam[k]]
        if k < result.n:
            row += [str(result.modes[k]), int(result.gear[k]), result.omega_e[k],
                    result.torque[k], result.fuel[k], result.time[k]]
        else:
            row += ["", "", "", "", "", ""]
        rows.append(row)
    return rows


def trace_rows(report):
    return [list(r) for r in report.trace]


def trip_rows(report):
    """Per-section rows then the route total, in the long TripReport layout."""
    rows = []
    for i, sec in enumerate(report.sections):
        rows.append([sec.name, sec.time, report.time_incr_pct(i), sec.fuel, report.fuel_saved_pct(i)])
    rows.append(["route", report.route_time, report.time_incr_pct(), report.route_fuel,
                 report.fuel_saved_pct()])
    return rows


def trip_table(baseline, enabled):
    """Wide layout: one row per run, four columns per section and for the route."""
    names = [s.name for s in baseline.sections] + ["route"]
    header = ["run", "phi"]
    for name in names:
        header += [f"{name}_time_s", f"{name}_time_incr_pct", f"{name}_fuel_g",
                   f"{name}_fuel_saved_pct"]
    rows = []
    for rep in [baseline, *enabled]:
        row = ["disabled" if rep is baseline else "enabled", rep.phi]
        for r in trip_rows(rep):
            row += r[1:]
        rows.append(row)
    return header, rows


def cycle_rows(part, report):
    rows = []
    for run in [report.disabled, *report.enabled]:
        rows.append([part, run.label, run.phi, run.time, report.time_incr_pct(run), run.fuel,
                     report.fuel_saved_pct(run)])
    return rows


def cycle_section_rows(report):
    header = ["section", "s_start_m", "s_end_m", "disabled_time_s", "disabled_fuel_g"]
    for run in report.enabled:
        tag = f"phi{fmt_phi(run.phi)}"
        header += [f"{tag}_time_s", f"{tag}_fuel_g"]
    rows = []
    for i, sec in enumerate(report.disabled.sections):
        row = [sec.name, sec.s_start, sec.s_end, sec.time, sec.fuel]
        for run in report.enabled:
            row += [run.sections[i].time, run.sections[i].fuel]
        rows.append(row)
    return header, rows


def fmt_phi(phi):
    """Compact label for file names: 15 -> "15", 7.5 -> "7.5"."""
    return f"{phi:g}"
