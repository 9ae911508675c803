"""Implementations of the ``simulate``, ``analyze``, ``compare``, ``sweep`` and ``phase`` commands.

Every ``cmd_*`` function returns a process exit code: 0 on success, 1 for
invalid input or I/O failure, 2 for a numerical failure.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..analysis import (
    INCONCLUSIVE,
    InconsistentModelError,
    NewtonError,
    NoEndemicEquilibrium,
    dfe_local_stability,
    disease_free_equilibrium,
    endemic_equilibrium,
    metzler_decomposition,
    r0_closed_form,
    r0_ngm,
    r0_sensitivity,
)
from ..integrate import IntegrationError, Trajectory, integrate
from ..linalg import RootFindingError
from ..model import ModelError, rhs, vector_field
from .config import ConfigError, ScenarioConfig, SweepSpec
from .svg import line_chart, thin

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
NUMERIC_ERRORS = (IntegrationError, NewtonError, RootFindingError, ArithmeticError)
INPUT_ERRORS = (ConfigError, ModelError, ValueError, OSError)

SIMULATE_HEADER = ("t", "S", "I", "R", "B", "N")
PHASE_HEADER = ("t", "I", "B")
COMPARE_HEADER = ("t", "S_a", "I_a", "R_a", "B_a", "N_a", "S_b", "I_b", "R_b", "B_b", "N_b")
SWEEP_HEADER = ("value", "R0", "S_star", "I_star", "R_star", "B_star", "peak_I", "peak_t", "status")

DEFAULT_THRESHOLD_FRACTION = 0.1


def fmt(x) -> str:
    """17 significant digits, enough for an exact float round-trip."""
    if x is None:
        return ""
    return format(float(x), ".17g")


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _report_error(exc, stream):
    print(f"error: {exc}", file=stream)
    if isinstance(exc, NUMERIC_ERRORS):
        return EXIT_NUMERIC
    return EXIT_INPUT


def peak(times, values) -> tuple[float, float]:
    """Maximum and the first time it is attained."""
    k = int(np.argmax(values))
    return float(values[k]), float(times[k])


def time_above(times, values, threshold) -> float:
    """Total length of the recorded intervals whose left end lies above ``threshold``."""
    times = np.asarray(times)
    above = np.asarray(values)[:-1] > threshold
    return float(np.diff(times)[above].sum())


def trajectory_rows(traj: Trajectory):
    return np.column_stack([traj.times, traj.states, traj.N])


def cmd_simulate(cfg: ScenarioConfig, out, *, svg=False, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        traj = integrate(cfg.initial, cfg.parameters, cfg.solver)
        _write(out, csv_text(SIMULATE_HEADER, trajectory_rows(traj)))
        if svg:
            stem = Path(out).with_suffix("")
            humans = {name: thin(traj.times, col) for name, col in
                      (("S", traj.S), ("I", traj.I), ("R", traj.R))}
            _write(f"{stem}_humans.svg", line_chart(
                humans, title=f"Human population: {cfg.label}", xlabel="time (weeks)", ylabel="individuals"))
            _write(f"{stem}_bacteria.svg", line_chart(
                {"B": thin(traj.times, traj.B)}, title=f"Bacteria: {cfg.label}",
                xlabel="time (weeks)", ylabel="cells"))
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        return _report_error(exc, stderr)
    i_peak, t_peak = peak(traj.times, traj.I)
    final_rate = float(np.max(np.abs(vector_field(traj.states[-1], cfg.parameters))))
    print(f"label: {cfg.label}", file=stdout)
    print(f"rows: {len(traj)}", file=stdout)
    print(f"terminated_by: {traj.terminated_by}", file=stdout)
    print(f"peak_I: {fmt(i_peak)} at t = {fmt(t_peak)}", file=stdout)
    print(f"final_rhs_inf_norm: {fmt(final_rate)}", file=stdout)
    return EXIT_OK


def analyze_report(cfg: ScenarioConfig) -> dict:
    """Everything ``analyze`` prints, as a JSON-serialisable dict."""
    p = cfg.parameters
    r0_c, r0_n = r0_closed_form(p), r0_ngm(p)
    dfe, residual = disease_free_equilibrium(p)
    report = {
        "label": cfg.label,
        "r0": {"closed_form": r0_c, "ngm": r0_n, "abs_difference": abs(r0_c - r0_n)},
        "dfe": {
            "state": dict(zip("SIRB", dfe)),
            "residual": dict(zip(("dS", "dI", "dR", "dB"), residual)),
            "stationary": max(abs(x) for x in residual) <= 1e-9,
            "warning": None,
        },
        "local_stability": None,
    }
    try:
        stab = dfe_local_stability(p)
        report["local_stability"] = {
            "eigenvalues": [[z.real, z.imag] for z in stab.eigenvalues],
            "spectral_abscissa": stab.spectral_abscissa,
            "verdict": stab.verdict,
        }
    except InconsistentModelError as exc:
        report["dfe"]["warning"] = str(exc)
    m = metzler_decomposition(p)
    report["metzler"] = {
        "a1": m.a1.tolist(), "a2": m.a2.tolist(), "a3": m.a3.tolist(),
        "a3_eigenvalues": [[z.real, z.imag] for z in m.a3_eigenvalues],
        "checks": m.checks(),
    }
    try:
        ee = endemic_equilibrium(p)
        n = ee.s + ee.i + ee.r
        report["endemic_equilibrium"] = {
            "state": dict(zip("SIRB", ee)),
            "rhs_inf_norm": max(abs(x) for x in rhs(ee, p)),
            "population_balance": p.pi1 - p.pi2 * n - p.pi3 * ee.i,
        }
    except NoEndemicEquilibrium as exc:
        report["endemic_equilibrium"] = {"absent": str(exc)}
    report["r0_sensitivity"] = r0_sensitivity(p) if p.rho < 1 else None
    return report


def _format_report(rep) -> str:
    lines = [f"label: {rep['label']}"]
    r0 = rep["r0"]
    lines += [
        f"r0_closed_form: {fmt(r0['closed_form'])}",
        f"r0_ngm: {fmt(r0['ngm'])}",
        f"r0_abs_difference: {fmt(r0['abs_difference'])}",
    ]
    dfe = rep["dfe"]
    lines.append("dfe: " + " ".join(f"{k}={fmt(v)}" for k, v in dfe["state"].items()))
    lines.append("dfe_residual: " + " ".join(f"{k}={fmt(v)}" for k, v in dfe["residual"].items()))
    lines.append(f"dfe_stationary: {str(dfe['stationary']).lower()}")
    if dfe["warning"]:
        lines.append(f"warning: {dfe['warning']}")
    stab = rep["local_stability"]
    if stab:
        eig = ", ".join(f"{fmt(a)}{b:+.6g}j" for a, b in stab["eigenvalues"])
        lines.append(f"jacobian_dfe_eigenvalues: {eig}")
        lines.append(f"spectral_abscissa: {fmt(stab['spectral_abscissa'])}")
        lines.append(f"dfe_verdict: {stab['verdict']}")
    else:
        lines.append("dfe_verdict: skipped")
    for key, ok in rep["metzler"]["checks"].items():
        lines.append(f"metzler_{key}: {str(ok).lower()}")
    ee = rep["endemic_equilibrium"]
    if "absent" in ee:
        lines.append(f"endemic_equilibrium: none ({ee['absent']})")
    else:
        lines.append("endemic_equilibrium: " + " ".join(f"{k}={fmt(v)}" for k, v in ee["state"].items()))
        lines.append(f"endemic_rhs_inf_norm: {fmt(ee['rhs_inf_norm'])}")
        lines.append(f"endemic_population_balance: {fmt(ee['population_balance'])}")
    if rep["r0_sensitivity"]:
        for k, v in rep["r0_sensitivity"].items():
            lines.append(f"dR0/d{k}: {fmt(v)}")
    return "\n".join(lines) + "\n"


def cmd_analyze(cfg: ScenarioConfig, *, as_json=False, out=None, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        rep = analyze_report(cfg)
        text = json.dumps(rep, indent=2) + "\n" if as_json else _format_report(rep)
        if out:
            _write(out, text)
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        return _report_error(exc, stderr)
    stdout.write(text)
    if rep["local_stability"] and rep["local_stability"]["verdict"] == INCONCLUSIVE:
        print("note: spectral abscissa is within 1e-8 of zero", file=stderr)
    return EXIT_OK


def compare_summary(traj_a, traj_b, threshold=None) -> dict:
    """Peak I, peak time and time above a shared threshold for both runs.

    The default threshold is a fixed fraction of the first scenario's peak.
    """
    peak_a, t_a = peak(traj_a.times, traj_a.I)
    peak_b, t_b = peak(traj_b.times, traj_b.I)
    if threshold is None:
        threshold = DEFAULT_THRESHOLD_FRACTION * peak_a
    return {
        "threshold": threshold,
        "a": {"peak_I": peak_a, "peak_t": t_a, "time_above": time_above(traj_a.times, traj_a.I, threshold)},
        "b": {"peak_I": peak_b, "peak_t": t_b, "time_above": time_above(traj_b.times, traj_b.I, threshold)},
    }


def _on_grid(traj, p, times):
    """States of ``traj`` at ``times`` by cubic Hermite interpolation on the vector field."""
    if len(traj.times) == len(times) and np.array_equal(traj.times, times):
        return traj.states
    # adaptive runs land on different grids
    t, y = traj.times, traj.states
    dy = np.array([vector_field(row, p) for row in y])
    k = np.clip(np.searchsorted(t, times, side="right") - 1, 0, len(t) - 2)
    h = (t[k + 1] - t[k])[:, None]
    u = ((times - t[k])[:, None] / h).clip(0.0, 1.0)
    h00 = 2 * u**3 - 3 * u**2 + 1
    h10 = u**3 - 2 * u**2 + u
    h01 = -2 * u**3 + 3 * u**2
    h11 = u**3 - u**2
    return h00 * y[k] + h10 * h * dy[k] + h01 * y[k + 1] + h11 * h * dy[k + 1]


def cmd_compare(cfg_a: ScenarioConfig, cfg_b: ScenarioConfig, out, *, threshold=None, svg=False,
                as_json=False, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        traj_a = integrate(cfg_a.initial, cfg_a.parameters, cfg_a.solver)
        traj_b = integrate(cfg_b.initial, cfg_b.parameters, cfg_b.solver)
        times = traj_a.times
        states_b = _on_grid(traj_b, cfg_b.parameters, times)
        rows = np.column_stack([
            times, traj_a.states, traj_a.N, states_b, states_b[:, :3].sum(axis=1),
        ])
        _write(out, csv_text(COMPARE_HEADER, rows))
        if svg:
            chart = line_chart(
                {f"I ({cfg_a.label})": thin(times, traj_a.I), f"I ({cfg_b.label})": thin(times, states_b[:, 1])},
                title="Infectious humans", xlabel="time (weeks)", ylabel="individuals")
            _write(Path(out).with_suffix(".svg"), chart)
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        return _report_error(exc, stderr)
    summary = compare_summary(traj_a, traj_b, threshold)
    summary["a"]["label"], summary["b"]["label"] = cfg_a.label, cfg_b.label
    if as_json:
        stdout.write(json.dumps(summary, indent=2) + "\n")
    else:
        print(f"threshold_I: {fmt(summary['threshold'])}", file=stdout)
        for key in ("a", "b"):
            s = summary[key]
            print(f"{key}: label={s['label']} peak_I={fmt(s['peak_I'])} peak_t={fmt(s['peak_t'])} "
                  f"time_above={fmt(s['time_above'])}", file=stdout)
    return EXIT_OK


def _sweep_row(item):
    value, cfg = item
    row = [value, None, None, None, None, None, None, None, "ok"]
    p = cfg.parameters
    try:
        row[1] = r0_closed_form(p)
        try:
            row[2:6] = list(endemic_equilibrium(p))
        except NoEndemicEquilibrium:
            row[8] = "no_endemic_equilibrium"
        traj = integrate(cfg.initial, p, cfg.solver)
        row[6], row[7] = peak(traj.times, traj.I)
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        row[8] = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return row


def sweep_rows(spec: SweepSpec, jobs=1) -> list[list]:
    """One row per swept value, in the order of ``spec.values``."""
    items = list(spec.scenarios())
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, items))
    return [_sweep_row(item) for item in items]


def cmd_sweep(spec: SweepSpec, out, *, jobs=1, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        rows = sweep_rows(spec, jobs)
        _write(out, csv_text(SWEEP_HEADER, rows))
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        return _report_error(exc, stderr)
    failed = [r for r in rows if r[8].startswith("error")]
    for r in failed:
        print(f"warning: {spec.parameter_name}={fmt(r[0])}: {r[8]}", file=stderr)
    print(f"rows: {len(rows)} ({len(failed)} failed)", file=stdout)
    return EXIT_OK


def cmd_phase(cfg: ScenarioConfig, out, *, svg=False, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        traj = integrate(cfg.initial, cfg.parameters, cfg.solver)
        _write(out, csv_text(PHASE_HEADER, np.column_stack([traj.times, traj.I, traj.B])))
        if svg:
            chart = line_chart({"I vs B": thin(traj.B, traj.I)}, title=f"I against B: {cfg.label}",
                               xlabel="B (cells)", ylabel="I (individuals)")
            _write(Path(out).with_suffix(".svg"), chart)
    except (*NUMERIC_ERRORS, *INPUT_ERRORS) as exc:
        return _report_error(exc, stderr)
    print(f"rows: {len(traj)}", file=stdout)
    return EXIT_OK
