"""Command-line front end.

    curvn eval circle.json
    curvn table --out table.json --plot table.png
    curvn anomaly circle.json --center 1 0

Exit status: 0 converged, 2 invalid input, 3 not converged or a check
failed, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .conformal import InversionMap, anomaly_check, check_inversion_invariance
from .curves import CurveError, CurveSpec, FourierLoop, validate
from .kernel import (MAX_GRID, TOL_CLOSED, TOL_OPEN, TruncationPolicy, curve_number_closed,
                     curve_number_open, kernel_grid_csv)
from .optimize import MinimizeOptions, minimize
from .photon import WorldLine, boost, photon_number, spectral_photon_number, spectrum_csv
from .specio import COMMANDS, JobSpec, SpecError, from_dict, parse_spec, serialize
from .table import eccentricity_table, strictly_increasing

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

log = logging.getLogger("curvn")


class JobError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def _read_input(job: JobSpec):
    if job.spec is not None:
        return from_dict(job.spec)
    if job.input is None:
        raise JobError(f"command {job.command!r} needs an input document", EXIT_INVALID)
    try:
        text = sys.stdin.read() if job.input == "-" else Path(job.input).read_text()
    except OSError as exc:
        raise JobError(f"cannot read {job.input}: {exc.strerror or exc}", EXIT_IO) from exc
    return parse_spec(text)


def _curve(job, closed: bool | None = None) -> CurveSpec:
    obj = _read_input(job)
    if not isinstance(obj, CurveSpec):
        raise JobError(f"command {job.command!r} needs a curve document", EXIT_INVALID)
    if closed is True and not obj.closed:
        raise JobError(f"command {job.command!r} needs a closed curve", EXIT_INVALID)
    if closed is False and obj.closed:
        raise JobError(f"command {job.command!r} needs an open curve", EXIT_INVALID)
    return obj


def _worldline(job) -> WorldLine:
    obj = _read_input(job)
    if not isinstance(obj, WorldLine):
        raise JobError(f"command {job.command!r} needs a worldline document", EXIT_INVALID)
    return obj


def _policy(job):
    return TruncationPolicy(max=job.window) if job.window else None


def _max_grid(job):
    return job.max_grid or MAX_GRID


def _status(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


# -- commands ----------------------------------------------------------------


def _eval(job, force_open=False):
    curve = _curve(job, closed=False if force_open else None)
    if curve.closed:
        res = curve_number_closed(curve, job.tol or TOL_CLOSED, _max_grid(job))
    else:
        res = curve_number_open(curve, job.tol or TOL_OPEN, _policy(job), _max_grid(job))
    report = {"curve": curve.to_dict(), "result": res.to_dict()}
    csv = "grid,n\n" + "".join(f"{int(g)},{float(v)!r}\n" for g, v in res.trace)
    return _status(res.converged), report, {"csv": csv, "curve": curve, "n": res.value}


def _table(job):
    rows = eccentricity_table(job.tol or TOL_CLOSED, _max_grid(job))
    ok = all(r["converged"] for r in rows)
    report = {"rows": rows, "strictly_increasing": strictly_increasing(rows),
              "all_within_band": all(r["within_band"] for r in rows)}
    head = "ecc,n,n_half,reference,relative_deviation,band,within_band,grid_size,converged\n"
    csv = head + "".join(
        ",".join([*(repr(float(r[k])) for k in ("ecc", "n", "n_half", "reference",
                                                 "relative_deviation", "band")),
                  str(bool(r["within_band"])).lower(), str(int(r["grid_size"])),
                  str(bool(r["converged"])).lower()]) + "\n"
        for r in rows)
    return _status(ok), report, {"csv": csv, "rows": rows}


def _center(job, curve):
    if job.center is not None:
        return np.asarray(job.center, dtype=float)
    raise JobError(f"command {job.command!r} needs --center", EXIT_INVALID)


def _invert(job):
    curve = _curve(job)
    imap = InversionMap(_center(job, curve), job.radius)
    rep = check_inversion_invariance(curve, imap, quad_tol=job.tol or 1e-10)
    report = {"curve": curve.to_dict(), "center": imap.center.tolist(), "radius": imap.radius,
              "result": rep.to_dict()}
    return _status(rep.passed), report, {"curve": curve}


def _anomaly(job):
    curve = _curve(job, closed=True)
    if job.center is None:
        center = curve.eval(np.array([0.0]))[0][0]
    else:
        center = np.asarray(job.center, dtype=float)
    imap = InversionMap(center, job.radius)
    rep = anomaly_check(curve, imap, window_policy=_policy(job))
    report = {"curve": curve.to_dict(), "center": imap.center.tolist(), "radius": imap.radius,
              "result": rep.to_dict()}
    return _status(rep.passed and rep.converged), report, {"curve": curve}


def _photon(job):
    w = _worldline(job)
    pos = photon_number(w, job.tol or TOL_OPEN, _policy(job), _max_grid(job))
    report = {"worldline": w.to_dict(), "result": pos.to_dict()}
    extra = {}
    if job.format == "csv" or job.plot:
        spec = spectral_photon_number(w)
        report["spectral"] = spec.to_dict()
        report["relative_difference"] = abs(pos.n - spec.n) / max(abs(spec.n), 1e-300)
        extra = {"csv": spectrum_csv(spec), "spectrum": spec.spectrum}
    return _status(pos.converged), report, extra


def _boost(job):
    w = _worldline(job)
    if job.beta is None:
        raise JobError("command 'boost' needs --beta", EXIT_INVALID)
    tol = job.tol or TOL_OPEN
    moved = boost(w, job.beta)
    a = photon_number(w, tol, _policy(job), _max_grid(job))
    b = photon_number(moved, tol, _policy(job), _max_grid(job))
    rel = abs(b.n - a.n) / max(abs(a.n), 1e-300)
    report = {"worldline": w.to_dict(), "beta": list(map(float, job.beta)), "n": a.n,
              "n_boosted": b.n, "relative_change": rel,
              "converged": a.converged and b.converged}
    return _status(a.converged and b.converged), report, {}


def _minimize(job):
    curve = _curve(job, closed=True)
    if not isinstance(curve, FourierLoop):
        raise JobError("command 'minimize' needs a fourier-loop document", EXIT_INVALID)
    opts = MinimizeOptions(harmonics=job.harmonics, max_iter=job.max_iter)
    if job.tol:
        opts.tol = job.tol
    final, trace = minimize(curve, opts)
    report = {"initial": curve.to_dict(), "final": final.to_dict(), "n": float(trace.values[-1]),
              "excess_over_circle": float(trace.values[-1] - 2 * np.pi**2),
              "trace": trace.to_dict()}
    if trace.conjecture_violation:
        print("*** CONJECTURE VIOLATION: a loop with n below 2 pi^2 was found; "
              "see the report for its coefficients ***", file=sys.stderr)
    return _status(not trace.flagged), report, {"csv": trace.to_csv(), "curve": final,
                                                "n": float(trace.values[-1]), "initial": curve,
                                                "trace": trace}


def _export(job):
    curve = _curve(job)
    report = validate(curve)
    if not report.ok:
        raise JobError(f"curve fails validation: {report.summary()}", EXIT_INVALID)
    if curve.closed:
        res = curve_number_closed(curve, job.tol or TOL_CLOSED, _max_grid(job))
    else:
        res = curve_number_open(curve, job.tol or TOL_OPEN, _policy(job), _max_grid(job))
    return (_status(res.converged), {"curve": curve.to_dict(), "result": res.to_dict()},
            {"curve": curve, "n": res.value, "csv": kernel_grid_csv(curve)})


HANDLERS = {
    "eval": _eval,
    "eval-open": lambda job: _eval(job, force_open=True),
    "table": _table,
    "invert": _invert,
    "anomaly": _anomaly,
    "photon": _photon,
    "boost": _boost,
    "minimize": _minimize,
    "export": _export,
}


def _plot(job, extra):
    if job.command == "table":
        plotting.plot_table(extra["rows"], job.plot)
    elif job.command == "minimize":
        plotting.plot_minimize(extra["initial"], extra["curve"], extra["trace"], job.plot)
    elif job.command == "photon":
        plotting.plot_spectrum(extra["spectrum"], job.plot)
    elif "curve" in extra:
        plotting.plot_curve(extra["curve"], job.plot, job.window or 8.0)


def run(job: JobSpec) -> tuple[int, dict, dict]:
    """Execute ``job``; returns (exit status, JSON report, auxiliary outputs)."""
    if job.command not in HANDLERS:
        return EXIT_INVALID, {"command": job.command, "status": EXIT_INVALID,
                              "error": f"unknown command {job.command!r}"}, {}
    try:
        status, body, extra = HANDLERS[job.command](job)
    except JobError as exc:
        status, body, extra = exc.status, {"error": str(exc)}, {}
    except (SpecError, CurveError) as exc:
        status, body, extra = EXIT_INVALID, {"error": str(exc)}, {}
    except OSError as exc:
        status, body, extra = EXIT_IO, {"error": str(exc)}, {}
    report = {"command": job.command, "status": status, **body}
    if status in (EXIT_OK, EXIT_NOT_CONVERGED) and job.plot:
        try:
            _plot(job, extra)
        except OSError as exc:
            status = report["status"] = EXIT_IO
            report["error"] = f"cannot write plot {job.plot}: {exc}"
    return status, report, extra


# -- text output -------------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def text_report(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    if "error" in report:
        lines.append(f"error: {report['error']}")
    res = report.get("result")
    if isinstance(res, dict):
        for key, value in res.items():
            if not isinstance(value, (list, dict)):
                lines.append(f"{key} = {_fmt(value)}")
    if report["command"] == "table" and "rows" in report:
        lines.append(f"{'ecc':>5} {'n':>14} {'n/2':>10} {'reference':>9} {'deviation':>10}")
        for r in report["rows"]:
            lines.append(f"{r['ecc']:>5} {r['n']:>14.10f} {r['n_half']:>10.5f} {r['reference']:>9} "
                         f"{100 * r['relative_deviation']:>9.2f}%")
        lines.append(f"strictly_increasing = {_fmt(report['strictly_increasing'])}")
    for key in ("n", "n_boosted", "relative_change", "excess_over_circle", "relative_difference"):
        if key in report:
            lines.append(f"{key} = {_fmt(report[key])}")
    if "trace" in report and isinstance(report["trace"], dict):
        tr = report["trace"]
        lines.append(f"iterations = {len(tr['iterations']) - 1}")
        lines.append(f"termination = {tr['reason']}")
        lines.append(f"conjecture_violation = {_fmt(tr['conjecture_violation'])}")
    lines.append(f"status = {report['status']}")
    return "\n".join(lines) + "\n"


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvn", description="Curve number n of curves and worldlines.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", nargs="?", help="JSON curve or worldline document ('-' for stdin)")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance")
    p.add_argument("--max-grid", type=int, help="largest grid per dimension")
    p.add_argument("--window", type=float, help="largest truncation window for open curves")
    p.add_argument("--out", help="write the JSON report to this path")
    p.add_argument("--format", choices=("text", "json", "csv", "svg"), default="text",
                   help="what to print on standard output")
    p.add_argument("--center", type=float, nargs="+", help="inversion center")
    p.add_argument("--radius", type=float, default=1.0, help="inversion radius")
    p.add_argument("--beta", type=float, nargs=3, help="boost velocity")
    p.add_argument("--plot", help="write a matplotlib figure to this path")
    p.add_argument("--harmonics", type=int, default=8, help="Fourier harmonics for minimize")
    p.add_argument("--max-iter", type=int, default=200, help="iteration cap for minimize")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def job_from_args(args: argparse.Namespace) -> JobSpec:
    doc = {"command": args.command}
    for key in ("input", "tol", "max_grid", "window", "out", "format", "center", "radius",
                "beta", "plot", "harmonics", "max_iter"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    return from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        job = job_from_args(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    status, report, extra = run(job)
    if job.out:
        try:
            Path(job.out).write_text(serialize(report))
        except OSError as exc:
            print(f"error: cannot write {job.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
    if job.format == "json":
        sys.stdout.write(serialize(report))
    elif job.format == "csv" and "csv" in extra:
        sys.stdout.write(extra["csv"])
    elif job.format == "svg" and "curve" in extra:
        sys.stdout.write(plotting.export_svg(extra["curve"], extra.get("n"), window=job.window or 8.0))
    elif job.format != "text" and "error" not in report:
        print(f"error: format {job.format!r} is not available for {job.command!r}", file=sys.stderr)
        return EXIT_INVALID
    else:
        sys.stdout.write(text_report(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
