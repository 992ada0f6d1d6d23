"""Command-line front end: ``contactqm simulate|portrait|critical-points|verify``.

Exit codes: 0 success, 1 a verification check failed, 2 bad arguments or
scenario file, 3 integration failure.
"""

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, verification
from .dynamics import integrate
from .errors import (ContactQMError, DegenerateV, DimensionMismatch, ScenarioError, StepFailure,
                     UnsupportedScenario)
from .scenario import Scenario, load, parse_grid, parse_window

log = logging.getLogger("contactqm")

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_PARSE, EXIT_INTEGRATION = 0, 1, 2, 3

__all__ = ["main"]


# -- output ---------------------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits: a lossless text form of a double."""
    return format(float(x) + 0.0, ".17g")  # + 0.0 drops the sign of -0.0


def write_csv(path, header, rows, comments=()) -> None:
    """Write CSV text to ``path`` atomically (temp file + rename), or to stdout for None/'-'."""
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _plot_path(out):
    if out is None or str(out) == "-":
        return None
    return Path(out).with_suffix(".png")


# -- commands ----------------------------------------------------------------------------

def _load_scenario(args) -> Scenario:
    if args.scenario is None:
        raise ScenarioError("--scenario is required for this command", field="scenario")
    try:
        sc = load(args.scenario)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc.strerror or exc}", field="scenario") from None
    if args.tol is not None:
        sc = sc.with_overrides(rtol=args.tol)
    return sc


def cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    spec = sc.to_spec()
    traj = integrate(spec, sc.initial_state(), (0.0, sc.t_end), sc.step_control(), t_eval=sc.times())
    table = analysis.trajectory_observables(traj, sc.H, sc.reference_level)
    m = sc.n - 1
    header = ["t [hbar/E]", "chart [1]"]
    if "z" in sc.outputs:
        for k in range(1, m + 1):
            header += [f"Re z{k} [1]", f"Im z{k} [1]"]
    if "S" in sc.outputs:
        header.append("S [hbar]")
    if "e_H" in sc.outputs:
        header.append("e_H [E]")
    if "var_H" in sc.outputs:
        header.append("var_H [E^2]")
    if "P" in sc.outputs:
        header.append(f"P{sc.reference_level} [1]")
    with_bloch = "bloch" in sc.outputs and sc.n == 2
    if with_bloch:
        header += ["x1 [1]", "x2 [1]", "x3 [1]"]
    rows = []
    for i, e in enumerate(traj.states):
        row = [fmt(table.t[i]), str(e.chart)]
        if "z" in sc.outputs:
            for c in e.z:
                row += [fmt(c.real), fmt(c.imag)]
        if "S" in sc.outputs:
            row.append(fmt(e.S))
        if "e_H" in sc.outputs:
            row.append(fmt(table.e_H[i]))
        if "var_H" in sc.outputs:
            row.append(fmt(table.var_H[i]))
        if "P" in sc.outputs:
            row.append(fmt(table.P[i]))
        if with_bloch:
            row += [fmt(x) for x in table.bloch[i]]
        rows.append(row)
    comments = [f"scenario: {sc.name}", "z columns are coordinates in the chart given by the chart column"]
    comments += [f"chart switch at t = {fmt(t)}: {a} -> {b}" for t, a, b in traj.chart_switch_events]
    write_csv(args.out, header, rows, comments)
    png = _plot_path(args.out)
    if png is not None and not args.no_plot:
        from .plotting import plot_observables
        plot_observables(table, png, sc.name)
    log.info("wrote %d samples", len(rows))
    return EXIT_OK


def _point_row(p: analysis.CriticalPoint):
    b = p.bloch
    row = [p.label, str(p.chart), fmt(p.z.real), fmt(p.z.imag)]
    for lam in p.eigenvalues:
        row += [fmt(lam.real), fmt(lam.imag)]
    return row + [p.classification] + [fmt(x) for x in b]


_POINT_HEADER = ["label", "chart [1]", "Re z [1]", "Im z [1]", "Re lambda1 [1/time]", "Im lambda1 [1/time]",
                 "Re lambda2 [1/time]", "Im lambda2 [1/time]", "classification", "x1 [1]", "x2 [1]", "x3 [1]"]


def _census_comments(points):
    out = []
    counts = {}
    for p in points:
        counts[p.classification] = counts.get(p.classification, 0) + 1
        b = p.bloch
        out.append(f"critical point: chart={p.chart} z=({fmt(p.z.real)}, {fmt(p.z.imag)}) "
                   f"bloch=({fmt(b[0])}, {fmt(b[1])}, {fmt(b[2])}) class={p.classification}")
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "none"
    return [f"census: {summary}"] + out


def _qubit_field(sc: Scenario) -> analysis.QubitField:
    if sc.n != 2:
        raise ScenarioError("phase portraits and critical points need n = 2", field="n")
    try:
        return analysis.QubitField.from_spec(sc.to_spec())
    except UnsupportedScenario as exc:
        raise ScenarioError(str(exc), field="dissipation") from None


def cmd_portrait(args) -> int:
    sc = _load_scenario(args)
    q = _qubit_field(sc)
    window = parse_window(args.window, key="--window") if args.window else sc.window
    grid = parse_grid(args.grid, key="--grid") if args.grid else sc.grid
    plotting = _plot_path(args.out) is not None and not args.no_plot
    portrait = analysis.phase_portrait(q, window, grid, streamline_seeds=16 if plotting else 0)
    header = ["chart [1]", "Re z [1]", "Im z [1]", "Re dz/dt [1/time]", "Im dz/dt [1/time]", "|dz/dt| [1/time]",
              "x1 [1]", "x2 [1]", "x3 [1]"]
    rows = []
    for k in range(portrait.chart.size):
        d = portrait.dz[k]
        rows.append([str(portrait.chart[k]), fmt(portrait.x[k]), fmt(portrait.y[k]), fmt(d.real), fmt(d.imag),
                     fmt(abs(d))] + [fmt(x) for x in portrait.bloch[k]])
    comments = [f"scenario: {sc.name}", f"window: {','.join(fmt(w) for w in window)}",
                f"grid: {grid[0]}x{grid[1]}"] + _census_comments(portrait.critical_points)
    write_csv(args.out, header, rows, comments)
    if plotting:
        from .plotting import plot_portrait
        plot_portrait(portrait, _plot_path(args.out), sc.name)
    return EXIT_OK


def cmd_critical_points(args) -> int:
    sc = _load_scenario(args)
    q = _qubit_field(sc)
    comments = [f"scenario: {sc.name}"]
    if q.gamma == 0:
        try:
            points = analysis.conservative_critical_points(q.H1, q.H2, q.V, q.hbar)
            comments.append("method: closed-form roots of the Riccati equation")
        except DegenerateV as exc:
            if not exc.points:
                raise ScenarioError("H is a multiple of the identity: every state is critical",
                                    field="hamiltonian") from None
            points = exc.points
            comments.append("method: uncoupled levels (V = 0)")
    elif q.H1 == q.H2 and q.V != 0 and q.gamma > 0:
        report = analysis.classify_bifurcation(q.V, q.gamma, q.hbar)
        points = analysis.dissipative_critical_points(q.H1, q.H2, q.V, q.gamma, q.hbar) + [q.pole_point()]
        comments.append("method: closed forms for H1 = H2")
        comments.append(f"delta_minus [E^2]: {fmt(report.delta_minus)}")
        comments.append(f"regime: {report.regime}" + (f" ({report.sub_case})" if report.sub_case else ""))
    else:
        points = analysis.phase_portrait(q, sc.window, sc.grid).critical_points
        comments.append("method: grid search + Newton refinement in both charts")
    comments += _census_comments(points)[:1]
    write_csv(args.out, _POINT_HEADER, [_point_row(p) for p in points], comments)
    return EXIT_OK


def cmd_verify(args) -> int:
    only = [s.strip() for s in args.only.split(",") if s.strip()] if args.only else None
    if only:
        unknown = [n for n in only if n not in verification.BLOCKS]
        if unknown:
            raise ScenarioError(f"unknown block {unknown[0]!r}; choose from {', '.join(verification.BLOCKS)}",
                                field="--only")
    seed = 0 if args.seed is None else args.seed
    rtol = 1e-10 if args.tol is None else args.tol
    checks = verification.run(seed, only, rtol)
    rows = [[c.block, c.name, format(float(c.residual), ".3e"), format(c.tolerance, ".0e"),
             "pass" if c.passed else "FAIL"] for c in checks]
    failed = sum(not c.passed for c in checks)
    comments = [f"seed: {seed}", f"integrator rtol: {fmt(rtol)}",
                f"summary: {len(checks) - failed} passed, {failed} failed"]
    write_csv(args.out, ["block", "check", "max residual", "tolerance", "status"], rows, comments)
    if args.out is not None and str(args.out) != "-":
        print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


# -- argument parsing ------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contactqm",
                                     description="Contact-Hamiltonian dissipative dynamics of pure quantum states")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": (cmd_simulate, "integrate a scenario and write observables per sample"),
        "portrait": (cmd_portrait, "sample the qubit vector field in both charts with a critical-point census"),
        "critical-points": (cmd_critical_points, "list critical points with eigenvalues and classification"),
        "verify": (cmd_verify, "run the property and oracle checks"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--scenario", metavar="PATH", help="scenario file")
        p.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
        p.add_argument("--grid", metavar="NxM", help="portrait grid size")
        p.add_argument("--window", metavar="x0,x1,y0,y1", help="portrait window in the z-plane")
        p.add_argument("--seed", type=int, metavar="N", help="random seed for verify (default 0)")
        p.add_argument("--tol", type=float, metavar="REAL", help="integrator relative tolerance")
        p.add_argument("--only", metavar="NAME", help="comma list of verify blocks: " + ", ".join(verification.BLOCKS))
        p.add_argument("--no-plot", action="store_true", help="do not render the PNG next to --out")
    return parser


_VALUE_FLAGS = ("--window", "--tol", "--seed")


def _join_negative_values(argv):
    """Rewrite ``--window -3,3,-3,3`` as ``--window=-3,3,-3,3`` so argparse accepts leading minus signs."""
    out, k = [], 0
    while k < len(argv):
        a = argv[k]
        if a in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-") and argv[k + 1] != "-":
            out.append(f"{a}={argv[k + 1]}")
            k += 2
        else:
            out.append(a)
            k += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _parser().parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if args.tol is not None and not (np.isfinite(args.tol) and args.tol > 0):
        print("contactqm: error: field '--tol': must be a positive number", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"contactqm: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StepFailure as exc:
        where = "" if exc.t is None else f" (last accepted t = {fmt(exc.t)})"
        print(f"contactqm: integration failed: {exc}{where}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (DimensionMismatch, UnsupportedScenario) as exc:
        print(f"contactqm: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ContactQMError as exc:
        print(f"contactqm: error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
