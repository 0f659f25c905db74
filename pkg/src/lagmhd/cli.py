"""Command line entry point.

Exit codes: 0 success (and all asserted checks passed), 1 runtime failure
or failed check, 2 usage/configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .core import StateError, make_state
from .functionals import LyapunovReport, entropy_roots, measure_bound, reconstruct_v
from .harness import CHECKS, HarnessResult, run_harness
from .solver import PositivityBreach, SolverBreakdown
from .verify import convergence_order, get_case

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

SERIES_COLUMNS = LyapunovReport.columns() + ("W_int", "entropy_lhs", "e0", "alpha1", "alpha2", "measure_bound") + tuple(f"check_{c}" for c in CHECKS)
SNAPSHOT_COLUMNS = ("t", "x", "v", "u", "w1", "w2", "b1", "b2", "theta")


def fmt(x) -> str:
    """Shortest round-trip decimal for floats; ``pass``/``fail`` for booleans."""
    if isinstance(x, (bool, np.bool_)):
        return "pass" if x else "fail"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_lines(path: Path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_series(path: Path, result: HarnessResult) -> None:
    bound = measure_bound(result.e0)

    def rows():
        yield ",".join(SERIES_COLUMNS)
        for r in result.rows:
            vals = list(r.report.as_dict().values()) + [r.W_int, r.entropy_lhs, r.e0]
            vals += [result.alpha1, result.alpha2, bound]
            vals += [r.checks[c] for c in CHECKS]
            yield ",".join(fmt(v) for v in vals)

    _write_lines(path, rows())


def write_snapshots(path: Path, result: HarnessResult, cfg: RunConfig) -> None:
    x = cfg.grid.cell_centers

    def rows():
        yield ",".join(SNAPSHOT_COLUMNS)
        for s in result.trajectory.states:
            u = 0.5 * (s.u[1:] + s.u[:-1])
            w = 0.5 * (s.w[1:] + s.w[:-1])
            for i in range(len(x)):
                vals = (s.t, x[i], s.v[i], u[i], w[i, 0], w[i, 1], s.b[i, 0], s.b[i, 1], s.theta[i])
                yield ",".join(fmt(v) for v in vals)

    _write_lines(path, rows())


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=False, allow_nan=True)


def _log(quiet: bool, msg: str) -> None:
    if not quiet:
        print(msg, file=sys.stderr)


def cmd_run(cfg: RunConfig, quiet: bool = False) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        state = make_state(cfg.grid, cfg.profile(), cfg.problem)
    except (StateError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    step_lines = []

    def on_step(s, rep):
        step_lines.append(_json_line({"type": "step", **rep.as_dict()}))

    tol = cfg.checks.reconstruct_tol if cfg.checks.reconstruct else None
    try:
        result = run_harness(
            state, cfg.grid, cfg.problem, cfg.params, cfg.scheme,
            probes=cfg.probes, entropy_delta=cfg.checks.entropy_delta,
            reconstruct_tol=tol, on_step=on_step,
        )
    except (PositivityBreach, SolverBreakdown) as exc:
        step_lines.append(_json_line({"type": "summary", "status": "error", "error": type(exc).__name__, "message": str(exc)}))
        _write_lines(out / "reports.jsonl", step_lines)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    for msg in result.trajectory.warnings:
        step_lines.append(_json_line({"type": "warning", "message": msg}))
    checks = result.check_summary()
    status = "pass" if all(checks.values()) else "fail"
    step_lines.append(_json_line({
        "type": "summary",
        "status": status,
        "e0": result.e0,
        "alpha1": result.alpha1,
        "alpha2": result.alpha2,
        "measure_bound": measure_bound(result.e0),
        "max_entropy_ratio": result.max_entropy_ratio(),
        "reconstruct_error": result.reconstruct_error,
        "checks": {k: fmt(v) for k, v in checks.items()},
    }))
    write_series(out / "series.csv", result)
    write_snapshots(out / "snapshots.csv", result, cfg)
    _write_lines(out / "reports.jsonl", step_lines)
    _log(quiet, f"t_end={result.trajectory.final.t:g} steps={len(result.trajectory.reports)} e0={result.e0:.6g}")
    for k, v in checks.items():
        _log(quiet, f"  {k:<12} {fmt(v)}")
    return EXIT_OK if status == "pass" else EXIT_RUNTIME


def cmd_mms(cfg: RunConfig, levels: int | None = None, quiet: bool = False) -> int:
    if cfg.mms.case is None:
        print("error: mms.case is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        case = get_case(cfg.mms.case)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    k = levels if levels is not None else cfg.mms.levels
    if k < 2:
        print("error: --levels must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    ns = [cfg.grid.n_cells * 2**i for i in range(k)]
    res = convergence_order(case, ns, t_end=cfg.mms.t_end, dt_coeff=cfg.mms.dt_coeff)
    fields = res.FIELDS
    orders = [dict.fromkeys(fields, math.nan)] + res.orders()
    lines = [",".join(("n_cells", "dx", "dt") + tuple(f"err_{f}" for f in fields) + tuple(f"order_{f}" for f in fields))]
    for lvl, o in zip(res.levels, orders):
        vals = [lvl.n_cells, lvl.dx, lvl.dt] + [lvl.errors[f] for f in fields] + [o[f] for f in fields]
        lines.append(",".join(fmt(v) for v in vals))
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _write_lines(cfg.output_dir / "convergence.csv", lines)
    if res.exact:
        print("exact at all levels")
        return EXIT_OK
    print(f"{'n':>6} " + " ".join(f"{f:>9}" for f in fields))
    for lvl, o in zip(res.levels, orders):
        print(f"{lvl.n_cells:>6} " + " ".join(f"{lvl.errors[f]:9.3e}" for f in fields))
        print(f"{'order':>6} " + " ".join(f"{o[f]:9.3f}" for f in fields))
    ok = res.passes(1.8)
    print("pass" if ok else "fail: finest-pair order below 1.8")
    return EXIT_OK if ok else EXIT_RUNTIME


def format_roots(e0: float) -> str:
    a1, a2 = entropy_roots(e0)
    bound = measure_bound(e0)
    return f"{a1:.12f} {a2:.12f} {bound:.12g}"


def cmd_roots(e0: float) -> int:
    if not (math.isfinite(e0) and e0 >= 0):
        print("error: e0 must be a finite non-negative number", file=sys.stderr)
        return EXIT_USAGE
    print(format_roots(e0))
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig, probe: float, at: float, quiet: bool = False) -> int:
    g = cfg.grid
    if not g.x_left <= probe <= g.x_right:
        print(f"error: probe {probe} outside the domain", file=sys.stderr)
        return EXIT_USAGE
    if not 0 < at <= cfg.scheme.t_end:
        print(f"error: --at must lie in (0, {cfg.scheme.t_end}]", file=sys.stderr)
        return EXIT_USAGE
    if not cfg.params.constant_viscosity:
        print("error: the representation of v needs constant viscosity", file=sys.stderr)
        return EXIT_USAGE
    from .solver import run

    try:
        state = make_state(g, cfg.profile(), cfg.problem)
        traj = run(state, g, cfg.problem, cfg.params, replace(cfg.scheme, t_end=at), probes=[probe])
    except StateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PositivityBreach, SolverBreakdown) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    hist = next(iter(traj.probes.values()))
    v = traj.final.v
    rec = reconstruct_v(hist)
    rel = float(np.max(np.abs(rec - v)) / np.max(np.abs(v)))
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    lines = ["x,v,v_rec,abs_err"] + [
        ",".join(fmt(a) for a in (x, vi, ri, abs(ri - vi))) for x, vi, ri in zip(g.cell_centers, v, rec)
    ]
    _write_lines(cfg.output_dir / "reconstruct.csv", lines)
    print(f"probe N={hist.N:g} t={traj.final.t:g} max relative error {rel:.6e}")
    return EXIT_OK if rel <= cfg.checks.reconstruct_tol else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagmhd", description="Lagrangian planar MHD solver and estimate harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", type=Path, default=None, help="override output directory")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("run", help="run a configuration and write series/snapshots/reports")
    p.add_argument("config", type=Path)
    common(p)
    p = sub.add_parser("mms", help="manufactured-solution convergence study")
    p.add_argument("config", type=Path)
    p.add_argument("--levels", type=int, default=None)
    common(p)
    p = sub.add_parser("roots", help="roots of z - ln z - 1 = e0 and the level-set bound")
    p.add_argument("e0", type=float)
    common(p)
    p = sub.add_parser("reconstruct", help="rebuild v from a probe history and compare")
    p.add_argument("config", type=Path)
    p.add_argument("--probe", type=float, required=True)
    p.add_argument("--at", type=float, required=True)
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "roots":
        return cmd_roots(args.e0)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    if args.command == "run":
        return cmd_run(cfg, args.quiet)
    if args.command == "mms":
        return cmd_mms(cfg, args.levels, args.quiet)
    return cmd_reconstruct(cfg, args.probe, args.at, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
