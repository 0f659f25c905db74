"""Baseline Gaussian-perturbation run: print the estimate checks over time.

    python scripts/run_baseline.py [--n 800] [--t-end 2.0]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from lagmhd.config import parse_config
from lagmhd.core import make_state
from lagmhd.harness import CHECKS, run_harness

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "baseline.ini")
    ap.add_argument("--n", type=int, default=None, help="override grid.n_cells")
    ap.add_argument("--t-end", type=float, default=None)
    args = ap.parse_args()

    cfg = parse_config(args.config)
    grid = cfg.grid if args.n is None else replace(cfg.grid, n_cells=args.n)
    scheme = cfg.scheme if args.t_end is None else replace(cfg.scheme, t_end=args.t_end)
    state = make_state(grid, cfg.profile(), cfg.problem)
    res = run_harness(state, grid, cfg.problem, cfg.params, scheme, probes=cfg.probes, reconstruct_tol=cfg.checks.reconstruct_tol)

    print(f"e0 = {res.e0:.6f}   alpha1 = {res.alpha1:.6f}   alpha2 = {res.alpha2:.6f}")
    print(f"{'t':>6} {'G':>10} {'int W':>10} {'(G+W)/e0':>9} {'min v':>8} {'max v':>8} {'min th':>8} {'max th':>8}  checks")
    for r in res.rows:
        rep = r.report
        flags = "".join(c[0].upper() if r.checks[c] else "-" for c in CHECKS)
        print(
            f"{rep.t:6.2f} {rep.G_entropy:10.6f} {r.W_int:10.6f} {r.entropy_lhs / res.e0:9.6f} "
            f"{rep.min_v:8.5f} {rep.M_v - 1:8.5f} {rep.min_theta:8.5f} {rep.max_theta:8.5f}  {flags}"
        )
    if res.reconstruct_error is not None:
        print(f"representation of v at the probe: max relative error {res.reconstruct_error:.3e}")
    print("all checks pass" if res.passed else f"FAILED: {res.check_summary()}")


if __name__ == "__main__":
    main()
