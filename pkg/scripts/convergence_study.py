"""Spatial convergence of every manufactured case (dt = dx^2) and the
representation error of v under joint (dx, dt) refinement.

    python scripts/convergence_study.py [--levels 100 200 400]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from lagmhd.config import parse_config
from lagmhd.core import make_state
from lagmhd.harness import run_harness
from lagmhd.verify import CASES, convergence_order

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--t-end", type=float, default=0.2)
    args = ap.parse_args()

    for name, case in CASES.items():
        res = convergence_order(case, args.levels, t_end=args.t_end)
        if res.exact:
            print(f"{name:<18} exact")
            continue
        orders = res.finest_orders()
        print(f"{name:<18} " + " ".join(f"{k}={o:.3f}" for k, o in orders.items()) + ("" if res.passes() else "  (< 1.8)"))

    cfg = parse_config(ROOT / "configs" / "baseline.ini")
    prev = None
    for k in range(3):
        grid = replace(cfg.grid, n_cells=cfg.grid.n_cells * 2**k)
        scheme = replace(cfg.scheme, dt_max=cfg.scheme.dt_max / 2**k)
        res = run_harness(make_state(grid, cfg.profile(), cfg.problem), grid, cfg.problem, cfg.params, scheme,
                          probes=cfg.probes, reconstruct_tol=1.0)
        ratio = "" if prev is None else f"  ratio {prev / res.reconstruct_error:.2f}"
        print(f"representation n={grid.n_cells:<5} dt_max={scheme.dt_max:<7g} error {res.reconstruct_error:.3e}{ratio}")
        prev = res.reconstruct_error


if __name__ == "__main__":
    main()
