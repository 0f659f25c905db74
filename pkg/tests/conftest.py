import time
from dataclasses import replace
from pathlib import Path

import pytest

from lagmhd.config import parse_config
from lagmhd.core import make_state
from lagmhd.harness import run_harness

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def baseline_config():
    return parse_config(CONFIGS / "baseline.ini")


def harness_for(cfg, n_cells=None, dt_max=None):
    grid = cfg.grid if n_cells is None else replace(cfg.grid, n_cells=n_cells)
    scheme = cfg.scheme if dt_max is None else replace(cfg.scheme, dt_max=dt_max)
    state = make_state(grid, cfg.profile(), cfg.problem)
    t0 = time.perf_counter()
    result = run_harness(
        state, grid, cfg.problem, cfg.params, scheme,
        probes=cfg.probes, entropy_delta=cfg.checks.entropy_delta,
        reconstruct_tol=cfg.checks.reconstruct_tol,
    )
    return grid, result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def baseline(baseline_config):
    return harness_for(baseline_config)


@pytest.fixture(scope="session")
def baseline_refined(baseline_config):
    cfg = baseline_config
    return harness_for(cfg, 2 * cfg.grid.n_cells, 0.5 * cfg.scheme.dt_max)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
