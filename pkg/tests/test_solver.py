import math
import warnings

import numpy as np
import pytest

from lagmhd.core import Params, ProblemType, State, gaussian_profile, make_grid, make_state
from lagmhd.solver import (
    PositivityBreach,
    SchemeConfig,
    TruncationWarning,
    dt_control,
    energy,
    run,
    step,
)

PROFILE = gaussian_profile(amp_v=0.3, amp_u=0.2, amp_theta=0.5, amp_b=(0.3, 0.2), amp_w=(0.2, -0.1))
WALL_PROFILE = gaussian_profile(amp_v=0.3, amp_u=0.2, amp_theta=0.5, amp_b=(0.3, 0.2), amp_w=(0.2, -0.1), center=5.0)


@pytest.mark.parametrize(
    "kw",
    [dict(cfl=0.0), dict(cfl=1.5), dict(dt_max=0.0), dict(integrator="rk4"), dict(record_stride=0), dict(positivity_floor=-1.0)],
)
def test_scheme_config_validation(kw):
    with pytest.raises(ValueError):
        SchemeConfig(t_end=1.0, **kw)


def test_dt_control_bounds():
    grid = make_grid("full", 10.0, 100)
    s = make_state(grid, PROFILE)
    semi = SchemeConfig(t_end=1.0, dt_max=1.0)
    expl = SchemeConfig(t_end=1.0, dt_max=1.0, integrator="explicit")
    dt_s, dt_e = dt_control(s, grid, Params(), semi), dt_control(s, grid, Params(), expl)
    assert 0 < dt_e < dt_s <= 0.5 * grid.dx / math.sqrt(2.0)
    short = SchemeConfig(t_end=1e-4, dt_max=1.0)
    assert dt_control(s, grid, Params(), short) == pytest.approx(1e-4)


def _residual_sum(dt, integrator="semi-implicit", problem=ProblemType.NEUMANN_THETA, t_end=0.2):
    grid = make_grid(problem.domain_kind, 15.0, 300)
    s = make_state(grid, WALL_PROFILE if problem.has_wall else PROFILE, problem)
    scheme = SchemeConfig(t_end=t_end, dt_max=dt, integrator=integrator)
    traj = run(s, grid, problem, Params(), scheme)
    return sum(abs(r.energy_residual) for r in traj.reports)


@pytest.mark.parametrize("problem", list(ProblemType))
def test_energy_residual_shrinks_with_dt(problem):
    coarse, fine = _residual_sum(4e-3, problem=problem), _residual_sum(1e-3, problem=problem)
    assert fine < 0.5 * coarse
    assert fine < 1e-3


def test_explicit_and_semi_implicit_agree():
    grid = make_grid("full", 10.0, 100)
    s0 = make_state(grid, PROFILE)
    a = run(s0, grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=0.1, dt_max=2e-4)).final
    b = run(s0, grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=0.1, dt_max=2e-4, integrator="explicit")).final
    assert np.max(np.abs(a.v - b.v)) < 1e-3
    assert np.max(np.abs(a.theta - b.theta)) < 1e-3
    assert np.max(np.abs(a.b - b.b)) < 1e-3


def test_wall_nodes_stay_clamped():
    grid = make_grid("half", 15.0, 120)
    traj = run(make_state(grid, WALL_PROFILE, ProblemType.DIRICHLET_THETA), grid, ProblemType.DIRICHLET_THETA,
               Params(), SchemeConfig(t_end=0.1))
    # the initial data only satisfies the wall conditions to the compatibility tolerance
    for s in traj.states[1:]:
        assert s.u[0] == 0.0 and np.all(s.w[0] == 0.0)


def test_record_stride_keeps_final_state():
    grid = make_grid("full", 10.0, 50)
    traj = run(make_state(grid, PROFILE), grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=0.105, dt_max=0.01, record_stride=4))
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.105)
    assert len(traj.reports) == 11
    assert len(traj.states) == 1 + 2 + 1


def test_positivity_breach_carries_location():
    grid = make_grid("full", 10.0, 100)
    s = make_state(grid, gaussian_profile(amp_u=-8.0, amp_v=-0.4))
    with pytest.raises(PositivityBreach) as info:
        run(s, grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=1.0, positivity_floor=0.5))
    e = info.value
    assert e.field == "v" and e.value <= 0.5 and e.floor == 0.5
    assert e.x == pytest.approx(grid.cell_centers[e.index])
    assert 0 < e.t < 1.0


def test_truncation_warning_on_small_domain():
    grid = make_grid("full", 4.0, 80)
    with pytest.warns(TruncationWarning):
        traj = run(make_state(grid, PROFILE), grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=0.5))
    assert len(traj.warnings) == 1


def test_no_warning_on_wide_domain():
    grid = make_grid("full", 20.0, 200)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        run(make_state(grid, PROFILE), grid, ProblemType.CAUCHY, Params(), SchemeConfig(t_end=0.2))


def test_step_is_deterministic():
    grid = make_grid("full", 10.0, 64)
    s = make_state(grid, PROFILE)
    scheme = SchemeConfig(t_end=1.0)
    a, ra = step(s, grid, ProblemType.CAUCHY, Params(), scheme)
    b, rb = step(s, grid, ProblemType.CAUCHY, Params(), scheme)
    assert a.allclose(b) and ra == rb


def test_energy_of_far_field():
    n = 10
    s = State(0.0, np.ones(n), np.ones(n), np.zeros((n, 2)), np.zeros(n + 1), np.zeros((n + 1, 2)))
    assert energy(s, 0.5, Params(cv=2.0)) == pytest.approx(10.0)
