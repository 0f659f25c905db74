import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmhd.core import Params, ProblemType, make_grid
from lagmhd.verify import (
    CASES,
    ConvergenceResult,
    LevelError,
    constant_state_soak,
    convergence_order,
    cross_integrator_gap,
    fd_residuals,
    gaussian_derivative,
    get_case,
    mms_sources,
    temporal_order,
)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 4))
def test_gaussian_derivative_vs_central_difference(x, k):
    h = 1e-5
    fd = (gaussian_derivative(x + h, k) - gaussian_derivative(x - h, k)) / (2 * h)
    assert float(gaussian_derivative(x, k + 1)) == pytest.approx(float(fd), rel=1e-6, abs=1e-8)


def test_smooth_cases_satisfy_mass_identity():
    x = np.linspace(-6, 6, 101)
    for name in ("smooth", "smooth_general"):
        src = mms_sources(get_case(name), x, 0.37)
        assert np.max(np.abs(src["v"])) < 1e-14


@pytest.mark.parametrize("name", ["smooth", "smooth_general", "smooth_neumann"])
def test_sources_match_finite_difference_oracle(name):
    case = get_case(name)
    x = np.linspace(-4, 4, 41) + (6.0 if case.problem is not ProblemType.CAUCHY else 0.0)
    src = mms_sources(case, x, 0.3)
    errs = []
    for h in (1e-2, 5e-3):
        fd = fd_residuals(case, x, 0.3, h)
        errs.append(max(float(np.max(np.abs(fd[k] - src[k]))) for k in src))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_far_field_case_is_exact():
    case = get_case("far_field")
    assert case.trivial
    res = convergence_order(case, (20, 40), t_end=0.05)
    assert res.exact and res.passes()


def test_get_case_unknown():
    with pytest.raises(KeyError, match="known"):
        get_case("nope")
    assert {"smooth", "smooth_dirichlet"} <= set(CASES)


def test_non_nested_levels_rejected():
    with pytest.raises(ValueError):
        convergence_order(get_case("smooth"), (100, 150))
    with pytest.raises(ValueError):
        convergence_order(get_case("smooth"), (100,))


@pytest.mark.parametrize("name", ["smooth_general", "smooth_dirichlet"])
def test_second_order_other_cases(name):
    res = convergence_order(get_case(name), (50, 100, 200), t_end=0.1)
    assert min(res.finest_orders().values()) > 1.8


def test_orders_from_synthetic_levels():
    errs = lambda e: dict.fromkeys(ConvergenceResult.FIELDS, e)  # noqa: E731
    res = ConvergenceResult("x", (LevelError(10, 0.2, 0.04, errs(4e-2)), LevelError(20, 0.1, 0.01, errs(1e-2))))
    assert all(o == pytest.approx(2.0) for o in res.finest_orders().values())
    res0 = ConvergenceResult("x", (LevelError(10, 0.2, 0.04, errs(0.0)), LevelError(20, 0.1, 0.01, errs(0.0))))
    assert all(math.isnan(o) for o in res0.finest_orders().values())


def test_temporal_order_is_first_order():
    orders = temporal_order(get_case("smooth"), 100, [0.02, 0.01], t_end=0.2)
    assert orders[0] == pytest.approx(1.0, abs=0.2)


@pytest.mark.parametrize("problem", list(ProblemType))
def test_soak_with_perturbation_relaxes(problem):
    grid = make_grid(problem.domain_kind, 10.0, 100)
    if problem is ProblemType.CAUCHY:
        assert constant_state_soak(problem, grid, 50, perturbation=0.1) < 0.1
    assert constant_state_soak(problem, grid, 50, params=Params(mu2=1.0, alpha=2.0, beta=1.0)) <= 1e-12


def test_integrators_agree_on_manufactured_case():
    assert cross_integrator_gap(get_case("smooth"), 80, 0.05, 1e-4) < 1e-3
