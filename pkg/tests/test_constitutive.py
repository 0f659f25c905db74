import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmhd import constitutive as law
from lagmhd.core import Params

GENERAL = Params(mu1=1.0, mu2=0.5, alpha=1.5, beta=2.0, kappa0=1.5, lam=0.8, nu=1.2, R=2.0, cv=3.0)
pos = st.floats(0.05, 20.0)


def test_unit_values():
    p = Params()
    assert law.viscosity_mu(2.0, p) == 1.0
    assert law.conductivity_kappa(3.0, p) == 1.0
    assert law.pressure(2.0, 3.0, p) == 1.5
    assert law.internal_energy(3.0, p) == 3.0
    assert law.total_pressure(2.0, 3.0, [1.0, 1.0], p) == pytest.approx(2.5)
    assert isinstance(law.viscosity_mu(2.0, p), float)


def test_array_in_array_out():
    v = np.array([0.5, 1.0, 2.0])
    out = law.viscosity_mu(v, GENERAL)
    assert out.shape == (3,)
    assert out == pytest.approx(1.0 + 0.5 * v**-1.5)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_non_positive_inputs_raise(bad):
    with pytest.raises(ValueError):
        law.pressure(bad, 1.0, Params())
    with pytest.raises(ValueError):
        law.conductivity_kappa(np.array([1.0, bad]), Params())
    with pytest.raises(ValueError):
        law.PointThermo(1.0, bad, (0.0, 0.0), 0.0)


@settings(max_examples=50, deadline=None)
@given(pos)
def test_derivatives_match_central_differences(x):
    h = 1e-6 * x
    dmu = (law.viscosity_mu(x + h, GENERAL) - law.viscosity_mu(x - h, GENERAL)) / (2 * h)
    dk = (law.conductivity_kappa(x + h, GENERAL) - law.conductivity_kappa(x - h, GENERAL)) / (2 * h)
    assert law.viscosity_mu_dv(x, GENERAL) == pytest.approx(dmu, rel=1e-6, abs=1e-9)
    assert law.conductivity_kappa_dtheta(x, GENERAL) == pytest.approx(dk, rel=1e-6, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(pos, pos, st.floats(-3, 3), st.floats(-3, 3), st.floats(-5, 5))
def test_sigma_point_and_field_agree(v, theta, b1, b2, ux):
    point = law.effective_stress_sigma(law.PointThermo(v, theta, (b1, b2), ux / v), GENERAL)
    field = law.sigma_field(np.array([v]), np.array([theta]), np.array([[b1, b2]]), np.array([ux]), GENERAL)
    expected = (1.0 + 0.5 * v**-1.5) * ux / v - 2.0 * theta / v - 0.5 * (b1 * b1 + b2 * b2)
    assert point == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert field[0] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_wave_speeds():
    p = Params()
    # gamma = 2 at unit R, cv
    assert float(law.fast_speed(1.0, 1.0, np.array([0.0, 0.0]), p)) == pytest.approx(np.sqrt(2.0))
    assert float(law.fast_speed(1.0, 1.0, np.array([1.0, 1.0]), p)) == pytest.approx(2.0)
    assert law.alfven_speed(4.0) == pytest.approx(0.5)
