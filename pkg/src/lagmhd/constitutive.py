"""Material laws of the perfect MHD gas and derived pointwise quantities.

All functions accept scalars or numpy arrays and raise ``ValueError`` when a
positivity precondition fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Params


def _positive(name, x):
    arr = np.asarray(x, dtype=float)
    # min() propagates NaN, which then fails the comparison
    if arr.size and not arr.min() > 0:
        raise ValueError(f"{name} must be positive")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def viscosity_mu(v, params: Params):
    v = _positive("v", v)
    return _out(params.mu1 + params.mu2 * v ** (-params.alpha))


def viscosity_mu_dv(v, params: Params):
    """d(mu)/dv."""
    v = _positive("v", v)
    return _out(-params.alpha * params.mu2 * v ** (-params.alpha - 1.0))


def conductivity_kappa(theta, params: Params):
    theta = _positive("theta", theta)
    return _out(params.kappa0 * theta**params.beta)


def conductivity_kappa_dtheta(theta, params: Params):
    theta = _positive("theta", theta)
    return _out(params.beta * params.kappa0 * theta ** (params.beta - 1.0))


def pressure(v, theta, params: Params):
    v = _positive("v", v)
    theta = _positive("theta", theta)
    return _out(params.R * theta / v)


def internal_energy(theta, params: Params):
    # additive constant fixed to 0
    theta = _positive("theta", theta)
    return _out(params.cv * theta)


def total_pressure(v, theta, b, params: Params):
    """``P + |b|^2 / 2``; ``b`` has a trailing axis of length 2."""
    b = np.asarray(b, dtype=float)
    return pressure(v, theta, params) + 0.5 * np.sum(b * b, axis=-1)


@dataclass(frozen=True)
class PointThermo:
    v: float
    theta: float
    b: tuple[float, float]
    ux_over_v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError("v must be positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")


def effective_stress_sigma(point: PointThermo, params: Params) -> float:
    """``mu u_x / v - (R theta / v + |b|^2 / 2)``."""
    mu = viscosity_mu(point.v, params)
    b = np.asarray(point.b, dtype=float)
    return float(mu * point.ux_over_v - pressure(point.v, point.theta, params) - 0.5 * b @ b)


def sigma_field(v, theta, b, ux, params: Params):
    """Vectorised effective stress from the strain ``u_x`` (not ``u_x / v``)."""
    v = _positive("v", v)
    return viscosity_mu(v, params) * ux / v - total_pressure(v, theta, b, params)


def fast_speed(v, theta, b, params: Params):
    """Lagrangian fast magnetosonic speed ``sqrt((gamma P + |b|^2) / v)``."""
    b = np.asarray(b, dtype=float)
    p = pressure(v, theta, params)
    return np.sqrt((params.gamma * p + np.sum(b * b, axis=-1)) / np.asarray(v))


def alfven_speed(v):
    """Transverse wave speed ``1/sqrt(v)`` in mass coordinates."""
    return 1.0 / np.sqrt(_positive("v", v))
