"""A priori estimate harness: energy/entropy functionals and the explicit
inequalities that can be checked along discrete trajectories.

Spatial integrals use the midpoint rule on cells; node quantities enter cell
integrands through the average of the two adjacent node values (of the
squared quantity, where the integrand is a square). Prefix integrals in
space and all time integrals use the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import constitutive as law
from .core import (
    FAR_THETA,
    FAR_V,
    DomainKind,
    Grid,
    Params,
    ProblemType,
    State,
    apply_boundary,
    check_problem,
)
from .stencil import dx_cell_to_node, dx_node_to_cell, harmonic_mean, node_to_cell_average

MEASURE_CONSTANT = 2.0 / (2.0 * math.log(2.0) - 1.0)


def _problem_for(grid: Grid, problem: ProblemType | None) -> ProblemType:
    if problem is None:
        if grid.domain_kind is DomainKind.HALF:
            raise ValueError("half-line grids need an explicit problem type")
        return ProblemType.CAUCHY
    check_problem(problem, grid)
    return problem


def _sq(a):
    return a * a if a.ndim == 1 else np.sum(a * a, axis=1)


def _l2_cells(f2, dx):
    return math.sqrt(float(np.sum(f2)) * dx)


def _l2_nodes(f2, dx):
    return math.sqrt(float(np.sum(node_to_cell_average(f2))) * dx)


@dataclass(frozen=True)
class LyapunovReport:
    t: float
    E_total: float
    G_entropy: float
    W: float
    V: float
    V_tilde: float
    M_v: float
    min_v: float
    min_theta: float
    max_theta: float
    measure_lo: float
    measure_hi: float
    h1_v: float
    h1_u: float
    h1_theta: float
    h1_b: float
    h1_w: float
    dx_v: float
    dx_u: float
    dx_theta: float
    dx_b: float
    dx_w: float
    B_cross: float

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict:
        return asdict(self)


def dissipation_density(state: State, grid: Grid, params: Params, problem: ProblemType) -> np.ndarray:
    """Cell values of ``kappa theta_x^2/(v theta^2) + (mu u_x^2 + lam|w_x|^2 + nu|b_x|^2)/(v theta)``."""
    g = apply_boundary(state, problem)
    dx = grid.dx
    v, theta = state.v, state.theta
    ux = dx_node_to_cell(g.u, dx)
    wx = dx_node_to_cell(g.w, dx)
    cell = (law.viscosity_mu(v, params) * ux * ux + params.lam * _sq(wx)) / (v * theta)

    thx = dx_cell_to_node(g.theta, dx)
    bx = dx_cell_to_node(g.b, dx)
    kv = np.empty_like(g.v)
    kv[1:] = law.conductivity_kappa(g.theta[1:], params) / g.v[1:]
    kv[0] = kv[1] if problem.has_wall else law.conductivity_kappa(g.theta[0], params) / g.v[0]
    k_node = harmonic_mean(kv[:-1], kv[1:])
    inv = 1.0 / g.v
    h_node = harmonic_mean(inv[:-1], inv[1:])
    th_node = 0.5 * (g.theta[:-1] + g.theta[1:])
    if problem is ProblemType.DIRICHLET_THETA:
        th_node[0] = FAR_THETA
    node = k_node * thx * thx / th_node**2 + params.nu * h_node * _sq(bx) / th_node
    return cell + node_to_cell_average(node)


def dissipation_W(state: State, grid: Grid, params: Params, problem: ProblemType | None = None) -> float:
    problem = _problem_for(grid, problem)
    return float(np.sum(dissipation_density(state, grid, params, problem)) * grid.dx)


def entropy_density(state: State, params: Params) -> np.ndarray:
    kin = node_to_cell_average(_sq(state.u) + _sq(state.w))
    v, th = state.v, state.theta
    return (
        0.5 * (kin + v * _sq(state.b))
        + params.R * (v - np.log(v) - 1.0)
        + params.cv * (th - np.log(th) - 1.0)
    )


def entropy_G(state: State, grid: Grid, params: Params) -> float:
    return float(np.sum(entropy_density(state, params)) * grid.dx)


def lyapunov_report(
    state: State, grid: Grid, params: Params, problem: ProblemType | None = None
) -> LyapunovReport:
    problem = _problem_for(grid, problem)
    if np.any(state.v <= 0) or np.any(state.theta <= 0):
        raise ValueError("lyapunov_report needs v > 0 and theta > 0")
    dx = grid.dx
    g = apply_boundary(state, problem)
    v, th, b = state.v, state.theta, state.b

    kin2 = node_to_cell_average(_sq(state.u) + _sq(state.w))
    kinetic = 0.5 * float(np.sum(kin2 + v * _sq(b))) * dx
    E = float(np.sum(law.internal_energy(th, params))) * dx + kinetic
    G = entropy_G(state, grid, params)
    W = float(np.sum(dissipation_density(state, grid, params, problem))) * dx
    V = kinetic + W
    wx = dx_node_to_cell(g.w, dx)
    V_tilde = float(np.sum(_sq(wx) / v)) * dx + V + 1.0

    # perturbation norms; cell derivatives live on nodes and vice versa
    dv = dx_cell_to_node(g.v, dx)
    dth = dx_cell_to_node(g.theta, dx)
    db = dx_cell_to_node(g.b, dx)
    du = dx_node_to_cell(g.u, dx)
    l2 = {
        "v": _l2_cells((v - FAR_V) ** 2, dx),
        "theta": _l2_cells((th - FAR_THETA) ** 2, dx),
        "b": _l2_cells(_sq(b), dx),
        "u": _l2_nodes(_sq(g.u), dx),
        "w": _l2_nodes(_sq(g.w), dx),
    }
    d2 = {
        "v": _l2_nodes(dv * dv, dx),
        "theta": _l2_nodes(dth * dth, dx),
        "b": _l2_nodes(_sq(db), dx),
        "u": _l2_cells(du * du, dx),
        "w": _l2_cells(_sq(wx), dx),
    }
    h1 = {k: math.hypot(l2[k], d2[k]) for k in l2}

    lnv_x = dx_cell_to_node(np.log(g.v), dx)
    B_cross = float(np.sum(g.u * lnv_x)) * dx - float(np.sum((th - 1.0) * np.log(v))) * dx

    return LyapunovReport(
        t=state.t,
        E_total=E,
        G_entropy=G,
        W=W,
        V=V,
        V_tilde=V_tilde,
        M_v=1.0 + float(np.max(v)),
        min_v=float(np.min(v)),
        min_theta=float(np.min(th)),
        max_theta=float(np.max(th)),
        measure_lo=dx * int(np.count_nonzero(th < 0.5)),
        measure_hi=dx * int(np.count_nonzero(th > 2.0)),
        h1_v=h1["v"],
        h1_u=h1["u"],
        h1_theta=h1["theta"],
        h1_b=h1["b"],
        h1_w=h1["w"],
        dx_v=d2["v"],
        dx_u=d2["u"],
        dx_theta=d2["theta"],
        dx_b=d2["b"],
        dx_w=d2["w"],
        B_cross=B_cross,
    )


def e0(initial_state: State, grid: Grid, params: Params) -> float:
    """Twice the initial entropy functional."""
    return 2.0 * entropy_G(initial_state, grid, params)


class DissipationIntegral:
    """Running trapezoid integral of ``W`` over time."""

    def __init__(self, state: State, grid: Grid, params: Params, problem: ProblemType):
        self.grid, self.params, self.problem = grid, params, problem
        self.t = state.t
        self.W = dissipation_W(state, grid, params, problem)
        self.value = 0.0

    def update(self, state: State) -> float:
        W = dissipation_W(state, self.grid, self.params, self.problem)
        self.value += 0.5 * (state.t - self.t) * (W + self.W)
        self.t, self.W = state.t, W
        return self.value


# ---------------------------------------------------------------------------
# roots of z - ln z - 1 = e0


def _entropy_excess(z: float) -> float:
    return z - math.log(z) - 1.0


def _bisect(f, lo, hi, tol):
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            break
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def entropy_roots(e0: float, tol: float = 1e-13) -> tuple[float, float]:
    """Roots ``alpha1 <= 1 <= alpha2`` of ``z - ln z - 1 = e0`` by bisection."""
    if not (e0 >= 0 and math.isfinite(e0)):
        raise ValueError(f"e0 must be a finite non-negative number, got {e0}")
    if e0 == 0:
        return 1.0, 1.0
    # lower root in s = ln z so that large e0 cannot underflow the bracket
    g = lambda s: math.exp(s) - s - 1.0 - e0  # noqa: E731
    a1 = math.exp(_bisect(g, -(2.0 + e0), 0.0, tol))
    f = lambda z: _entropy_excess(z) - e0  # noqa: E731
    hi = 2.0
    while f(hi) < 0:
        hi *= 2.0
    a2 = _bisect(f, 1.0, hi, tol)
    return a1, a2


def measure_bound(e0: float) -> float:
    return MEASURE_CONSTANT * e0


# ---------------------------------------------------------------------------
# unit-window averages


@dataclass(frozen=True)
class Window:
    N: int
    mean_v: float
    mean_theta: float
    ok_v: bool
    ok_theta: bool


@dataclass(frozen=True)
class WindowReport:
    alpha1: float
    alpha2: float
    windows: tuple[Window, ...]

    @property
    def ok(self) -> bool:
        return all(w.ok_v and w.ok_theta for w in self.windows)


def _window_integrals(cell_field, grid: Grid, starts):
    cum = np.concatenate(([0.0], np.cumsum(cell_field) * grid.dx))
    xn = grid.node_positions
    return np.interp(starts + 1.0, xn, cum) - np.interp(starts, xn, cum)


def window_average_check(state: State, grid: Grid, e0: float, tol: float = 1e-9) -> WindowReport:
    """Means of ``v`` and ``theta`` over every integer window ``[N, N+1]`` in the domain."""
    lo = math.ceil(grid.x_left - 1e-12)
    hi = math.floor(grid.x_right + 1e-12) - 1
    if hi < lo:
        raise ValueError("domain is shorter than one unit window")
    a1, a2 = entropy_roots(e0)
    starts = np.arange(lo, hi + 1, dtype=float)
    mv = _window_integrals(state.v, grid, starts)
    mt = _window_integrals(state.theta, grid, starts)
    inside = lambda m: a1 - tol <= m <= a2 + tol  # noqa: E731
    wins = tuple(
        Window(int(N), float(a), float(c), inside(a), inside(c)) for N, a, c in zip(starts, mv, mt)
    )
    return WindowReport(a1, a2, wins)


# ---------------------------------------------------------------------------
# level sets and plus parts


@dataclass(frozen=True)
class BoundCheck:
    value: float
    bound: float
    slack: float
    ok: bool


def measure_bound_check(report: LyapunovReport, e0: float) -> BoundCheck:
    total = report.measure_lo + report.measure_hi
    bound = measure_bound(e0)
    return BoundCheck(total, bound, bound - total, total <= bound)


def plus_part_norm(field, dx: float, threshold: float, p: float, direction: str = "above") -> float:
    """``||(f - c)_+||_p`` or, for ``direction='below_reciprocal'``, ``||(1/f - c)_+||_p``."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    f = np.asarray(field, dtype=float)
    if direction == "above":
        part = np.maximum(f - threshold, 0.0)
    elif direction == "below_reciprocal":
        if np.any(f <= 0):
            raise ValueError("below_reciprocal needs a positive field")
        part = np.maximum(1.0 / f - threshold, 0.0)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if math.isinf(p):
        return float(np.max(part)) if part.size else 0.0
    return float((np.sum(part**p) * dx) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Sobolev-type sup bound


@dataclass(frozen=True)
class SobolevCheck:
    sup_sq: float
    bound: float
    slack: float
    ok: bool


def sobolev_check(f, dx: float, staggering: str = "cell", left: str = "zero") -> SobolevCheck:
    """Check ``sup f^2 <= 2 ||f|| ||f_x||`` for a perturbation field.

    Cell fields are padded with zero ghosts (``left='even'`` mirrors at a
    wall instead); node fields are differenced directly and their norm uses
    the trapezoid rule. A quadrature allowance ``dx * max|f| * max|f_x|`` is
    added to the bound.
    """
    f = np.asarray(f, dtype=float)
    if staggering == "cell":
        lg = f[0] if left == "even" else 0.0
        fx = np.diff(np.concatenate(([lg], f, [0.0]))) / dx
        norm = math.sqrt(float(np.sum(f * f)) * dx)
        dnorm = math.sqrt(float(np.sum(node_to_cell_average(fx * fx))) * dx)
    elif staggering == "node":
        fx = np.diff(f) / dx
        norm = math.sqrt(float(np.sum(node_to_cell_average(f * f))) * dx)
        dnorm = math.sqrt(float(np.sum(fx * fx)) * dx)
    else:
        raise ValueError(f"unknown staggering {staggering!r}")
    sup_sq = float(np.max(f * f)) if f.size else 0.0
    allowance = dx * (float(np.max(np.abs(f))) if f.size else 0.0) * (float(np.max(np.abs(fx))) if fx.size else 0.0)
    bound = 2.0 * norm * dnorm * (1.0 + 1e-6) + allowance
    return SobolevCheck(sup_sq, bound, bound - sup_sq, sup_sq <= bound)


def perturbation_fields(state: State) -> dict[str, tuple[np.ndarray, str]]:
    return {
        "v": (state.v - FAR_V, "cell"),
        "theta": (state.theta - FAR_THETA, "cell"),
        "b1": (state.b[:, 0], "cell"),
        "b2": (state.b[:, 1], "cell"),
        "u": (state.u, "node"),
        "w1": (state.w[:, 0], "node"),
        "w2": (state.w[:, 1], "node"),
    }


def sobolev_all(state: State, grid: Grid, problem: ProblemType | None = None) -> dict[str, SobolevCheck]:
    problem = _problem_for(grid, problem)
    out = {}
    for name, (f, stag) in perturbation_fields(state).items():
        left = "zero"
        if problem.has_wall and stag == "cell" and name == "v":
            left = "even"
        if problem is ProblemType.NEUMANN_THETA and name == "theta":
            left = "even"
        out[name] = sobolev_check(f, grid.dx, stag, left)
    return out


# ---------------------------------------------------------------------------
# probe histories and the representation of v


def nearest_node(grid: Grid, x: float) -> int:
    j = int(round((x - grid.x_left) / grid.dx))
    return min(max(j, 0), grid.n_cells)


def _prefix_integral(u: np.ndarray, grid: Grid, j: int) -> np.ndarray:
    """``int_{x_j}^{x} u dy`` at every cell centre (trapezoid, midpoint value interpolated)."""
    dx = grid.dx
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (u[1:] + u[:-1]) * dx)))
    cum = cum - cum[j]
    return cum[:-1] + 0.125 * dx * (3.0 * u[:-1] + u[1:])


def _sigma_at_node(state: State, grid: Grid, params: Params, problem: ProblemType, j: int) -> float:
    g = apply_boundary(state, problem)
    ux = dx_node_to_cell(g.u, grid.dx)
    sig = law.sigma_field(state.v, state.theta, state.b, ux, params)
    left = sig[j - 1] if j > 0 else sig[0]
    right = sig[j] if j < grid.n_cells else sig[-1]
    return 0.5 * (left + right)


@dataclass
class ProbeHistory:
    """Per-step record at a probe node ``N`` needed to rebuild ``v``.

    ``prefix[k]`` holds ``int_N^x u(y, t_k) dy`` at cell centres and
    ``heat[k]`` holds ``R theta + v |b|^2 / 2`` at cell centres.
    """

    N: float
    node: int
    mu: float
    x: np.ndarray
    v0: np.ndarray
    times: list[float] = field(default_factory=list)
    sigma: list[float] = field(default_factory=list)
    prefix: list[np.ndarray] = field(default_factory=list)
    heat: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def start(cls, N: float, grid: Grid, state: State, params: Params, problem: ProblemType) -> "ProbeHistory":
        if not params.constant_viscosity:
            raise ValueError("the representation of v needs a constant viscosity")
        j = nearest_node(grid, N)
        hist = cls(
            N=float(grid.node_positions[j]),
            node=j,
            mu=params.mu1 + params.mu2,
            x=grid.cell_centers.copy(),
            v0=np.array(state.v),
        )
        hist.record(state, grid, params, problem)
        return hist

    def record(self, state: State, grid: Grid, params: Params, problem: ProblemType) -> None:
        if self.times and not state.t > self.times[-1]:
            raise ValueError("probe times must be strictly increasing")
        self.times.append(state.t)
        self.sigma.append(_sigma_at_node(state, grid, params, problem, self.node))
        self.prefix.append(_prefix_integral(np.asarray(state.u), grid, self.node))
        self.heat.append(params.R * state.theta + 0.5 * state.v * _sq(state.b))


def _cumtrapz(y, t):
    y = np.asarray(y)
    dt = np.diff(t)
    shape = (-1,) + (1,) * (y.ndim - 1)
    steps = 0.5 * dt.reshape(shape) * (y[1:] + y[:-1])
    return np.concatenate((np.zeros((1,) + y.shape[1:]), np.cumsum(steps, axis=0)))


def reconstruct_v(history: ProbeHistory, t: float | None = None, x=None) -> np.ndarray:
    """Rebuild ``v(x, t)`` from ``v0``, the prefix integrals of ``u`` and the
    probe stress via ``v = B Y (1 + int_0^t q / (mu B Y) dtau)`` with
    ``B = v0 exp((I(t) - I(0))/mu)``, ``Y = exp(int_0^t sigma(N) dtau / mu)``.

    ``t`` defaults to the last recorded time and is linearly interpolated
    between records; ``x`` defaults to the cell centres.
    """
    if not history.times:
        raise ValueError("empty probe history")
    times = np.asarray(history.times)
    if t is None:
        t = times[-1]
    if not (times[0] - 1e-12 <= t <= times[-1] + 1e-12):
        raise ValueError(f"t = {t} outside the recorded interval [{times[0]}, {times[-1]}]")
    mu = history.mu
    prefix = np.asarray(history.prefix)
    B = history.v0[None, :] * np.exp((prefix - prefix[0][None, :]) / mu)
    logY = _cumtrapz(np.asarray(history.sigma) / mu, times)
    BY = B * np.exp(logY)[:, None]
    integral = _cumtrapz(np.asarray(history.heat) / (mu * BY), times)
    rec = BY * (1.0 + integral)

    k = int(np.searchsorted(times, t, side="right")) - 1
    k = min(max(k, 0), len(times) - 1)
    if k == len(times) - 1 or abs(times[k] - t) <= 1e-12:
        out = rec[k]
    else:
        s = (t - times[k]) / (times[k + 1] - times[k])
        out = (1.0 - s) * rec[k] + s * rec[k + 1]
    if x is None:
        return out
    return np.interp(np.asarray(x, dtype=float), history.x, out)
