"""Semi-implicit staggered finite-difference integrator.

One step advances, in order: ``v`` (exact discrete mass balance), ``u``
(implicit viscosity), ``w`` (implicit shear viscosity), ``m = v b`` (implicit
resistivity) and ``theta`` (implicit conduction, linearly implicit work
term). An explicit forward-Euler integrator on the same spatial operators is
kept as an oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import constitutive as law
from .core import (
    FAR_B,
    FAR_THETA,
    FAR_U,
    FAR_V,
    FAR_W,
    Ghosted,
    Grid,
    Params,
    ProblemType,
    State,
    apply_boundary,
    check_problem,
    pad_b,
    pad_v,
)
from .functionals import ProbeHistory
from .stencil import (
    BC,
    SolverBreakdown,
    diffusion_solve,
    dx_cell_to_node,
    dx_node_to_cell,
    harmonic_mean,
    node_to_cell_average,
)

__all__ = [
    "PositivityBreach",
    "SolverBreakdown",
    "SchemeConfig",
    "StepReport",
    "Trajectory",
    "TruncationWarning",
    "dt_control",
    "dx_cell_to_node",
    "dx_node_to_cell",
    "diffusion_solve",
    "energy",
    "run",
    "step",
]

Sources = Callable[[np.ndarray, float], Mapping[str, np.ndarray]]

TRUNCATION_TOL = 1e-8
TRUNCATION_BUFFER = 0.1


class PositivityBreach(RuntimeError):
    def __init__(self, field: str, index: int, x: float, t: float, value: float, floor: float):
        super().__init__(
            f"{field} = {value:.6g} below positivity floor {floor:g} "
            f"at x = {x:.6g} (cell {index}), t = {t:.6g}"
        )
        self.field = field
        self.index = index
        self.x = x
        self.t = t
        self.value = value
        self.floor = floor


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    t_end: float
    dt_max: float = 1e-2
    cfl: float = 0.5
    integrator: str = "semi-implicit"
    positivity_floor: float = 1e-10
    record_stride: int = 1
    magnetic: bool = True

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.integrator not in ("semi-implicit", "explicit"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not self.positivity_floor >= 0:
            raise ValueError("positivity_floor must be >= 0")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")


@dataclass(frozen=True)
class StepReport:
    t: float
    dt: float
    boundary_flux: float
    energy_residual: float
    min_v: float
    min_theta: float

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "dt": self.dt,
            "boundary_flux": self.boundary_flux,
            "energy_residual": self.energy_residual,
            "min_v": self.min_v,
            "min_theta": self.min_theta,
        }


# ---------------------------------------------------------------------------
# diagnostics shared by both integrators


def energy(state: State, dx: float, params: Params) -> float:
    """Discrete total energy; node quantities enter through cell averages of squares."""
    kin = node_to_cell_average(state.u**2 + np.sum(state.w**2, axis=1))
    cell = params.cv * state.theta + 0.5 * state.v * np.sum(state.b**2, axis=1) + 0.5 * kin
    return float(np.sum(cell) * dx)


def _heat_coeff(g: Ghosted, params: Params) -> np.ndarray:
    """``kappa / v`` at nodes (harmonic mean), wall node from the first cell."""
    k = law.conductivity_kappa(g.theta[1:-1], params) / g.v[1:-1]
    far = law.conductivity_kappa(FAR_THETA, params) / FAR_V
    left = k[0] if g.problem.has_wall else far
    padded = np.concatenate(([left], k, [far]))
    return harmonic_mean(padded[:-1], padded[1:])


def _inv_v_nodes(v_padded: np.ndarray) -> np.ndarray:
    inv = 1.0 / v_padded
    return harmonic_mean(inv[:-1], inv[1:])


def boundary_flux(g: Ghosted, dx: float, params: Params) -> float:
    """Net inflow of the energy flux at the domain ends (``u = w = 0`` there).

    Only the two end faces are evaluated; coefficients follow ``_heat_coeff``
    and ``_inv_v_nodes``.
    """
    th, v, b = g.theta, g.v, g.b
    kap = law.conductivity_kappa(np.array([th[1], th[-2], FAR_THETA]), params)
    k_first, k_last, far = kap[0] / v[1], kap[1] / v[-2], kap[2] / FAR_V

    def face(a, c, ka, kc):
        k = 2.0 * ka * kc / (ka + kc)
        h = 2.0 / (v[a] + v[c])  # harmonic mean of 1/v
        bx = (b[c] - b[a]) / dx
        bf = 0.5 * (b[a] + b[c])
        return k * (th[c] - th[a]) / dx + params.nu * h * float(bf @ bx)

    left = face(0, 1, k_first if g.problem.has_wall else far, k_first)
    right = face(-2, -1, k_last, far)
    return float(right - left)


def _theta_bc(problem: ProblemType) -> tuple[BC, BC]:
    right = BC.dirichlet(FAR_THETA)
    if problem is ProblemType.DIRICHLET_THETA:
        return BC.odd(FAR_THETA), right
    if problem is ProblemType.NEUMANN_THETA:
        return BC.neumann(), right
    return BC.dirichlet(FAR_THETA), right


def _b_bc(problem: ProblemType) -> tuple[BC, BC]:
    left = BC.odd(FAR_B) if problem.has_wall else BC.dirichlet(FAR_B)
    return left, BC.dirichlet(FAR_B)


_NODE_BC = (BC.dirichlet(FAR_U), BC.dirichlet(FAR_U))


def _check_floor(name, arr, floor, grid: Grid, t):
    bad = ~(arr > floor) | ~np.isfinite(arr)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PositivityBreach(name, i, float(grid.cell_centers[i]), t, float(arr[i]), floor)


def _eval_sources(sources: Sources | None, grid: Grid, t: float):
    if sources is None:
        return None
    at_cells = sources(grid.cell_centers, t)
    at_nodes = sources(grid.node_positions, t)
    return {
        "v": np.asarray(at_cells["v"]),
        "m": np.asarray(at_cells["m"]),
        "theta": np.asarray(at_cells["theta"]),
        "u": np.asarray(at_nodes["u"])[1:-1],
        "w": np.asarray(at_nodes["w"])[1:-1],
    }


def _b_dissipation(b_padded, v_padded, dx, params):
    bx = dx_cell_to_node(b_padded, dx)
    q = params.nu * _inv_v_nodes(v_padded) * np.sum(bx * bx, axis=1)
    return node_to_cell_average(q)


# ---------------------------------------------------------------------------
# integrators


def _semi_implicit(g: Ghosted, grid: Grid, params: Params, scheme: SchemeConfig, dt, src_old, src_new):
    dx = grid.dx
    problem = g.problem
    t_new = g.t + dt
    v, theta, b = g.v[1:-1], g.theta[1:-1], g.b[1:-1]
    u, w = g.u, g.w

    # (a) mass
    dvdt = dx_node_to_cell(u, dx)
    if src_old is not None:
        dvdt = dvdt + src_old["v"]
    v_new = v + dt * dvdt
    _check_floor("v", v_new, scheme.positivity_floor, grid, t_new)

    # (b) momentum: explicit total-pressure gradient (v^{n+1}, theta^n, b^n), implicit viscosity
    pi = law.total_pressure(v_new, theta, b, params)
    rhs_u = u[1:-1] - dt * np.diff(pi) / dx
    if src_new is not None:
        rhs_u = rhs_u + dt * src_new["u"]
    visc = law.viscosity_mu(v_new, params) / v_new
    u_new = np.zeros_like(u)
    u_new[1:-1] = diffusion_solve(visc, rhs_u, dt, dx, _NODE_BC)

    w_new = np.zeros_like(w)
    b_new = np.zeros_like(b)
    if scheme.magnetic:
        # (c) transverse momentum, explicit b_x^n
        rhs_w = w[1:-1] + dt * np.diff(b, axis=0) / dx
        if src_new is not None:
            rhs_w = rhs_w + dt * src_new["w"]
        w_new[1:-1] = diffusion_solve(params.lam / v_new, rhs_w, dt, dx, _NODE_BC)

        # (d) m = v b with implicit resistivity, explicit w_x^{n+1}
        v_pad = pad_v(v_new, problem)
        rhs_m = v[:, None] * b + dt * dx_node_to_cell(w_new, dx)
        if src_new is not None:
            rhs_m = rhs_m + dt * src_new["m"]
        coeff_b = params.nu * _inv_v_nodes(v_pad)
        b_new = diffusion_solve(coeff_b, rhs_m, dt, dx, _b_bc(problem), mass=v_new)

    # (e) temperature
    ux = dx_node_to_cell(u_new, dx)
    mu_new = law.viscosity_mu(v_new, params)
    source = mu_new * ux * ux / v_new
    if scheme.magnetic:
        wx = dx_node_to_cell(w_new, dx)
        source = source + params.lam * np.sum(wx * wx, axis=1) / v_new
        source = source + _b_dissipation(pad_b(b_new, problem), pad_v(v_new, problem), dx, params)
    rhs_t = params.cv * theta + dt * source
    if src_new is not None:
        rhs_t = rhs_t + dt * src_new["theta"]
    mass_t = params.cv + dt * params.R * ux / v_new
    if np.any(mass_t <= 0):
        i = int(np.argmin(mass_t))
        raise SolverBreakdown(
            f"temperature system lost diagonal dominance at x = {grid.cell_centers[i]:.6g}, t = {t_new:.6g}",
            index=i,
        )
    g_half = Ghosted(g.t, pad_v(v_new, problem), g.theta, g.b, u_new, w_new, problem)
    theta_new = diffusion_solve(_heat_coeff(g_half, params), rhs_t, dt, dx, _theta_bc(problem), mass=mass_t)
    _check_floor("theta", theta_new, scheme.positivity_floor, grid, t_new)

    return State(t=t_new, v=v_new, theta=theta_new, b=b_new, u=u_new, w=w_new)


def _explicit(g: Ghosted, grid: Grid, params: Params, scheme: SchemeConfig, dt, src_old, src_new):
    dx = grid.dx
    t_new = g.t + dt
    v, theta, b = g.v[1:-1], g.theta[1:-1], g.b[1:-1]
    u, w = g.u, g.w
    s = src_old

    ux = dx_node_to_cell(u, dx)
    mu = law.viscosity_mu(v, params)
    v_new = v + dt * (ux + (s["v"] if s else 0.0))
    _check_floor("v", v_new, scheme.positivity_floor, grid, t_new)

    pi = law.total_pressure(v, theta, b, params)
    stress = mu * ux / v - pi
    u_new = np.zeros_like(u)
    u_new[1:-1] = u[1:-1] + dt * (np.diff(stress) / dx + (s["u"] if s else 0.0))

    w_new = np.zeros_like(w)
    b_new = np.zeros_like(b)
    wx = dx_node_to_cell(w, dx)
    heat = mu * ux * ux / v
    if scheme.magnetic:
        tstress = params.lam * wx / v[:, None]
        w_new[1:-1] = w[1:-1] + dt * (np.diff(b, axis=0) / dx + np.diff(tstress, axis=0) / dx + (s["w"] if s else 0.0))
        bflux = params.nu * _inv_v_nodes(g.v)[:, None] * dx_cell_to_node(g.b, dx)
        m_new = v[:, None] * b + dt * (wx + np.diff(bflux, axis=0) / dx + (s["m"] if s else 0.0))
        b_new = m_new / v_new[:, None]
        heat = heat + params.lam * np.sum(wx * wx, axis=1) / v + _b_dissipation(g.b, g.v, dx, params)

    qflux = _heat_coeff(g, params) * dx_cell_to_node(g.theta, dx)
    rate = -params.R * theta * ux / v + np.diff(qflux) / dx + heat + (s["theta"] if s else 0.0)
    theta_new = theta + dt * rate / params.cv
    _check_floor("theta", theta_new, scheme.positivity_floor, grid, t_new)

    return State(t=t_new, v=v_new, theta=theta_new, b=b_new, u=u_new, w=w_new)


def dt_control(state: State, grid: Grid, params: Params, scheme: SchemeConfig) -> float:
    """Time step from the acoustic/Alfven bound, ``dt_max`` and the time left.

    The explicit integrator additionally obeys the diffusive bound
    ``cfl * dx^2 / (2 * max diffusivity)``.
    """
    dx = grid.dx
    wave = float(np.max(law.fast_speed(state.v, state.theta, state.b, params)))
    if scheme.magnetic:
        wave = max(wave, float(np.max(law.alfven_speed(state.v))))
    bounds = [scheme.dt_max, scheme.cfl * dx / wave]
    if scheme.integrator == "explicit":
        vmin = float(np.min(state.v))
        diff = max(
            float(np.max(law.viscosity_mu(state.v, params) / state.v)),
            float(np.max(law.conductivity_kappa(state.theta, params) / state.v)) / params.cv,
        )
        if scheme.magnetic:
            diff = max(diff, params.lam / vmin, params.nu / vmin**2)
        bounds.append(scheme.cfl * dx * dx / (2.0 * diff))
    remaining = scheme.t_end - state.t
    dt = min(bounds)
    return remaining if remaining < dt else dt


def step(
    state: State,
    grid: Grid,
    problem: ProblemType,
    params: Params,
    scheme: SchemeConfig,
    dt: float | None = None,
    sources: Sources | None = None,
) -> tuple[State, StepReport]:
    """Advance one step. Raises ``PositivityBreach`` or ``SolverBreakdown``."""
    g = apply_boundary(state, problem)
    if dt is None:
        dt = dt_control(state, grid, params, scheme)
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    src_old = _eval_sources(sources, grid, state.t)
    src_new = _eval_sources(sources, grid, state.t + dt) if scheme.integrator == "semi-implicit" else None
    advance = _semi_implicit if scheme.integrator == "semi-implicit" else _explicit
    new = advance(g, grid, params, scheme, dt, src_old, src_new)

    g_new = apply_boundary(new, problem)
    flux = 0.5 * (boundary_flux(g, grid.dx, params) + boundary_flux(g_new, grid.dx, params))
    residual = energy(new, grid.dx, params) - energy(state, grid.dx, params) - dt * flux
    report = StepReport(
        t=new.t,
        dt=dt,
        boundary_flux=flux,
        energy_residual=residual,
        min_v=float(np.min(new.v)),
        min_theta=float(np.min(new.theta)),
    )
    return new, report


# ---------------------------------------------------------------------------
# time loop


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list[State] = field(default_factory=list)
    reports: list[StepReport] = field(default_factory=list)
    probes: dict[float, ProbeHistory] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def initial(self) -> State:
        return self.states[0]

    @property
    def final(self) -> State:
        return self.states[-1]


def truncation_excess(state: State, grid: Grid, problem: ProblemType) -> float:
    """Largest far-field deviation inside the buffer next to the artificial boundary."""
    buf = TRUNCATION_BUFFER * grid.L
    xc, xn = grid.cell_centers, grid.node_positions
    cmask = xc >= grid.x_right - buf
    nmask = xn >= grid.x_right - buf
    if not problem.has_wall:
        cmask |= xc <= grid.x_left + buf
        nmask |= xn <= grid.x_left + buf
    dev = 0.0
    for arr, far in ((state.v, FAR_V), (state.theta, FAR_THETA), (state.b, FAR_B)):
        if np.any(cmask):
            dev = max(dev, float(np.max(np.abs(arr[cmask] - far))))
    for arr, far in ((state.u, FAR_U), (state.w, FAR_W)):
        if np.any(nmask):
            dev = max(dev, float(np.max(np.abs(arr[nmask] - far))))
    return dev


def run(
    initial: State,
    grid: Grid,
    problem: ProblemType,
    params: Params,
    scheme: SchemeConfig,
    probes: Sequence[float] = (),
    sources: Sources | None = None,
    on_step: Callable[[State, StepReport], None] | None = None,
    max_steps: int | None = None,
) -> Trajectory:
    """Advance ``initial`` to ``scheme.t_end``.

    States are kept every ``record_stride`` steps and at the final time;
    probe histories record every step. ``on_step`` is called after each
    accepted step.
    """
    check_problem(problem, grid)
    traj = Trajectory()
    traj.times.append(initial.t)
    traj.states.append(initial)
    for N in probes:
        hist = ProbeHistory.start(N, grid, initial, params, problem)
        traj.probes[hist.N] = hist
    state = initial
    warned = False
    count = 0
    t_stop = scheme.t_end - 1e-12 * max(1.0, abs(scheme.t_end))
    while state.t < t_stop:
        if max_steps is not None and count >= max_steps:
            break
        state, report = step(state, grid, problem, params, scheme, sources=sources)
        count += 1
        traj.reports.append(report)
        for hist in traj.probes.values():
            hist.record(state, grid, params, problem)
        if on_step is not None:
            on_step(state, report)
        final = not state.t < t_stop
        if count % scheme.record_stride == 0 or final:
            traj.times.append(state.t)
            traj.states.append(state)
            excess = truncation_excess(state, grid, problem)
            if excess > TRUNCATION_TOL and not warned:
                msg = (
                    f"perturbation {excess:.3g} reaches the truncation buffer at t = {state.t:.6g}; "
                    "increase L"
                )
                warnings.warn(msg, TruncationWarning, stacklevel=2)
                traj.warnings.append(msg)
                warned = True
    return traj
