"""Grid, state, parameter and boundary-regime types.

Layout on the truncated mass-coordinate mesh::

    node:   0     1     2           n-1    n
            |-----|-----|--- ... ---|------|
    cell:      0     1                 n-1

``u`` and ``w`` live at nodes, ``v``, ``theta`` and ``b`` at cells. The far
field value of ``(v, u, theta, b, w)`` is ``(1, 0, 1, 0, 0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

FAR_V = 1.0
FAR_U = 0.0
FAR_THETA = 1.0
FAR_B = 0.0
FAR_W = 0.0

COMPAT_TOL = 1e-10


class StateError(ValueError):
    """Raised when a state or grid cannot be constructed as requested."""


class CompatibilityError(StateError):
    """Initial data disagrees with the wall conditions of a half-line regime."""


class DomainKind(str, enum.Enum):
    FULL = "full"
    HALF = "half"


class ProblemType(str, enum.Enum):
    CAUCHY = "cauchy"
    DIRICHLET_THETA = "dirichlet"
    NEUMANN_THETA = "neumann"

    @property
    def domain_kind(self) -> DomainKind:
        return DomainKind.FULL if self is ProblemType.CAUCHY else DomainKind.HALF

    @property
    def has_wall(self) -> bool:
        return self is not ProblemType.CAUCHY


def check_problem(problem: ProblemType, grid: "Grid") -> None:
    if problem.domain_kind != grid.domain_kind:
        raise StateError(
            f"problem {problem.value!r} needs a {problem.domain_kind.value}-line grid, "
            f"got {grid.domain_kind.value}-line"
        )


@dataclass(frozen=True)
class Grid:
    domain_kind: DomainKind
    L: float
    n_cells: int

    def __post_init__(self):
        object.__setattr__(self, "domain_kind", DomainKind(self.domain_kind))
        if not (math.isfinite(self.L) and self.L > 0):
            raise StateError(f"L must be positive, got {self.L}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise StateError(f"n_cells must be an integer >= 4, got {self.n_cells}")

    @property
    def x_left(self) -> float:
        return -self.L if self.domain_kind is DomainKind.FULL else 0.0

    @property
    def x_right(self) -> float:
        return self.L

    @property
    def extent(self) -> float:
        return self.x_right - self.x_left

    @property
    def dx(self) -> float:
        return self.extent / self.n_cells

    @property
    def node_positions(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n_cells + 1)

    @property
    def cell_centers(self) -> np.ndarray:
        return self.x_left + self.dx * (np.arange(self.n_cells) + 0.5)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.domain_kind, self.L, self.n_cells * factor)


def make_grid(domain_kind: str | DomainKind, L: float, n_cells: int) -> Grid:
    return Grid(DomainKind(domain_kind), float(L), int(n_cells))


@dataclass(frozen=True)
class Params:
    """Physical constants. Defaults are the unit normalization."""

    mu1: float = 1.0
    mu2: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    kappa0: float = 1.0
    lam: float = 1.0
    nu: float = 1.0
    R: float = 1.0
    cv: float = 1.0

    def __post_init__(self):
        strict = ("mu1", "kappa0", "lam", "nu", "R", "cv")
        loose = ("mu2", "alpha", "beta")
        for name in strict:
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise StateError(f"params.{name} must be > 0, got {val}")
        for name in loose:
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise StateError(f"params.{name} must be >= 0, got {val}")

    @property
    def gamma(self) -> float:
        return 1.0 + self.R / self.cv

    @property
    def constant_viscosity(self) -> bool:
        return self.mu2 == 0.0 or self.alpha == 0.0


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """One time level. Arrays are copied and made read-only on construction."""

    t: float
    v: np.ndarray
    theta: np.ndarray
    b: np.ndarray
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.v).shape[0]
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "v", _frozen(self.v, (n,)))
        object.__setattr__(self, "theta", _frozen(self.theta, (n,)))
        object.__setattr__(self, "b", _frozen(self.b, (n, 2)))
        object.__setattr__(self, "u", _frozen(self.u, (n + 1,)))
        object.__setattr__(self, "w", _frozen(self.w, (n + 1, 2)))
        for name in ("v", "theta", "b", "u", "w"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise StateError(f"non-finite values in {name} at t={self.t}")
        for name in ("v", "theta"):
            arr = getattr(self, name)
            if np.any(arr <= 0):
                i = int(np.argmin(arr))
                raise StateError(f"{name} must be positive; {name}[{i}]={arr[i]} at t={self.t}")

    @property
    def n_cells(self) -> int:
        return self.v.shape[0]

    def replace(self, **changes) -> "State":
        kw = dict(t=self.t, v=self.v, theta=self.theta, b=self.b, u=self.u, w=self.w)
        kw.update(changes)
        return State(**kw)

    def allclose(self, other: "State", atol: float = 0.0) -> bool:
        return all(
            np.allclose(getattr(self, k), getattr(other, k), rtol=0.0, atol=atol)
            for k in ("v", "theta", "b", "u", "w")
        )

    def max_far_field_deviation(self) -> float:
        return max(
            np.max(np.abs(self.v - FAR_V)),
            np.max(np.abs(self.theta - FAR_THETA)),
            np.max(np.abs(self.b - FAR_B)),
            np.max(np.abs(self.u - FAR_U)),
            np.max(np.abs(self.w - FAR_W)),
        )


# ---------------------------------------------------------------------------
# initial data


def _const(value):
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


def _zeros2(x):
    return np.zeros((np.asarray(x).shape[0], 2))


@dataclass(frozen=True)
class Profile:
    """Initial data as functions of the mass coordinate.

    ``b`` and ``w`` return arrays of shape ``(len(x), 2)``.
    """

    name: str
    v: Callable[[np.ndarray], np.ndarray] = field(default=_const(FAR_V))
    u: Callable[[np.ndarray], np.ndarray] = field(default=_const(FAR_U))
    theta: Callable[[np.ndarray], np.ndarray] = field(default=_const(FAR_THETA))
    b: Callable[[np.ndarray], np.ndarray] = field(default=_zeros2)
    w: Callable[[np.ndarray], np.ndarray] = field(default=_zeros2)


def far_field_profile() -> Profile:
    return Profile("far_field")


def gaussian_profile(
    amp_v: float = 0.0,
    amp_u: float = 0.0,
    amp_theta: float = 0.5,
    amp_b: tuple[float, float] = (0.0, 0.0),
    amp_w: tuple[float, float] = (0.0, 0.0),
    center: float = 0.0,
    width: float = 1.0,
) -> Profile:
    """Smooth bump bundle around ``center``.

    ``v``, ``theta``, ``b`` and ``w`` get Gaussian bumps; ``u`` gets the odd
    profile ``-2 s exp(-s^2)``, ``s = (x - center)/width``, so that ``u0`` has
    zero mean.
    """

    def g(x):
        s = (np.asarray(x, dtype=float) - center) / width
        return np.exp(-s * s)

    def odd(x):
        s = (np.asarray(x, dtype=float) - center) / width
        return -2.0 * s * np.exp(-s * s)

    ab = np.asarray(amp_b, dtype=float)
    aw = np.asarray(amp_w, dtype=float)
    return Profile(
        "gaussian",
        v=lambda x: 1.0 + amp_v * g(x),
        u=lambda x: amp_u * odd(x),
        theta=lambda x: 1.0 + amp_theta * g(x),
        b=lambda x: g(x)[:, None] * ab[None, :],
        w=lambda x: g(x)[:, None] * aw[None, :],
    )


TABULATED_COLUMNS = ("x", "v", "u", "theta", "b1", "b2", "w1", "w2")


def tabulated_profile(columns: Mapping[str, np.ndarray]) -> Profile:
    """Piecewise-linear interpolation of tabulated columns.

    Missing columns default to the far field; outside the tabulated range
    every field takes its far-field value.
    """
    if "x" not in columns:
        raise StateError("tabulated profile needs an 'x' column")
    unknown = set(columns) - set(TABULATED_COLUMNS)
    if unknown:
        raise StateError(f"unknown tabulated columns: {sorted(unknown)}")
    xs = np.asarray(columns["x"], dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise StateError("tabulated 'x' must be strictly increasing with >= 2 rows")
    far = {"v": FAR_V, "u": FAR_U, "theta": FAR_THETA, "b1": 0.0, "b2": 0.0, "w1": 0.0, "w2": 0.0}

    def interp(name):
        ys = np.asarray(columns.get(name, np.full_like(xs, far[name])), dtype=float)
        return lambda x: np.interp(x, xs, ys, left=far[name], right=far[name])

    b1, b2, w1, w2 = interp("b1"), interp("b2"), interp("w1"), interp("w2")
    return Profile(
        "tabulated",
        v=interp("v"),
        u=interp("u"),
        theta=interp("theta"),
        b=lambda x: np.column_stack([b1(x), b2(x)]),
        w=lambda x: np.column_stack([w1(x), w2(x)]),
    )


def _check_wall(profile: Profile, problem: ProblemType) -> None:
    x0 = np.array([0.0])
    u0 = float(profile.u(x0)[0])
    b0 = np.abs(profile.b(x0)).max()
    w0 = np.abs(profile.w(x0)).max()
    for name, val in (("u", abs(u0)), ("b", b0), ("w", w0)):
        if val > COMPAT_TOL:
            raise CompatibilityError(f"{name}(0) = {val:g} but the wall requires 0")
    if problem is ProblemType.DIRICHLET_THETA:
        th0 = float(profile.theta(x0)[0])
        if abs(th0 - 1.0) > COMPAT_TOL:
            raise CompatibilityError(f"theta(0) = {th0:g} but the wall requires theta = 1")


def make_state(grid: Grid, profile: Profile, problem: ProblemType | None = None) -> State:
    """Sample ``profile`` at cell centres and nodes and return the t=0 state."""
    if problem is not None:
        check_problem(problem, grid)
        if problem.has_wall:
            _check_wall(profile, problem)
    xc, xn = grid.cell_centers, grid.node_positions
    v = np.asarray(profile.v(xc), dtype=float)
    theta = np.asarray(profile.theta(xc), dtype=float)
    if np.any(v <= 0) or np.any(theta <= 0):
        raise StateError("initial data must satisfy v0 > 0 and theta0 > 0")
    return State(
        t=0.0,
        v=v,
        theta=theta,
        b=profile.b(xc),
        u=profile.u(xn),
        w=profile.w(xn),
    )


# ---------------------------------------------------------------------------
# ghost values


@dataclass(frozen=True, eq=False)
class Ghosted:
    """Cell fields padded with one ghost cell per side; node fields clamped.

    ``v``, ``theta`` have shape ``(n+2,)``, ``b`` ``(n+2, 2)``; ``u`` and
    ``w`` keep their node shape with the boundary nodes set to 0.
    """

    t: float
    v: np.ndarray
    theta: np.ndarray
    b: np.ndarray
    u: np.ndarray
    w: np.ndarray
    problem: ProblemType

    def interior(self) -> State:
        return State(
            t=self.t,
            v=self.v[1:-1],
            theta=self.theta[1:-1],
            b=self.b[1:-1],
            u=self.u,
            w=self.w,
        )


def pad_v(v: np.ndarray, problem: ProblemType) -> np.ndarray:
    left = v[0] if problem.has_wall else FAR_V
    return np.concatenate(([left], v, [FAR_V]))


def pad_theta(theta: np.ndarray, problem: ProblemType) -> np.ndarray:
    if problem is ProblemType.DIRICHLET_THETA:
        left = 2.0 * FAR_THETA - theta[0]
    elif problem is ProblemType.NEUMANN_THETA:
        left = theta[0]
    else:
        left = FAR_THETA
    return np.concatenate(([left], theta, [FAR_THETA]))


def pad_b(b: np.ndarray, problem: ProblemType) -> np.ndarray:
    left = -b[0] if problem.has_wall else np.zeros(2)
    return np.concatenate((left[None, :], b, np.zeros((1, 2))))


def clamp_nodes(f: np.ndarray) -> np.ndarray:
    out = np.array(f, dtype=float, copy=True)
    out[0] = 0.0
    out[-1] = 0.0
    return out


def apply_boundary(state: State | Ghosted, problem: ProblemType) -> Ghosted:
    """Fill ghost cells and clamp the boundary nodes.

    Far-field ends clamp to ``(1, 0, 1, 0, 0)``. At the wall ``x = 0``:
    ``theta`` is mirrored oddly about 1 (Dirichlet) or evenly (Neumann),
    ``b`` oddly about 0, ``v`` evenly, and ``u = w = 0`` on the wall node.
    """
    if isinstance(state, Ghosted):
        state = state.interior()
    return Ghosted(
        t=state.t,
        v=pad_v(state.v, problem),
        theta=pad_theta(state.theta, problem),
        b=pad_b(state.b, problem),
        u=clamp_nodes(state.u),
        w=clamp_nodes(state.w),
        problem=problem,
    )
