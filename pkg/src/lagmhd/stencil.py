"""Staggered difference operators and the tridiagonal diffusion kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


class SolverBreakdown(RuntimeError):
    """A tridiagonal solve hit a zero (or non-finite) pivot."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def dx_node_to_cell(node_field: np.ndarray, dx: float) -> np.ndarray:
    """``(f[i+1] - f[i]) / dx``: node values to cell centres."""
    return np.diff(node_field, axis=0) / dx


def dx_cell_to_node(cell_field: np.ndarray, dx: float) -> np.ndarray:
    """``(g[i] - g[i-1]) / dx`` on a ghosted cell array (``n+2`` -> ``n+1`` nodes)."""
    return np.diff(cell_field, axis=0) / dx


def harmonic_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def node_to_cell_average(node_field: np.ndarray) -> np.ndarray:
    return 0.5 * (node_field[1:] + node_field[:-1])


@njit(cache=True)
def _thomas(lower, diag, upper, rhs):
    # lower[i] couples row i to i-1 (lower[0] unused); upper[i] couples to i+1.
    n = diag.shape[0]
    k = rhs.shape[1]
    cp = np.empty(n)
    dp = np.empty((n, k))
    x = np.empty((n, k))
    beta = diag[0]
    if beta == 0.0 or not np.isfinite(beta):
        return x, 0
    cp[0] = upper[0] / beta
    for c in range(k):
        dp[0, c] = rhs[0, c] / beta
    for i in range(1, n):
        beta = diag[i] - lower[i] * cp[i - 1]
        if beta == 0.0 or not np.isfinite(beta):
            return x, i
        cp[i] = upper[i] / beta
        for c in range(k):
            dp[i, c] = (rhs[i, c] - lower[i] * dp[i - 1, c]) / beta
    for c in range(k):
        x[n - 1, c] = dp[n - 1, c]
    for i in range(n - 2, -1, -1):
        for c in range(k):
            x[i, c] = dp[i, c] - cp[i] * x[i + 1, c]
    return x, -1


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system; ``rhs`` may carry extra trailing columns."""
    rhs = np.asarray(rhs, dtype=float)
    squeeze = rhs.ndim == 1
    r2 = rhs.reshape(rhs.shape[0], -1)
    x, bad = _thomas(
        np.ascontiguousarray(lower, dtype=float),
        np.ascontiguousarray(diag, dtype=float),
        np.ascontiguousarray(upper, dtype=float),
        np.ascontiguousarray(r2),
    )
    if bad >= 0:
        raise SolverBreakdown(f"zero pivot in tridiagonal solve at row {bad}", index=int(bad))
    return x[:, 0] if squeeze else x.reshape(rhs.shape)


@dataclass(frozen=True)
class BC:
    """Ghost rule for one end of a diffusion system.

    ``neumann``: ghost = first unknown. ``dirichlet``: ghost = ``value``.
    ``odd``: ghost mirrors the first unknown about ``value`` on the face.
    """

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("neumann", "dirichlet", "odd"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")

    @classmethod
    def neumann(cls):
        return cls("neumann")

    @classmethod
    def dirichlet(cls, value=0.0):
        return cls("dirichlet", value)

    @classmethod
    def odd(cls, value=0.0):
        return cls("odd", value)

    def ghost(self, first):
        if self.kind == "neumann":
            return first
        if self.kind == "dirichlet":
            return np.full_like(first, self.value)
        return 2.0 * self.value - first


def assemble_diffusion(coeff, dt, dx, bc_left: BC, bc_right: BC, mass=1.0):
    """Tridiagonal coefficients and boundary rhs for
    ``mass*f - dt*D(coeff*D f)``; ``coeff`` lives on the ``m+1`` interfaces."""
    coeff = np.asarray(coeff, dtype=float)
    if np.any(coeff < 0):
        raise ValueError("diffusion coefficients must be non-negative")
    m = coeff.shape[0] - 1
    r = dt / (dx * dx) * coeff
    diag = np.broadcast_to(np.asarray(mass, dtype=float).reshape(-1), (m,)) + r[:-1] + r[1:]
    lower = np.concatenate(([0.0], -r[1:-1]))
    upper = np.concatenate((-r[1:-1], [0.0]))
    extra = np.zeros(m)
    # ghost contributions: row 0 has -r0 * ghost_left, row m-1 has -r_m * ghost_right
    for bc, row, rr in ((bc_left, 0, r[0]), (bc_right, m - 1, r[-1])):
        if bc.kind == "neumann":
            diag[row] -= rr
        elif bc.kind == "dirichlet":
            extra[row] += rr * bc.value
        else:
            diag[row] += rr
            extra[row] += 2.0 * rr * bc.value
    return lower, diag, upper, extra


_BC_CODE = {"neumann": 0, "dirichlet": 1, "odd": 2}


@njit(cache=True)
def _diffusion_kernel(coeff, mass, rhs, scale, lkind, lval, rkind, rval):
    # fused assembly + Thomas sweep; same matrix as assemble_diffusion
    m = rhs.shape[0]
    k = rhs.shape[1]
    r = scale * coeff
    lower = np.empty(m)
    diag = np.empty(m)
    upper = np.empty(m)
    b = rhs.copy()
    for i in range(m):
        diag[i] = mass[i] + r[i] + r[i + 1]
        lower[i] = -r[i] if i > 0 else 0.0
        upper[i] = -r[i + 1] if i < m - 1 else 0.0
    for side in range(2):
        kind = lkind if side == 0 else rkind
        val = lval if side == 0 else rval
        row = 0 if side == 0 else m - 1
        rr = r[0] if side == 0 else r[m]
        if kind == 0:
            diag[row] -= rr
        elif kind == 1:
            for c in range(k):
                b[row, c] += rr * val
        else:
            diag[row] += rr
            for c in range(k):
                b[row, c] += 2.0 * rr * val
    return _thomas(lower, diag, upper, b)


def diffusion_solve(coeff, rhs, dt, dx, bc=(BC.neumann(), BC.neumann()), mass=1.0):
    """Backward-Euler diffusion solve ``(mass - dt D(coeff D)) f = rhs``.

    ``coeff`` has one entry per interface (``len(rhs) + 1``), including the
    two boundary faces whose ghost values follow ``bc``.
    """
    rhs = np.asarray(rhs, dtype=float)
    coeff = np.ascontiguousarray(coeff, dtype=float)
    m = rhs.shape[0]
    if coeff.shape[0] != m + 1:
        raise ValueError("coeff must have len(rhs) + 1 interface values")
    if np.any(coeff < 0):
        raise ValueError("diffusion coefficients must be non-negative")
    mass = np.asarray(mass, dtype=float).reshape(-1)
    mass = np.full(m, mass[0]) if mass.size == 1 else np.ascontiguousarray(mass)
    if mass.shape[0] != m:
        raise ValueError("mass must be a scalar or have len(rhs) entries")
    r2 = np.ascontiguousarray(rhs.reshape(m, -1))
    left, right = bc
    x, bad = _diffusion_kernel(
        coeff, mass, r2, dt / (dx * dx),
        _BC_CODE[left.kind], float(left.value), _BC_CODE[right.kind], float(right.value),
    )
    if bad >= 0:
        raise SolverBreakdown(f"zero pivot in tridiagonal solve at row {bad}", index=int(bad))
    return x[:, 0] if rhs.ndim == 1 else x.reshape(rhs.shape)
