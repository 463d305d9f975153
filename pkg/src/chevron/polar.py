"""Polar form A = rho exp(i psi) of the amplitude equation.

The polar right-hand sides use phase-aware versions of the fdops stencils:
every neighbour enters through its modulus and its shortest-branch phase
difference ``wrap(psi_n - psi_0)``, so no unwrapping is needed. With this
choice the polar and Cartesian right-hand sides agree to round-off:

    rho |grad psi|^2           <- sum_n rho_n (1 - cos dpsi_n) / h^2
    lap psi                    <- sum_n sin dpsi_n / h^2
    2 grad rho . grad psi / rho <- sum_n (rho_n - rho_0) sin dpsi_n / (rho_0 h^2)
    d_y rho, rho d_y psi       <- (rho_+ e^{i dpsi_+} - rho_- e^{i dpsi_-}) / (2 dy), real / imag
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chevron.core import ChevronParams, Field, SimState
from chevron.fdops import d_dy_array, laplacian_array
from chevron.pde import rhs

RHO_MIN = 1e-6


class PhaseSingularityError(ValueError):
    """The modulus vanishes (or nearly) somewhere, so the polar form is undefined."""


def wrap(angle: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    w = np.mod(angle + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass(frozen=True)
class PolarState:
    rho: Field
    psi: Field
    phi: Field
    t: float = 0.0

    def __post_init__(self):
        if not (self.rho.grid == self.psi.grid == self.phi.grid):
            raise ValueError("rho, psi and phi must share a grid")
        if np.any(self.rho.values < 0):
            raise ValueError("rho must be non-negative")
        psi = self.psi.values
        if np.any(psi <= -np.pi) or np.any(psi > np.pi):
            object.__setattr__(self, "psi", Field(self.psi.grid, wrap(psi)))

    @property
    def grid(self):
        return self.rho.grid


def to_polar(state: SimState) -> PolarState:
    A = state.A.values
    rho = np.abs(A)
    psi = np.where(rho > 0, np.angle(A), 0.0)
    psi = np.where(psi == -np.pi, np.pi, psi)
    g = state.grid
    return PolarState(Field(g, rho), Field(g, psi), state.phi, state.t)


def from_polar(ps: PolarState) -> SimState:
    rho = ps.rho.values
    if np.any(rho < 0):
        raise ValueError("negative modulus")
    A = rho * np.exp(1j * ps.psi.values)
    A = np.where(rho == 0, 0.0, A)
    return SimState.from_arrays(ps.grid, A, ps.phi.values, ps.t)


def _neighbours(rho: np.ndarray, psi: np.ndarray, axis: int):
    """Moduli and wrapped phase differences of the + and - neighbours along ``axis``.

    Ghost neighbours outside the grid have modulus 0 and phase difference 0.
    """
    pad = [(0, 0), (0, 0)]
    pad[axis] = (1, 1)
    rp = np.pad(rho, pad)
    pp = np.pad(psi, pad)
    n = rho.shape[axis]
    plus = [slice(None), slice(None)]
    minus = [slice(None), slice(None)]
    plus[axis] = slice(2, n + 2)
    minus[axis] = slice(0, n)
    rho_p, rho_m = rp[tuple(plus)], rp[tuple(minus)]
    d_p = np.where(rho_p > 0, wrap(pp[tuple(plus)] - psi), 0.0)
    d_m = np.where(rho_m > 0, wrap(pp[tuple(minus)] - psi), 0.0)
    return rho_p, d_p, rho_m, d_m


@dataclass(frozen=True)
class PolarTerms:
    """Discrete pieces of the polar system, named after the terms they approximate."""

    lap_rho: np.ndarray
    rho_grad_psi_sq: np.ndarray
    lap_psi: np.ndarray
    grad_coupling: np.ndarray
    dy_rho: np.ndarray
    rho_dy_psi: np.ndarray


def polar_terms(rho: np.ndarray, psi: np.ndarray, dx: float, dy: float) -> PolarTerms:
    curv = np.zeros_like(rho)
    lap_psi = np.zeros_like(rho)
    coupling = np.zeros_like(rho)
    for axis, h in ((0, dx), (1, dy)):
        rho_p, d_p, rho_m, d_m = _neighbours(rho, psi, axis)
        curv += (rho_p * (1 - np.cos(d_p)) + rho_m * (1 - np.cos(d_m))) / h**2
        lap_psi += (np.sin(d_p) + np.sin(d_m)) / h**2
        coupling += ((rho_p - rho) * np.sin(d_p) + (rho_m - rho) * np.sin(d_m)) / (rho * h**2)
        if axis == 1:
            dy_rho = (rho_p * np.cos(d_p) - rho_m * np.cos(d_m)) / (2 * dy)
            rho_dy_psi = (rho_p * np.sin(d_p) - rho_m * np.sin(d_m)) / (2 * dy)
    return PolarTerms(laplacian_array(rho, dx, dy), curv, lap_psi, coupling, dy_rho, rho_dy_psi)


def rhs_polar(ps: PolarState, p: ChevronParams, rho_min: float = RHO_MIN) -> tuple[Field, Field, Field]:
    """``(d rho/dt, d psi/dt, d phi/dt)`` of the polar system.

    Raises :class:`PhaseSingularityError` if ``rho < rho_min`` at any node.
    """
    g = ps.grid
    rho, psi, phi = ps.rho.values, ps.psi.values, ps.phi.values
    if np.any(rho < rho_min):
        i, j = np.argwhere(rho < rho_min)[0]
        raise PhaseSingularityError(
            f"rho={rho[i, j]:.3g} < {rho_min:g} at node ({int(i)}, {int(j)}); polar form undefined"
        )
    T = polar_terms(rho, psi, g.dx, g.dy)
    drho = (T.lap_rho - T.rho_grad_psi_sq + rho + 2 * p.c1 * phi * T.rho_dy_psi - phi**2 * rho - rho**3) / p.tau
    dpsi = (
        T.lap_psi + T.grad_coupling - 2 * p.c1 * phi * T.dy_rho / rho + p.beta * d_dy_array(phi, g.dy)
    ) / p.tau
    dphi = laplacian_array(phi, g.dx, g.dy, p.D1, p.D2) - p.h * phi + phi * rho**2 - p.c2 * rho * T.rho_dy_psi
    return Field(g, drho), Field(g, dpsi), Field(g, dphi)


def cartesian_to_polar_rates(A: np.ndarray, dA: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chain rule: ``d|A|/dt = Re(conj(A) dA)/|A|``, ``d arg A/dt = Im(conj(A) dA)/|A|^2``."""
    m2 = A.real**2 + A.imag**2
    z = np.conj(A) * dA
    return z.real / np.sqrt(m2), z.imag / m2


def max_relative_mismatch(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1.0)
    return float(np.max(np.abs(a - b))) / scale


def polar_consistency(state: SimState, p: ChevronParams) -> float:
    """Largest relative mismatch between the polar and chain-ruled Cartesian right-hand sides."""
    r = rhs(state, p)
    drho_c, dpsi_c = cartesian_to_polar_rates(state.A.values, r.dA_dt)
    drho, dpsi, dphi = rhs_polar(to_polar(state), p)
    return max(
        max_relative_mismatch(drho.values, drho_c),
        max_relative_mismatch(dpsi.values, dpsi_c),
        max_relative_mismatch(dphi.values, r.dphi_dt),
    )

