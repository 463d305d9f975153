"""Right-hand sides and time integrators for the coupled amplitude/director system.

    tau dA/dt   = A + lap A - phi^2 A - |A|^2 A - 2i c1 phi dA/dy + i beta A dphi/dy
    dphi/dt     = D1 phi_xx + D2 phi_yy - h phi + phi |A|^2 - c2 Im(conj(A) dA/dy)

Two schemes: classical RK4 (reference, diffusion-limited dt) and IMEX Euler
(diffusion and the phi dampening implicit through the sine-basis solver,
everything else explicit).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from chevron.core import ChevronParams, Grid2D, SimState, l2_norm_sq
from chevron.fdops import AnisotropicOperator, d_dy_array, laplacian_array

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e3


class BlowUpError(RuntimeError):
    """The state left the finite/bounded range during time stepping."""

    def __init__(self, t: float, max_abs_A: float, message: str = ""):
        self.t = t
        self.max_abs_A = max_abs_A
        super().__init__(message or f"blow-up at t={t:.6g}: max|A|={max_abs_A:.6g}")


class NonFiniteError(FloatingPointError):
    pass


class Scheme(str, enum.Enum):
    RK4_EXPLICIT = "rk4"
    IMEX_EULER = "imex"


@dataclass(frozen=True)
class StepperConfig:
    scheme: Scheme = Scheme.IMEX_EULER
    dt: float = 1e-3
    safety: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety!r}")


@dataclass(frozen=True)
class RhsPair:
    dA_dt: np.ndarray
    dphi_dt: np.ndarray


def _first_bad(arr: np.ndarray) -> tuple[int, int]:
    i, j = np.argwhere(~np.isfinite(arr))[0]
    return int(i), int(j)


class ChevronModel:
    """Parameters and grid bound together, with the cached implicit operators."""

    def __init__(self, p: ChevronParams, grid: Grid2D):
        self.p = p
        self.grid = grid
        self.lap_op = AnisotropicOperator(1.0, 1.0, grid)
        self.phi_op = AnisotropicOperator(p.D1, p.D2, grid)

    def nonlinear(self, A: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Every term except lap A (A equation) and D-diffusion minus h phi (phi equation).

        The A part is returned without the 1/tau factor.
        """
        p, g = self.p, self.grid
        Ay = d_dy_array(A, g.dy)
        phiy = d_dy_array(phi, g.dy)
        absA2 = A.real * A.real + A.imag * A.imag
        nA = A * (1.0 - phi * phi - absA2) - 2j * p.c1 * phi * Ay + 1j * p.beta * A * phiy
        nphi = phi * absA2 - p.c2 * (A.real * Ay.imag - A.imag * Ay.real)
        return nA, nphi

    def rhs_arrays(self, A: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p, g = self.p, self.grid
        nA, nphi = self.nonlinear(A, phi)
        dA = (nA + laplacian_array(A, g.dx, g.dy)) / p.tau
        dphi = nphi + laplacian_array(phi, g.dx, g.dy, p.D1, p.D2) - p.h * phi
        return dA, dphi

    def rk4_step(self, A, phi, dt):
        k1A, k1p = self.rhs_arrays(A, phi)
        k2A, k2p = self.rhs_arrays(A + 0.5 * dt * k1A, phi + 0.5 * dt * k1p)
        k3A, k3p = self.rhs_arrays(A + 0.5 * dt * k2A, phi + 0.5 * dt * k2p)
        k4A, k4p = self.rhs_arrays(A + dt * k3A, phi + dt * k3p)
        A_new = A + (dt / 6.0) * (k1A + 2.0 * k2A + 2.0 * k3A + k4A)
        phi_new = phi + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        return A_new, phi_new

    def imex_step(self, A, phi, dt):
        p = self.p
        nA, nphi = self.nonlinear(A, phi)
        sA = p.tau / dt
        A_new = self.lap_op.solve_array(sA, sA * A + nA)
        sphi = 1.0 / dt + p.h
        phi_new = self.phi_op.solve_array(sphi, phi / dt + nphi)
        return A_new, phi_new

    def advance(self, A, phi, dt, scheme: Scheme, t_new: float):
        with np.errstate(over="ignore", invalid="ignore"):
            if scheme is Scheme.RK4_EXPLICIT:
                A_new, phi_new = self.rk4_step(A, phi, dt)
            else:
                A_new, phi_new = self.imex_step(A, phi, dt)
        if not (np.all(np.isfinite(A_new)) and np.all(np.isfinite(phi_new))):
            raise BlowUpError(t_new, math.inf, f"non-finite state after step to t={t_new:.6g}")
        max_A = float(np.max(np.abs(A_new)))
        if max_A > BLOWUP_THRESHOLD:
            raise BlowUpError(t_new, max_A)
        return A_new, phi_new


def rhs(state: SimState, p: ChevronParams) -> RhsPair:
    """Time derivatives of ``(A, phi)`` at ``state``."""
    model = ChevronModel(p, state.grid)
    with np.errstate(over="ignore", invalid="ignore"):
        dA, dphi = model.rhs_arrays(state.A.values, state.phi.values)
    for name, arr in (("dA_dt", dA), ("dphi_dt", dphi)):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"non-finite {name} at node {_first_bad(arr)}")
    return RhsPair(dA, dphi)


def stable_dt(p: ChevronParams, grid: Grid2D, state_bound: float, safety: float = 0.8) -> float:
    """Explicit RK4 step size for states with ``|A|, |phi| <= state_bound``.

    The diffusion limit is the forward-Euler 2D heat bound scaled by the
    stiffest of ``Delta/tau`` and ``D Delta``; the reaction limit uses local
    growth rates plus the central-difference transport terms.
    """
    dx2, dy2 = grid.dx**2, grid.dy**2
    diffusion = dx2 * dy2 / (2.0 * (dx2 + dy2)) * min(p.tau, 1.0 / max(p.D1, p.D2))
    S = abs(state_bound)
    rate_A = (1.0 + 2.0 * S * S + (2.0 * p.c1 * S + abs(p.beta) * S) / grid.dy) / p.tau
    rate_phi = p.h + S * S + p.c2 * S / grid.dy
    rate = max(rate_A, rate_phi)
    reaction = 1.0 / rate if rate > 0 else math.inf
    return safety * min(diffusion, reaction)


def step(state: SimState, p: ChevronParams, cfg: StepperConfig, dt: float | None = None) -> SimState:
    """One step of ``cfg.scheme`` (``dt`` overrides ``cfg.dt``)."""
    h = cfg.dt if dt is None else dt
    model = ChevronModel(p, state.grid)
    t_new = state.t + h
    A, phi = model.advance(state.A.values, state.phi.values, h, cfg.scheme, t_new)
    return SimState.from_arrays(state.grid, A, phi, t_new)


Observer = Callable[[SimState], None]


def observation_times(t0: float, t_end: float, observe_every: float) -> list[float]:
    """Times after ``t0`` at which observers fire; the last one is ``t_end``."""
    n = math.ceil((t_end - t0) / observe_every - 1e-9)
    times = [t0 + k * observe_every for k in range(1, n)]
    if t_end > t0:
        times.append(t_end)
    return times


def run(
    initial: SimState,
    p: ChevronParams,
    cfg: StepperConfig,
    t_end: float,
    observers: Iterable[Observer] = (),
    observe_every: float = 0.1,
) -> SimState:
    """Advance ``initial`` to ``t_end``, calling each observer at ``t0`` and every ``observe_every``.

    Steps have size ``cfg.dt`` except the last one inside each observation
    window, which is shortened to land exactly on the observation time.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end={t_end} precedes the initial time {initial.t}")
    if not observe_every > 0:
        raise ValueError("observe_every must be positive")
    observers = list(observers)
    for obs in observers:
        obs(initial)
    if t_end == initial.t:
        return initial

    model = ChevronModel(p, initial.grid)
    grid = initial.grid
    A = np.array(initial.A.values)
    phi = np.array(initial.phi.values)
    t = initial.t
    dt = cfg.dt
    for target in observation_times(initial.t, t_end, observe_every):
        while t < target:
            remaining = target - t
            if remaining <= dt * (1.0 + 1e-9):
                A, phi = model.advance(A, phi, remaining, cfg.scheme, target)
                t = target
            else:
                A, phi = model.advance(A, phi, dt, cfg.scheme, t + dt)
                t += dt
        snapshot = SimState.from_arrays(grid, A, phi, t)
        for obs in observers:
            obs(snapshot)
    return SimState.from_arrays(grid, A, phi, t)


def state_distance(a: SimState, b: SimState) -> float:
    return math.sqrt(l2_norm_sq(a.A - b.A) + l2_norm_sq(a.phi - b.phi))


def convergence_errors(
    p: ChevronParams, initial: SimState, scheme: Scheme, t_final: float, dt: float, levels: int = 3
) -> list[float]:
    """Errors of runs with dt, dt/2, ... (``levels`` of them) against a run at dt / 2**levels."""
    if not (dt > 0 and t_final > 0):
        raise ValueError("dt and t_final must be positive")
    n = t_final / dt
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ValueError(f"t_final={t_final} is not a whole number of steps of dt={dt}")
    t_end = initial.t + t_final

    def solve(h):
        return run(initial, p, StepperConfig(scheme, h), t_end, observe_every=t_final)

    ref = solve(dt / 2**levels)
    return [state_distance(solve(dt / 2**k), ref) for k in range(levels)]


def order_of_convergence(
    p: ChevronParams, initial: SimState, scheme: Scheme, t_final: float = 0.01, dt: float = 1e-3
) -> float:
    """Observed order log2(e(dt) / e(dt/2)), errors measured against the dt/8 run."""
    errors = convergence_errors(p, initial, Scheme(scheme), t_final, dt)
    if errors[1] == 0.0 or errors[0] == 0.0:
        raise ValueError("successive runs are identical; error ratio undefined")
    return math.log2(errors[0] / errors[1])
