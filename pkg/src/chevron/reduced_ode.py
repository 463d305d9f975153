"""Reduced ODE dynamics for (rho, phi): spatially uniform and constant phase gradient.

Uniform::

    tau rho' = rho (1 - phi^2 - rho^2)
        phi' = phi (rho^2 - h)

Phase gradient chi = d psi/dy held constant::

    tau rho' = rho [(1 - rho^2) - (phi - c1 chi)^2 - (1 - c1^2) chi^2]
        phi' = -h phi + rho^2 (phi - c2 chi)

Only the half plane rho >= 0 is considered; mirrored equilibria follow from
the symmetry rho -> -rho.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

DIVERGENCE_LIMIT = 1e6


class System(str, enum.Enum):
    UNIFORM = "uniform"
    PHASE_GRAD = "phase_grad"


class Kind(str, enum.Enum):
    SADDLE = "saddle"
    SPIRAL_SINK = "spiral_sink"
    SPIRAL_SOURCE = "spiral_source"
    NODE_SINK = "node_sink"
    NODE_SOURCE = "node_source"
    CENTER_MARGINAL = "center_marginal"
    DEGENERATE = "degenerate"


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReducedParams:
    tau: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    h: float = 0.5
    chi: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        for name in ("tau", "c1", "c2", "h", "chi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def radius_sq(self) -> float:
        """Squared radius of the circle carrying the nontrivial equilibria."""
        return 1.0 + (self.c1**2 - 1.0) * self.chi**2


@dataclass(frozen=True)
class FixedPoint:
    rho: float
    phi: float
    eigenvalues: tuple[complex, complex]
    kind: Kind

    def as_row(self) -> tuple:
        l1, l2 = self.eigenvalues
        return (self.rho, self.phi, l1.real, l1.imag, l2.real, l2.imag, self.kind.value)


@dataclass
class Orbit:
    t: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    basin: FixedPoint | None = field(default=None)

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.rho.tolist(), self.phi.tolist()))

    @property
    def terminal(self) -> tuple[float, float]:
        return float(self.rho[-1]), float(self.phi[-1])


def rhs_uniform(rho, phi, p: ReducedParams):
    return rho * (1.0 - phi * phi - rho * rho) / p.tau, phi * (rho * rho - p.h)


def rhs_phase_grad(rho, phi, p: ReducedParams):
    c1, c2, chi = p.c1, p.c2, p.chi
    bracket = (1.0 - rho * rho) - (phi - c1 * chi) ** 2 - (1.0 - c1 * c1) * chi * chi
    return rho * bracket / p.tau, -p.h * phi + rho * rho * (phi - c2 * chi)


def _params_for(system: System, p: ReducedParams) -> ReducedParams:
    if System(system) is System.UNIFORM and p.chi != 0.0:
        return ReducedParams(p.tau, p.c1, p.c2, p.h, 0.0)
    return p


def rhs(system: System, rho, phi, p: ReducedParams):
    if System(system) is System.UNIFORM:
        return rhs_uniform(rho, phi, p)
    return rhs_phase_grad(rho, phi, p)


def jacobian(system: System, p: ReducedParams, rho: float, phi: float) -> np.ndarray:
    """Analytic Jacobian; the uniform system is the chi = 0 case."""
    q = _params_for(system, p)
    c1, c2, chi, tau = q.c1, q.c2, q.chi, q.tau
    s = phi - c1 * chi
    return np.array(
        [
            [((1.0 - 3.0 * rho * rho) - s * s - (1.0 - c1 * c1) * chi * chi) / tau, -2.0 * rho * s / tau],
            [2.0 * rho * (phi - c2 * chi), -q.h + rho * rho],
        ]
    )


def residual(system: System, p: ReducedParams, rho: float, phi: float) -> float:
    a, b = rhs(system, rho, phi, _params_for(system, p))
    return max(abs(a), abs(b))


def classify_eigenvalues(eigs) -> Kind:
    l1, l2 = (complex(e) for e in eigs)
    thr = 1e-9 * (1.0 + max(abs(l1), abs(l2)))
    if abs(l1) < thr or abs(l2) < thr:
        return Kind.DEGENERATE
    if abs(l1.imag) > thr:
        if abs(l1.real) < thr:
            return Kind.CENTER_MARGINAL
        return Kind.SPIRAL_SINK if l1.real < 0 else Kind.SPIRAL_SOURCE
    r1, r2 = l1.real, l2.real
    if r1 * r2 < 0:
        return Kind.SADDLE
    return Kind.NODE_SINK if r1 < 0 else Kind.NODE_SOURCE


def classify(system: System, p: ReducedParams, rho: float, phi: float, tol: float = 1e-9) -> FixedPoint:
    """Linearisation class of the equilibrium ``(rho, phi)``."""
    res = residual(system, p, rho, phi)
    if res > tol:
        raise ValueError(f"({rho}, {phi}) is not an equilibrium: residual {res:.3g} > {tol:g}")
    eigs = np.linalg.eigvals(jacobian(system, p, rho, phi)).astype(complex)
    eigs = tuple(complex(z) for z in sorted(eigs, key=lambda z: (z.real, z.imag)))
    return FixedPoint(float(rho), float(phi), eigs, classify_eigenvalues(eigs))


def critical_chi(c1: float) -> float | None:
    """Phase gradient at which the equilibrium circle shrinks to a point (None for c1 >= 1)."""
    if c1 < 0:
        raise ValueError("c1 must be non-negative")
    if c1 >= 1.0:
        return None
    return 1.0 / math.sqrt(1.0 - c1 * c1)


def locus_cubic(p: ReducedParams) -> np.ndarray:
    """Coefficients (highest first) of P(u), u = rho^2, whose roots carry the nontrivial equilibria.

    Obtained by substituting phi = c2 chi u / (u - h) into the circle
    u + (phi - c1 chi)^2 = R^2 and clearing (u - h)^2.
    """
    h, c1, c2, chi = p.h, p.c1, p.c2, p.chi
    R2 = p.radius_sq
    chi2 = chi * chi
    return np.array(
        [
            1.0,
            -2.0 * h + chi2 * (c2 - c1) ** 2 - R2,
            h * h + 2.0 * chi2 * (c2 - c1) * c1 * h + 2.0 * R2 * h,
            chi2 * c1 * c1 * h * h - R2 * h * h,
        ]
    )


def _h_error(p: ReducedParams) -> ValueError:
    if p.h == 0:
        return ValueError(
            "h = 0 has continua of equilibria: the segment rho = 0, |phi| < 1 consists of degenerate "
            "unstable critical points and the rest of the phi axis of degenerate stable ones; "
            "isolated fixed points are not returned"
        )
    return ValueError(f"fixed points need h > 0, got h={p.h}")


def _polish(p: ReducedParams, rho: float, phi: float, iters: int = 50) -> tuple[float, float]:
    """Newton on (bracket, phi') for rho > 0, i.e. the rho equation divided by rho."""
    c1, c2, chi, h = p.c1, p.c2, p.chi, p.h
    for _ in range(iters):
        s = phi - c1 * chi
        g1 = (1.0 - rho * rho) - s * s - (1.0 - c1 * c1) * chi * chi
        g2 = -h * phi + rho * rho * (phi - c2 * chi)
        J = np.array([[-2.0 * rho, -2.0 * s], [2.0 * rho * (phi - c2 * chi), -h + rho * rho]])
        try:
            d = np.linalg.solve(J, [-g1, -g2])
        except np.linalg.LinAlgError:
            break
        rho, phi = rho + d[0], phi + d[1]
        if abs(d[0]) + abs(d[1]) < 1e-15 * (1.0 + abs(rho) + abs(phi)):
            break
    return abs(rho), phi


def _uniform_catalog(h: float) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0), (1.0, 0.0)]
    if 0.0 < h < 1.0:
        r, f = math.sqrt(h), math.sqrt(1.0 - h)
        pts += [(r, f), (r, -f)]
    return pts


def _locus_roots(p: ReducedParams, resolution: int) -> list[float]:
    """Roots u in (0, R^2] of the locus cubic: sign-change brackets plus tangential roots."""
    R2 = p.radius_sq
    if R2 <= 0:
        return []
    coeffs = locus_cubic(p)
    P = np.poly1d(coeffs)
    grid = np.linspace(0.0, R2, resolution + 1)
    vals = P(grid)
    scale = float(np.max(np.abs(coeffs))) * (1.0 + R2) ** 3
    tiny = 1e-13 * scale
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(P, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if abs(vals[-1]) <= tiny:
        roots.append(R2)
    for c in np.roots(np.polyder(coeffs)):
        if abs(c.imag) < 1e-12 and 0.0 < c.real <= R2 and abs(P(c.real)) <= tiny:
            roots.append(c.real)
    return roots


def fixed_points(system: System, p: ReducedParams, resolution: int = 2000) -> list[FixedPoint]:
    """All equilibria with rho >= 0, classified; the origin is always first."""
    system = System(system)
    if p.h <= 0:
        raise _h_error(p)
    q = _params_for(system, p)
    if q.chi == 0.0:
        candidates = _uniform_catalog(q.h)
    else:
        candidates = [(0.0, 0.0)]
        if q.c2 == 0.0:
            # phi (u - h) = 0: the phi = 0 branch plus the vertical line u = h
            u = 1.0 - q.chi**2
            if u > 0:
                candidates.append((math.sqrt(u), 0.0))
            disc = q.radius_sq - q.h
            if disc >= 0:
                for sign in (1.0, -1.0):
                    candidates.append((math.sqrt(q.h), q.c1 * q.chi + sign * math.sqrt(disc)))
        else:
            for u in _locus_roots(q, resolution):
                if u <= 1e-14 or abs(u - q.h) <= 1e-9:
                    continue
                rho, phi = math.sqrt(u), q.c2 * q.chi * u / (u - q.h)
                candidates.append(_polish(q, rho, phi))
    unique: list[tuple[float, float]] = []
    for rho, phi in candidates:
        if rho < 0:
            continue
        if all(abs(rho - r) > 1e-9 or abs(phi - f) > 1e-9 for r, f in unique):
            unique.append((rho, phi))
    return [classify(system, q, rho, phi) for rho, phi in unique]


def _rk4(system: System, p: ReducedParams, rho0, phi0, t_end: float, dt: float, sample_every: int = 1):
    """Batched classical RK4 over arrays of initial conditions."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    q = _params_for(system, p)
    f = rhs_uniform if System(system) is System.UNIFORM else rhs_phase_grad
    rho = np.array(rho0, dtype=float)
    phi = np.array(phi0, dtype=float)
    on_axis = rho == 0.0
    n_full = int(math.floor(t_end / dt + 1e-9))
    last = t_end - n_full * dt
    steps = [dt] * n_full
    if last > 1e-12 * dt:
        steps.append(last)
    ts, rhos, phis = [0.0], [rho.copy()], [phi.copy()]
    t = 0.0
    for k, h in enumerate(steps, start=1):
        with np.errstate(over="ignore", invalid="ignore"):
            k1r, k1p = f(rho, phi, q)
            k2r, k2p = f(rho + 0.5 * h * k1r, phi + 0.5 * h * k1p, q)
            k3r, k3p = f(rho + 0.5 * h * k2r, phi + 0.5 * h * k2p, q)
            k4r, k4p = f(rho + h * k3r, phi + h * k3p, q)
            rho = rho + (h / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
            phi = phi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        t = k * dt if k <= n_full else t_end
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(phi))) or np.max(
            np.hypot(rho, phi), initial=0.0
        ) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"orbit diverged at t={t:.6g}")
        if np.any(on_axis):
            assert np.all(np.abs(rho[on_axis]) <= 1e-12), "invariant axis rho = 0 left"
        if k % sample_every == 0 or k == len(steps):
            ts.append(t)
            rhos.append(rho.copy())
            phis.append(phi.copy())
    return np.array(ts), np.array(rhos), np.array(phis)


def integrate(
    system: System, p: ReducedParams, initial: tuple[float, float], t_end: float, dt: float, sample_every: int = 1
) -> Orbit:
    t, rho, phi = _rk4(system, p, initial[0], initial[1], t_end, dt, sample_every)
    return Orbit(t, rho, phi)


DEFAULT_WINDOW = ((0.0, 1.5), (-1.5, 1.5))


def seed_grid(n_rho: int, n_phi: int, window=DEFAULT_WINDOW) -> list[tuple[float, float]]:
    (r0, r1), (f0, f1) = window
    return [(r, f) for r in np.linspace(r0, r1, n_rho) for f in np.linspace(f0, f1, n_phi)]


def nearest_fixed_point(points: list[FixedPoint], rho: float, phi: float, tol: float = 1e-2) -> FixedPoint | None:
    best, best_d = None, tol
    for fp in points:
        d = math.hypot(fp.rho - rho, fp.phi - phi)
        if d <= best_d:
            best, best_d = fp, d
    return best


def portrait(
    system: System,
    p: ReducedParams,
    seeds,
    t_end: float,
    dt: float,
    window=DEFAULT_WINDOW,
    basin_tol: float = 1e-2,
    max_samples: int = 2000,
) -> list[Orbit]:
    """Integrate every seed; each orbit's ``basin`` is the fixed point it ends near, or None."""
    seeds = [(float(r), float(f)) for r, f in seeds]
    if not seeds:
        return []
    (r0, r1), (f0, f1) = window
    for r, f in seeds:
        if not (r0 <= r <= r1 and f0 <= f <= f1):
            raise ValueError(f"seed ({r}, {f}) lies outside the window {window}")
    n_steps = max(1, math.ceil(t_end / dt))
    sample_every = max(1, n_steps // max_samples)
    rho0 = np.array([s[0] for s in seeds])
    phi0 = np.array([s[1] for s in seeds])
    t, rho, phi = _rk4(system, p, rho0, phi0, t_end, dt, sample_every)
    try:
        points = fixed_points(system, p)
    except ValueError:
        points = []
    orbits = []
    for k in range(len(seeds)):
        orb = Orbit(t, rho[:, k], phi[:, k])
        orb.basin = nearest_fixed_point(points, *orb.terminal, tol=basin_tol)
        orbits.append(orb)
    return orbits


def bifurcation_scan(c1_values, chi_values, c2: float, h: float, tau: float = 1.0) -> list[tuple[float, float, int]]:
    """Number of phase-gradient equilibria with rho > 0 for every (c1, chi) pair."""
    c1_values, chi_values = list(c1_values), list(chi_values)
    if not c1_values or not chi_values:
        raise ValueError("c1 and chi grids must be non-empty")
    table = []
    for c1 in c1_values:
        for chi in chi_values:
            pts = fixed_points(System.PHASE_GRAD, ReducedParams(tau, c1, c2, h, chi))
            table.append((float(c1), float(chi), sum(1 for fp in pts if fp.rho > 0)))
    return table


def count_boundary(rows: list[tuple[float, float, int]], c1: float) -> tuple[float, float] | None:
    """First (chi_last_positive, chi_first_zero) cell along the ``c1`` row, if any."""
    row = sorted((chi, n) for c, chi, n in rows if c == c1)
    for (chi_a, na), (chi_b, nb) in zip(row, row[1:]):
        if na > 0 and nb == 0:
            return chi_a, chi_b
    return None
