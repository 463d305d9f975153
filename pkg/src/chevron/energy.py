"""Energy diagnostics: norms, the weighted Lyapunov functional and its absorbing bound.

In the subcritical regime (c1 < 1, h > 0) the functional

    L = tau ||A||^2 + delta0 ||phi||^2,   delta0 = 2 (1 - c1) / (2 + c2)

obeys ``L(t) <= L(0) exp(-k0 t) + |Omega| / k0`` with ``k0 = min(1/tau, h)``.
For c1 >= 2 c2 > 0 an alternate weighting is used and only boundedness is
checked. Outside both regimes norms are still recorded but nothing is checked.
"""

from __future__ import annotations

import enum
import math
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from chevron.core import ChevronParams, Field, SimState, l2_norm_sq, l4_norm_4
from chevron.fdops import grad_norm_sq, sine_mode
from chevron.pde import StepperConfig, run

DEFAULT_TOL = 0.05


class RegimeError(ValueError):
    """The parameters lie outside the regime where a quantity is defined."""


class Regime(str, enum.Enum):
    SUBCRITICAL_C1 = "subcritical_c1"
    C1_GE_2C2 = "c1_ge_2c2"
    NONE = "none"


def regime_of(p: ChevronParams) -> Regime:
    if p.h <= 0:
        return Regime.NONE
    if p.c1 < 1.0:
        return Regime.SUBCRITICAL_C1
    if p.c2 > 0 and p.c1 >= 2.0 * p.c2:
        return Regime.C1_GE_2C2
    return Regime.NONE


def delta0(p: ChevronParams) -> float:
    if p.c1 >= 1.0:
        raise RegimeError(f"delta0 needs c1 < 1 (got c1={p.c1}); use remark_weights for c1 >= 2 c2 > 0")
    return 2.0 * (1.0 - p.c1) / (2.0 + p.c2)


def k0(p: ChevronParams) -> float:
    if p.h <= 0:
        raise RegimeError("k0 needs h > 0; without dampening there is no absorbing bound")
    return min(1.0 / p.tau, p.h)


def remark_weights(p: ChevronParams) -> tuple[float, float]:
    """Weights ``(c1 tau / 2, 2 c2)`` of the alternate functional for c1 >= 2 c2 > 0."""
    if not (p.c2 > 0 and p.c1 >= 2.0 * p.c2):
        raise RegimeError(f"alternate functional needs c1 >= 2 c2 > 0 (got c1={p.c1}, c2={p.c2})")
    return (p.c1 * p.tau / 2.0, 2.0 * p.c2)


def lyapunov_weights(p: ChevronParams, regime: Regime | None = None) -> tuple[float, float]:
    regime = regime_of(p) if regime is None else Regime(regime)
    if regime is Regime.SUBCRITICAL_C1:
        return (p.tau, delta0(p))
    if regime is Regime.C1_GE_2C2:
        return remark_weights(p)
    return (p.tau, 1.0)


def bound_at(p: ChevronParams, L0: float, t: float, area: float, regime: Regime | None = None) -> float:
    """Theoretical ceiling on the functional at time ``t`` (NaN when the regime offers none).

    For c1 >= 2 c2 > 0 the ceiling is ``max(L0, |Omega| (wA + wPhi))``: the
    functional evaluated at unit modulus for both fields.
    """
    regime = regime_of(p) if regime is None else Regime(regime)
    if regime is Regime.SUBCRITICAL_C1:
        rate = k0(p)
        return L0 * math.exp(-rate * t) + area / rate
    if regime is Regime.C1_GE_2C2:
        wA, wphi = remark_weights(p)
        return max(L0, area * (wA + wphi))
    return math.nan


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    normA_sq: float
    normPhi_sq: float
    gradA_sq: float
    gradPhi_sq: float
    l4A: float
    lyapunov: float
    bound: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> tuple:
        return astuple(self)


def lyapunov_value(state: SimState, p: ChevronParams, regime: Regime | None = None) -> float:
    wA, wphi = lyapunov_weights(p, regime)
    return wA * l2_norm_sq(state.A) + wphi * l2_norm_sq(state.phi)


def record(state: SimState, p: ChevronParams, L0: float, regime: Regime | None = None, t0: float = 0.0) -> EnergyRecord:
    """Diagnostics of ``state``; the bound is measured from ``t0`` where the functional was ``L0``."""
    regime = regime_of(p) if regime is None else Regime(regime)
    wA, wphi = lyapunov_weights(p, regime)
    nA = l2_norm_sq(state.A)
    nphi = l2_norm_sq(state.phi)
    return EnergyRecord(
        t=state.t,
        normA_sq=nA,
        normPhi_sq=nphi,
        gradA_sq=grad_norm_sq(state.A),
        gradPhi_sq=grad_norm_sq(state.phi),
        l4A=l4_norm_4(state.A),
        lyapunov=wA * nA + wphi * nphi,
        bound=bound_at(p, L0, state.t - t0, state.grid.area(), regime),
    )


class EnergyRecorder:
    """Observer collecting an :class:`EnergyRecord` per call; the first call fixes L(0)."""

    def __init__(self, p: ChevronParams, regime: Regime | None = None, L0: float | None = None, t0: float | None = None):
        self.p = p
        self.regime = regime_of(p) if regime is None else Regime(regime)
        self.L0 = L0
        self.t0 = t0
        self.records: list[EnergyRecord] = []

    def __call__(self, state: SimState) -> None:
        if self.L0 is None:
            self.L0 = lyapunov_value(state, self.p, self.regime)
        if self.t0 is None:
            self.t0 = state.t
        self.records.append(record(state, self.p, self.L0, self.regime, self.t0))


@dataclass
class DissipativityReport:
    regime: Regime
    violations: list[tuple[float, float, float]] = field(default_factory=list)
    max_excess_ratio: float = 0.0
    tol: float = DEFAULT_TOL

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [
            f"regime: {self.regime.value}",
            f"max lyapunov/bound ratio: {self.max_excess_ratio:.6g} (tolerance {1 + self.tol:g})",
            f"violations: {len(self.violations)}",
        ]
        for t, lyap, bnd in self.violations[:20]:
            lines.append(f"  t={t:.6g} lyapunov={lyap:.6g} bound={bnd:.6g}")
        if len(self.violations) > 20:
            lines.append(f"  ... {len(self.violations) - 20} more")
        return "\n".join(lines)


def check_dissipativity(records, regime: Regime = Regime.SUBCRITICAL_C1, tol: float = DEFAULT_TOL) -> DissipativityReport:
    """Flag every record whose functional exceeds ``bound * (1 + tol)``.

    ``max_excess_ratio`` is the largest ``lyapunov / bound`` seen.
    """
    regime = Regime(regime)
    records = sorted(records, key=lambda r: r.t)
    if regime is Regime.NONE:
        return DissipativityReport(regime, [], math.nan, tol)
    violations = []
    worst = 0.0
    for r in records:
        if math.isnan(r.bound):
            continue
        if r.bound > 0:
            ratio = r.lyapunov / r.bound
        else:
            ratio = 0.0 if r.lyapunov == 0 else math.inf
        worst = max(worst, ratio)
        if r.lyapunov > r.bound * (1.0 + tol):
            violations.append((r.t, r.lyapunov, r.bound))
    return DissipativityReport(regime, violations, worst, tol)


def perturbation_direction(state: SimState, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Smooth direction ``(a, Phi)`` normalised so ``tau ||a||^2 + ||Phi||^2 = 1``."""
    grid = state.grid
    e = sine_mode(grid, 1, 1)
    a = (1 + 1j) / math.sqrt(2) * e
    Phi = e.copy()
    norm = math.sqrt(tau * l2_norm_sq(Field(grid, a)) + l2_norm_sq(Field(grid, Phi)))
    return a / norm, Phi / norm


def separation(a: SimState, b: SimState, tau: float) -> float:
    """``tau ||A - A~||^2 + ||phi - phi~||^2``."""
    return tau * l2_norm_sq(a.A - b.A) + l2_norm_sq(a.phi - b.phi)


def continuous_dependence_probe(
    p: ChevronParams,
    initial: SimState,
    delta: float,
    t_end: float,
    cfg: StepperConfig | None = None,
    observe_every: float = 0.1,
) -> tuple[list[tuple[float, float]], float]:
    """Separation curve ``[(t, D(t))]`` between ``initial`` and a ``delta``-perturbed copy.

    ``D(0) = delta**2`` by construction. Returns the curve and the
    amplification ``max_t D(t) / D(0)`` (0 when ``delta == 0``).
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if not p.dissipative_regime():
        raise RegimeError("continuous dependence probe requires a dissipative regime")
    cfg = cfg or StepperConfig()
    a, Phi = perturbation_direction(initial, p.tau)
    perturbed = SimState.from_arrays(
        initial.grid, initial.A.values + delta * a, initial.phi.values + delta * Phi, initial.t
    )
    base_states: list[SimState] = []
    pert_states: list[SimState] = []
    run(initial, p, cfg, t_end, [base_states.append], observe_every)
    run(perturbed, p, cfg, t_end, [pert_states.append], observe_every)
    curve = [(s.t, separation(s, q, p.tau)) for s, q in zip(base_states, pert_states)]
    d0 = curve[0][1]
    amplification = 0.0 if d0 == 0 else max(d for _, d in curve) / d0
    return curve, amplification
