"""Acceptance criteria 1 to 10.

Each test prints one ``criterion N: PASS|FAIL`` line; the lines are repeated
in the pytest terminal summary.
"""

import math
import time

import numpy as np
import pytest

from chevron.core import ChevronParams, Field, Grid2D, inner_product
from chevron.energy import (
    EnergyRecorder,
    Regime,
    check_dissipativity,
    continuous_dependence_probe,
    lyapunov_weights,
    remark_weights,
)
from chevron.fdops import (
    grad_norm_sq,
    ladyzhenskaya_audit,
    ladyzhenskaya_corpus,
    laplacian,
    mode_eigenvalue,
    sine_mode,
)
from chevron.initial import RandomIC, SingleModeIC, make_initial
from chevron.pde import Scheme, StepperConfig, order_of_convergence, run
from chevron.polar import polar_consistency
from chevron.reduced_ode import (
    Kind,
    ReducedParams,
    System,
    critical_chi,
    fixed_points,
    portrait,
    residual,
)
from helpers import report, smooth_vortex_free
from oracles import locus_roots_bruteforce

GRID64 = Grid2D(64, 64)
DEMO = ChevronParams(tau=1.0, D1=1.0, D2=0.5, c1=0.5, c2=1.0, h=0.5, beta=0.5)


def dissipativity_run(c1, c2, regime=None):
    p = ChevronParams(tau=1.0, D1=1.0, D2=0.5, c1=c1, c2=c2, h=0.5, beta=0.5)
    initial = make_initial(RandomIC(0, 1.0), GRID64)
    rec = EnergyRecorder(p, regime)
    start = time.perf_counter()
    run(initial, p, StepperConfig(Scheme.IMEX_EULER, 1e-3), 20.0, [rec], observe_every=0.1)
    return rec, time.perf_counter() - start


@pytest.mark.parametrize("c1,c2", [(0.0, 0.0), (0.5, 1.0), (0.9, 2.0)])
def test_criterion_1_dissipativity_bound(c1, c2):
    rec, elapsed = dissipativity_run(c1, c2)
    rep = check_dissipativity(rec.records, Regime.SUBCRITICAL_C1, tol=0.05)
    ok = rep.ok and elapsed <= 60.0 and len(rec.records) == 201
    report(1, ok, f"(c1, c2)=({c1}, {c2}) max lyapunov/bound={rep.max_excess_ratio:.4f} runtime={elapsed:.1f}s")
    assert rep.ok, rep.summary()
    assert elapsed <= 60.0


def test_criterion_2_remark_regime():
    rec, elapsed = dissipativity_run(2.0, 0.5, Regime.C1_GE_2C2)
    p = ChevronParams(D2=0.5, c1=2.0, c2=0.5, h=0.5, beta=0.5)
    assert lyapunov_weights(p, Regime.C1_GE_2C2) == remark_weights(p) == (1.0, 1.0)
    rep = check_dissipativity(rec.records, Regime.C1_GE_2C2, tol=0.05)
    level = max(rec.L0, GRID64.area() * sum(remark_weights(p)))
    assert all(r.bound == pytest.approx(level) for r in rec.records)
    report(2, rep.ok, f"max lyapunov/bound={rep.max_excess_ratio:.4f} violations={len(rep.violations)}")
    assert rep.ok, rep.summary()


def test_criterion_3_uniform_catalog():
    start = time.perf_counter()
    pts = fixed_points(System.UNIFORM, ReducedParams(h=0.25))
    s = math.sqrt(0.75)
    expected = [((0.0, 0.0), Kind.SADDLE), ((1.0, 0.0), Kind.SADDLE), ((0.5, s), Kind.SPIRAL_SINK), ((0.5, -s), Kind.SPIRAL_SINK)]
    matched = []
    for (rho, phi), kind in expected:
        hits = [fp for fp in pts if abs(fp.rho - rho) <= 1e-10 and abs(fp.phi - phi) <= 1e-10]
        matched.append(len(hits) == 1 and hits[0].kind is kind)
    pts1 = fixed_points(System.UNIFORM, ReducedParams(h=1.0))
    degenerate = [fp.kind for fp in pts1 if abs(fp.rho - 1) <= 1e-10 and abs(fp.phi) <= 1e-10] == [Kind.DEGENERATE]
    elapsed = time.perf_counter() - start
    ok = len(pts) == 4 and all(matched) and degenerate and elapsed < 1.0
    report(3, ok, f"h=0.25 kinds={[fp.kind.value for fp in pts]} h=1 (1,0) degenerate={degenerate} runtime={elapsed:.3f}s")
    assert len(pts) == 4 and all(matched)
    assert degenerate
    assert elapsed < 1.0


def test_criterion_4_subcritical_collapse():
    start = time.perf_counter()
    c1, c2, h = 0.6, 1.0, 0.5
    assert critical_chi(c1) == pytest.approx(1.25, rel=1e-12)
    above = fixed_points(System.PHASE_GRAD, ReducedParams(1.0, c1, c2, h, 1.3))
    only_origin = len(above) == 1 and above[0].rho == 0.0 and above[0].phi == 0.0
    below = fixed_points(System.PHASE_GRAD, ReducedParams(1.0, c1, c2, h, 1.2))
    nontrivial = [fp for fp in below if fp.rho > 0]
    # independent scan of the same locus; it agrees on the count
    oracle_count = len(locus_roots_bruteforce(c1, c2, h, 1.2))
    rng = np.random.default_rng(2024)
    seeds = list(zip(rng.uniform(0.0, 1.5, 20), rng.uniform(-1.5, 1.5, 20)))
    orbits = portrait(System.PHASE_GRAD, ReducedParams(1.0, c1, c2, h, 1.3), seeds, 500.0, 0.01)
    worst = max(math.hypot(*o.terminal) for o in orbits)
    elapsed = time.perf_counter() - start
    ok = only_origin and len(nontrivial) >= 1 and worst <= 1e-3 and elapsed < 10.0
    report(
        4,
        ok,
        f"chi=1.3 only origin={only_origin}; chi=1.2 nontrivial={len(nontrivial)} (oracle {oracle_count}); "
        f"max |orbit(500)|={worst:.2e}; runtime={elapsed:.1f}s",
    )
    assert only_origin
    assert worst <= 1e-3
    assert elapsed < 10.0
    # the nontrivial branch actually ends at chi = 1 for these parameters
    assert len(nontrivial) >= 1, "no nontrivial equilibrium at chi=1.2"


def test_criterion_5_supercritical_persistence():
    c1, c2, h = 1.5, 1.0, 0.5
    details = []
    ok = True
    for chi in (0.5, 1.0, 2.0, 5.0):
        p = ReducedParams(1.0, c1, c2, h, chi)
        pts = [fp for fp in fixed_points(System.PHASE_GRAD, p) if fp.rho > 0]
        oracle = locus_roots_bruteforce(c1, c2, h, chi)
        res = max((residual(System.PHASE_GRAD, p, fp.rho, fp.phi) for fp in pts), default=math.inf)
        dist = max(
            (min(math.hypot(fp.rho - r, fp.phi - f) for r, f in oracle) for fp in pts),
            default=math.inf,
        ) if oracle else math.inf
        good = len(pts) >= 1 and res <= 1e-10 and dist <= 1e-8 and len(pts) == len(oracle)
        ok &= good
        details.append(f"chi={chi}: n={len(pts)} res={res:.1e} oracle_dist={dist:.1e}")
    report(5, ok, "; ".join(details))
    assert ok


def test_criterion_6_green_identity_and_spectra():
    rng = np.random.default_rng(6)
    worst_green = 0.0
    for k in range(100):
        v = rng.standard_normal(GRID64.shape)
        if k % 2:
            v = v + 1j * rng.standard_normal(GRID64.shape)
        f = Field(GRID64, v)
        g2 = grad_norm_sq(f)
        lhs = inner_product(-laplacian(f), f)
        worst_green = max(worst_green, abs(lhs - g2) / g2)
    worst_eig = 0.0
    for kx in range(1, 5):
        for ky in range(1, 5):
            e = Field(GRID64, sine_mode(GRID64, kx, ky))
            lam = mode_eigenvalue(GRID64, kx, ky)
            # closed form of the 1D second-difference symbol
            lam_ref = -4 / GRID64.dx**2 * math.sin(kx * math.pi * GRID64.dx / 2) ** 2 - 4 / GRID64.dy**2 * math.sin(
                ky * math.pi * GRID64.dy / 2
            ) ** 2
            assert lam == pytest.approx(lam_ref, rel=1e-13)
            err = np.max(np.abs(laplacian(e).values - lam * e.values)) / (abs(lam) * e.max_abs())
            worst_eig = max(worst_eig, err)
    ok = worst_green <= 1e-12 and worst_eig <= 1e-12
    report(6, ok, f"green rel err={worst_green:.1e} eigen rel err={worst_eig:.1e}")
    assert ok


def test_criterion_7_integrator_orders():
    initial = make_initial(SingleModeIC(3, 3, 1.0), GRID64)
    start = time.perf_counter()
    rk4 = order_of_convergence(DEMO, initial, Scheme.RK4_EXPLICIT, t_final=0.01, dt=4e-5)
    imex = order_of_convergence(DEMO, initial, Scheme.IMEX_EULER, t_final=0.1, dt=1e-3)
    elapsed = time.perf_counter() - start
    ok = rk4 >= 3.5 and imex >= 0.9 and elapsed < 120.0
    report(7, ok, f"rk4 order={rk4:.3f} imex order={imex:.3f} runtime={elapsed:.1f}s")
    assert rk4 >= 3.5
    assert imex >= 0.9
    assert elapsed < 120.0


def test_criterion_8_polar_consistency():
    rng = np.random.default_rng(8)
    worst = max(polar_consistency(smooth_vortex_free(GRID64, rng), DEMO) for _ in range(50))
    report(8, worst < 1e-8, f"max relative mismatch over 50 states={worst:.2e}")
    assert worst < 1e-8


def test_criterion_9_continuous_dependence():
    initial = make_initial(RandomIC(0, 1.0), GRID64)
    cfg = StepperConfig(Scheme.IMEX_EULER, 1e-3)
    deltas = (1e-2, 5e-3, 2.5e-3)
    peaks = []
    for delta in deltas:
        curve, _ = continuous_dependence_probe(DEMO, initial, delta, 10.0, cfg)
        assert curve[0][1] == pytest.approx(delta**2, rel=1e-12)
        peaks.append(math.sqrt(max(d for _, d in curve)))
    factors = [(peaks[i + 1] / peaks[i]) / 0.5 for i in range(len(peaks) - 1)]
    ok = all(0.75 <= f <= 1.25 for f in factors)
    report(9, ok, f"sqrt(max D)={[f'{x:.3e}' for x in peaks]} normalised halving factors={[f'{f:.4f}' for f in factors]}")
    assert ok


def test_criterion_10_ladyzhenskaya_audit():
    corpus = ladyzhenskaya_corpus(GRID64)
    worst, violations = ladyzhenskaya_audit(corpus, tol=0.05)
    ok = len(corpus) == 100 and worst <= 1.05 and not violations
    report(10, ok, f"max ratio over {len(corpus)} fields={worst:.4f}")
    assert len(corpus) == 100
    assert worst <= 1.05
