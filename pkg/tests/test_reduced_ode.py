import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chevron.reduced_ode import (
    DivergenceError,
    Kind,
    ReducedParams,
    System,
    bifurcation_scan,
    classify,
    classify_eigenvalues,
    count_boundary,
    critical_chi,
    fixed_points,
    integrate,
    jacobian,
    locus_cubic,
    portrait,
    residual,
    rhs,
    rhs_phase_grad,
    rhs_uniform,
    seed_grid,
)
from oracles import fd_jacobian, locus_roots_bruteforce

U, PG = System.UNIFORM, System.PHASE_GRAD
S075 = math.sqrt(0.75)


def as_set(points):
    return sorted((round(fp.rho, 9), round(fp.phi, 9)) for fp in points)


class TestRhs:
    def test_uniform_examples(self):
        p = ReducedParams(h=0.25)
        assert rhs_uniform(1.0, 0.0, p) == (0.0, 0.0)
        assert rhs_uniform(0.5, S075, p) == pytest.approx((0.0, 0.0), abs=1e-15)
        assert rhs_uniform(0.5, 0.5, ReducedParams(h=0.5)) == pytest.approx((0.25, -0.125), abs=1e-15)

    def test_phase_grad_example(self):
        p = ReducedParams(tau=1, c1=0.5, c2=1, h=0.5, chi=0.5)
        assert rhs_phase_grad(1.0, 0.0, p) == pytest.approx((-0.25, -0.5), abs=1e-15)

    @given(st.floats(0, 3), st.floats(-3, 3), st.floats(0.1, 3), st.floats(0, 3), st.floats(0, 3), st.floats(0.01, 2))
    def test_chi_zero_reduces_to_uniform(self, rho, phi, tau, c1, c2, h):
        p = ReducedParams(tau, c1, c2, h, 0.0)
        assert rhs_phase_grad(rho, phi, p) == pytest.approx(rhs_uniform(rho, phi, p), rel=1e-12, abs=1e-12)

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_axis_invariant(self, phi, chi):
        p = ReducedParams(1.0, 0.6, 1.0, 0.5, chi)
        drho, dphi = rhs_phase_grad(0.0, phi, p)
        assert drho == 0.0 and dphi == pytest.approx(-0.5 * phi)

    def test_jacobian_against_finite_differences(self):
        r = np.random.default_rng(3)
        for _ in range(100):
            p = ReducedParams(r.uniform(0.3, 3), r.uniform(0, 2), r.uniform(0, 2), r.uniform(0.05, 2), r.uniform(-2, 2))
            system = U if r.random() < 0.3 else PG
            x = r.uniform(-1.5, 1.5, 2)
            J = jacobian(system, p, *x)
            Jfd = fd_jacobian(lambda v: rhs(system, v[0], v[1], p if system is PG else ReducedParams(p.tau, p.c1, p.c2, p.h)), x)
            assert np.allclose(J, Jfd, rtol=1e-6, atol=1e-6 * (1 + np.max(np.abs(J))))


class TestClassify:
    @pytest.mark.parametrize(
        "eigs,kind",
        [
            ((-1, 2), Kind.SADDLE),
            ((-1 + 2j, -1 - 2j), Kind.SPIRAL_SINK),
            ((1 + 2j, 1 - 2j), Kind.SPIRAL_SOURCE),
            ((-1, -3), Kind.NODE_SINK),
            ((1, 3), Kind.NODE_SOURCE),
            ((1j, -1j), Kind.CENTER_MARGINAL),
            ((0, -1), Kind.DEGENERATE),
            ((1e-12, -1), Kind.DEGENERATE),
        ],
    )
    def test_taxonomy(self, eigs, kind):
        assert classify_eigenvalues(eigs) is kind

    def test_uniform_examples(self):
        assert classify(U, ReducedParams(h=0.25), 0.5, S075).kind is Kind.SPIRAL_SINK
        assert classify(U, ReducedParams(h=0.25), 1.0, 0.0).kind is Kind.SADDLE
        assert classify(U, ReducedParams(h=1.0), 1.0, 0.0).kind is Kind.DEGENERATE

    def test_not_an_equilibrium(self):
        with pytest.raises(ValueError, match="residual"):
            classify(U, ReducedParams(h=0.25), 0.5, 0.5)

    def test_mirror_symmetry_at_chi_zero(self):
        for h in (0.1, 0.25, 0.6, 0.9):
            pts = fixed_points(U, ReducedParams(h=h))
            kinds = {(round(fp.rho, 9), round(fp.phi, 9)): fp.kind for fp in pts}
            for (r, f), k in kinds.items():
                assert kinds[(r, round(-f, 9) + 0.0)] is k


class TestCriticalChi:
    def test_values(self):
        assert critical_chi(0.0) == 1.0
        assert critical_chi(0.6) == pytest.approx(1.25, rel=1e-15)
        assert critical_chi(1.5) is None
        with pytest.raises(ValueError):
            critical_chi(-0.1)

    def test_radius_vanishes_there(self):
        for c1 in (0.0, 0.3, 0.6, 0.95):
            assert ReducedParams(c1=c1, chi=critical_chi(c1)).radius_sq == pytest.approx(0.0, abs=1e-12)


class TestFixedPoints:
    def test_uniform_catalog_h_quarter(self):
        pts = fixed_points(U, ReducedParams(h=0.25))
        expected = [(0.0, 0.0), (1.0, 0.0), (0.5, S075), (0.5, -S075)]
        assert len(pts) == 4
        for fp, (r, f) in zip(pts, expected):
            assert abs(fp.rho - r) < 1e-10 and abs(fp.phi - f) < 1e-10
        assert [fp.kind for fp in pts] == [Kind.SADDLE, Kind.SADDLE, Kind.SPIRAL_SINK, Kind.SPIRAL_SINK]

    @pytest.mark.parametrize("h,kind", [(1.0, Kind.DEGENERATE), (1.5, Kind.NODE_SINK)])
    def test_uniform_h_at_least_one(self, h, kind):
        pts = fixed_points(U, ReducedParams(h=h))
        assert as_set(pts) == [(0.0, 0.0), (1.0, 0.0)]
        assert pts[1].kind is kind

    @pytest.mark.parametrize("h", [0.0, -0.5])
    def test_h_nonpositive_rejected(self, h):
        with pytest.raises(ValueError, match="h"):
            fixed_points(U, ReducedParams(h=h))

    def test_h_zero_message_describes_continua(self):
        with pytest.raises(ValueError, match="degenerate"):
            fixed_points(PG, ReducedParams(h=0.0, chi=0.5))

    def test_subcritical_only_origin(self):
        pts = fixed_points(PG, ReducedParams(1.0, 0.6, 1.0, 0.5, 1.3))
        assert as_set(pts) == [(0.0, 0.0)]

    @pytest.mark.parametrize("chi", [0.5, 1.0, 2.0, 5.0])
    def test_supercritical_persistence_against_bruteforce(self, chi):
        p = ReducedParams(1.0, 1.5, 1.0, 0.5, chi)
        pts = [fp for fp in fixed_points(PG, p) if fp.rho > 0]
        oracle = locus_roots_bruteforce(1.5, 1.0, 0.5, chi)
        assert len(pts) >= 1 and len(pts) == len(oracle)
        for fp in pts:
            assert residual(PG, p, fp.rho, fp.phi) <= 1e-10
            assert min(math.hypot(fp.rho - r, fp.phi - f) for r, f in oracle) <= 1e-8

    def test_bruteforce_agreement_over_random_parameters(self):
        r = np.random.default_rng(7)
        for _ in range(25):
            c1, c2, h, chi = r.uniform(0, 2), r.uniform(0.1, 2), r.uniform(0.1, 1.5), r.uniform(-2, 2)
            p = ReducedParams(1.0, c1, c2, h, chi)
            pts = [fp for fp in fixed_points(PG, p) if fp.rho > 0]
            oracle = locus_roots_bruteforce(c1, c2, h, chi, subdivisions=20_000)
            for fp in pts:
                assert residual(PG, p, fp.rho, fp.phi) <= 1e-10
            # a scan can miss tangential roots; every oracle root must be found though
            for ro, fo in oracle:
                assert min(math.hypot(fp.rho - ro, fp.phi - fo) for fp in pts) <= 1e-7

    def test_locus_cubic_vanishes_at_equilibria(self):
        p = ReducedParams(1.0, 1.5, 1.0, 0.5, 2.0)
        P = np.poly1d(locus_cubic(p))
        for fp in fixed_points(PG, p)[1:]:
            assert abs(P(fp.rho**2)) < 1e-10

    def test_resolution_invariance(self):
        for chi in (0.3, 0.9, 2.0):
            p = ReducedParams(1.0, 1.2, 0.7, 0.4, chi)
            assert as_set(fixed_points(PG, p, resolution=200)) == as_set(fixed_points(PG, p, resolution=2000))

    def test_c2_zero_branch(self):
        p = ReducedParams(1.0, 0.5, 0.0, 0.3, 0.4)
        pts = fixed_points(PG, p)
        assert len(pts) >= 2
        for fp in pts:
            assert residual(PG, p, fp.rho, fp.phi) <= 1e-12

    def test_phase_grad_at_chi_zero_matches_uniform(self):
        p = ReducedParams(1.0, 0.6, 1.0, 0.25, 0.0)
        assert as_set(fixed_points(PG, p)) == as_set(fixed_points(U, p))

    def test_origin_first(self):
        for chi in (0.0, 0.5, 3.0):
            assert fixed_points(PG, ReducedParams(1.0, 1.5, 1.0, 0.5, chi))[0].rho == 0.0


class TestIntegrate:
    def test_fixed_point_orbit_constant(self):
        p = ReducedParams(h=0.25)
        orb = integrate(U, p, (0.5, S075), 10.0, 0.01)
        assert np.max(np.abs(orb.rho - 0.5)) < 1e-12 and np.max(np.abs(orb.phi - S075)) < 1e-12

    def test_converges_to_sink(self):
        orb = integrate(U, ReducedParams(h=0.25), (0.9, 0.1), 200.0, 0.01, sample_every=100)
        assert abs(orb.rho[-1] - 0.5) < 1e-4 and abs(orb.phi[-1] - S075) < 1e-4

    def test_samples_time_ordered(self):
        orb = integrate(PG, ReducedParams(1.0, 0.6, 1.0, 0.5, 0.4), (0.3, 0.2), 1.05, 0.1)
        t = [s[0] for s in orb.samples]
        assert t[0] == 0.0 and t[-1] == pytest.approx(1.05) and all(a < b for a, b in zip(t, t[1:]))

    def test_axis_preserved(self):
        orb = integrate(PG, ReducedParams(1.0, 0.6, 1.0, 0.5, 0.8), (0.0, 1.2), 20.0, 0.01)
        assert np.all(orb.rho == 0.0)
        assert orb.phi[-1] == pytest.approx(1.2 * math.exp(-0.5 * 20.0), rel=1e-8)

    def test_rk4_order(self):
        p = ReducedParams(1.0, 1.5, 1.0, 0.5, 0.7)

        def end(dt):
            orb = integrate(PG, p, (0.4, -0.3), 2.0, dt)
            return np.array(orb.terminal)

        ref = end(0.0025)
        e1, e2 = np.linalg.norm(end(0.04) - ref), np.linalg.norm(end(0.02) - ref)
        assert math.log2(e1 / e2) >= 3.5

    def test_divergence(self):
        # the cubic term makes RK4 unstable for a step this large at rho = 50
        with pytest.raises(DivergenceError):
            integrate(U, ReducedParams(h=0.25), (50.0, 0.0), 10.0, 0.5)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            integrate(U, ReducedParams(), (0.1, 0.1), 1.0, 0.0)


class TestPortrait:
    def test_empty(self):
        assert portrait(U, ReducedParams(h=0.25), [], 10.0, 0.01) == []

    def test_first_quadrant_basin(self):
        seeds = [(r, f) for r in (0.2, 0.6, 1.0, 1.4) for f in (0.2, 0.7, 1.2)]
        orbits = portrait(U, ReducedParams(h=0.25), seeds, 200.0, 0.01)
        for orb in orbits:
            assert orb.basin is not None
            assert (round(orb.basin.rho, 9), round(orb.basin.phi, 9)) == (0.5, round(S075, 9))

    def test_supercritical_dampening(self):
        seeds = [(r, f) for r in (0.3, 0.8, 1.3) for f in (0.3, 1.0)]
        orbits = portrait(U, ReducedParams(h=1.5), seeds, 200.0, 0.01)
        for orb in orbits:
            assert orb.basin is not None and orb.basin.rho == 1.0 and orb.basin.phi == 0.0

    def test_unresolved_basin(self):
        orbits = portrait(U, ReducedParams(h=0.25), [(0.9, 0.1)], 0.5, 0.01)
        assert orbits[0].basin is None

    def test_seed_outside_window(self):
        with pytest.raises(ValueError, match="window"):
            portrait(U, ReducedParams(h=0.25), [(2.0, 0.0)], 1.0, 0.01)

    def test_seed_grid(self):
        seeds = seed_grid(3, 4)
        assert len(seeds) == 12 and seeds[0] == (0.0, -1.5) and seeds[-1] == (1.5, 1.5)


class TestBifurcation:
    def test_supercritical_row_positive(self):
        chis = [0.25 * k for k in range(21)]
        table = bifurcation_scan([1.5], chis, 1.0, 0.5)
        assert all(n >= 1 for _, _, n in table)
        assert count_boundary(table, 1.5) is None

    def test_chi_zero_column_matches_uniform_count(self):
        table = bifurcation_scan([0.0, 0.6, 1.5], [0.0], 1.0, 0.5)
        expected = sum(1 for fp in fixed_points(U, ReducedParams(h=0.5)) if fp.rho > 0)
        assert expected == 3
        assert all(n == expected for _, _, n in table)

    def test_subcritical_row_collapses(self):
        chis = [round(0.05 * k, 10) for k in range(41)]
        table = bifurcation_scan([0.6], chis, 1.0, 0.5)
        counts = {chi: n for _, chi, n in table}
        assert counts[1.3] == 0
        cell = count_boundary(table, 0.6)
        assert cell is not None and cell[1] <= critical_chi(0.6)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 0.95), st.floats(0.05, 1.5))
    def test_nothing_beyond_critical_chi(self, c1, h):
        chi = 1.01 * critical_chi(c1)
        assert as_set(fixed_points(PG, ReducedParams(1.0, c1, 1.0, h, chi))) == [(0.0, 0.0)]

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            bifurcation_scan([], [0.1], 1.0, 0.5)
