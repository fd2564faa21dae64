import dataclasses

import numpy as np
import pytest

from msdarcy import harness, presets
from msdarcy.errors import ConfigError
from msdarcy.harness import bump_profile
from msdarcy.hyperbolic import Grid1D
from msdarcy.mixture import MixtureModel, PressureLaw


def small_scenario(**overrides):
    base = presets.single_species_scenario(n_cells=128, t_end=0.1)
    return dataclasses.replace(base, **overrides) if overrides else base


class TestBump:
    def test_compact_support(self):
        x = np.linspace(-2.0, 2.0, 401)
        b = bump_profile(x, 0.0, 0.5)
        assert np.all(b[np.abs(x) >= 0.5] == 0.0)
        assert b[200] == 1.0  # center value

    def test_c3_magnitudes(self):
        # fourth-degree polynomial junction: value and first three derivatives
        # vanish at the support edge
        h = 1e-5
        for s in (1.0 - h, 1.0 + h):
            assert abs(bump_profile(np.array([s]), 0.0, 1.0)[0]) < 1e-18


class TestWellPreparedInit:
    def test_zero_amplitude_constant(self):
        sc = small_scenario(amplitudes=np.array([0.0]))
        snap, rbar0 = harness.well_prepared_init(sc, 0.1)
        assert np.array_equal(snap.r, np.ones_like(snap.r))
        assert np.array_equal(snap.m, np.zeros_like(snap.m))
        assert np.array_equal(rbar0, snap.r)

    def test_momentum_vanishes_outside_support(self):
        sc = small_scenario()
        snap, _ = harness.well_prepared_init(sc, 0.2)
        outside = np.abs(sc.grid.centers - sc.center) >= sc.radius
        assert np.all(snap.m[:, outside] == 0.0)
        assert np.any(snap.m != 0.0)

    def test_initial_phi_discretization_small(self):
        sc = small_scenario()
        eps = 0.1
        snap, rbar0 = harness.well_prepared_init(sc, eps)
        from msdarcy.parabolic import reconstruct_momentum

        mbar, _ = reconstruct_momentum(sc.model, rbar0, sc.grid, eps)
        val = harness.phi(sc.model, snap.r, snap.m, rbar0, mbar, sc.grid.dx)
        assert val <= 1e-2 * sc.grid.dx**2

    def test_unprepared_momenta_zero(self):
        sc = small_scenario(well_prepared=False)
        snap, _ = harness.well_prepared_init(sc, 0.1)
        assert np.array_equal(snap.m, np.zeros_like(snap.m))

    def test_negative_density_rejected(self):
        sc = small_scenario(amplitudes=np.array([-2.0]))
        with pytest.raises(ConfigError):
            harness.well_prepared_init(sc, 0.1)


class TestPhi:
    def test_identical_states_zero(self):
        sc = small_scenario()
        r = sc.initial_density()
        m = np.zeros_like(r)
        assert harness.phi(sc.model, r, m, r, m, sc.grid.dx) == 0.0

    def test_uniform_gap_value(self):
        # rho = 2 vs rhobar = 1 with k=1, gamma=2: h(2|1) = 1 per unit length
        model = MixtureModel.constant_lambda([PressureLaw(1.0, 2.0)], [1.0], 0.0)
        grid = Grid1D(0.0, 1.0, 100, boundary="periodic")
        r = np.full((1, 100), 2.0)
        rbar = np.ones((1, 100))
        zero = np.zeros((1, 100))
        val = harness.phi(model, r, zero, rbar, zero, grid.dx)
        assert val == pytest.approx(1.0, rel=1e-12)

    def test_bracketed_by_convexity_constants(self):
        from msdarcy.mixture import StateBox, convexity_bounds

        sc = presets.two_species_scenario(n_cells=64, t_end=0.1)
        model = sc.model
        box = StateBox([0.8, 0.8], [1.2, 1.2], [0.5, 0.5])
        c, big_c = convexity_bounds(model, box, samples=64, seed=0)
        length = sc.grid.x_max - sc.grid.x_min
        rng = np.random.default_rng(1)
        for _ in range(20):
            r = rng.uniform(0.85, 1.15, (2, 64))
            rbar = rng.uniform(0.85, 1.15, (2, 64))
            m = rng.uniform(-0.3, 0.3, (2, 64))
            mbar = rng.uniform(-0.3, 0.3, (2, 64))
            val = harness.phi(model, r, m, rbar, mbar, sc.grid.dx)
            gap2 = sc.grid.dx * (np.sum((r - rbar) ** 2) + np.sum((m - mbar) ** 2))
            assert val >= 0.98 * c * gap2 - 1e-12
            sup2 = max(np.max((r - rbar) ** 2) + np.max((m - mbar) ** 2), 0.0)
            assert val <= 1.02 * big_c * 2 * model.n * sup2 * length

    def test_grid_mismatch_error(self):
        sc = small_scenario()
        r = sc.initial_density()
        with pytest.raises(Exception):
            harness.phi(sc.model, r, np.zeros_like(r), r[:, :-1], np.zeros((1, 127)), 0.1)


class TestErrorTerms:
    def test_coincident_solutions_vanish(self):
        sc = presets.two_species_scenario(n_cells=64, t_end=0.1)
        r = sc.initial_density()
        from msdarcy.parabolic import reconstruct_momentum

        mbar, ebar = reconstruct_momentum(sc.model, r, sc.grid, 0.1)
        terms = harness.error_terms(sc.model, r, mbar, r, mbar, ebar, sc.grid, 0.1)
        assert terms["R1"] == pytest.approx(0.0, abs=1e-14)
        assert terms["R2"] == pytest.approx(0.0, abs=1e-14)
        assert terms["Q"] == pytest.approx(0.0, abs=1e-14)
        # E pairs ebar with the velocity gap, which vanishes
        assert terms["E"] == pytest.approx(0.0, abs=1e-14)
        val = harness.phi(sc.model, r, mbar, r, mbar, sc.grid.dx)
        assert val == 0.0

    def test_single_species_r2_zero(self):
        sc = small_scenario()
        rng = np.random.default_rng(2)
        r = 1.0 + 0.1 * rng.random((1, 128))
        rbar = 1.0 + 0.1 * rng.random((1, 128))
        m = 0.1 * rng.standard_normal((1, 128))
        mbar = 0.1 * rng.standard_normal((1, 128))
        ebar = 0.01 * rng.standard_normal((1, 128))
        terms = harness.error_terms(sc.model, r, m, rbar, mbar, ebar, sc.grid, 0.1)
        assert terms["R2"] == 0.0
        assert terms["R1"] >= 0.0

    def test_r1_always_nonnegative(self):
        sc = presets.two_species_scenario(n_cells=32, t_end=0.1)
        rng = np.random.default_rng(3)
        for _ in range(25):
            r = rng.uniform(0.5, 2.0, (2, 32))
            rbar = rng.uniform(0.5, 2.0, (2, 32))
            m = rng.uniform(-1, 1, (2, 32))
            mbar = rng.uniform(-1, 1, (2, 32))
            ebar = rng.uniform(-1, 1, (2, 32))
            terms = harness.error_terms(sc.model, r, m, rbar, mbar, ebar, sc.grid, 0.1)
            assert terms["R1"] >= 0.0


class TestMonitors:
    def test_equilibrium_zero(self):
        sc = presets.two_species_scenario(n_cells=32)
        far = sc.farfield_density
        r = np.repeat(far[:, None], 32, axis=1)
        m = np.zeros_like(r)
        k1, k2 = harness.uniform_bound_monitors(sc.model, r, m, far, sc.grid.dx)
        assert k1 == 0.0
        assert k2 == pytest.approx(0.0, abs=1e-15)

    def test_k1_measures_l1_gap(self):
        sc = small_scenario()
        far = sc.farfield_density
        r = np.ones((1, 128))
        r[0, :64] = 1.5
        m = np.zeros_like(r)
        k1, _ = harness.uniform_bound_monitors(sc.model, r, m, far, sc.grid.dx)
        assert k1 == pytest.approx(0.5 * 64 * sc.grid.dx, rel=1e-12)


class TestSweepMechanics:
    def test_requires_three_decreasing_epsilons(self):
        sc = small_scenario(epsilons=(0.2, 0.1))
        with pytest.raises(ConfigError):
            harness.sweep(sc)
        sc = small_scenario(epsilons=(0.05, 0.1, 0.2))
        with pytest.raises(ConfigError):
            harness.sweep(sc)

    def test_coarse_sweep_structure(self):
        sc = small_scenario(epsilons=(0.4, 0.2, 0.1), output_count=4)
        res = harness.sweep(sc)
        assert len(res.records) == 3
        for rec in res.records:
            assert rec.failure is None
            assert rec.times[0] == 0.0 and rec.times[-1] == pytest.approx(0.1)
            assert np.all(rec.phi >= 0.0)
            assert np.all(rec.r1 >= -1e-15)
        assert np.isfinite(res.observed_order)
        assert np.isfinite(res.k_estimate)
        ints = res.records[0].time_integrals()
        assert set(ints) == {"abs_Q", "abs_E", "R_over_eps2"}
        assert all(v >= 0.0 for v in ints.values())

    def test_unprepared_sweep_starts_at_kinetic_gap(self):
        # with zero initial momenta, phi(0) is the kinetic energy of the
        # limit-manifold momentum: order eps^2, well above discretization
        sc = small_scenario(
            well_prepared=False, epsilons=(0.4, 0.2, 0.1), output_count=2
        )
        res = harness.sweep(sc)
        phi0s = np.array([rec.phi0 for rec in res.records])
        assert np.all(phi0s > 1e-8)
        ratios = phi0s[:-1] / phi0s[1:]
        assert np.allclose(ratios, 4.0, rtol=1e-3)  # phi(0) scales as eps^2

    def test_coupling_ratio_reported(self):
        sc = presets.two_species_scenario(n_cells=64, t_end=0.05)
        res = harness.sweep(dataclasses.replace(sc, epsilons=(0.4, 0.2, 0.1), output_count=2))
        assert np.allclose(res.coupling_ratios, [2.0, 3.0])
        assert res.coupling_ok
        assert res.warnings == []

    def test_coupling_warning_when_violated(self):
        laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
        weak = MixtureModel.constant_lambda(laws, [0.2, 0.3], 1.0)
        sc = presets.two_species_scenario(n_cells=64, t_end=0.02)
        sc = dataclasses.replace(sc, model=weak, epsilons=(0.4, 0.2, 0.1), output_count=2)
        res = harness.sweep(sc)
        assert not res.coupling_ok
        assert res.warnings

    def test_failed_run_recorded(self):
        # huge epsilon puts violent momenta on the manifold: the stiff runs
        # drain density below the floor while the shared limit run is fine
        sc = small_scenario(
            epsilons=(40.0, 20.0, 10.0), output_count=2, density_floor=0.5, t_end=0.5
        )
        res = harness.sweep(sc)
        assert any(rec.failure is not None for rec in res.records)
        failed = [rec for rec in res.records if rec.failure is not None]
        assert all("density floor" in rec.failure for rec in failed)


class TestUphill:
    def test_single_species_parabolic_never_uphill(self):
        sc = small_scenario(t_end=0.05)
        witnesses = harness.uphill_probe(sc, solver="parabolic", threshold=1e-8)
        assert witnesses == []

    def test_lambda_zero_control_clean(self):
        sc = presets.uphill_control_scenario(n_cells=128, t_end=0.2)
        witnesses = harness.uphill_probe(sc, solver="parabolic", threshold=1e-8)
        assert witnesses == []

    def test_three_species_scenario_has_species2_witness(self):
        sc = presets.uphill_scenario(n_cells=128, t_end=0.3)
        witnesses = harness.uphill_probe(sc, solver="hyperbolic", threshold=1e-8)
        assert any(w.species == 1 and w.value > 1e-8 for w in witnesses)

    def test_unknown_solver(self):
        with pytest.raises(ConfigError):
            harness.uphill_probe(small_scenario(), solver="spectral")
