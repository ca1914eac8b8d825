import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sllab.dynamics import EvolutionConfig, evolve
from sllab.grid_field import (
    PhysicalParams,
    PotentialSpec,
    gaussian_packet,
    harmonic_ground_state,
    make_grid,
    plane_wave,
)
from sllab.trajectories import (
    SdeConfig,
    bohm_velocity,
    integrate_bohmian,
    integrate_nelson,
    interpolate_grid,
    nelson_drift,
    static_trace,
    velocity_field,
)
from oracles import free_gaussian_bohm_path

QUANTUM = PhysicalParams.quantum()


class TestVelocityFields:
    def test_plane_wave_velocity(self):
        g = make_grid(1, 2 * np.pi * 8, 256)
        k = 2.0 * np.pi / g.length * 6
        psi = plane_wave(g, k)
        v = bohm_velocity(psi, np.array([[0.3], [1.7]]), QUANTUM)
        assert np.allclose(v, k, atol=1e-9)  # v = hbar k / m

    def test_ground_state_zero_current(self):
        g = make_grid(1, 20.0, 256)
        psi = harmonic_ground_state(g)
        vf = velocity_field(psi.values, g, QUANTUM)
        assert np.max(np.abs(vf.v[0])[vf.valid_mask]) < 1e-9

    def test_osmotic_velocity_gaussian(self):
        # u = (hbar/2m) grad rho / rho = -x/(2 s0^2) for a Gaussian
        g = make_grid(1, 20.0, 256)
        psi = gaussian_packet(g, rho_width=1.0)
        x = np.array([[0.5], [-1.2]])
        u = nelson_drift(psi, x, QUANTUM) - bohm_velocity(psi, x, QUANTUM)
        assert np.allclose(u, -x / 2.0, atol=1e-6)

    def test_drift_decomposition_consistency(self):
        g = make_grid(1, 20.0, 256)
        psi = gaussian_packet(g, center=0.5, momentum=1.0)
        pts = np.array([[0.0], [1.0], [-2.0]])
        b = nelson_drift(psi, pts, QUANTUM)
        v = bohm_velocity(psi, pts, QUANTUM)
        assert np.all(np.isfinite(b - v))


class TestInterpolation:
    def test_linear_matches_grid_values(self):
        g = make_grid(1, 20.0, 64)
        f = np.sin(2 * np.pi * g.axis_coords / g.length)
        pts = g.axis_coords[:5].reshape(-1, 1)
        out = interpolate_grid(f, g, pts)
        assert np.allclose(out, f[:5], atol=1e-12)

    def test_spectral_eval_exact_on_band_limited(self):
        g = make_grid(1, 20.0, 64)
        k = 2.0 * np.pi / g.length * 3
        f = np.cos(k * g.axis_coords)
        pts = np.array([[0.123], [-4.56], [7.89]])
        out = interpolate_grid(f, g, pts, scheme="spectral_eval")
        assert np.allclose(out, np.cos(k * pts[:, 0]), atol=1e-10)

    def test_linear_periodic_wrap(self):
        g = make_grid(1, 20.0, 64)
        f = np.arange(64, dtype=float)
        out = interpolate_grid(f, g, np.array([[10.0 - 1e-9]]))
        # between last grid point (63) and its periodic neighbor (0)
        assert 0.0 <= out[0] <= 63.0

    def test_2d_interpolation(self):
        g = make_grid(2, 20.0, 32)
        x, y = g.meshgrid()
        f = x + 2.0 * y
        pts = np.array([[1.0, 2.0], [-3.0, 0.5]])
        out = interpolate_grid(f, g, pts)
        assert np.allclose(out, pts[:, 0] + 2.0 * pts[:, 1], atol=1e-9)


class TestBohmian:
    def test_free_gaussian_streamlines(self):
        # [DERIVED] closed form x(t) = x0 * s(t)/s0 for the spreading packet
        g = make_grid(1, 40.0, 512)
        cfg = EvolutionConfig(dt=1e-3, steps=2000, params=QUANTUM,
                              potential=PotentialSpec.free(), snapshot_stride=10)
        trace = evolve(gaussian_packet(g), cfg)
        x0 = np.array([[0.5], [1.0], [-1.5]])
        ens = integrate_bohmian(trace, x0, 1e-2, QUANTUM)
        for i, x in enumerate(x0[:, 0]):
            expect = free_gaussian_bohm_path(x, 2.0)
            assert ens.final_positions()[i, 0] == pytest.approx(expect, abs=2e-3)

    def test_deterministic_repeat(self):
        g = make_grid(1, 40.0, 256)
        cfg = EvolutionConfig(dt=1e-3, steps=200, params=QUANTUM,
                              potential=PotentialSpec.free(), snapshot_stride=10)
        trace = evolve(gaussian_packet(g), cfg)
        x0 = np.linspace(-2, 2, 20).reshape(-1, 1)
        a = integrate_bohmian(trace, x0, 1e-2, QUANTUM)
        b = integrate_bohmian(trace, x0, 1e-2, QUANTUM)
        assert np.array_equal(a.positions, b.positions)

    def test_dt_must_divide_span(self):
        g = make_grid(1, 40.0, 256)
        cfg = EvolutionConfig(dt=1e-3, steps=100, params=QUANTUM,
                              potential=PotentialSpec.free(), snapshot_stride=10)
        trace = evolve(gaussian_packet(g), cfg)
        with pytest.raises(ValueError, match="does not divide"):
            integrate_bohmian(trace, [[0.0]], 0.03, QUANTUM)

    def test_empty_ensemble_rejected(self):
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        with pytest.raises(ValueError):
            integrate_bohmian(static_trace(psi), np.empty((0, 1)), 1e-2,
                              QUANTUM, steps=10)

    def test_node_flagging(self):
        g = make_grid(1, 20.0, 256)
        vals = (g.axis_coords + 0j) * np.exp(-g.axis_coords ** 2 / 4)
        from sllab.grid_field import Wavefunction
        psi = Wavefunction(g, vals).normalized()
        ens = integrate_bohmian(static_trace(psi), [[0.0], [3.0]], 1e-2,
                                QUANTUM, steps=5)
        assert ens.node_flags[0]
        assert not ens.node_flags[1]


class TestNelson:
    def test_seed_reproducibility(self):
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        trace = static_trace(psi)
        x0 = np.zeros((50, 1))
        cfg = SdeConfig(dt=1e-2, rng_seed=42, steps=100)
        a = integrate_nelson(trace, x0, cfg, QUANTUM)
        b = integrate_nelson(trace, x0, cfg, QUANTUM)
        assert np.array_equal(a.positions, b.positions)

    def test_paths_independent_of_ensemble_size(self):
        # per-path counter-based streams: path i is identical whether the
        # ensemble holds 10 or 100 particles
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        trace = static_trace(psi)
        cfg = SdeConfig(dt=1e-2, rng_seed=7, steps=50)
        small = integrate_nelson(trace, np.zeros((10, 1)), cfg, QUANTUM)
        large = integrate_nelson(trace, np.zeros((100, 1)), cfg, QUANTUM)
        assert np.array_equal(small.positions, large.positions[:10])

    def test_different_seeds_differ(self):
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        trace = static_trace(psi)
        x0 = np.zeros((10, 1))
        a = integrate_nelson(trace, x0, SdeConfig(dt=1e-2, rng_seed=1, steps=50),
                             QUANTUM)
        b = integrate_nelson(trace, x0, SdeConfig(dt=1e-2, rng_seed=2, steps=50),
                             QUANTUM)
        assert not np.array_equal(a.positions, b.positions)

    def test_static_trace_needs_steps(self):
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        with pytest.raises(ValueError, match="step count"):
            integrate_nelson(static_trace(psi), [[0.0]],
                             SdeConfig(dt=1e-2, rng_seed=0), QUANTUM)

    def test_brownian_control_spreads(self):
        # with the drift zeroed the stationary Gaussian must leak outward
        psi = harmonic_ground_state(make_grid(1, 20.0, 256))
        trace = static_trace(psi)
        rng = np.random.default_rng(0)
        x0 = rng.normal(0, 0.7, size=(500, 1))
        cfg = SdeConfig(dt=1e-2, rng_seed=3, steps=500)
        drifted = integrate_nelson(trace, x0, cfg, QUANTUM)
        control = integrate_nelson(trace, x0, cfg, QUANTUM,
                                   drift_override="zero")
        assert np.std(control.final_positions()) > \
            1.5 * np.std(drifted.final_positions())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SdeConfig(dt=-1.0, rng_seed=0)
        with pytest.raises(ValueError):
            SdeConfig(dt=1e-2, rng_seed=0, nu=-0.5)
        with pytest.raises(ValueError):
            SdeConfig(dt=1e-2, rng_seed=0, interpolation="cubic")

    @given(seed=st.integers(0, 2 ** 31))
    @settings(max_examples=10)
    def test_paths_stay_in_box(self, seed):
        psi = harmonic_ground_state(make_grid(1, 20.0, 64))
        trace = static_trace(psi)
        cfg = SdeConfig(dt=5e-2, rng_seed=seed, steps=40)
        ens = integrate_nelson(trace, np.zeros((5, 1)), cfg, QUANTUM)
        assert np.all(ens.positions >= -10.0)
        assert np.all(ens.positions < 10.0)
