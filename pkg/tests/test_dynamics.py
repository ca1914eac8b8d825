import numpy as np
import pytest

from sllab.dynamics import (
    EvolutionAbort,
    EvolutionConfig,
    density_width,
    energy_expectation,
    evolve,
    fringe_visibility,
    lambda_sweep,
)
from sllab.grid_field import (
    PhysicalParams,
    PotentialSpec,
    Wavefunction,
    gaussian_packet,
    harmonic_ground_state,
    make_grid,
    polar_decompose,
)
from oracles import crank_nicolson_evolve, free_gaussian_width, madelung_evolve

QUANTUM = PhysicalParams.quantum()


def _cfg(dt, steps, potential=None, params=QUANTUM, stride=None):
    return EvolutionConfig(dt=dt, steps=steps, params=params,
                           potential=potential or PotentialSpec.free(),
                           snapshot_stride=stride or steps)


class TestConfig:
    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            _cfg(-1e-3, 10)
        with pytest.raises(ValueError):
            _cfg(1e-3, 0)

    def test_stability_guard(self):
        g = make_grid(1, 10.0, 256)  # dx ~ 0.039, dt_max ~ 4.9e-4
        cfg = _cfg(1e-2, 10)
        with pytest.raises(ValueError, match="kinetic sampling"):
            evolve(gaussian_packet(g), cfg)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            EvolutionConfig(dt=1e-3, steps=1, params=QUANTUM,
                            potential=PotentialSpec.free(), scheme="euler")


class TestQuantumRegime:
    def test_free_packet_width(self):
        g = make_grid(1, 40.0, 512)
        trace = evolve(gaussian_packet(g), _cfg(1e-3, 2000))
        got = density_width(trace.final())
        assert got == pytest.approx(free_gaussian_width(2.0), rel=1e-4)

    def test_norm_and_energy_conserved(self):
        g = make_grid(1, 40.0, 512)
        pot = PotentialSpec.harmonic()
        psi0 = gaussian_packet(g, center=1.0)
        trace = evolve(psi0, _cfg(1e-3, 500, pot, stride=100))
        norms = [s.norm for s in trace.snapshots]
        energies = [s.energy for s in trace.snapshots]
        assert max(abs(n - 1.0) for n in norms) < 1e-10
        assert max(abs(e - energies[0]) for e in energies) < 1e-7

    def test_eigenstate_static(self):
        g = make_grid(1, 40.0, 512)
        psi0 = harmonic_ground_state(g)
        trace = evolve(psi0, _cfg(1e-3, 1000, PotentialSpec.harmonic()))
        drift = np.max(np.abs(trace.final().density() - psi0.density()))
        assert drift < 1e-6

    def test_matches_crank_nicolson(self):
        # independent time integrator, FD Hamiltonian, dense solve
        g = make_grid(1, 40.0, 128)
        pot = PotentialSpec.harmonic()
        psi0 = gaussian_packet(g, rho_width=2.0, center=1.0)
        trace = evolve(psi0, _cfg(1e-4, 100, pot))
        ref = crank_nicolson_evolve(psi0.values, g.length, pot.evaluate(g),
                                    1e-4, 100)
        assert np.max(np.abs(trace.final().values - ref)) < 1e-5


class TestLambdaRegimes:
    def test_classical_gaussian_static(self):
        # lam=0, zero phase: no quantum pressure, no classical force, so the
        # ensemble density must not move (before any caustic forms)
        g = make_grid(1, 40.0, 512)
        psi0 = gaussian_packet(g)
        params = PhysicalParams.classical()
        trace = evolve(psi0, _cfg(1e-3, 2000, params=params))
        assert np.max(np.abs(trace.final().density() - psi0.density())) < 1e-4

    def test_lambda_dynamics_matches_scaled_hbar(self):
        # [DERIVED] (R, S) under weight lam evolves exactly like ordinary
        # Schrodinger dynamics with hbar_eff = sqrt(lam) * hbar
        lam = 0.36
        g = make_grid(1, 40.0, 512)
        psi0 = gaussian_packet(g)
        trace = evolve(psi0, _cfg(1e-3, 400, params=QUANTUM.with_lambda(lam)))

        hbar_eff = np.sqrt(lam)
        params_eff = PhysicalParams(m=1.0, hbar=hbar_eff, sigma=hbar_eff)
        psi0_eff = Wavefunction(
            g, np.abs(psi0.values).astype(complex)).normalized()
        trace_eff = evolve(psi0_eff, _cfg(1e-3, 400, params=params_eff))

        assert np.max(np.abs(trace.final().density()
                             - trace_eff.final().density())) < 1e-8

    def test_matches_madelung_oracle(self):
        # FD hydrodynamic integrator on (rho, S), short horizon, lam=0.5
        lam = 0.5
        g = make_grid(1, 40.0, 256)
        psi0 = gaussian_packet(g, rho_width=1.5)
        trace = evolve(psi0, _cfg(1e-4, 500, params=QUANTUM.with_lambda(lam)))
        rho_ref, _ = madelung_evolve(psi0.density(), np.zeros(g.npoints),
                                     g.length, np.zeros(g.npoints),
                                     1e-4, 500, lam=lam)
        core = np.abs(g.axis_coords) <= 5.0
        err = np.max(np.abs(trace.final().density() - rho_ref)[core])
        assert err < 1e-5

    def test_classical_caustic_aborts(self):
        # converging classical flow focuses into a caustic; the conserved
        # lam-energy guard must abort rather than return garbage
        g = make_grid(1, 40.0, 512)
        x = g.axis_coords
        vals = np.exp(-x ** 2 / 4.0) * np.exp(-0.5j * x ** 2)
        psi0 = Wavefunction(g, vals).normalized()
        with pytest.raises(EvolutionAbort) as exc:
            evolve(psi0, _cfg(1e-3, 4000, params=PhysicalParams.classical(),
                              stride=100))
        assert len(exc.value.trace.snapshots) >= 1
        assert exc.value.trace.status == "aborted"


class TestSweep:
    def test_requires_sorted_lambdas(self):
        g = make_grid(1, 40.0, 256)
        psi0 = gaussian_packet(g)
        with pytest.raises(ValueError):
            lambda_sweep(psi0, _cfg(1e-3, 10), [1.0, 0.0])
        with pytest.raises(ValueError):
            lambda_sweep(psi0, _cfg(1e-3, 10), [0.5, 1.5])
        with pytest.raises(ValueError):
            lambda_sweep(psi0, _cfg(1e-3, 10), [])

    def test_visibility_monotone_small(self):
        g = make_grid(1, 40.0, 256)
        left = gaussian_packet(g, center=-4.0)
        right = gaussian_packet(g, center=+4.0)
        both = Wavefunction(g, left.values + right.values).normalized()
        entries = lambda_sweep(both, _cfg(2e-3, 750), [0.0, 0.5, 1.0],
                               reference_components=[(left, 0.5), (right, 0.5)])
        vis = [e.visibility for e in entries if e.status == "ok"]
        assert len(vis) == 3
        assert vis[0] <= vis[1] <= vis[2]
        assert vis[2] > vis[0]

    def test_visibility_zero_for_identical(self):
        g = make_grid(1, 20.0, 128)
        rho = gaussian_packet(g).density()
        assert fringe_visibility(rho, rho, g) == 0.0


class TestDiagnostics:
    def test_density_width_analytic(self):
        g = make_grid(1, 40.0, 512)
        psi = gaussian_packet(g, rho_width=1.7, center=2.0)
        assert density_width(psi) == pytest.approx(1.7, rel=1e-6)

    def test_energy_ground_state(self):
        g = make_grid(1, 40.0, 512)
        psi = harmonic_ground_state(g)
        e = energy_expectation(psi, PotentialSpec.harmonic(), QUANTUM)
        assert e == pytest.approx(0.5, abs=1e-9)

    def test_trace_frame_dt(self):
        g = make_grid(1, 40.0, 256)
        trace = evolve(gaussian_packet(g), _cfg(1e-3, 100, stride=10))
        assert trace.frame_dt() == pytest.approx(1e-2)
        assert len(trace.snapshots) == 11
