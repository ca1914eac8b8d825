"""Named experiments: configuration schema, runners, artifact emission.

Every experiment writes its outputs (CSV series, SLF1 snapshots, JSON
reports, SVG plots) plus a run manifest with a config hash and payload
checksums into an output directory.  Runs are deterministic given
(config, seed): RNG streams derive from the config seed and no payload
file embeds a timestamp.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    EvolutionAbort,
    EvolutionConfig,
    density_width,
    energy_expectation,
    evolve,
    lambda_sweep,
)
from .ensemble import (
    chi2_against_target,
    equivariance_test,
    relaxation_h_series,
    sample_density,
)
from .grid_field import (
    PhysicalParams,
    PotentialSpec,
    Wavefunction,
    gaussian_packet,
    harmonic_ground_state,
    make_grid,
)
from .io_formats import (
    sha256_file,
    write_field_csv,
    write_json,
    write_series_csv,
    write_slf1,
    write_trajectories_csv,
)
from .measurement import MeasurementError, PointerModel, run_measurement
from .svgplot import line_plot
from .trajectories import SdeConfig, integrate_bohmian, integrate_nelson, \
    static_trace

EXPERIMENTS = {}


class ConfigError(ValueError):
    pass


class NumericalAbort(RuntimeError):
    def __init__(self, message, diagnostic: dict):
        super().__init__(message)
        self.diagnostic = diagnostic


def _register(name):
    def deco(fn):
        EXPERIMENTS[name] = fn
        return fn
    return deco


def _block(cls, raw: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad parameter block for {where}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    TOP_KEYS = ("experiment", "seed", "params")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - set(cls.TOP_KEYS)
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
        if "experiment" not in doc:
            raise ConfigError("missing required key: experiment")
        name = doc["experiment"]
        if name not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {name!r}; known: {sorted(EXPERIMENTS)}")
        seed = doc.get("seed")
        if name in STOCHASTIC_EXPERIMENTS and seed is None:
            raise ConfigError(f"experiment {name!r} is stochastic; seed is "
                              "mandatory")
        cfg = cls(experiment=name, seed=seed, params=dict(doc.get("params", {})))
        # validate the parameter block eagerly
        _block(PARAM_BLOCKS[name], cfg.params, f"experiment {name!r}")
        return cfg

    def canonical(self) -> str:
        return json.dumps(
            {"experiment": self.experiment, "seed": self.seed,
             "params": self.params},
            sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------- parameter
# blocks


@dataclass(frozen=True)
class FreePacketParams:
    n: int = 512
    length: float = 40.0
    dt: float = 1e-3
    t_final: float = 2.0
    rho_width: float = 1.0


@dataclass(frozen=True)
class EigenstateHoldParams:
    n: int = 512
    length: float = 40.0
    dt: float = 1e-3
    steps: int = 1000
    omega: float = 1.0


@dataclass(frozen=True)
class LambdaSweepParams:
    n: int = 512
    length: float = 40.0
    dt: float = 1e-3
    t_final: float = 3.0
    separation: float = 8.0
    rho_width: float = 1.0
    lambdas: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class EquivarianceParams:
    n: int = 512
    length: float = 40.0
    dt: float = 1e-3
    t_final: float = 2.0
    n_traj: int = 10000
    n_seeds: int = 20
    bins: int = 50
    traj_dt: float = 1e-2


@dataclass(frozen=True)
class NelsonBornParams:
    n: int = 256
    length: float = 20.0
    dt: float = 1e-3
    t_final: float = 20.0
    n_traj: int = 10000
    bins: int = 50
    omega: float = 1.0


@dataclass(frozen=True)
class RelaxationParams:
    n: int = 256
    length: float = 20.0
    dt: float = 1e-3
    t_final: float = 4.0
    n_traj: int = 6000
    coarse_bins: int = 16
    modes: int = 4
    uniform_halfwidth: float = 5.0


@dataclass(frozen=True)
class MeasurementParams:
    n: int = 128
    length: float = 30.0
    weight_a: float = 0.8
    n_traj: int = 10000
    coupling: float = 6.0
    kinds: tuple = ("bohmian", "nelson")
    dt: float = 5e-3
    traj_dt: float = 1e-2


@dataclass(frozen=True)
class ContextualityParams:
    fixture: str = "pr_box"
    model_path: str | None = None


PARAM_BLOCKS = {
    "free_packet": FreePacketParams,
    "eigenstate_hold": EigenstateHoldParams,
    "lambda_sweep": LambdaSweepParams,
    "equivariance": EquivarianceParams,
    "nelson_born": NelsonBornParams,
    "relaxation": RelaxationParams,
    "measurement": MeasurementParams,
    "contextuality": ContextualityParams,
}

STOCHASTIC_EXPERIMENTS = {"equivariance", "nelson_born", "relaxation",
                          "measurement"}


# ---------------------------------------------------------------- runners


@_register("free_packet")
def _run_free_packet(p: FreePacketParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    psi0 = gaussian_packet(grid, rho_width=p.rho_width)
    steps = int(round(p.t_final / p.dt))
    cfg = EvolutionConfig(dt=p.dt, steps=steps, params=params,
                          potential=PotentialSpec.free(),
                          snapshot_stride=max(1, steps // 40))
    trace = evolve(psi0, cfg)
    widths = [(s.t, density_width(s.psi)) for s in trace.snapshots]
    s0 = p.rho_width
    expected = s0 * math.sqrt(1.0 + (p.t_final / (2.0 * s0 ** 2)) ** 2)
    got = widths[-1][1]
    rel_err = abs(got - expected) / expected

    write_series_csv(widths, ["t", "width"], out / "width.csv")
    write_slf1(trace.final(), out / "final.slf1")
    write_field_csv(trace.final(), out / "final.csv", params)
    line_plot([("width(t)", [w[0] for w in widths], [w[1] for w in widths])],
              out / "width.svg", title="free packet dispersion",
              xlabel="t", ylabel="density width")
    return {
        "claim": "wavepacket dispersion in the fully quantum regime",
        "width_final": got,
        "width_expected": expected,
        "rel_err": rel_err,
        "assertions": {"width_within_0.1_percent": bool(rel_err < 1e-3)},
    }


@_register("eigenstate_hold")
def _run_eigenstate_hold(p: EigenstateHoldParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    psi0 = harmonic_ground_state(grid, omega=p.omega)
    pot = PotentialSpec.harmonic(p.omega)
    cfg = EvolutionConfig(dt=p.dt, steps=p.steps, params=params, potential=pot,
                          snapshot_stride=max(1, p.steps // 20))
    trace = evolve(psi0, cfg)
    rho0 = psi0.density()
    drift = max(float(np.max(np.abs(s.psi.density() - rho0)))
                for s in trace.snapshots)
    energies = [s.energy for s in trace.snapshots]
    e_drift = max(abs(e - energies[0]) for e in energies)
    write_series_csv([(s.t, s.norm, s.energy) for s in trace.snapshots],
                     ["t", "norm", "energy"], out / "diagnostics.csv")
    return {
        "claim": "stationary eigenstate is held by the propagator",
        "density_drift": drift,
        "energy_drift": e_drift,
        "energy0": energies[0],
        "assertions": {
            "density_drift_below_1e-6": bool(drift < 1e-6),
            "energy_drift_below_1e-7": bool(e_drift < 1e-7),
        },
    }


@_register("lambda_sweep")
def _run_lambda_sweep(p: LambdaSweepParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    half = 0.5 * p.separation
    left = gaussian_packet(grid, center=-half, rho_width=p.rho_width)
    right = gaussian_packet(grid, center=+half, rho_width=p.rho_width)
    both = Wavefunction(grid, left.values + right.values).normalized()
    steps = int(round(p.t_final / p.dt))
    cfg = EvolutionConfig(dt=p.dt, steps=steps, params=params,
                          potential=PotentialSpec.free(),
                          snapshot_stride=max(1, steps // 10))
    entries = lambda_sweep(both, cfg, list(p.lambdas),
                           reference_components=[(left, 0.5), (right, 0.5)])
    rows = [(e.lam, e.visibility if e.visibility is not None else float("nan"),
             max(e.max_q_history) if e.max_q_history else float("nan"),
             e.status) for e in entries]
    write_series_csv(rows, ["lambda", "visibility", "max_Q", "status"],
                     out / "sweep.csv")
    report = [{"lambda": e.lam, "visibility": e.visibility,
               "max_Q": max(e.max_q_history) if e.max_q_history else None,
               "status": e.status} for e in entries]
    write_json(report, out / "sweep.json")
    ok_entries = [e for e in entries if e.status == "ok"]
    vis = [e.visibility for e in ok_entries]
    nondecreasing = all(b >= a - 1e-12 for a, b in zip(vis, vis[1:]))
    endpoints_strict = len(vis) >= 2 and vis[-1] > vis[0]
    line_plot([("visibility", [e.lam for e in ok_entries], vis)],
              out / "visibility.svg",
              title="interference visibility vs quantum-potential weight",
              xlabel="lambda", ylabel="visibility")
    return {
        "claim": "interference grows monotonically with the "
                 "quantum-potential weight",
        "visibility": {str(e.lam): e.visibility for e in ok_entries},
        "aborted": [e.lam for e in entries if e.status != "ok"],
        "assertions": {
            "visibility_nondecreasing": bool(nondecreasing),
            "strict_increase_between_endpoints": bool(endpoints_strict),
        },
    }


@_register("equivariance")
def _run_equivariance(p: EquivarianceParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    psi0 = gaussian_packet(grid, rho_width=1.0)
    steps = int(round(p.t_final / p.dt))
    stride = max(1, int(round(p.traj_dt / p.dt)))
    cfg = EvolutionConfig(dt=p.dt, steps=steps, params=params,
                          potential=PotentialSpec.free(),
                          snapshot_stride=stride)
    trace = evolve(psi0, cfg)
    target = trace.final().density()
    rows = []
    passes = 0
    for i in range(p.n_seeds):
        sub_seed = seed + i
        q0 = sample_density(psi0.density(), grid, p.n_traj, sub_seed)
        ens = integrate_bohmian(trace, q0, p.traj_dt, params)
        rep = equivariance_test(ens, target, grid, -1, bins=p.bins)
        passes += rep.p_value > 0.01
        rows.append((sub_seed, rep.chi2, rep.dof, rep.p_value))
    write_series_csv(rows, ["seed", "chi2", "dof", "p_value"],
                     out / "chi2.csv")
    return {
        "claim": "pilot-wave transport preserves the wave density "
                 "(equivariance)",
        "passes": passes,
        "n_seeds": p.n_seeds,
        "assertions": {"at_least_18_of_20": bool(passes >= 18 * p.n_seeds // 20)},
    }


@_register("nelson_born")
def _run_nelson_born(p: NelsonBornParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    psi = harmonic_ground_state(grid, omega=p.omega)
    trace = static_trace(psi)
    steps = int(round(p.t_final / p.dt))
    q0 = sample_density(psi.density(), grid, p.n_traj, seed)
    cfg = SdeConfig(dt=p.dt, rng_seed=seed, steps=steps)
    ens = integrate_nelson(trace, q0, cfg, params)
    rep = chi2_against_target(ens.final_positions()[:, 0], psi.density(),
                              grid, p.bins)
    # pure-Brownian control: same diffusion, drift forced to zero
    ctrl = integrate_nelson(trace, q0, cfg, params, drift_override="zero")
    rep_ctrl = chi2_against_target(ctrl.final_positions()[:, 0], psi.density(),
                                   grid, p.bins)
    write_json({"diffusion": rep.as_dict(), "brownian_control":
                rep_ctrl.as_dict()}, out / "chi2.json")
    write_trajectories_csv(ens, out / "paths_sample.csv",
                           stride=max(1, steps // 100))
    return {
        "claim": "the wave density is the stationary law of the drifted "
                 "diffusion (Born rule from stochastic kinematics)",
        "p_value": rep.p_value,
        "p_value_brownian_control": rep_ctrl.p_value,
        "assertions": {
            "diffusion_matches_density": bool(rep.p_value > 0.01),
            "control_rejected": bool(rep_ctrl.p_value < 1e-6),
        },
    }


@_register("relaxation")
def _run_relaxation(p: RelaxationParams, seed, out: Path) -> dict:
    grid = make_grid(1, p.length, p.n)
    params = PhysicalParams.quantum()
    x = grid.axis_coords
    from numpy.polynomial.hermite import hermval
    vals = np.zeros_like(x)
    for k in range(p.modes):
        vals = vals + hermval(x, [0] * k + [1]) * np.exp(-x ** 2 / 2)
    psi0 = Wavefunction(grid, vals).normalized()
    steps = int(round(p.t_final / p.dt))
    stride = max(1, steps // 40)
    cfg = EvolutionConfig(dt=p.dt, steps=steps, params=params,
                          potential=PotentialSpec.harmonic(), snapshot_stride=stride)
    trace = evolve(psi0, cfg)
    rho_uniform = np.where(np.abs(x) < p.uniform_halfwidth, 1.0, 0.0)
    rho_uniform = rho_uniform / (rho_uniform.sum() * grid.dx)
    q0 = sample_density(rho_uniform, grid, p.n_traj, seed)
    sde = SdeConfig(dt=p.dt, rng_seed=seed)
    ens = integrate_nelson(trace, q0, sde, params)
    frames = [s.psi.density() for s in trace.snapshots]
    times = [s.t for s in trace.snapshots]
    series = relaxation_h_series(ens, frames, times, grid, p.coarse_bins)
    write_series_csv(series, ["t", "H"], out / "h_series.csv")
    line_plot([("H(t)", [t for t, _ in series], [h for _, h in series])],
              out / "h_series.svg", title="coarse-grained relative entropy",
              xlabel="t", ylabel="H")
    h0, hend = series[0][1], series[-1][1]
    return {
        "claim": "a nonequilibrium ensemble relaxes toward the wave density "
                 "under the drifted diffusion",
        "H_initial": h0,
        "H_final": hend,
        "assertions": {"H_decreases": bool(hend < h0)},
    }


@_register("measurement")
def _run_measurement(p: MeasurementParams, seed, out: Path) -> dict:
    grid = make_grid(2, p.length, p.n)
    params = PhysicalParams.quantum()
    c = (math.sqrt(p.weight_a), math.sqrt(1.0 - p.weight_a))
    model = PointerModel(grid=grid, c=c, coupling=p.coupling)
    reports = {}
    ok = True
    for kind in p.kinds:
        rep = run_measurement(model, params, p.n_traj, seed, kind=kind,
                              dt=p.dt, traj_dt=p.traj_dt)
        reports[kind] = rep.as_dict()
        ok = ok and rep.status == "pass" and rep.overlap < 0.01 \
            and rep.branch_norm_drift < 1e-6
    write_json(reports, out / "outcomes.json")
    return {
        "claim": "pointer readout statistics reproduce the branch weights "
                 "through amplification alone (no collapse rule)",
        "reports": reports,
        "assertions": {"born_frequencies_all_kinds": bool(ok)},
    }


@_register("contextuality")
def _run_contextuality(p: ContextualityParams, seed, out: Path) -> dict:
    from .contextuality import (
        check_no_signalling,
        chsh_value,
        contextual_fraction,
        enumerate_global_sections,
        load_model,
        noncontextual_decompose,
    )
    from .fixtures import fixture_path

    path = Path(p.model_path) if p.model_path else fixture_path(p.fixture)
    model = load_model(path)
    ns = check_no_signalling(model)
    sections = enumerate_global_sections(model)
    cf = contextual_fraction(model)
    dec = noncontextual_decompose(model)
    try:
        chsh = chsh_value(model)
    except Exception:
        chsh = None
    if cf.fraction == 0:
        classification = "noncontextual"
    elif not sections:
        classification = "strongly contextual"
    else:
        classification = "contextual"
    report = {
        "model": path.stem,
        "no_signalling_max_violation": ns.max_violation,
        "global_sections": len(sections),
        "contextual_fraction": float(cf.fraction),
        "lp_dual_gap": cf.dual_gap,
        "decomposition_feasible": dec.feasible,
        "certificate_value": (float(dec.certificate.value)
                              if dec.certificate else None),
        "certificate_classical_bound": (float(dec.certificate.classical_bound)
                                        if dec.certificate else None),
        "chsh": chsh,
        "classification": classification,
    }
    write_json(report, out / "analysis.json")
    return {
        "claim": "obstructions to a global outcome assignment are decided "
                 "by enumeration and LP decomposition",
        **report,
        "assertions": {"lp_dual_gap_below_1e-9": bool(cf.dual_gap < 1e-9)},
    }


# ---------------------------------------------------------------- driver


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Execute one experiment; returns the summary dict (also written to
    summary.json next to the artifacts, with a manifest)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = _block(PARAM_BLOCKS[cfg.experiment], cfg.params,
               f"experiment {cfg.experiment!r}")
    runner = EXPERIMENTS[cfg.experiment]
    seed = cfg.seed if cfg.seed is not None else 0
    t0 = time.time()
    try:
        summary = runner(p, seed, out)
    except (EvolutionAbort, MeasurementError) as exc:
        diagnostic = {"experiment": cfg.experiment, "error": str(exc),
                      "config_hash": cfg.config_hash()}
        write_json(diagnostic, out / "abort.json")
        raise NumericalAbort(str(exc), diagnostic) from exc
    elapsed = time.time() - t0

    summary = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        **summary,
        "passed": all(summary.get("assertions", {}).values()),
    }
    write_json(summary, out / "summary.json")

    payloads = sorted(f for f in out.iterdir()
                      if f.is_file() and f.name != "manifest.json")
    manifest = {
        "config_hash": cfg.config_hash(),
        "config": json.loads(cfg.canonical()),
        "tool_version": __version__,
        "elapsed_seconds": round(elapsed, 3),
        "created_unix": int(time.time()),
        "checksums": {f.name: sha256_file(f) for f in payloads},
    }
    write_json(manifest, out / "manifest.json")
    return summary
