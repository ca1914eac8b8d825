#!/usr/bin/env python3
"""Quick relaxation figure: H(t) for a nonequilibrium ensemble at a
reduced size (a minute or so), written to runs/relaxation_quick/."""

import sys
from pathlib import Path

from sllab.experiments import ExperimentConfig, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main():
    cfg = ExperimentConfig.from_dict({
        "experiment": "relaxation",
        "seed": 5,
        "params": {"n_traj": 3000, "t_final": 3.0, "coarse_bins": 16},
    })
    out = ROOT / "runs" / "relaxation_quick"
    summary = run_experiment(cfg, out)
    print(f"H: {summary['H_initial']:.4f} -> {summary['H_final']:.4f}")
    print(f"plot: {out / 'h_series.svg'}")
    return 0 if summary["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
