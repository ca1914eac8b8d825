#!/usr/bin/env python3
"""Run every config in configs/ and print a pass/fail table.

Usage: python scripts/run_all.py [--out-root runs] [--skip NAME ...]
The slow stochastic experiments (equivariance, nelson_born) take a few
minutes each at their default sizes.
"""

import argparse
import sys
import time
from pathlib import Path

from sllab.experiments import NumericalAbort, load_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-root", type=Path, default=ROOT / "runs")
    ap.add_argument("--skip", nargs="*", default=[])
    args = ap.parse_args()

    results = []
    for cfg_path in sorted((ROOT / "configs").glob("*.json")):
        cfg = load_config(cfg_path)
        if cfg.experiment in args.skip or cfg_path.stem in args.skip:
            continue
        out = args.out_root / cfg_path.stem
        t0 = time.time()
        try:
            summary = run_experiment(cfg, out)
            ok = summary["passed"]
        except NumericalAbort as exc:
            print(f"{cfg_path.stem}: numerical abort: {exc}", file=sys.stderr)
            ok = False
        results.append((cfg_path.stem, ok, time.time() - t0))
        print(f"{cfg_path.stem:28s} {'pass' if ok else 'FAIL':4s} "
              f"{results[-1][2]:7.1f}s")

    failed = [name for name, ok, _ in results if not ok]
    print(f"\n{len(results) - len(failed)}/{len(results)} passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
