"""Command-line entry point.

Verbs:
    sllab run <config.json>       execute an experiment, write artifacts
    sllab validate <config.json>  schema-check a config without running
    sllab fixtures list           list bundled empirical-model fixtures
    sllab report <dir>            summarize a finished run, verify checksums

Exit codes: 0 success, 2 configuration error, 3 numerical abort,
4 assertion failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ASSERT = 4


def _apply_threads(threads):
    if threads is None:
        threads = os.environ.get("SLLAB_THREADS")
    if threads is None:
        return
    try:
        n = int(threads)
        if n < 1:
            raise ValueError
    except ValueError:
        raise SystemExit(f"invalid thread count {threads!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _build_parser():
    ap = argparse.ArgumentParser(prog="sllab",
                                 description="stochastic-mechanics lab")
    ap.add_argument("--threads", default=None,
                    help="BLAS/FFT thread cap (or env SLLAB_THREADS)")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="execute an experiment config")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (default: runs/<experiment>)")
    run.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    run.add_argument("--strict", action="store_true",
                     help="also fail (exit 4) on recorded per-case aborts")

    val = sub.add_parser("validate", help="schema-check a config")
    val.add_argument("config", type=Path)

    fix = sub.add_parser("fixtures", help="bundled empirical models")
    fix.add_argument("action", choices=["list"])

    rep = sub.add_parser("report", help="summarize a finished run directory")
    rep.add_argument("rundir", type=Path)
    return ap


def _cmd_run(args) -> int:
    import dataclasses

    from .experiments import (ConfigError, NumericalAbort, load_config,
                              run_experiment)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or Path("runs") / cfg.experiment
    try:
        summary = run_experiment(cfg, out)
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        print(f"diagnostics written to {out}/abort.json", file=sys.stderr)
        return EXIT_NUMERIC

    for name, ok in summary.get("assertions", {}).items():
        print(f"  [{'pass' if ok else 'FAIL'}] {name}")
    print(f"artifacts in {out}")

    if not summary["passed"]:
        print("assertion failure", file=sys.stderr)
        return EXIT_ASSERT
    if args.strict and summary.get("aborted"):
        print(f"strict mode: aborted cases {summary['aborted']}",
              file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .experiments import ConfigError, load_config

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ok: experiment={cfg.experiment} seed={cfg.seed} "
          f"hash={cfg.config_hash()[:12]}")
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    from .contextuality import load_model
    from .fixtures import FIXTURE_NAMES, fixture_path

    for name in FIXTURE_NAMES:
        model = load_model(fixture_path(name))
        print(f"{name:22s} observables={len(model.scenario.observables):2d} "
              f"contexts={len(model.scenario.contexts)}")
    return EXIT_OK


def _cmd_report(args) -> int:
    import json

    from .io_formats import sha256_file

    rundir = args.rundir
    manifest_path = rundir / "manifest.json"
    summary_path = rundir / "summary.json"
    if not manifest_path.is_file():
        print(f"no manifest.json in {rundir}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = json.loads(manifest_path.read_text())

    bad = []
    for name, digest in manifest["checksums"].items():
        f = rundir / name
        if not f.is_file():
            bad.append((name, "missing"))
        elif sha256_file(f) != digest:
            bad.append((name, "checksum mismatch"))
    print(f"run: {manifest['config']['experiment']} "
          f"(config {manifest['config_hash'][:12]})")
    print(f"files: {len(manifest['checksums'])}, "
          f"verified: {len(manifest['checksums']) - len(bad)}")
    for name, why in bad:
        print(f"  [FAIL] {name}: {why}")

    if summary_path.is_file():
        summary = json.loads(summary_path.read_text())
        for name, ok in summary.get("assertions", {}).items():
            print(f"  [{'pass' if ok else 'FAIL'}] {name}")
        if not summary.get("passed", False):
            return EXIT_ASSERT
    return EXIT_ASSERT if bad else EXIT_OK


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    _apply_threads(args.threads)
    handler = {"run": _cmd_run, "validate": _cmd_validate,
               "fixtures": _cmd_fixtures, "report": _cmd_report}[args.verb]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
