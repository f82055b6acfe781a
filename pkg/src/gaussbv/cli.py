"""Command-line experiment runner.

    gaussbv list
    gaussbv run <config.json>
    gaussbv run --experiment <name> [--seed N] [--level L] [--out-dir D]

Reports are written as JSON (deterministic apart from the wall_time field);
numeric artifacts as CSV.  Exit codes: 0 all checks passed, 1 a numerical
check failed, 2 invalid configuration.

GAUSSBV_THREADS caps the worker threads of the numerical backends; it must
be read before the array libraries are imported, hence the lazy imports.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time


def _apply_thread_cap() -> None:
    cap = os.environ.get("GAUSSBV_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _flatten_flags(flags: dict) -> list[tuple[str, bool]]:
    out = []
    for key, val in flags.items():
        if isinstance(val, dict):
            out.extend((f"{key}.{k}", v) for k, v in _flatten_flags(val))
        else:
            out.append((key, bool(val)))
    return out


def _write_report(report: dict, out_dir: str) -> str:
    from . import fields, wiener

    os.makedirs(out_dir, exist_ok=True)
    name = report["experiment"]
    art_field = report.pop("artifact_field", None)
    art_ens = report.pop("artifact_ensemble", None)
    artifacts = []
    if art_field is not None:
        path = os.path.join(out_dir, f"{name}_minimizer.csv")
        fields.save_csv(art_field, path)
        artifacts.append(path)
    if art_ens is not None:
        path = os.path.join(out_dir, f"{name}_paths.csv")
        wiener.ensemble_to_csv(art_ens, path, max_paths=5)
        artifacts.append(path)
    if artifacts:
        report["artifacts"] = [os.path.basename(p) for p in artifacts]
    path = os.path.join(out_dir, f"report_{name}.json")
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = argparse.ArgumentParser(prog="gaussbv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    runp = sub.add_parser("run", help="run one experiment")
    runp.add_argument("config", nargs="?", help="JSON config file")
    runp.add_argument("--experiment", help="experiment name (instead of a config file)")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--level", type=int, default=None)
    runp.add_argument("--out-dir", default=None)
    args = parser.parse_args(argv)

    from .experiments import ConfigError, ExperimentConfig, list_experiments, run_experiment

    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name:24s} {desc}")
        return 0

    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    if args.experiment:
        raw["experiment"] = args.experiment
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.level is not None:
        raw["level"] = args.level
    if args.out_dir is not None:
        raw["out_dir"] = args.out_dir
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    try:
        report = run_experiment(cfg)
    except Exception as exc:  # noqa: BLE001 - named failing operation, exit 1
        print(f"numerical failure in experiment {cfg.experiment!r}: {exc}", file=sys.stderr)
        return 1
    report["wall_time"] = time.perf_counter() - t0
    path = _write_report(report, cfg.out_dir)

    flat = _flatten_flags(report["pass_flags"])
    for key, ok in flat:
        print(f"[{'PASS' if ok else 'FAIL'}] {cfg.experiment}: {key}")
    print(f"report: {path}")
    return 0 if all(ok for _, ok in flat) else 1


if __name__ == "__main__":
    sys.exit(main())
