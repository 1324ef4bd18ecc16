"""Command-line entry point.

    jumppot run <config.json>        run an experiment, write reports
    jumppot list-experiments         print the known experiment names
    jumppot validate <config.json>   resolve and echo a config

The config is a single JSON document {"experiment": ..., "parameters": {...},
"seed": ..., "output_path": ...}.  The exit code of ``run`` is 0 iff every
assertion passed.  JUMPPOT_WORKERS may cap worker counts in future parallel
paths; it never affects results.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigurationError
from .experiments import (
    ExperimentConfig,
    all_assertions_pass,
    emit_report,
    list_experiments,
    run_experiment,
    validate_config,
)


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        doc = json.load(fh)
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="jumppot")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("config")
    val_p = sub.add_parser("validate", help="validate a JSON config")
    val_p.add_argument("config")
    sub.add_parser("list-experiments", help="list known experiments")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in list_experiments():
            print(name)
        return 0

    try:
        cfg = _load_config(args.config)
        if args.command == "validate":
            resolved = validate_config(cfg)
            print(json.dumps(
                {"experiment": cfg.experiment, "parameters": resolved,
                 "seed": cfg.seed}, sort_keys=True, indent=2))
            return 0
        bundle = run_experiment(cfg)
    except (ConfigurationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = cfg.output_path or f"jumppot-{cfg.experiment}"
    emit_report(bundle, out)
    n = len(bundle.summary["assertions"])
    ok = all_assertions_pass(bundle)
    for a in bundle.summary["assertions"]:
        mark = "PASS" if a["pass"] else "FAIL"
        print(f"[{mark}] {a['name']}: measured={a['measured']}")
    print(f"{bundle.experiment}: {n} assertions, "
          f"{'all passed' if ok else 'FAILURES'} -> {out}.csv / {out}.json")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
