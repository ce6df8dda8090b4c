"""
Command line experiment runner.

    matchristoffel <moments|factor|biorth|christoffel|toda> --config cfg.json --out DIR
    matchristoffel preset <name> [--config params.json] --out DIR

Artifacts are written to ``--out``; a PASS/FAIL table goes to stdout.  Exit
status is 0 when every check passes, 1 when some check fails and 2 on an
error, which is also reported as JSON on stderr and in ``error.json``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, MatChristoffelError
from .experiment import PIPELINES, ExperimentConfig, load_params, parse_degrees
from .presets import PRESETS, PresetRun
from .serialize import write_flow_csv, write_json

EXIT_OK, EXIT_FAILED_CHECKS, EXIT_ERROR = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchristoffel",
                                     description="Matrix Christoffel transformations: experiment runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config (measure, perturbation, degrees, toda, tolerances)")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--tol", type=float, default=None, help="pivot singularity tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for sampled evaluation points")
        p.add_argument("--degrees", default=None, help="degree range a..b")

    for name in PIPELINES:
        common(sub.add_parser(name, help=f"run the {name} pipeline"))
    pp = sub.add_parser("preset", help="run a named example")
    pp.add_argument("name", choices=sorted(PRESETS))
    common(pp)
    sub.add_parser("list", help="list presets")
    return parser


def _run(args) -> PresetRun:
    if args.command == "preset":
        params = load_params(args.config)
        if args.degrees is not None:
            a, b = parse_degrees(args.degrees)
            params.update({"n_max": b, "k_max": b})
        kwargs = {}
        if args.tol is not None:
            kwargs["tol"] = args.tol
        return PRESETS[args.name](params, seed=args.seed if args.seed is not None else 0, **kwargs)
    if args.config is None:
        raise ConfigError(f"'{args.command}' needs --config")
    cfg = ExperimentConfig.from_json(args.config, tol=args.tol, seed=args.seed, degrees=args.degrees)
    return PIPELINES[args.command](cfg)


def write_outputs(run: PresetRun, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, obj in sorted(run.artifacts.items()):
        path = out / name
        if isinstance(obj, str):
            path.write_text(obj)
        else:
            write_json(path, obj)
        written.append(path)
    written.append(write_json(out / "report.json", run.report))
    if run.flow is not None:
        written.append(write_flow_csv(out / "flow.csv", run.flow))
    return written


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        for name in sorted(PRESETS):
            doc = (PRESETS[name].__doc__ or "").strip().splitlines()
            print(f"{name:<20s} {doc[0] if doc else ''}")
        return EXIT_OK
    out = Path(args.out)
    try:
        with np.errstate(all="ignore"):
            run = _run(args)
    except Exception as exc:  # every failure leaves a structured report
        err = exc.to_dict() if isinstance(exc, MatChristoffelError) else {
            "module": "cli", "operation": args.command, "error": type(exc).__name__, "message": str(exc)}
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", err)
        print(json.dumps(err), file=sys.stderr)
        return EXIT_ERROR
    write_outputs(run, out)
    report = run.report
    print(f"{report.name}: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks) -> {out}")
    for line in report.lines():
        print("  " + line)
    return EXIT_OK if report.passed else EXIT_FAILED_CHECKS


if __name__ == "__main__":
    raise SystemExit(main())
