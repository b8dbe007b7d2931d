"""Command-line interface: simulate, estimate, experiment, validate-model.

Exit codes: 0 success, 1 validation failure, 2 usage error.  The seed falls
back to the JUMPEST_SEED environment variable when --seed is not given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from jumpest import model as mdl
from jumpest.estimator import detect_jumps, threshold
from jumpest.harness import EXPERIMENTS, ExperimentConfig, emit, run_experiment
from jumpest.simulate import dump_path_csv, simulate_replicate


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("JUMPEST_SEED")
    return int(env) if env else 0


def _parse_n_list(text: str) -> list:
    values = [int(part) for part in text.split(",") if part]
    if not values:
        raise argparse.ArgumentTypeError("expected an integer or comma-separated integers")
    return values


def _load_model_arg(path) -> mdl.ModelSpec:
    if path is None:
        return mdl.compound_poisson_model()
    return mdl.load_model(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jumpest", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("validate-model", help="check the model hypotheses and print the report")
    pv.add_argument("--model", required=True, help="model JSON file")

    ps = sub.add_parser("simulate", help="simulate one path; write CSV (i,t,X) plus jump metadata JSON")
    ps.add_argument("--model", help="model JSON file (default: compound-Poisson test model)")
    ps.add_argument("--n", type=int, default=1000, help="observation intervals on [0,1]")
    ps.add_argument("--substeps", type=int, default=20)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--replicate", type=int, default=0)
    ps.add_argument("--out", required=True, help="output CSV path")

    pe = sub.add_parser("estimate", help="run the threshold detector on an observation CSV")
    pe.add_argument("--in", dest="infile", required=True, help="CSV with header i,t,X")
    pe.add_argument("--n", type=int, default=None, help="override n (default: rows - 1)")
    pe.add_argument("--varpi", type=float, default=0.3)
    pe.add_argument("--alpha", type=float, default=1.0)

    px = sub.add_parser("experiment", help="run a Monte Carlo experiment and write replicates.csv + summary.json")
    px.add_argument("--kind", required=True, help=f"one of {', '.join(EXPERIMENTS)}")
    px.add_argument("--config", help="JSON file with config fields (flags override)")
    px.add_argument("--model", help="model JSON file")
    px.add_argument("--n", type=_parse_n_list, default=None, help="n or comma-separated n sweep")
    px.add_argument("--replicates", type=int, default=None)
    px.add_argument("--varpi", type=float, default=None)
    px.add_argument("--alpha", type=float, default=None)
    px.add_argument("--substeps", type=int, default=None)
    px.add_argument("--seed", type=int, default=None)
    px.add_argument("--threads", type=int, default=None)
    px.add_argument("--out", required=True, help="output directory")
    return p


def _cmd_validate(args) -> int:
    report = mdl.validate_model(mdl.load_model(args.model))
    print(report)
    return 0 if report.passed else 1


def _cmd_simulate(args) -> int:
    model = _load_model_arg(args.model)
    report = mdl.validate_model(model)
    if not report.passed:
        print(report, file=sys.stderr)
        return 1
    path = simulate_replicate(model, args.n, args.substeps, _default_seed(args.seed), args.replicate)
    sidecar = dump_path_csv(path, args.out)
    print(f"wrote {args.out} and {sidecar}")
    return 0


def _cmd_estimate(args) -> int:
    with open(args.infile, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "X" not in reader.fieldnames:
            print(f"{args.infile}: expected a CSV with an 'X' column", file=sys.stderr)
            return 1
        obs = np.array([float(row["X"]) for row in reader])
    n = args.n if args.n is not None else obs.size - 1
    u_n = threshold(n, args.varpi, args.alpha)
    det = detect_jumps(obs, u_n, args.varpi, args.alpha)
    print(json.dumps({
        "n": det.n,
        "varpi": args.varpi,
        "alpha": args.alpha,
        "threshold": det.threshold,
        "detected_indices": det.detected_indices.tolist(),
        "k_hat": det.k_hat,
        "j_hat": det.j_hat.tolist(),
    }, indent=2, sort_keys=True))
    return 0


def _cmd_experiment(args) -> int:
    base = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            base = json.load(f)
    if args.model:
        model = mdl.load_model(args.model)
    elif "model" in base:
        model = mdl.model_from_dict(base["model"])
    else:
        model = mdl.compound_poisson_model()
    kind = args.kind.replace("-", "_")
    cfg = ExperimentConfig(
        model=model,
        experiment=kind,
        n_values=args.n if args.n is not None else base.get("n_values", [1000]),
        replicates=args.replicates if args.replicates is not None else base.get("replicates", 1000),
        varpi=args.varpi if args.varpi is not None else base.get("varpi", 0.3),
        alpha=args.alpha if args.alpha is not None else base.get("alpha", 1.0),
        substeps=args.substeps if args.substeps is not None else base.get("substeps", 20),
        master_seed=_default_seed(args.seed if args.seed is not None else base.get("master_seed")),
        threads=args.threads if args.threads is not None else base.get("threads", 1),
    )
    summary = run_experiment(cfg)
    csv_path, json_path = emit(summary, args.out)
    print(f"wrote {csv_path} and {json_path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate-model":
            return _cmd_validate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
