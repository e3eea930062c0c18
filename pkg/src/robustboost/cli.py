"""Command-line interface.

Subcommands: generate, train, evaluate, experiment, epsilon-search,
export-scores.  Exit codes: 0 on success, 1 on runtime errors (with a
message on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .base_learners import LEARNERS
from .boosters import error_rates
from .data import gen_long_servedio, gen_mease_wyner, load_csv, save_csv
from .errors import RobustBoostError
from .harness import (
    AlgorithmSpec,
    ExperimentConfig,
    default_long_servedio_config,
    default_mease_wyner_config,
    ensemble_from_dict,
    ensemble_to_dict,
    epsilon_search,
    export_score_distribution,
    format_table,
    run_experiment,
    train_algorithm,
)
from .potential import RobustBoostParams

_GENERATORS = {"long_servedio": gen_long_servedio, "mease_wyner": gen_mease_wyner}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustboost")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    g.add_argument("--problem", required=True, choices=sorted(_GENERATORS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--q", type=float, default=0.0)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train one booster on a dataset CSV")
    t.add_argument("--data", required=True)
    t.add_argument("--algorithm", required=True,
                   choices=["adaboost", "logitboost", "robustboost"])
    t.add_argument("--learner", default="stump", choices=sorted(LEARNERS))
    t.add_argument("--iterations", type=int, default=300)
    t.add_argument("--epsilon", type=float, default=None)
    t.add_argument("--theta", type=float, default=0.0)
    t.add_argument("--sigma-f", type=float, default=0.1)
    t.add_argument("--shrinkage", type=float, default=0.25)
    t.add_argument("--model-out", required=True)

    e = sub.add_parser("evaluate", help="error rates of a saved model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--theta", type=float, default=0.0)

    x = sub.add_parser("experiment", help="run a full experiment from a JSON config")
    x.add_argument("--config", help="JSON config file; omit to use a built-in default")
    x.add_argument("--problem", choices=sorted(_GENERATORS),
                   help="built-in default config to start from (when no --config)")
    x.add_argument("--out", default="report.json")
    x.add_argument("--workers", type=int, default=None)
    for key, typ in (("q", float), ("repetitions", int), ("base_seed", int),
                     ("n_train", int), ("n_test", int), ("learner", str)):
        x.add_argument(f"--{key.replace('_', '-')}", type=typ, default=None)

    s = sub.add_parser("epsilon-search", help="minimal error goal that terminates")
    s.add_argument("--config", help="JSON config file; omit for a built-in default")
    s.add_argument("--problem", choices=sorted(_GENERATORS))
    s.add_argument("--grid", default="0.30,0.25,0.20,0.16,0.14,0.12,0.10")
    s.add_argument("--budget", type=int, default=300)
    for key, typ in (("q", float), ("base_seed", int), ("n_train", int),
                     ("learner", str)):
        s.add_argument(f"--{key.replace('_', '-')}", type=typ, default=None)

    d = sub.add_parser("export-scores", help="train and export a margin snapshot CSV")
    d.add_argument("--data", required=True)
    d.add_argument("--algorithm", required=True,
                   choices=["adaboost", "logitboost", "robustboost"])
    d.add_argument("--learner", default="stump", choices=sorted(LEARNERS))
    d.add_argument("--iterations", type=int, default=300)
    d.add_argument("--epsilon", type=float, default=None)
    d.add_argument("--theta", type=float, default=0.0)
    d.add_argument("--sigma-f", type=float, default=0.1)
    d.add_argument("--shrinkage", type=float, default=0.25)
    d.add_argument("--snapshot", type=int, required=True,
                   help="iteration to export")
    d.add_argument("--out", required=True)
    return p


def _load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    elif args.problem == "mease_wyner":
        cfg = default_mease_wyner_config()
    else:
        cfg = default_long_servedio_config()
    overrides = {}
    for key in ("q", "repetitions", "base_seed", "n_train", "n_test", "learner", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _algo_spec(args) -> AlgorithmSpec:
    return AlgorithmSpec(
        name=args.algorithm,
        kind=args.algorithm,
        iterations=args.iterations,
        epsilon=args.epsilon,
        theta=args.theta,
        sigma_f=args.sigma_f,
        shrinkage=args.shrinkage,
    )


def _cmd_generate(args) -> int:
    ds = _GENERATORS[args.problem](args.n, args.q, args.seed)
    save_csv(ds, args.out)
    print(f"wrote {ds.n} examples ({ds.d} features) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    ds = load_csv(args.data)
    spec = _algo_spec(args)
    ensemble, trace = train_algorithm(spec, ds, LEARNERS[args.learner]())
    with open(args.model_out, "w") as fh:
        json.dump(ensemble_to_dict(ensemble, trace), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(
        f"trained {args.algorithm}: {trace.iterations} iterations, "
        f"status={trace.status}; model written to {args.model_out}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    with open(args.model) as fh:
        ensemble = ensemble_from_dict(json.load(fh))
    ds = load_csv(args.data)
    rates = error_rates(ensemble, ds, theta=args.theta)
    print(json.dumps({
        "noisy_error": rates.noisy_error,
        "clean_error": rates.clean_error,
        "below_theta_fraction": rates.below_theta_fraction,
        "clean_error_above_theta": rates.clean_error_above_theta,
    }, sort_keys=True, indent=2))
    return 0


def _cmd_experiment(args) -> int:
    cfg = _load_config(args)
    report = run_experiment(cfg)
    with open(args.out, "w") as fh:
        fh.write(report.to_json())
    sys.stdout.write(format_table(report))
    print(f"report written to {args.out}")
    return 0


def _cmd_epsilon_search(args) -> int:
    cfg = _load_config(args)
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    result = epsilon_search(cfg, grid, args.budget)
    for o in result.outcomes:
        mark = "terminated" if o["terminated"] else f"failed ({o['status']})"
        print(
            f"epsilon={o['epsilon']:.4g}: {mark} after {o['iterations']} iterations"
            f" (t={o['final_t']:.4f})"
        )
    for a in result.anomalies:
        print(f"anomaly: {a}")
    print(f"minimal feasible epsilon: {result.minimal_feasible}")
    return 0


def _cmd_export_scores(args) -> int:
    ds = load_csv(args.data)
    spec = _algo_spec(args)
    if spec.kind == "robustboost":
        params = RobustBoostParams.solve(spec.epsilon, spec.theta, spec.sigma_f)
    else:
        params = None
    _, trace = train_algorithm(
        spec, ds, LEARNERS[args.learner](), snapshots=(args.snapshot,)
    )
    export_score_distribution(trace, params, args.snapshot, args.out)
    print(f"score distribution at iteration {args.snapshot} written to {args.out}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "experiment": _cmd_experiment,
    "epsilon-search": _cmd_epsilon_search,
    "export-scores": _cmd_export_scores,
}


def cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (RobustBoostError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
