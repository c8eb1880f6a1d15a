"""Command line entry point: ``rwre {simulate,estimate,experiment,limit,summarize}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .environment import DEFAULT_X_MAX, sample_environment
from .errors import NoSolutionError
from .estimators import ae_estimator_temkin, mle, mple, naive_estimator
from .experiment import (
    ExperimentConfig, limit_run, load_config, run_experiment, summarize, summary_to_csv,
)
from .model import DEFAULT_EPS0, FamilyKind, ModelFamily
from .walk import WalkStats, simulate_walk, stats_from_path


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _config(args) -> ExperimentConfig:
    overrides = {
        "seed": args.seed, "replicates": args.replicates, "out": args.out,
        "workers": args.workers,
    }
    if args.config:
        return load_config(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_simulate(args) -> int:
    family = ModelFamily.from_name(args.family, args.eps0)
    theta = family.to_theta(_floats(args.params))
    rng = np.random.default_rng(args.seed)
    env = sample_environment(theta, args.x_max, rng)
    walk = simulate_walk(env, args.n, rng, record_path=args.path_out is not None)
    text = walk.stats.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.path_out:
        np.savetxt(args.path_out, walk.path, fmt="%d")
    if args.env_out:
        Path(args.env_out).write_text(env.to_csv())
    return 0


def cmd_estimate(args) -> int:
    family = ModelFamily.from_name(args.family, args.eps0)
    path = None
    if args.path:
        path = np.loadtxt(args.path, dtype=np.int64)
        stats = stats_from_path(path)
    else:
        stats = WalkStats.from_csv(Path(args.stats).read_text())
    report = {"n": stats.n, "range": stats.range_size}
    warm = mple(stats, family)
    report["MPLE"] = {**warm.params, "p_bar": warm.extras["p_bar"].tolist()}
    if family.kind is not FamilyKind.GENERAL:
        report["MLE"] = mle(stats, family, warm_start=warm).params
    if path is not None and family.kind is FamilyKind.TEMKIN:
        try:
            report["AE"] = ae_estimator_temkin(path).params
        except NoSolutionError as exc:
            report["AE"] = {"status": "no-solution", "reason": str(exc)}
    naive = naive_estimator(stats, family)
    report["Naive"] = {**naive.projection, "mass_below_half": naive.mass_below_half()}
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_experiment(args) -> int:
    out = run_experiment(_config(args))
    print(out)
    return 0


def cmd_limit(args) -> int:
    out = limit_run(_config(args), samples_dir=args.samples_dir)
    print(out)
    return 0


def cmd_summarize(args) -> int:
    text = summary_to_csv(summarize(args.csv, trim=args.trim))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwre", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default=None):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="simulate one walk and dump its local times")
    common(p, 0)
    p.add_argument("--family", default="temkin")
    p.add_argument("--params", default="0.3", help="comma-separated free parameters")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--x-max", type=int, default=DEFAULT_X_MAX)
    p.add_argument("--eps0", type=float, default=DEFAULT_EPS0)
    p.add_argument("--path-out", default=None)
    p.add_argument("--env-out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run every estimator on one dataset")
    common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--path", help="file with one site per line")
    src.add_argument("--stats", help="CSV x,xi,xi_plus,xi_minus")
    p.add_argument("--family", default="temkin")
    p.add_argument("--eps0", type=float, default=DEFAULT_EPS0)
    p.set_defaults(func=cmd_estimate)

    for name, func, help_ in (
        ("experiment", cmd_experiment, "replicated estimation over a grid of horizons"),
        ("limit", cmd_limit, "Monte Carlo check of the limit criterion"),
    ):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--config", default=None)
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        if name == "limit":
            p.add_argument("--samples-dir", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("summarize", help="box-plot statistics of an experiment CSV")
    p.add_argument("csv")
    p.add_argument("--out", default=None)
    p.add_argument("--trim", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
