"""Command-line interface: instance generation, DEC solving, experiments.

Subcommands: ``gen-instance``, ``dec``, ``dec-linear``, ``run``. Solver
subcommands print a JSON document with the value, multiplier, and sampling
distribution to stdout.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dec_finite, dec_linear
from .harness import PRESETS, ExperimentConfig, run_experiment, write_traces
from .instances import (
    FiniteInstance,
    LinearInstance,
    delta_vector,
    gap_matrix,
    info_matrix,
    load_instance,
    shifted_gap_matrix,
)
from .environments import (
    make_linear_bandit,
    make_mab_instance,
    make_revealing_semibandit,
)
from .rng import RngStream


def _print_json(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_gen_instance(args) -> int:
    rng = RngStream(args.seed)
    if args.kind == "mab":
        n_models = args.n_models or args.n_decisions
        inst, f_star = make_mab_instance(args.n_decisions, n_models, rng,
                                         obs_variance=args.obs_variance)
    elif args.kind == "linear":
        inst, f_star = make_linear_bandit(args.d, args.n_decisions, rng)
    elif args.kind == "revealing":
        inst, f_star = make_revealing_semibandit(args.d, args.n_decisions, rng)
    else:
        raise ValueError(f"unknown kind {args.kind!r}")
    f_out = f_star.tolist() if isinstance(f_star, np.ndarray) else int(f_star)
    _print_json({"kind": args.kind, "instance": inst.to_dict(), "f_star": f_out})
    return 0


def cmd_dec(args) -> int:
    inst = load_instance(args.instance)
    if not isinstance(inst, FiniteInstance):
        raise SystemExit("the dec subcommand expects a finite instance")
    f = args.model
    info = info_matrix(inst, f)
    if args.mode == "offset":
        value, mu = dec_finite.dec_offset(gap_matrix(inst), info, args.lam)
        out = {"value": value, "lambda_star": args.lam, "mu": mu.weights.tolist()}
    elif args.mode == "ac":
        sol = dec_finite.dec_ac(gap_matrix(inst), info, args.epsilon, args.grid)
        out = {"value": sol.value, "lambda_star": sol.lambda_star,
               "mu": sol.mu.weights.tolist()}
    elif args.mode == "ac-shifted":
        sol = dec_finite.dec_ac_shifted(shifted_gap_matrix(inst, f), info,
                                        args.epsilon, args.grid)
        out = {"value": sol.value, "lambda_star": sol.lambda_star,
               "mu": sol.mu.weights.tolist()}
    elif args.mode == "pac":
        sol = dec_finite._pac_dec_solution(delta_vector(inst, f), info,
                                           args.epsilon, args.grid)
        out = {"value": sol.value, "lambda_star": sol.lambda_star,
               "mu": sol.mu.weights.tolist()}
    elif args.mode == "constrained-oracle":
        value = dec_finite.dec_constrained_oracle(gap_matrix(inst), info,
                                                  args.epsilon, args.mu_grid_step)
        out = {"value": value, "lambda_star": None, "mu": None}
    else:
        raise ValueError(f"unknown mode {args.mode!r}")
    _print_json(out)
    return 0


def cmd_dec_linear(args) -> int:
    inst = load_instance(args.instance)
    if not isinstance(inst, LinearInstance):
        raise SystemExit("the dec-linear subcommand expects a linear instance")
    f_hat = np.array([float(v) for v in args.fhat.split(",")])
    sol = dec_linear.solve_linear_dec(inst, f_hat, args.epsilon,
                                      fw_steps=args.fw_steps,
                                      lambda_grid_size=args.lambda_grid)
    _print_json({"value": sol.value, "lambda_star": sol.lambda_star,
                 "mu": sol.mu.weights.tolist()})
    return 0


def cmd_run(args) -> int:
    if args.preset:
        config = PRESETS[args.preset](full_scale=args.full, output_path=args.out)
    elif args.config:
        config = ExperimentConfig.from_dict(json.loads(args.config.read()))
    else:
        raise SystemExit("run needs --config or --preset")
    if args.out:
        config.output_path = args.out
    rows, summary = run_experiment(config, jobs=args.jobs)
    if config.output_path:
        write_traces(rows, config.output_path)
    _print_json(summary)
    return 1 if summary["errors"] else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="e2d")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-instance", help="emit an instance JSON bundle")
    gen.add_argument("--kind", choices=["mab", "linear", "revealing"], required=True)
    gen.add_argument("--d", type=int, default=3)
    gen.add_argument("--n-decisions", type=int, default=10)
    gen.add_argument("--n-models", type=int, default=None)
    gen.add_argument("--obs-variance", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_gen_instance)

    dec = sub.add_parser("dec", help="solve a finite-instance coefficient")
    dec.add_argument("instance", help="instance JSON path")
    dec.add_argument("--mode", default="ac",
                     choices=["offset", "ac", "ac-shifted", "pac",
                              "constrained-oracle"])
    dec.add_argument("--epsilon", type=float, default=0.1)
    dec.add_argument("--lambda", dest="lam", type=float, default=1.0)
    dec.add_argument("--grid", type=int, default=50)
    dec.add_argument("--model", type=int, default=0,
                     help="reference model index")
    dec.add_argument("--mu-grid-step", type=float, default=0.02)
    dec.set_defaults(func=cmd_dec)

    lin = sub.add_parser("dec-linear", help="solve a linear-instance coefficient")
    lin.add_argument("instance", help="instance JSON path")
    lin.add_argument("--fhat", required=True, help="comma-separated parameter")
    lin.add_argument("--epsilon", type=float, default=0.1)
    lin.add_argument("--fw-steps", type=int, default=100)
    lin.add_argument("--lambda-grid", type=int, default=50)
    lin.set_defaults(func=cmd_dec_linear)

    run = sub.add_parser("run", help="run an experiment config or preset")
    run.add_argument("--config", type=argparse.FileType("r"))
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--out", default=None, help="trace CSV path")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--full", action="store_true",
                     help="restore the full 100-run scale")
    run.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
