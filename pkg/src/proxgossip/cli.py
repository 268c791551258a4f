"""Command-line entry point.

Subcommands:
    sample-1d         quartic target on an interval, Wasserstein decay
    blr               2-D Bayesian linear regression on a ball
    logreg            30-D Bayesian logistic regression (diagnostic data)
    validate-network  build one mixing matrix and print its validation

Exit codes: 0 success, 2 invalid configuration or arguments, 3 data error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DataError, InvalidArgumentError, NumericError
from .harness import (EXPERIMENTS, SAMPLER_CHOICES, TOPOLOGIES, merge_config,
                      parse_config_file, run_experiment, validate_network)

_EXPERIMENT_BY_COMMAND = {"sample-1d": "sample1d", "blr": "blr2d",
                          "logreg": "logreg"}


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", help="output directory (default runs/<experiment>)")
    sub.add_argument("--config", help="key=value config file merged under CLI flags")
    sub.add_argument("--threads", type=int, help="worker threads across runs (default 1)")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")
    sub.add_argument("--topology", choices=TOPOLOGIES + ("all",),
                     help="restrict to one topology (default all four)")
    sub.add_argument("--agents", type=int, help="number of agents")
    sub.add_argument("--delta", type=float,
                     help="Laplacian step for the mixing matrix (default 1/lambda_max)")
    sub.add_argument("--eta", type=float, help="stepsize")
    sub.add_argument("--gamma", type=float, help="proximal parameter")
    sub.add_argument("--iters", type=int, help="iterations per run")
    sub.add_argument("--chains", type=int, help="independent replicas per run")
    sub.add_argument("--batch", type=int, help="minibatch size per agent")
    sub.add_argument("--record-every", type=int, help="metric recording stride")
    sub.add_argument("--sampler", choices=SAMPLER_CHOICES + ("all",),
                     help="restrict to one sampler (default depsgld + psgld comparator)")
    sub.add_argument("--init", choices=("zero", "uniform-in-K"),
                     help="chain initialization (default zero)")
    sub.add_argument("--burnin", type=int,
                     help="discard iterations below this for posterior summaries "
                          "(default iters/2)")
    sub.add_argument("--set", dest="set", choices=("box", "l2", "l1"),
                     help="constraint shape")
    sub.add_argument("--radius", type=float,
                     help="constraint radius (default derived from the data fit)")
    sub.add_argument("--bounds", help="box bounds as 'lo,hi' (default -1,1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxgossip",
        description="Decentralized proximal Langevin sampling experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    s1 = subs.add_parser("sample-1d",
                         help="quartic target on an interval (Wasserstein decay)")
    _add_common_flags(s1)

    blr = subs.add_parser("blr", help="2-D Bayesian linear regression on a ball")
    _add_common_flags(blr)
    blr.add_argument("--n-samples", type=int,
                     help="synthetic observations to generate (default 10000)")

    lr = subs.add_parser("logreg",
                         help="30-D Bayesian logistic regression (diagnostic data)")
    _add_common_flags(lr)
    lr.add_argument("--data", help="path to the diagnostic CSV (default bundled copy)")
    lr.add_argument("--no-standardize", action="store_true",
                    help="keep raw feature scales")
    lr.add_argument("--test-frac", type=float,
                    help="holdout fraction for accuracy evaluation (default 0)")
    lr.add_argument("--predictive", action="store_true",
                    help="mean-chain accuracy from replica-averaged predictive "
                         "probabilities instead of the plug-in mean")

    vn = subs.add_parser("validate-network",
                         help="build one mixing matrix and print its validation")
    vn.add_argument("--topology", choices=TOPOLOGIES, required=True)
    vn.add_argument("--agents", type=int, required=True)
    vn.add_argument("--delta", type=float)
    vn.add_argument("--mu", type=float, help="strong-convexity constant")
    vn.add_argument("--l-smooth", type=float, help="smoothness constant")
    vn.add_argument("--gamma", type=float, help="proximal parameter")
    return parser


def _cli_overrides(args: argparse.Namespace) -> dict:
    """Map parsed flags onto ExperimentConfig fields (None = not given)."""
    from .harness import _parse_bounds, _parse_sampler, _parse_topology

    mapping = {
        "out_dir": args.out,
        "threads": args.threads,
        "seed": args.seed,
        "n_agents": args.agents,
        "delta": args.delta,
        "eta": args.eta,
        "gamma": args.gamma,
        "iterations": args.iters,
        "n_chains": args.chains,
        "batch": args.batch,
        "record_every": args.record_every,
        "init": args.init,
        "burnin": args.burnin,
        "set_kind": args.set,
        "radius": args.radius,
    }
    if args.topology is not None:
        mapping["topologies"] = _parse_topology(args.topology)
    if args.sampler is not None:
        mapping["samplers"] = _parse_sampler(args.sampler)
    if args.bounds is not None:
        mapping["bounds"] = _parse_bounds(args.bounds)
    if getattr(args, "n_samples", None) is not None:
        mapping["n_samples"] = args.n_samples
    if getattr(args, "data", None) is not None:
        mapping["data_path"] = args.data
    if getattr(args, "no_standardize", False):
        mapping["standardize"] = False
    if getattr(args, "test_frac", None) is not None:
        mapping["test_frac"] = args.test_frac
    if getattr(args, "predictive", False):
        mapping["predictive"] = True
    return mapping


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate-network":
            for line in validate_network(args.topology, args.agents,
                                         delta=args.delta, mu=args.mu,
                                         l_smooth=args.l_smooth,
                                         gamma=args.gamma):
                print(line)
            return 0
        experiment = _EXPERIMENT_BY_COMMAND[args.command]
        file_overrides = parse_config_file(args.config) if args.config else {}
        cfg = merge_config(experiment, file_overrides, _cli_overrides(args))
        summary = run_experiment(cfg)
        for kind, path in sorted(summary["dirs"].items()):
            print(f"{kind}: {path}")
        return 0
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
