"""Command-line interface.

Subcommands: ``sample`` (generate data), ``dist`` (distance between two
sample files), ``fit`` (run an estimator), ``fisher`` (print a Fisher
matrix), ``experiment`` (Monte Carlo sweep to CSV). Exit codes: 0 success,
1 usage error, 2 numerical failure.
"""

import argparse
import json
import sys

from .circular import discrete_from_sample, load_sample, save_sample
from .estimate import EstimatorSpec, fit_mle, loglik, wasserstein_fit
from .families import FAMILIES, FamilyParams, family_fisher, family_sample, free_param_names
from .harness import ExperimentConfig, run_experiment
from .transport import grid_cdf_of, w1_grid, wp_discrete, wp_general

_JSON_NAMES = {"mu": "mu", "kappa": "kappa", "rho": "rho", "lam": "lambda", "eps": "epsilon"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_theta_flags(p):
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--kappa", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--epsilon", dest="eps", type=float)


def _theta_from_args(args) -> FamilyParams:
    kwargs = {"mu": args.mu}
    for name in ("kappa", "rho", "lam", "eps"):
        val = getattr(args, name, None)
        if val is not None:
            kwargs[name] = val
    return FamilyParams(args.family, **kwargs)


def build_parser() -> _Parser:
    parser = _Parser(prog="circwass")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[], help="generate data from a family")
    p.add_argument("--family", required=True, choices=FAMILIES)
    _add_theta_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("dist", help="Wasserstein distance between two sample files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument(
        "--method", choices=("auto", "equal", "general", "grid"), default="auto"
    )
    p.add_argument("--grid-size", type=int, default=1024)

    p = sub.add_parser("fit", help="fit a family to a sample file")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--estimator", required=True, choices=("mle", "w1", "w2"))
    p.add_argument("--method", choices=("grid", "equal-mass"), default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--opt", choices=("de", "powell", "de+powell"), default="de+powell")
    p.add_argument("--de-pop", type=int, default=None)
    p.add_argument("--de-gens", type=int, default=60)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--D", type=int, default=None, help="grid size (defaults to n)")

    p = sub.add_parser("fisher", help="print the Fisher information matrix")
    p.add_argument("--family", required=True, choices=("vm", "wc", "ssvm"))
    _add_theta_flags(p)

    p = sub.add_parser("experiment", help="run a Monte Carlo sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--wide", action="store_true")
    p.add_argument("--workers", type=int, default=1)

    return parser


def _cmd_sample(args) -> int:
    theta = _theta_from_args(args)
    sample = family_sample(theta, args.n, args.seed)
    if args.out:
        save_sample(sample, args.out)
    else:
        for a in sample.angles:
            print(repr(float(a)))
    return 0


def _cmd_dist(args) -> int:
    sa = load_sample(args.a)
    sb = load_sample(args.b)
    method = args.method
    if method == "auto":
        method = "equal" if sa.n == sb.n else "general"
    da, db = discrete_from_sample(sa), discrete_from_sample(sb)
    if method == "equal":
        val = wp_discrete(da, db, args.p)
    elif method == "general":
        val = wp_general(da, db, args.p)
    else:
        if args.p != 1.0:
            raise ValueError("grid method requires p = 1")
        val = w1_grid(grid_cdf_of(sa, args.grid_size), grid_cdf_of(sb, args.grid_size))
    print(repr(val))
    return 0


def _cmd_fit(args) -> int:
    sample = load_sample(args.data)
    method = args.method or ("grid" if args.estimator == "w1" else "equal-mass")
    if args.estimator == "mle":
        spec = EstimatorSpec(
            kind="mle", optimizer=args.opt, de_pop=args.de_pop,
            de_gens=args.de_gens, tol=args.tol, seed=args.seed,
        )
        theta = fit_mle(sample, args.family, spec)
        objective = -loglik(theta, sample) / sample.n
        evaluations, converged = 0, True
    else:
        p = 1.0 if args.estimator == "w1" else 2.0
        spec = EstimatorSpec(
            kind="wasserstein", p=p, discretization=method, points=args.D,
            optimizer=args.opt, de_pop=args.de_pop, de_gens=args.de_gens,
            tol=args.tol, seed=args.seed,
        )
        res = wasserstein_fit(sample, args.family, spec)
        theta, objective = res.theta_hat, res.objective
        evaluations, converged = res.report.evaluations, res.report.converged
    theta_dict = {
        _JSON_NAMES[name]: getattr(theta, name)
        for name in free_param_names(args.family)
    }
    payload = {
        "family": args.family,
        "estimator": args.estimator,
        "theta_hat": theta_dict,
        "objective": objective,
        "evaluations": evaluations,
        "converged": converged,
    }
    if args.json:
        print(json.dumps(payload))
    else:
        for key, val in payload.items():
            print(f"{key}: {val}")
    return 0


def _cmd_fisher(args) -> int:
    theta = _theta_from_args(args)
    mat = family_fisher(theta)
    for row in mat:
        print("  ".join(f"{v:.6f}" for v in row))
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    table = run_experiment(cfg, workers=args.workers)
    with open(args.out, "w") as fh:
        fh.write(table.to_wide_csv() if args.wide else table.to_csv())
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "dist": _cmd_dist,
    "fit": _cmd_fit,
    "fisher": _cmd_fisher,
    "experiment": _cmd_experiment,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, ArithmeticError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
