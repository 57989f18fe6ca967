"""Command-line entry point: ``hardylab COMMAND [options]``.

Exit codes: 0 on success, 1 when a checked inequality fails, 2 on a
configuration or usage error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import dyadic, experiments, io, norms, trees, verification
from .experiments import ConfigError, ExperimentConfig, ExperimentResult, SequencePair

COMMANDS = ("verify", "stein", "trees", "multiplier", "weaktype", "transference", "kclosed", "norms")

CONFIG_HELP = """\
config file (--config PATH): a flat JSON object; flags override its values.
  seed        unsigned 64-bit master seed (default 0)
  trials      trials per ensemble (default 20)
  grid        quadrature points, if fixed (default: chosen from the degree)
  pair        'factorial' (d_k = k!, N_k = (k-1)!) or 'dyadic_square' (d_k = 4^k, N_k = 2^k)
  n           number of sequence terms (default 5)
  resolution  dyadic resolution m (weaktype default 10, kclosed default 8)
  height      tree height for 'trees' (default 10)
  samples     Monte Carlo samples (default 20000)
  max_degree  largest polynomial degree allowed (default 2^20)
  out         output directory (default ./hardylab-out)

commands:
  verify        run the acceptance suite
  stein         periodized square-function ratios for random analytic families
  trees         starred-tree ratio search, one CSV row per height
  multiplier    empirical norm of the anti-diagonal multiplier
  weaktype      weak-type constants and tree-adversarial strong ratios
  transference  L1(l2) versus independent-sum discrepancy over theta
  kclosed       K-functional ratio inside the martingale subspace
  norms         norms of a stored dyadic function (--input), or built-in examples

environment: HARDYLAB_THREADS caps the worker threads used for trials.
"""


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hardylab",
        description="Numerical experiments on independent sums of Hardy spaces.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--resolution", type=int)
        p.add_argument("--height", type=int)
        p.add_argument("--pair")
        p.add_argument("--n", type=int)
        p.add_argument("--samples", type=int)
        if name == "verify":
            p.add_argument("--only", type=int, nargs="+", metavar="K", help="run only these criteria")
        if name == "norms":
            p.add_argument("--input", metavar="PATH", help="dyadic function file written by hardylab.io")
    return parser


def resolve_config(args):
    data = {}
    if args.config:
        data = ExperimentConfig.from_json(args.config).to_dict()
    for key in ("seed", "trials", "out", "resolution", "height", "pair", "n", "samples"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    cfg = ExperimentConfig.from_dict(data)
    if cfg.out is None:
        cfg.out = "hardylab-out"
    return cfg


def _write(result, cfg, name):
    # the output location is not part of the experiment
    result.config = {k: v for k, v in cfg.to_dict().items() if k != "out"}
    io.atomic_write(os.path.join(cfg.out, f"{name}.csv"), result.to_csv())
    io.atomic_write(os.path.join(cfg.out, f"{name}_summary.json"), result.summary_json())


def run_verify(cfg, args):
    results = verification.run_all(cfg.seed, args.only)
    for r in results:
        print(r.line(), flush=True)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed} for r in results]
    checks = {f"criterion_{r.number:02d}": r.passed for r in results}
    empirical = {f"criterion_{r.number:02d}": r.details for r in results}
    return ExperimentResult("verify", rows, checks, empirical)


def run_stein(cfg, args):
    pair = SequencePair.named(cfg.pair, cfg.n)
    if max(pair.d) > cfg.max_degree:
        raise ConfigError(f"d_n = {max(pair.d)} exceeds max_degree = {cfg.max_degree}")
    return experiments.stein_experiment(pair, cfg.trials, cfg.seed, cfg.samples, cfg.grid)


def run_trees(cfg, args):
    res = trees.ratio_search(cfg.height, seed=cfg.seed)
    rows = [{"height": h, "best_ratio": r, "evaluations": e} for h, r, e in res.trace]
    ratios = [r for _, r, _ in res.trace]
    checks = {"best_ratio_nonincreasing": all(y <= x for x, y in zip(ratios, ratios[1:]))}
    empirical = {"best_ratio": res.best_ratio, "best_tree": res.best_tree().to_json_dict()}
    return ExperimentResult("trees", rows, checks, empirical)


def run_multiplier(cfg, args):
    pair = SequencePair.named(cfg.pair, cfg.n)
    return experiments.multiplier_experiment(pair, cfg.trials, cfg.seed)


def run_weaktype(cfg, args):
    m = 10 if cfg.resolution is None else cfg.resolution
    return experiments.weak_type_experiment(m, cfg.trials, cfg.seed, heights=(min(4, cfg.height), cfg.height))


def run_transference(cfg, args):
    return experiments.transference_experiment(cfg.trials, cfg.seed)


def run_kclosed(cfg, args):
    m = 8 if cfg.resolution is None else cfg.resolution
    if m > 12:
        raise ConfigError("kclosed supports resolutions up to 12")
    return experiments.kclosedness_probe(m, cfg.trials, cfg.seed)


def run_norms(cfg, args):
    if args.input:
        try:
            f = io.read_dyadic(args.input)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not f.is_scalar:
            raise ConfigError("norms --input expects a scalar dyadic function")
        row = {
            "resolution": f.resolution,
            "l1": norms.l1_norm(f.values),
            "l2": norms.l2_norm(f.values),
            "h1": dyadic.h1_norm(f).value,
            "weak_l1": norms.weak_l1(f.values).value,
            "orlicz": norms.orlicz_norm(f.values).value,
            "k_1": norms.l1_plus_l2_inf(f.values, t=1.0).value,
        }
        checks = {"weak_below_l1": row["weak_l1"] <= row["l1"] + 1e-12, "l1_below_h1": row["l1"] <= row["h1"] + 1e-12}
        return ExperimentResult("norms", [row], checks, {})
    half = norms.DiscreteVectorFunction.from_components([(np.array([1.0, -1.0]), None)] * 2)
    rows = [
        {"example": "ind of two Rademachers", "value": norms.ind_norm_exact(half).value, "expected": np.sqrt(2)},
        {"example": "orlicz of 2 on half mass", "value": norms.orlicz_norm(np.array([2.0, 0.0])).value, "expected": 4 / 3},
        {"example": "K_1/2 of the constant 1", "value": norms.l1_plus_l2_inf(np.ones(4), t=0.5).value, "expected": 0.5},
        {"example": "disjoint Orlicz of two ones", "value": norms.disjoint_sum_orlicz(half).value, "expected": np.sqrt(2)},
    ]
    checks = {r["example"]: abs(r["value"] - r["expected"]) <= 1e-9 for r in rows}
    return ExperimentResult("norms", rows, checks, {})


RUNNERS = {
    "verify": run_verify,
    "stein": run_stein,
    "trees": run_trees,
    "multiplier": run_multiplier,
    "weaktype": run_weaktype,
    "transference": run_transference,
    "kclosed": run_kclosed,
    "norms": run_norms,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"hardylab: config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"command": args.command, **cfg.to_dict()}, sort_keys=True), flush=True)
    try:
        result = RUNNERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"hardylab: config error: {exc}", file=sys.stderr)
        return 2
    _write(result, cfg, args.command)
    for name in result.failed_checks():
        print(f"hardylab: check failed: {name}", file=sys.stderr)
    print(f"{args.command}: {'ok' if result.passed else 'FAILED'} -> {cfg.out}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
