"""``evostoch`` command line interface.

Exit codes: 0 success, 1 data or validation error, 2 usage error.
"""
import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

from . import io
from .cluster import ClusteringSpec, generate_scenarios
from .ea import EAConfig
from .exceptions import ConfigurationError, DataFormatError, NoValidSolutionError
from .portfolio import ConstraintSet, max_weight, optimize_portfolio
from .risk import RISK_MEASURES, ObjectiveSpec
from .tree import TreeShape, TreeSpec, generate_tree


def _add_ea_flags(p):
    g = p.add_argument_group("evolutionary search")
    g.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    g.add_argument("--generations", type=int, default=300)
    g.add_argument("--pop", type=int, default=50, help="population size")
    g.add_argument("--offspring", type=int, default=None,
                   help="offspring per generation (default: population size)")
    g.add_argument("--stagnation", type=int, default=100,
                   help="stop after this many generations without improvement")
    g.add_argument("--mutation-rate", type=float, default=0.1)
    g.add_argument("--crossover-rate", type=float, default=0.9)
    g.add_argument("--jobs", type=int, default=None, help="threads for fitness evaluation")
    p.add_argument("--output", "-o", type=Path, default=None,
                   help="output file (default: standard output)")
    p.add_argument("--verbose", "-v", action="store_true",
                   help="print the generation log to standard error")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evostoch",
        description="Evolutionary portfolio selection and scenario generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("portfolio", help="risk-return portfolio selection")
    p.add_argument("--scenarios", type=Path, required=True, help="scenario CSV")
    p.add_argument("--kappa", type=float, default=1.0, help="risk aversion")
    p.add_argument("--risk-measure", choices=RISK_MEASURES, default="stddev")
    p.add_argument("--alpha", type=float, default=0.05, help="CVaR tail probability")
    p.add_argument("--buckets", type=int, default=10)
    p.add_argument("--cardinality", type=int, default=None,
                   help="exact number of assets to pick")
    p.add_argument("--max-weight", type=float, default=None,
                   help="per-asset weight limit, enforced by penalty")
    p.add_argument("--penalty", type=float, default=1.0, help="penalty weight")
    p.add_argument("--restarts", type=int, default=1,
                   help="extra seeds to run for reporting cross-seed dispersion")
    _add_ea_flags(p)

    p = sub.add_parser("cluster", help="reduce a scenario set to k scenarios")
    p.add_argument("--scenarios", type=Path, required=True, help="scenario CSV")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--distance", choices=("l1", "l2"), default="l1")
    p.add_argument("--center", choices=("mean", "median"), default="mean")
    p.add_argument("--weighted", action="store_true",
                   help="weight cluster distances by cluster probability")
    p.add_argument("--dim-weights", type=str, default=None,
                   help="comma-separated per-dimension distance weights")
    _add_ea_flags(p)

    p = sub.add_parser("tree", help="generate a multi-stage scenario tree")
    p.add_argument("--paths", type=Path, required=True, help="path CSV")
    p.add_argument("--shape", type=str, required=True, help="nodes per stage, e.g. 10,40")
    p.add_argument("--center", choices=("median", "mean"), default="median")
    p.add_argument("--distance", choices=("l1", "l2"), default="l1")
    p.add_argument("--unweighted", action="store_true",
                   help="do not weight path distances by path probability")
    p.add_argument("--root-value", type=float, default=None)
    p.add_argument("--dot", type=Path, default=None, help="also write a Graphviz DOT file")
    _add_ea_flags(p)
    return parser


def _ea_config(args, seed=None):
    return EAConfig(
        population_size=args.pop,
        offspring_count=args.offspring if args.offspring is not None else args.pop,
        max_generations=args.generations,
        stagnation_limit=args.stagnation,
        mutation_rate=args.mutation_rate,
        crossover_rate=args.crossover_rate,
        master_seed=args.seed if seed is None else seed,
    )


def _emit_log(args, log):
    if args.verbose:
        for record in log:
            print(record.to_json(), file=sys.stderr)


def _write(args, text):
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)


def run_portfolio(args):
    scenarios, names = io.read_scenarios(args.scenarios)
    spec = ObjectiveSpec(args.risk_measure, args.kappa, args.alpha)
    checks = () if args.max_weight is None else (max_weight(args.max_weight),)
    constraints = ConstraintSet(checks, args.penalty)
    if args.restarts < 1:
        raise ConfigurationError("--restarts must be >= 1")
    runs = []
    for r in range(args.restarts):
        seed = args.seed + r
        runs.append((seed, optimize_portfolio(scenarios, spec, constraints, _ea_config(args, seed),
                                              args.buckets, args.cardinality, n_jobs=args.jobs)))
    result = runs[0][1]
    _emit_log(args, result.log)
    payload = {
        "command": "portfolio",
        "assets": names or [f"x{i + 1}" for i in range(scenarios.n_dims)],
        "weights": result.portfolio.weights,
        "expectation": result.expectation,
        "risk": result.risk,
        "risk_measure": args.risk_measure,
        "kappa": args.kappa,
        "objective": result.objective,
        "fitness": result.fitness,
        "seed": args.seed,
        "log": io.log_records(result.log),
    }
    if args.restarts > 1:
        weights = [res.portfolio.weights for _, res in runs]
        pairs = [np.abs(a - b).sum() for a, b in itertools.combinations(weights, 2)]
        payload["restarts"] = [
            {"seed": s, "weights": res.portfolio.weights, "objective": res.objective}
            for s, res in runs
        ]
        payload["dispersion"] = {"mean_pairwise_l1": float(np.mean(pairs)),
                                 "max_pairwise_l1": float(np.max(pairs))}
    _write(args, io.dumps_json(payload))


def run_cluster(args):
    scenarios, names = io.read_scenarios(args.scenarios)
    dim_weights = None
    if args.dim_weights:
        try:
            dim_weights = tuple(float(x) for x in args.dim_weights.split(","))
        except ValueError:
            raise ConfigurationError(f"invalid --dim-weights {args.dim_weights!r}") from None
    spec = ClusteringSpec(args.k, args.distance, args.center, args.weighted, dim_weights)
    result = generate_scenarios(scenarios, spec, _ea_config(args), n_jobs=args.jobs)
    _emit_log(args, result.log)
    out = result.scenarios
    if args.output is not None and args.output.suffix.lower() == ".csv":
        io.write_scenarios_csv(out, args.output, names)
        return
    payload = {
        "command": "cluster",
        "columns": names or [f"x{i + 1}" for i in range(scenarios.n_dims)],
        "scenarios": [
            {"values": row, "probability": p}
            for row, p in zip(out.values, out.probabilities)
        ],
        "objective": result.objective,
        "distances": result.output.distances,
        "assignment": result.output.ids,
        "seed": args.seed,
        "log": io.log_records(result.log),
    }
    _write(args, io.dumps_json(payload))


def run_tree(args):
    paths = io.read_paths(args.paths, args.root_value)
    shape = TreeShape.parse(args.shape)
    spec = TreeSpec(args.distance, args.center, not args.unweighted)
    result = generate_tree(paths, shape, spec, _ea_config(args), n_jobs=args.jobs)
    _emit_log(args, result.log)
    payload = {
        "command": "tree",
        "shape": list(shape.node_counts),
        "center": args.center,
        "distance": args.distance,
        "objective": result.objective,
        "tree": result.tree.to_dict(),
        "routing": result.tree.routing,
        "seed": args.seed,
        "log": io.log_records(result.log),
    }
    _write(args, io.dumps_json(payload))
    if args.dot is not None:
        args.dot.write_text(io.export_tree_dot(result.tree))


COMMANDS = {"portfolio": run_portfolio, "cluster": run_cluster, "tree": run_tree}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"evostoch {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, NoValidSolutionError) as exc:
        print(f"evostoch {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
