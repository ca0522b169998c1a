"""Command-line workbench.

Subcommands: ``gen`` (write point sets), ``disc`` (star discrepancy of a
point-set file), ``l2`` (squared L2 discrepancy), ``expect-l2`` (closed-form
expectations), ``bounds`` (bound-evaluator table as CSV) and ``experiment``
(run a configured study, writing CSV + JSON reports).

Exit codes: 0 success, 2 hard assertion failure, 3 statistical flag only,
4 infeasible method, 64 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import evaluate_all
from .core import read_pointset, write_pointset
from .discrepancy import (
    EnumerationBudgetError,
    compute_star,
    expected_l2sq_partition,
    expected_l2sq_random,
    l2_star,
)
from .experiments import EXPERIMENT_KINDS, ExperimentConfig, run_experiment
from .generators import gen_grid, gen_hammersley, gen_jittered, gen_partition_jittered, gen_uniform
from .partition import read_partition

EXIT_OK = 0
EXIT_HARD_FAILURE = 2
EXIT_STAT_FLAG = 3
EXIT_INFEASIBLE = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="jitterdisc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a point set and write it to a file")
    gen.add_argument(
        "--kind",
        required=True,
        choices=["uniform", "grid", "jittered", "partition", "hammersley"],
    )
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--m", type=int, help="grid resolution per axis")
    gen.add_argument("--n", type=int, help="number of points")
    gen.add_argument("--partition", help="partition spec file (kind=partition)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    disc = sub.add_parser("disc", help="star discrepancy of a point-set file")
    disc.add_argument("--in", dest="infile", required=True)
    disc.add_argument(
        "--method",
        default="auto",
        choices=["exact-grid", "exact-bb", "heuristic", "auto"],
    )
    disc.add_argument("--restarts", type=int)
    disc.add_argument("--seed", type=int, default=0)
    disc.add_argument("--json", action="store_true")

    l2 = sub.add_parser("l2", help="squared L2 star discrepancy of a point-set file")
    l2.add_argument("--in", dest="infile", required=True)
    l2.add_argument("--json", action="store_true")

    exp_l2 = sub.add_parser("expect-l2", help="closed-form expected squared L2 discrepancy")
    exp_l2.add_argument("--partition", help="partition spec file")
    exp_l2.add_argument("--random", action="store_true", help="i.i.d. uniform baseline")
    exp_l2.add_argument("--n", type=int)
    exp_l2.add_argument("--dim", type=int)

    bnds = sub.add_parser("bounds", help="bound evaluators at (n, d) as CSV")
    bnds.add_argument("--n", type=int, required=True)
    bnds.add_argument("--dim", type=int, required=True)

    exp = sub.add_parser("experiment", help="run a configured experiment")
    exp.add_argument("kind", choices=list(EXPERIMENT_KINDS) + ["partition", "dkw", "moment", "hammersley"])
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)
    return parser


_KIND_ALIASES = {
    "partition": "partition_principle",
    "dkw": "dkw_tails",
    "moment": "moment_bound",
    "hammersley": "hammersley_compare",
}


def _cmd_gen(args) -> int:
    if args.kind == "uniform":
        if args.n is None:
            raise SystemExit("gen --kind uniform requires --n")
        ps = gen_uniform(args.n, args.dim, args.seed)
    elif args.kind == "grid":
        if args.m is None:
            raise SystemExit("gen --kind grid requires --m")
        ps = gen_grid(args.m, args.dim)
    elif args.kind == "jittered":
        if args.m is None:
            raise SystemExit("gen --kind jittered requires --m")
        ps = gen_jittered(args.m, args.dim, args.seed)
    elif args.kind == "partition":
        if args.partition is None:
            raise SystemExit("gen --kind partition requires --partition FILE")
        ps = gen_partition_jittered(read_partition(args.partition), args.seed)
    else:
        if args.n is None:
            raise SystemExit("gen --kind hammersley requires --n")
        ps = gen_hammersley(args.n, args.dim)
    write_pointset(ps, args.out)
    print(f"wrote {ps.n} points (d={ps.dim}) to {args.out}")
    return EXIT_OK


def _cmd_disc(args) -> int:
    ps = read_pointset(args.infile)
    kwargs = {}
    if args.method == "heuristic":
        kwargs["seed"] = args.seed
        if args.restarts is not None:
            kwargs["restarts"] = args.restarts
    res = compute_star(ps, args.method.replace("-", "_"), **kwargs)
    if args.json:
        print(json.dumps(res.to_json_dict()))
    else:
        tag = "exact" if res.is_exact else "lower bound"
        print(f"D* = {res.value:.6g} ({res.method}, {tag}, n={res.n}, d={res.d})")
    return EXIT_OK


def _cmd_l2(args) -> int:
    ps = read_pointset(args.infile)
    val = l2_star(ps)
    if args.json:
        print(json.dumps({"l2sq": val, "l2": val**0.5, "n": ps.n, "d": ps.dim}))
    else:
        print(f"L2^2 = {val:.6g}  (L2 = {val ** 0.5:.6g})")
    return EXIT_OK


def _cmd_expect_l2(args) -> int:
    if args.partition:
        part = read_partition(args.partition)
        val = expected_l2sq_partition(part)
        print(f"expected L2^2 (partition, N={part.n_cells}, d={part.dim}) = {val:.12g}")
    elif args.random:
        if args.n is None or args.dim is None:
            raise SystemExit("expect-l2 --random requires --n and --dim")
        val = expected_l2sq_random(args.n, args.dim)
        print(f"expected L2^2 (random, N={args.n}, d={args.dim}) = {val:.12g}")
    else:
        raise SystemExit("expect-l2 requires --partition FILE or --random")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    print("name,value")
    for row in evaluate_all(args.n, args.dim):
        print(f"{row.name},{row.value:.12g}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    kind = _KIND_ALIASES.get(args.kind, args.kind)
    cfg = ExperimentConfig.from_file(args.config)
    if cfg.kind != kind:
        raise SystemExit(f"config kind {cfg.kind!r} does not match subcommand {kind!r}")
    report = run_experiment(cfg, out_dir=args.out)
    for line in report.notes:
        print(f"note: {line}")
    for line in report.statistical_flags:
        print(f"statistical flag: {line}")
    for line in report.hard_failures:
        print(f"hard failure: {line}")
    print(f"report written to {args.out} (exit code {report.exit_code})")
    return report.exit_code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "disc": _cmd_disc,
        "l2": _cmd_l2,
        "expect-l2": _cmd_expect_l2,
        "bounds": _cmd_bounds,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except EnumerationBudgetError as exc:
        print(f"infeasible method: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SystemExit:
        raise
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
