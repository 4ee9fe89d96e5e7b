"""Command-line entry point: solve, predict, generate, evaluate."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .evaluate import GenSpec, gen_random, parse_config, run_experiment, run_solver
from .exact import BallTooLarge, TimeBudgetExceeded
from .graph import INF, GraphError, read_graph, write_graph
from .linkpred import ALIASES, SelectionPolicy, predict
from .objective import Query, Solution

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_NO_SOLUTION = 0, 1, 2, 3

log = logging.getLogger("hmgf")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def solution_document(g, sol: Solution, q: Query, config: dict) -> dict:
    return {
        "members": sorted(g.labels[v] for v in sol.group),
        "sigma": sol.sigma,
        "total_weight": sol.total_weight,
        "max_hop": None if sol.max_hop == INF else int(sol.max_hop),
        "strictly_feasible": sol.strictly_feasible,
        "solver": sol.solver,
        "elapsed_ms": sol.elapsed * 1000.0,
        "query": {"h": q.h, "p": q.p},
        "config": config,
    }


def cmd_solve(args) -> int:
    try:
        q = Query(args.hops, args.min_size)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    g = read_graph(args.graph)
    if q.p > g.n:
        print(f"no solution: p={q.p} exceeds |V|={g.n}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    config = {"radius_mode": args.radius_mode, "strict_only": args.strict_only,
              "prune": not args.no_prune}
    if args.solver == "exact":
        config["max_ball_size"] = args.max_ball_size
    try:
        sol = run_solver(args.solver, g, q, radius_mode=args.radius_mode,
                         strict_only=args.strict_only, prune=not args.no_prune,
                         threads=args.threads, max_ball_size=args.max_ball_size,
                         time_budget=args.time_budget)
    except (BallTooLarge, TimeBudgetExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    if sol is None:
        print("no feasible group", file=sys.stderr)
        return EXIT_NO_SOLUTION
    json.dump(solution_document(g, sol, q, config), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_predict(args) -> int:
    g = read_graph(args.graph)
    policy = SelectionPolicy(top_k=args.top_k, threshold=args.threshold)
    write_graph(predict(g, args.method, policy), args.output)
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = GenSpec(args.n, args.friend_prob, args.potential_prob, args.seed)
    write_graph(gen_random(spec), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if not cfg.output_dir:
        print("error: no output directory (config output_dir or --output-dir)", file=sys.stderr)
        return EXIT_USAGE
    report = run_experiment(cfg)
    log.info("wrote %d rows to %s", len(report.rows), cfg.output_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hmgf", description="Hop-bounded maximum group friending toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="find a group for one query")
    s.add_argument("--graph", required=True)
    s.add_argument("--solver", choices=["maxgf", "exact", "dks"], default="maxgf")
    s.add_argument("--hops", type=int, required=True)
    s.add_argument("--min-size", type=int, required=True)
    s.add_argument("--radius-mode", choices=["guarantee", "tight"], default="guarantee")
    s.add_argument("--strict-only", action="store_true")
    s.add_argument("--no-prune", action="store_true")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=0, help="accepted for uniformity; solvers are deterministic")
    s.add_argument("--max-ball-size", type=int, default=25)
    s.add_argument("--time-budget", type=float, default=None, help="seconds (exact solver)")
    s.set_defaults(func=cmd_solve)

    pr = sub.add_parser("predict", help="derive potential edges by link prediction")
    pr.add_argument("--graph", required=True)
    pr.add_argument("--method", choices=sorted(ALIASES), default="aa")
    mode = pr.add_mutually_exclusive_group(required=True)
    mode.add_argument("--top-k", type=int)
    mode.add_argument("--threshold", type=float)
    pr.add_argument("-o", "--output", required=True)
    pr.set_defaults(func=cmd_predict)

    gn = sub.add_parser("generate", help="write a seeded random graph")
    gn.add_argument("--n", type=int, required=True)
    gn.add_argument("--friend-prob", type=float, required=True)
    gn.add_argument("--potential-prob", type=float, required=True)
    gn.add_argument("--seed", type=int, default=0)
    gn.add_argument("-o", "--output", required=True)
    gn.set_defaults(func=cmd_generate)

    ev = sub.add_parser("evaluate", help="run an experiment sweep")
    ev.add_argument("--config", required=True)
    ev.add_argument("--output-dir")
    ev.set_defaults(func=cmd_evaluate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (GraphError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
