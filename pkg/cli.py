"""Command line front end: fuzzify, solve, frontier, bench and verify.

Exit status is 0 on success, 1 when ``verify`` finds a mismatch and 2 on
usage or domain errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from errors import FuzzyCoverError
from services.bench import (
    RAW_COLUMNS,
    TABLE_COLUMNS,
    RunConfig,
    default_output_dir,
    default_workers,
    group_records,
    prepare_instances,
    run_bench,
    write_table,
)
from services.instance_loader import dump_instance
from services.pareto_engine import (
    DEFAULT_WEIGHTS,
    brute_force_frontier,
    dominates,
    pareto_test,
    run_algorithm1,
    verify_run,
)
from services.result_codec import dump_pareto_run, dump_solution
from services.scalar_solver import (
    AugTcheby,
    Single,
    WeightVector,
    cross_evaluate,
    csp1,
    cspinf,
    ideal_point,
    objectives_close,
    problem_from_crisp,
    problem_from_fuzzy,
    solve_by_enumeration,
    solve_scalar,
)
from tfn import format_tfn
from utils import format_index_set, format_seconds, parse_index_list, percent

logger = logging.getLogger(__name__)

SOLVE_MODES = ("crisp", "single", "csp1", "cspinf", "tcheby")


def _weight(text: str) -> WeightVector:
    try:
        return WeightVector.parse(text)
    except FuzzyCoverError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> List[int]:
    try:
        values = parse_index_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("invalid integer list {!r}".format(text)) from exc
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", action="append", required=True, type=Path,
                        help="instance file (repeat for bench grids)")
    common.add_argument("--format", choices=("plain", "canonical"), default="plain")
    common.add_argument("--radius", type=float, help="coverage radius for co-located facilities")
    common.add_argument("--costs", choices=("unit", "normal", "uniform", "file"), default="unit")
    common.add_argument("--cost-file", type=Path)
    common.add_argument("--cost-range", type=float, nargs=2, metavar=("A", "B"), default=(100.0, 1000.0))
    common.add_argument("--budget", default="card:2", help="card:p, smallest:p or value:B")
    common.add_argument("--spread", type=float, default=0.2)
    common.add_argument("--seed", type=_int_list, default=[1], help="seed or list such as 1-5")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--verbose", action="store_true", help="debug logging and node log")
    common.add_argument("--no-early-stop", action="store_true")
    common.add_argument("--oracle-cap", type=int, default=20)
    common.add_argument("--weight", action="append", type=_weight, dest="weights",
                        help="weight vector l1,l2,l3,rho (repeatable)")

    parser = argparse.ArgumentParser(prog="fmclp", description="Exact fuzzy maximal covering location solver.")
    commands = parser.add_subparsers(dest="command", required=True)

    fuzzify = commands.add_parser("fuzzify", parents=[common], help="write fuzzified canonical instances")
    fuzzify.set_defaults(handler=cmd_fuzzify)

    solve = commands.add_parser("solve", parents=[common], help="solve one scalarization")
    solve.add_argument("--mode", choices=SOLVE_MODES, default="crisp")
    solve.add_argument("--r", type=int, choices=(1, 2, 3), default=2, help="objective for --mode single")
    solve.set_defaults(handler=cmd_solve)

    frontier = commands.add_parser("frontier", parents=[common], help="run the Pareto weight loop")
    frontier.add_argument("--oracle", action="store_true", help="cross-check against the brute-force frontier")
    frontier.set_defaults(handler=cmd_frontier)

    bench = commands.add_parser("bench", parents=[common], help="run a benchmark grid")
    bench.add_argument("--params", type=_int_list, default=[], help="budget parameters such as 2-10,15,20")
    bench.set_defaults(handler=cmd_bench)

    verify = commands.add_parser("verify", parents=[common], help="cross-check against exhaustive enumeration")
    verify.set_defaults(handler=cmd_verify)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        instance_paths=tuple(args.instance),
        format=args.format,
        radius=args.radius,
        costs=args.costs,
        cost_file=args.cost_file,
        cost_range=tuple(args.cost_range),
        budget=args.budget,
        params=tuple(getattr(args, "params", ()) or ()),
        spread=args.spread,
        seeds=tuple(args.seed),
        weights=tuple(args.weights) if args.weights else DEFAULT_WEIGHTS,
        early_stop=not args.no_early_stop,
        oracle_cap=args.oracle_cap,
        output_dir=args.out if args.out is not None else default_output_dir(),
        workers=args.workers if args.workers is not None else default_workers(),
        node_log=args.verbose,
    ).validate()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def cmd_fuzzify(config: RunConfig, args: argparse.Namespace) -> int:
    for path in config.instance_paths:
        for seed in config.seeds:
            _, fuzzy = prepare_instances(config, path, seed)
            target = config.output_dir / "{}-seed{}.xml".format(path.stem, seed)
            print(_write(target, dump_instance(fuzzy)))
    return 0


def _coverage_line(label: str, F, totals) -> str:
    shares = ", ".join("{:.2f}%".format(percent(F[r], totals[r])) for r in range(3))
    return "{}: ({})".format(label, shares)


def cmd_solve(config: RunConfig, args: argparse.Namespace) -> int:
    path = config.instance_paths[0]
    seed = config.seeds[0]
    crisp, fuzzy = prepare_instances(config, path, seed)
    crisp_problem = problem_from_crisp(crisp)
    fuzzy_problem = problem_from_fuzzy(fuzzy)
    problem = crisp_problem if args.mode == "crisp" else fuzzy_problem

    started = time.perf_counter()
    if args.mode == "crisp":
        solution = solve_scalar(crisp_problem, Single(2), node_log=config.node_log)
    elif args.mode == "single":
        solution = solve_scalar(fuzzy_problem, Single(args.r), node_log=config.node_log)
    else:
        ideal = ideal_point(fuzzy_problem, node_log=config.node_log)
        if args.mode == "csp1":
            solution = csp1(fuzzy_problem, ideal, node_log=config.node_log)
        elif args.mode == "cspinf":
            solution = cspinf(fuzzy_problem, ideal, node_log=config.node_log)
        else:
            weight = config.weights[0] if args.weights else WeightVector(1, 1, 1)
            solution = solve_scalar(fuzzy_problem, AugTcheby(weight, ideal), node_log=config.node_log)
    elapsed = time.perf_counter() - started

    target = config.output_dir / "{}-{}-seed{}.xml".format(path.stem, args.mode, seed)
    _write(target, dump_solution(solution, mode=args.mode, wall_seconds=elapsed))
    print("open {} ({} facilities)".format(format_index_set(solution.open), len(solution.open)))
    print("F = ({!r}, {!r}, {!r})".format(*solution.F))
    print("served {}".format(format_tfn(solution.served)))
    print("scalar value {!r}".format(solution.scalar_value))
    print(_coverage_line("coverage", solution.F, problem.total_demand()))
    if args.mode == "crisp":
        cross = cross_evaluate(fuzzy_problem, crisp_problem, solution.open)
        print("fuzzy served {} ({})".format(
            format_tfn(cross.served), "fuzzy-feasible" if cross.fuzzy_feasible else "fuzzy-infeasible"))
    print("wall {} s".format(format_seconds(elapsed)))
    return 0


def cmd_frontier(config: RunConfig, args: argparse.Namespace) -> int:
    path = config.instance_paths[0]
    seed = config.seeds[0]
    _, fuzzy = prepare_instances(config, path, seed)
    problem = problem_from_fuzzy(fuzzy)
    run = run_algorithm1(
        problem,
        config.weights,
        early_stop=config.early_stop,
        workers=config.workers,
        node_log=config.node_log,
    )
    if args.oracle:
        run = verify_run(problem, run, config.oracle_cap)
    target = config.output_dir / "{}-frontier-seed{}.xml".format(path.stem, seed)
    _write(target, dump_pareto_run(run))

    print("ideal ({!r}, {!r}, {!r})".format(*run.ideal))
    print("reach ideal: {}".format("yes" if run.reached_ideal else "no"))
    for index, solution in enumerate(run.solutions):
        columns = [
            str(index),
            format_tfn(solution.served),
            run.path_of(index).value,
            format_index_set(solution.open),
        ]
        if run.oracle_verified:
            columns.append("oracle-verified" if run.oracle_verified[index] else "oracle-DOMINATED")
        print("\t".join(columns))
    return 0


def cmd_bench(config: RunConfig, args: argparse.Namespace) -> int:
    records = run_bench(config)
    raw = write_table(config.output_dir / "bench_raw.csv", RAW_COLUMNS, [r.as_row() for r in records])
    rows = group_records(records)
    table = write_table(config.output_dir / "bench_table.csv", TABLE_COLUMNS, rows)
    print("\t".join(TABLE_COLUMNS))
    for row in rows:
        print("\t".join(row[column] for column in TABLE_COLUMNS))
    failed = [record for record in records if not record.ok]
    for record in failed:
        logger.warning("%s param=%s seed=%s: %s", record.instance, record.param, record.seed, record.status)
    logger.info("Bench tables written to %s and %s", raw, table)
    return 1 if failed else 0


def _verify_problem(problem, config: RunConfig, label: str) -> List[str]:
    failures: List[str] = []
    ideal = ideal_point(problem)
    objectives = [("single{}".format(r), Single(r)) for r in (1, 2, 3)]
    objectives.append(("csp1", AugTcheby(WeightVector(0, 0, 0, 1), ideal)))
    objectives.append(("cspinf", AugTcheby(WeightVector(1, 1, 1, 0), ideal)))
    objectives.extend((weight.label, AugTcheby(weight, ideal)) for weight in config.weights)
    for name, objective in objectives:
        exact = solve_scalar(problem, objective)
        oracle = solve_by_enumeration(problem, objective, config.oracle_cap)
        if not objectives_close(exact.scalar_value, oracle.scalar_value):
            failures.append("{} {}: solver {!r} != oracle {!r}".format(
                label, name, exact.scalar_value, oracle.scalar_value))

    frontier = [solution.F for solution in brute_force_frontier(problem, config.oracle_cap)]
    run = run_algorithm1(problem, config.weights, early_stop=config.early_stop)
    for solution in run.solutions:
        if any(dominates(point, solution.F, 1e-9) for point in frontier):
            failures.append("{} frontier: {} is dominated".format(label, format_index_set(solution.open)))
        if not pareto_test(problem, solution).certified:
            failures.append("{} pareto test: {} was improved".format(label, format_index_set(solution.open)))
    return failures


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    failures: List[str] = []
    checked = 0
    for path in config.instance_paths:
        for seed in config.seeds:
            _, fuzzy = prepare_instances(config, path, seed)
            failures.extend(_verify_problem(problem_from_fuzzy(fuzzy), config, "{} seed {}".format(path.stem, seed)))
            checked += 1
    for failure in failures:
        print("MISMATCH {}".format(failure))
    print("{} instance(s) checked, {} mismatch(es)".format(checked, len(failures)))
    return 1 if failures else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(levelname)s] %(message)s",
    )
    handler: Callable[[RunConfig, argparse.Namespace], int] = args.handler
    try:
        return handler(config_from_args(args), args)
    except (FuzzyCoverError, OSError) as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
