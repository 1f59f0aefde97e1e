"""Run configuration, instance preparation and the benchmark grid.

A grid cell is one ``(instance, budget parameter, seed)`` combination: the
crisp instance is built and solved as a classical MCLP, its fuzzification is
run through the Pareto weight loop, and the timings, coverage percentages and
Pareto statistics become one :class:`BenchRecord`.  Group rows average the
records of equal ``(n, param)``.
"""
from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from errors import DomainViolation, FuzzyCoverError
from utils import format_real, format_seconds, mean, parse_real, percent

from .instance_loader import Source, load_instance, load_points
from .instance_model import (
    BudgetSpec,
    CardinalityBudget,
    CostSpec,
    CrispInstance,
    ExplicitBudget,
    ExplicitCosts,
    FuzzyInstance,
    NormalCosts,
    SumSmallestBudget,
    UniformCosts,
    UnitCosts,
    fuzzify,
    make_facilities,
    set_budget,
)
from .pareto_engine import DEFAULT_WEIGHTS, run_algorithm1
from .scalar_solver import (
    DEFAULT_ORACLE_CAP,
    Single,
    WeightVector,
    problem_from_crisp,
    problem_from_fuzzy,
    solve_scalar,
)

logger = logging.getLogger(__name__)

__all__ = [
    "BenchRecord",
    "RAW_COLUMNS",
    "RunConfig",
    "TABLE_COLUMNS",
    "default_output_dir",
    "default_workers",
    "group_records",
    "parse_budget",
    "complete_crisp",
    "prepare_instances",
    "read_table",
    "run_bench",
    "run_cell",
    "write_table",
]

OUTPUT_DIR_ENV = "FMCLP_OUTPUT_DIR"
WORKERS_ENV = "FMCLP_WORKERS"

TABLE_COLUMNS: Tuple[str, ...] = (
    "n",
    "param",
    "cpu_fuzzy_s",
    "cpu_crisp_s",
    "distinct_pareto",
    "check_pareto_pct",
    "reach_ideal_pct",
    "cov_crisp_pct",
    "cov_fuzzy_lo_pct",
    "cov_fuzzy_mid_pct",
    "cov_fuzzy_hi_pct",
    "open_crisp",
    "open_fuzzy",
)
RAW_COLUMNS: Tuple[str, ...] = ("instance", "seed", "status") + TABLE_COLUMNS + ("check_pareto_all_pct",)
_TIMING_COLUMNS = {"cpu_fuzzy_s", "cpu_crisp_s"}
_BUDGET_KINDS = ("card", "smallest", "value")
_COST_MODES = ("unit", "normal", "uniform", "file")


def default_output_dir() -> Path:
    return Path(os.getenv(OUTPUT_DIR_ENV, "results"))


def default_workers() -> int:
    raw = os.getenv(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring invalid %s=%r", WORKERS_ENV, raw)
        return 1


def parse_budget(text: str) -> Tuple[str, Optional[float]]:
    """Split ``card:p``, ``smallest:p`` or ``value:B``; the number may be omitted for grids."""
    kind, _, number = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _BUDGET_KINDS:
        raise DomainViolation("Budget mode must be one of {}, got {!r}".format(", ".join(_BUDGET_KINDS), text))
    if not number.strip():
        return kind, None
    try:
        value = parse_real(number)
    except ValueError as exc:
        raise DomainViolation("Invalid budget parameter in {!r}".format(text)) from exc
    if kind != "value" and value != int(value):
        raise DomainViolation("Budget parameter p must be an integer, got {!r}".format(number))
    return kind, value


def _read_cost_file(path: Path) -> Tuple[float, ...]:
    try:
        tokens = path.read_text(encoding="utf-8").split()
    except (OSError, UnicodeDecodeError) as exc:
        raise DomainViolation("Cannot read cost file {}: {}".format(path, exc)) from exc
    try:
        return tuple(parse_real(token) for token in tokens)
    except ValueError as exc:
        raise DomainViolation("Cost file {} holds a non-numeric entry".format(path)) from exc


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI or bench run needs; validated before any solve."""

    instance_paths: Tuple[Path, ...] = ()
    format: str = "plain"
    radius: Optional[float] = None
    costs: str = "unit"
    cost_file: Optional[Path] = None
    cost_range: Tuple[float, float] = (100.0, 1000.0)
    budget: str = "card:2"
    params: Tuple[int, ...] = ()
    spread: float = 0.2
    seeds: Tuple[int, ...] = (1,)
    weights: Tuple[WeightVector, ...] = DEFAULT_WEIGHTS
    early_stop: bool = True
    oracle_cap: int = DEFAULT_ORACLE_CAP
    output_dir: Path = field(default_factory=default_output_dir)
    workers: int = 1
    node_log: bool = False

    def validate(self) -> "RunConfig":
        if self.format not in ("plain", "canonical"):
            raise DomainViolation("Format must be plain or canonical, got {!r}".format(self.format))
        if self.costs not in _COST_MODES:
            raise DomainViolation("Cost mode must be one of {}".format(", ".join(_COST_MODES)))
        if self.costs == "file" and self.cost_file is None:
            raise DomainViolation("--costs file requires --cost-file")
        low, high = self.cost_range
        if not 0 <= low <= high:
            raise DomainViolation("Cost range must satisfy 0 <= A <= B")
        if self.radius is not None and self.radius <= 0:
            raise DomainViolation("Radius must be positive, got {}".format(self.radius))
        if not 0.0 < self.spread <= 1.0:
            raise DomainViolation("Spread must lie in (0, 1], got {}".format(self.spread))
        kind, value = parse_budget(self.budget)
        if self.params and kind == "value":
            raise DomainViolation("Budget parameter lists need card or smallest budgets")
        if value is None and not self.params:
            raise DomainViolation("Budget {!r} needs a parameter".format(self.budget))
        if any(p < 1 for p in self.params):
            raise DomainViolation("Budget parameters must be positive")
        if kind == "card" and self.costs != "unit":
            raise DomainViolation("Cardinality budgets require unit costs")
        if not self.seeds:
            raise DomainViolation("At least one seed is required")
        if not self.weights:
            raise DomainViolation("At least one weight vector is required")
        if self.oracle_cap < 0:
            raise DomainViolation("Oracle cap must be nonnegative")
        if self.workers < 1:
            raise DomainViolation("Worker count must be at least 1")
        return self

    def cost_spec(self, seed: int) -> CostSpec:
        if self.costs == "normal":
            return NormalCosts(seed=seed)
        if self.costs == "uniform":
            return UniformCosts(seed=seed, low=self.cost_range[0], high=self.cost_range[1])
        if self.costs == "file":
            return ExplicitCosts(_read_cost_file(self.cost_file))
        return UnitCosts()

    def budget_spec(self, param: Optional[int] = None) -> BudgetSpec:
        kind, value = parse_budget(self.budget)
        if param is not None:
            value = float(param)
        if kind == "card":
            return CardinalityBudget(int(value))
        if kind == "smallest":
            return SumSmallestBudget(int(value))
        return ExplicitBudget(float(value))

    def param_list(self) -> Tuple[Optional[int], ...]:
        return tuple(self.params) if self.params else (None,)


def _load(config: RunConfig, source: Source) -> Union[CrispInstance, FuzzyInstance]:
    if config.format == "canonical":
        return load_instance(source)
    return load_points(source)


def complete_crisp(
    config: RunConfig, crisp: CrispInstance, seed: int, param: Optional[int] = None
) -> CrispInstance:
    """Add co-located facilities and a budget where *crisp* lacks them."""
    if not crisp.facilities:
        if config.radius is None:
            raise DomainViolation("Instance {!r} has no facilities; a radius is required".format(crisp.name))
        crisp = make_facilities(crisp, config.radius, config.cost_spec(seed))
    if crisp.budget is None or param is not None:
        crisp = set_budget(crisp, config.budget_spec(param))
    return crisp


def prepare_instances(
    config: RunConfig, source: Source, seed: int, param: Optional[int] = None, name: str = ""
) -> Tuple[CrispInstance, FuzzyInstance]:
    """Return the crisp instance and its fuzzification for one grid cell.

    A canonical fuzzy document is used as is unless a budget parameter
    overrides its budget.
    """
    loaded = _load(config, source)
    if isinstance(loaded, FuzzyInstance):
        if param is None:
            return loaded.center, loaded
        loaded = loaded.center
    if not loaded.name:
        loaded = replace(loaded, name=name or (source.stem if isinstance(source, Path) else ""))
    crisp = complete_crisp(config, loaded, seed, param)
    return crisp, fuzzify(crisp, config.spread, seed)


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    n: int
    param: str
    seed: int
    status: str = "ok"
    cpu_fuzzy_s: float = 0.0
    cpu_crisp_s: float = 0.0
    distinct_pareto: float = 0.0
    check_pareto_pct: float = 0.0
    check_pareto_all_pct: float = 0.0
    reach_ideal_pct: float = 0.0
    cov_crisp_pct: float = 0.0
    cov_fuzzy_lo_pct: float = 0.0
    cov_fuzzy_mid_pct: float = 0.0
    cov_fuzzy_hi_pct: float = 0.0
    open_crisp: float = 0.0
    open_fuzzy: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_row(self) -> Dict[str, str]:
        row: Dict[str, str] = {}
        for key, value in asdict(self).items():
            if key in _TIMING_COLUMNS:
                row[key] = format_seconds(value)
            elif isinstance(value, float):
                row[key] = format_real(value)
            else:
                row[key] = str(value)
        return row


def _param_label(config: RunConfig, param: Optional[int]) -> str:
    if param is not None:
        return str(param)
    _, value = parse_budget(config.budget)
    if value is not None and value == int(value):
        return str(int(value))
    return format_real(value)


def run_cell(config: RunConfig, path: Path, param: Optional[int], seed: int) -> BenchRecord:
    """Solve one grid cell; failures are recorded in the returned row."""
    name = Path(path).stem
    label = _param_label(config, param)
    try:
        crisp, fuzzy = prepare_instances(config, Path(path), seed, param)
        crisp_problem = problem_from_crisp(crisp)
        started = time.perf_counter()
        crisp_solution = solve_scalar(crisp_problem, Single(2), node_log=config.node_log)
        cpu_crisp = time.perf_counter() - started

        fuzzy_problem = problem_from_fuzzy(fuzzy)
        started = time.perf_counter()
        run = run_algorithm1(
            fuzzy_problem,
            config.weights,
            early_stop=config.early_stop,
            workers=1,
            node_log=config.node_log,
        )
        cpu_fuzzy = time.perf_counter() - started
    except (FuzzyCoverError, OSError) as exc:
        logger.error("Cell %s param=%s seed=%s failed: %s", name, label, seed, exc)
        return BenchRecord(instance=name, n=0, param=label, seed=seed, status="error: {}".format(exc))

    total = crisp.total_demand()
    per_weight = [run.solutions[entry.solution_index] for entry in run.trace]
    executed = len(run.trace)
    return BenchRecord(
        instance=name,
        n=crisp.n,
        param=label,
        seed=seed,
        cpu_fuzzy_s=cpu_fuzzy,
        cpu_crisp_s=cpu_crisp,
        distinct_pareto=float(len(run.solutions)),
        check_pareto_pct=percent(run.improvements, run.tests_run),
        check_pareto_all_pct=percent(run.improvements, executed),
        reach_ideal_pct=100.0 if run.reached_ideal else 0.0,
        cov_crisp_pct=percent(crisp_solution.F.f2, total),
        cov_fuzzy_lo_pct=mean([percent(s.F.f1, total) for s in per_weight]),
        cov_fuzzy_mid_pct=mean([percent(s.F.f2, total) for s in per_weight]),
        cov_fuzzy_hi_pct=mean([percent(s.F.f3, total) for s in per_weight]),
        open_crisp=float(len(crisp_solution.open)),
        open_fuzzy=mean([float(len(s.open)) for s in per_weight]),
    )


def _run_cell_args(args) -> BenchRecord:
    return run_cell(*args)


def run_bench(config: RunConfig) -> List[BenchRecord]:
    """Run every ``(instance, param, seed)`` cell, in grid order."""
    config.validate()
    cells = [
        (config, path, param, seed)
        for path in config.instance_paths
        for param in config.param_list()
        for seed in config.seeds
    ]
    logger.info("Running %d bench cell(s) on %d worker(s)", len(cells), config.workers)
    if config.workers <= 1 or len(cells) <= 1:
        return [_run_cell_args(cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(_run_cell_args, cells))


def group_records(records: Sequence[BenchRecord]) -> List[Dict[str, str]]:
    """Average successful records sharing ``(n, param)``."""
    groups: Dict[Tuple[int, str], List[BenchRecord]] = {}
    for record in records:
        if record.ok:
            groups.setdefault((record.n, record.param), []).append(record)
    rows: List[Dict[str, str]] = []
    for (n, param), members in groups.items():
        row = {"n": str(n), "param": param}
        for column in TABLE_COLUMNS[2:]:
            value = mean([float(getattr(member, column)) for member in members])
            row[column] = format_seconds(value) if column in _TIMING_COLUMNS else format_real(value)
        rows.append(row)
    return rows


def write_table(path: Path, columns: Sequence[str], rows: Sequence[Dict[str, str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({column: row[column] for column in columns})
    return path


def read_table(path: Path) -> List[Dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
