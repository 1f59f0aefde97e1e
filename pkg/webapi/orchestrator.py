"""Solve orchestration bridging the instance store and the web API."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

from errors import DomainViolation
from services.bench import RunConfig, prepare_instances
from services.instance_store import InstanceRecord, InstanceStore
from services.pareto_engine import DEFAULT_WEIGHTS, ParetoRun, run_algorithm1, verify_run
from services.scalar_solver import (
    DEFAULT_ORACLE_CAP,
    AugTcheby,
    CrossEvaluation,
    Single,
    Solution,
    WeightVector,
    cross_evaluate,
    csp1,
    cspinf,
    solve_scalar,
)

logger = logging.getLogger(__name__)

__all__ = ["FrontierOutcome", "SolveOrchestrator", "SolveOutcome"]

SOLVE_MODES = ("crisp", "single", "csp1", "cspinf", "tcheby")


@dataclass
class SolveOutcome:
    """Result of a single scalarized solve."""

    mode: str
    solution: Solution
    wall_seconds: float
    cross: Optional[CrossEvaluation] = None


@dataclass
class FrontierOutcome:
    """Result of a weight loop, optionally checked against the brute-force frontier."""

    run: ParetoRun
    wall_seconds: float


class SolveOrchestrator:
    """Coordinate instance uploads and solver runs shared across API requests."""

    def __init__(
        self,
        store: Optional[InstanceStore] = None,
        *,
        workers: int = 1,
        oracle_cap: int = DEFAULT_ORACLE_CAP,
    ):
        self._store = store or InstanceStore()
        self._workers = max(1, int(workers))
        self._oracle_cap = int(oracle_cap)

    @property
    def store(self) -> InstanceStore:
        return self._store

    def create_instance(
        self,
        *,
        document: Optional[str] = None,
        points: Optional[str] = None,
        radius: Optional[float] = None,
        costs: str = "unit",
        cost_range: Tuple[float, float] = (100.0, 1000.0),
        budget: str = "card:2",
        spread: float = 0.2,
        seed: int = 1,
        fuzzify: bool = True,
        name: str = "",
    ) -> InstanceRecord:
        """Load an instance from canonical XML or PlainXYW text and store it."""
        if (document is None) == (points is None):
            raise DomainViolation("Provide exactly one of a canonical document or plain points")
        config = RunConfig(
            format="canonical" if document is not None else "plain",
            radius=radius,
            costs=costs,
            cost_range=cost_range,
            budget=budget,
            spread=spread,
            seeds=(seed,),
            output_dir=Path("."),
            workers=self._workers,
        ).validate()
        source = document if document is not None else points
        crisp, fuzzy = prepare_instances(config, source, seed, name=name)
        record = self._store.add(crisp, fuzzy if fuzzify else None)
        logger.info(
            "Stored instance %s (n=%d, m=%d, fuzzy=%s)", record.instance_id, crisp.n, crisp.m, record.is_fuzzy
        )
        return record

    def get_instance(self, instance_id: str) -> InstanceRecord:
        return self._store.get(instance_id)

    def solve(
        self,
        instance_id: str,
        mode: str,
        *,
        r: int = 2,
        weight: Optional[WeightVector] = None,
    ) -> SolveOutcome:
        if mode not in SOLVE_MODES:
            raise DomainViolation("Unknown solve mode {!r}".format(mode))
        record = self._store.get(instance_id)
        started = time.perf_counter()
        cross = None
        if mode == "crisp":
            solution = solve_scalar(record.crisp_problem(), Single(2))
            if record.fuzzy is not None:
                cross = cross_evaluate(record.problem(), record.crisp_problem(), solution.open)
        elif mode == "single":
            solution = solve_scalar(record.problem(), Single(r))
        elif mode == "csp1":
            solution = csp1(record.problem(), record.ideal())
        elif mode == "cspinf":
            solution = cspinf(record.problem(), record.ideal())
        else:
            objective = AugTcheby(weight or WeightVector(1, 1, 1), record.ideal())
            solution = solve_scalar(record.problem(), objective)
        elapsed = time.perf_counter() - started
        logger.debug("Solved %s in mode %s with %d nodes", instance_id, mode, solution.nodes)
        return SolveOutcome(mode=mode, solution=solution, wall_seconds=elapsed, cross=cross)

    def frontier(
        self,
        instance_id: str,
        *,
        weights: Optional[Sequence[WeightVector]] = None,
        early_stop: bool = True,
        oracle: bool = False,
    ) -> FrontierOutcome:
        record = self._store.get(instance_id)
        problem = record.problem()
        started = time.perf_counter()
        run = run_algorithm1(
            problem,
            tuple(weights) if weights is not None else DEFAULT_WEIGHTS,
            early_stop=early_stop,
            workers=self._workers,
        )
        if oracle:
            run = verify_run(problem, run, self._oracle_cap)
        return FrontierOutcome(run=run, wall_seconds=time.perf_counter() - started)
