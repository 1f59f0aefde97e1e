"""Pareto solutions of the three-objective covering problem.

Implements the weight loop that collects Pareto solutions from augmented
weighted Tchebycheff problems, the Pareto test that certifies (or repairs) a
candidate, and a brute-force frontier used to verify both on small instances.
"""
from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from errors import EmptyWeightSet, InfeasibleCandidate

from .scalar_solver import (
    AugTcheby,
    DEFAULT_ORACLE_CAP,
    ObjectiveTriple,
    Problem,
    Solution,
    WeightVector,
    enumerate_feasible,
    evaluate,
    ideal_point,
    mask_to_open,
    maximize_total_above,
    solve_scalar,
)

logger = logging.getLogger(__name__)

__all__ = [
    "CertificationPath",
    "DEFAULT_WEIGHTS",
    "IDEAL_TOLERANCE",
    "ParetoRun",
    "ParetoTestResult",
    "TraceEntry",
    "brute_force_frontier",
    "dominates",
    "pareto_test",
    "reaches_ideal",
    "run_algorithm1",
    "verify_run",
]

IDEAL_TOLERANCE = 1e-9
DELTA_TOLERANCE = 1e-9

DEFAULT_WEIGHTS: Tuple[WeightVector, ...] = (
    WeightVector(0, 0, 0, 1),
    WeightVector(1, 0, 0, 0),
    WeightVector(0, 1, 0, 0),
    WeightVector(0, 0, 1, 0),
    WeightVector(1, 1, 1, 0.001),
    WeightVector(1, 1, 1, 0),
    WeightVector(1, 1, 0, 0.001),
    WeightVector(1, 0, 1, 0.001),
    WeightVector(0, 1, 1, 0.001),
)


class CertificationPath(enum.Enum):
    """How a stored solution was certified Pareto."""

    Direct = "direct"
    CheckedDeltaZero = "checked-delta0"
    Improved = "improved"


@dataclass(frozen=True)
class ParetoTestResult:
    delta: ObjectiveTriple
    improved: Optional[Solution] = None

    @property
    def certified(self) -> bool:
        return self.improved is None


@dataclass(frozen=True)
class TraceEntry:
    """Outcome of one weight vector of the loop."""

    weight: WeightVector
    solution_index: int
    scalar_value: float
    reached_ideal: bool
    path: CertificationPath
    tested: bool
    delta: Optional[ObjectiveTriple] = None
    solution: Optional[Solution] = None

    @property
    def replaced(self) -> bool:
        return self.path is CertificationPath.Improved


@dataclass(frozen=True)
class ParetoRun:
    weights: Tuple[WeightVector, ...]
    solutions: Tuple[Solution, ...]
    trace: Tuple[TraceEntry, ...]
    ideal: ObjectiveTriple
    terminated_early: bool = False
    early_stop: bool = True
    oracle_verified: Tuple[bool, ...] = field(default=())

    @property
    def reached_ideal(self) -> bool:
        return any(entry.reached_ideal for entry in self.trace)

    @property
    def tests_run(self) -> int:
        return sum(1 for entry in self.trace if entry.tested)

    @property
    def improvements(self) -> int:
        return sum(1 for entry in self.trace if entry.replaced)

    def path_of(self, index: int) -> CertificationPath:
        """Certification path of the first trace entry that stored solution *index*."""
        for entry in self.trace:
            if entry.solution_index == index:
                return entry.path
        raise IndexError(index)


def dominates(a: Sequence[float], b: Sequence[float], tolerance: float = 0.0) -> bool:
    """True iff ``a >= b`` componentwise and ``a != b``."""
    if any(x < y - tolerance for x, y in zip(a, b)):
        return False
    return any(x > y + tolerance for x, y in zip(a, b))


def reaches_ideal(F: Sequence[float], ideal: Sequence[float]) -> bool:
    return all(abs(value - best) <= IDEAL_TOLERANCE for value, best in zip(F, ideal))


def pareto_test(problem: Problem, candidate: Solution, *, node_log: bool = False) -> ParetoTestResult:
    """Look for a feasible set that dominates *candidate*.

    Maximizes the total objective over budget-feasible sets whose triple is
    componentwise at least the candidate's.  ``delta`` is the gain of that
    optimum; a zero gain certifies the candidate as Pareto.
    """
    checked = evaluate(problem, candidate.open)
    if not checked.feasible:
        raise InfeasibleCandidate(
            "Candidate {} violates the budget rows: spent {} > budget {}".format(
                list(candidate.open), checked.spent, problem.budget
            )
        )
    if checked.z != candidate.z or not np.allclose(checked.F, candidate.F, rtol=1e-9, atol=1e-9):
        raise InfeasibleCandidate(
            "Candidate {} does not match its forced coverage".format(list(candidate.open))
        )
    best = maximize_total_above(problem, checked.F, seed_open=checked.open, node_log=node_log)
    delta = ObjectiveTriple(*(max(0.0, best.F[r] - checked.F[r]) for r in range(3)))
    if max(delta) <= DELTA_TOLERANCE or best.open == checked.open:
        return ParetoTestResult(delta=ObjectiveTriple(0.0, 0.0, 0.0))
    logger.debug("Pareto test improved %s to %s by %s", checked.open, best.open, tuple(delta))
    return ParetoTestResult(delta=delta, improved=best)


def _process_weight(
    problem: Problem, ideal: ObjectiveTriple, weight: WeightVector, node_log: bool
) -> TraceEntry:
    solution = solve_scalar(problem, AugTcheby(weight, ideal), node_log=node_log)
    if reaches_ideal(solution.F, ideal):
        return TraceEntry(
            weight, -1, solution.scalar_value, True, CertificationPath.Direct, False, solution=solution
        )
    if weight.strictly_positive:
        return TraceEntry(
            weight, -1, solution.scalar_value, False, CertificationPath.Direct, False, solution=solution
        )
    result = pareto_test(problem, solution, node_log=node_log)
    if result.improved is None:
        return TraceEntry(
            weight,
            -1,
            solution.scalar_value,
            False,
            CertificationPath.CheckedDeltaZero,
            True,
            delta=result.delta,
            solution=solution,
        )
    objective = AugTcheby(weight, ideal)
    improved = result.improved.with_value(objective.value(result.improved.F), nodes=result.improved.nodes)
    return TraceEntry(
        weight,
        -1,
        solution.scalar_value,
        False,
        CertificationPath.Improved,
        True,
        delta=result.delta,
        solution=improved,
    )


def run_algorithm1(
    problem: Problem,
    weights: Sequence[WeightVector],
    *,
    early_stop: bool = True,
    workers: int = 1,
    node_log: bool = False,
) -> ParetoRun:
    """Collect Pareto solutions from one Tchebycheff problem per weight vector.

    With *early_stop* the loop ends at the first solution attaining the ideal
    point.  Without it, weight vectors are independent and may run on a thread
    pool of *workers* threads.
    """
    weights = tuple(weights)
    if not weights:
        raise EmptyWeightSet("At least one weight vector is required")
    ideal = ideal_point(problem, node_log=node_log)
    logger.info("Ideal point (%.6f, %.6f, %.6f)", *ideal)

    entries: List[TraceEntry] = []
    terminated = False
    if early_stop or workers <= 1:
        for weight in weights:
            entry = _process_weight(problem, ideal, weight, node_log)
            entries.append(entry)
            logger.info("Weight %s: F=%s path=%s", weight.label, tuple(entry.solution.F), entry.path.value)
            if early_stop and entry.reached_ideal:
                terminated = True
                logger.info("Ideal point attained, stopping after %d weight(s)", len(entries))
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(
                pool.map(lambda weight: _process_weight(problem, ideal, weight, node_log), weights)
            )
        for entry in entries:
            logger.info("Weight %s: F=%s path=%s", entry.weight.label, tuple(entry.solution.F), entry.path.value)

    solutions: List[Solution] = []
    index_of = {}
    trace: List[TraceEntry] = []
    for entry in entries:
        solution = entry.solution
        index = index_of.get(solution.open)
        if index is None:
            index = len(solutions)
            index_of[solution.open] = index
            solutions.append(solution)
        trace.append(
            TraceEntry(
                weight=entry.weight,
                solution_index=index,
                scalar_value=entry.scalar_value,
                reached_ideal=entry.reached_ideal,
                path=entry.path,
                tested=entry.tested,
                delta=entry.delta,
            )
        )
    return ParetoRun(
        weights=weights,
        solutions=tuple(solutions),
        trace=tuple(trace),
        ideal=ideal,
        terminated_early=terminated,
        early_stop=early_stop,
    )


def brute_force_frontier(problem: Problem, cap: int = DEFAULT_ORACLE_CAP) -> List[Solution]:
    """All non-dominated feasible sets, ordered by size then index tuple."""
    masks, values = enumerate_feasible(problem, cap)
    order = np.lexsort((masks, -values[:, 2], -values[:, 1], -values[:, 0]))
    front: List[int] = []
    for index in order:
        candidate = values[index]
        if any(dominates(values[kept], candidate, 1e-9) for kept in front):
            continue
        front.append(int(index))
    open_sets = sorted(
        (mask_to_open(masks[index], problem.m) for index in front),
        key=lambda open_set: (len(open_set), open_set),
    )
    return [evaluate(problem, open_set) for open_set in open_sets]


def verify_run(problem: Problem, run: ParetoRun, cap: int = DEFAULT_ORACLE_CAP) -> ParetoRun:
    """Mark each stored solution that no frontier point dominates."""
    frontier = [solution.F for solution in brute_force_frontier(problem, cap)]
    verified = tuple(
        not any(dominates(point, solution.F, 1e-9) for point in frontier)
        for solution in run.solutions
    )
    return ParetoRun(
        weights=run.weights,
        solutions=run.solutions,
        trace=run.trace,
        ideal=run.ideal,
        terminated_early=run.terminated_early,
        early_stop=run.early_stop,
        oracle_verified=verified,
    )
