"""Exact optimization of the scalarized covering problems.

Every scalarization used by the Pareto machinery is solved here: single
objective maximization (ideal point), the l1 / l-infinity compromise problems
and the augmented weighted Tchebycheff problem.  Once the open facility set
``S`` is fixed the coverage variables are forced (``z_i = 1`` iff some open
facility covers ``i``), so the search runs over facility subsets only.

The search is a best-first branch-and-bound on open/close decisions.  Each
node is bounded by a Lagrangian relaxation: the links between opened
facilities and covered points are priced out, which leaves one continuous
knapsack per budget row.  The prices are tuned by projected subgradient
steps (warm started from the parent) and never exceed the point weights, so
every price vector yields a valid bound between the union bound and the
plain knapsack bound.  The same prices close facilities whose forced-open
bound is strictly worse than the incumbent, pick the branching facility and
propose a rounded completion.  A greedy sequence improved by add/swap local
search seeds the incumbent.

Among solutions with equal scalar value the smallest open set wins, then the
lexicographically smallest sorted index tuple.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DomainViolation, OrderViolation, TooLarge, UnknownFacility
from tfn import TFN
from utils import format_real

from .instance_model import (
    CoverageMap,
    CrispInstance,
    FuzzyInstance,
    coverage_crisp,
    coverage_fuzzy,
)

logger = logging.getLogger(__name__)

__all__ = [
    "AugTcheby",
    "BUDGET_TOLERANCE",
    "BranchAndBound",
    "CrossEvaluation",
    "DEFAULT_ORACLE_CAP",
    "DEFAULT_RHO",
    "ObjectiveTriple",
    "Problem",
    "ScalarObjective",
    "Single",
    "Solution",
    "WeightVector",
    "cross_evaluate",
    "csp1",
    "cspinf",
    "enumerate_feasible",
    "evaluate",
    "ideal_point",
    "mask_to_open",
    "maximize_total_above",
    "objectives_close",
    "problem_from_crisp",
    "problem_from_fuzzy",
    "solve_by_enumeration",
    "solve_scalar",
]

BUDGET_TOLERANCE = 1e-9
TIE_TOLERANCE = 1e-9
OBJECTIVE_ABS_TOLERANCE = 1e-9
OBJECTIVE_REL_TOLERANCE = 1e-6
DEFAULT_RHO = 0.001
DEFAULT_ORACLE_CAP = 20
_ENUMERATION_CHUNK = 1 << 15


def objectives_close(a: float, b: float) -> bool:
    """Compare objective values with 1e-6 relative or 1e-9 absolute slack."""
    slack = max(OBJECTIVE_ABS_TOLERANCE, OBJECTIVE_REL_TOLERANCE * max(abs(a), abs(b)))
    return abs(a - b) <= slack


def _tie_tolerance(value: float) -> float:
    return max(TIE_TOLERANCE, 1e-12 * abs(value))


class ObjectiveTriple(NamedTuple):
    """``(F1, F2, F3) = (w^- z, w z, w^+ z)``."""

    f1: float
    f2: float
    f3: float

    def component(self, r: int) -> float:
        return self[r - 1]


@dataclass(frozen=True)
class WeightVector:
    """Tchebycheff weights ``(lambda_1, lambda_2, lambda_3, rho)``."""

    l1: float
    l2: float
    l3: float
    rho: float = DEFAULT_RHO

    def __post_init__(self) -> None:
        for name in ("l1", "l2", "l3", "rho"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise DomainViolation("Weight {} must be a nonnegative real, got {}".format(name, value))
            object.__setattr__(self, name, value)

    @property
    def lambdas(self) -> Tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    @property
    def strictly_positive(self) -> bool:
        return self.l1 > 0 and self.l2 > 0 and self.l3 > 0 and self.rho > 0

    @property
    def label(self) -> str:
        return "({})".format(", ".join(format_real(v) for v in (self.l1, self.l2, self.l3, self.rho)))

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Parse ``"1,1,1,0.001"`` or ``"(1, 1, 1, 0.001)"``."""
        tokens = [token for token in re.split(r"[\s,()]+", text) if token]
        if len(tokens) not in (3, 4):
            raise DomainViolation("Weight vector needs 3 or 4 components, got {!r}".format(text))
        try:
            values = [float(token) for token in tokens]
        except ValueError as exc:
            raise DomainViolation("Invalid weight vector {!r}".format(text)) from exc
        return cls(*values)


# ----------------------------------------------------------------------
# Problem and solutions
# ----------------------------------------------------------------------
def _frozen(array, shape_tail: int) -> np.ndarray:
    result = np.array(array, dtype=float, copy=True)
    if result.ndim != 2 or result.shape[1] != shape_tail:
        raise DomainViolation("Expected an (k, {}) array, got shape {}".format(shape_tail, result.shape))
    result.setflags(write=False)
    return result


@dataclass(frozen=True, eq=False)
class Problem:
    """Reduced three-objective covering problem over facility subsets."""

    coverage: CoverageMap
    demands: np.ndarray
    costs: np.ndarray
    budget: Tuple[float, float, float]

    def __post_init__(self) -> None:
        demands = _frozen(self.demands, 3) if len(self.demands) else np.zeros((0, 3))
        costs = _frozen(self.costs, 3) if len(self.costs) else np.zeros((0, 3))
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "costs", costs)
        budget = tuple(float(b) for b in self.budget)
        if len(budget) != 3:
            raise DomainViolation("Budget must have three rows")
        object.__setattr__(self, "budget", budget)
        if len(self.coverage) != demands.shape[0]:
            raise DomainViolation(
                "Coverage lists {} points but {} demand triples were given".format(
                    len(self.coverage), demands.shape[0]
                )
            )
        if self.coverage.facility_count != costs.shape[0]:
            raise DomainViolation(
                "Coverage lists {} facilities but {} cost triples were given".format(
                    self.coverage.facility_count, costs.shape[0]
                )
            )
        if (demands < 0).any() or (costs < 0).any() or min(budget) < 0:
            raise DomainViolation("Demands, costs and budgets must be nonnegative")
        if ((demands[:, 0] > demands[:, 1]) | (demands[:, 1] > demands[:, 2])).any():
            raise OrderViolation("Demand triples must satisfy lo <= mid <= hi")
        incidence = self.coverage.as_matrix()
        incidence.setflags(write=False)
        object.__setattr__(self, "_incidence", incidence)

    @property
    def n(self) -> int:
        return self.demands.shape[0]

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    @property
    def incidence(self) -> np.ndarray:
        """Boolean ``(m, n)`` matrix, true when facility j covers point i."""
        return self._incidence  # type: ignore[attr-defined]

    def total_demand(self) -> ObjectiveTriple:
        return ObjectiveTriple(*(math.fsum(self.demands[:, r]) for r in range(3)))


def problem_from_crisp(inst: CrispInstance, coverage: Optional[CoverageMap] = None) -> Problem:
    """Crisp MCLP as a degenerate three-objective problem."""
    if inst.budget is None:
        raise DomainViolation("Crisp instance has no budget")
    demands = np.repeat(inst.demands()[:, None], 3, axis=1)
    costs = np.repeat(inst.costs()[:, None], 3, axis=1)
    return Problem(
        coverage=coverage if coverage is not None else coverage_crisp(inst),
        demands=demands,
        costs=costs,
        budget=(inst.budget, inst.budget, inst.budget),
    )


def problem_from_fuzzy(finst: FuzzyInstance) -> Problem:
    return Problem(
        coverage=coverage_fuzzy(finst),
        demands=finst.demands,
        costs=finst.costs,
        budget=finst.budget.as_tuple(),
    )


@dataclass(frozen=True)
class Solution:
    """Open facility set with its forced coverage vector and objective triple."""

    open: Tuple[int, ...]
    z: Tuple[int, ...]
    F: ObjectiveTriple
    scalar_value: float
    served: TFN
    spent: Tuple[float, float, float]
    feasible: bool
    nodes: int = 0

    @property
    def covered_count(self) -> int:
        return sum(self.z)

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return (len(self.open), self.open)

    def with_value(self, scalar_value: float, nodes: int = 0) -> "Solution":
        return replace(self, scalar_value=float(scalar_value), nodes=nodes)


def _column_sums(matrix: np.ndarray, mask: np.ndarray) -> Tuple[float, float, float]:
    rows = matrix[mask]
    return tuple(math.fsum(rows[:, r].tolist()) for r in range(3))  # type: ignore[return-value]


def evaluate(problem: Problem, open_set: Sequence[int], scalar_value: float = 0.0) -> Solution:
    """Force the coverage vector of *open_set* and compute its objective triple.

    Infeasible sets are evaluated too; the ``feasible`` flag reports the
    three budget rows.
    """
    open_ids = tuple(sorted({int(j) for j in open_set}))
    for j in open_ids:
        if not 0 <= j < problem.m:
            raise UnknownFacility("Facility {} does not exist (m={})".format(j, problem.m))
    if open_ids:
        covered = problem.incidence[list(open_ids)].any(axis=0)
    else:
        covered = np.zeros(problem.n, dtype=bool)
    F = ObjectiveTriple(*_column_sums(problem.demands, covered))
    chosen = np.zeros(problem.m, dtype=bool)
    chosen[list(open_ids)] = True
    spent = _column_sums(problem.costs, chosen)
    feasible = all(spent[q] <= problem.budget[q] + BUDGET_TOLERANCE for q in range(3))
    return Solution(
        open=open_ids,
        z=tuple(int(v) for v in covered),
        F=F,
        scalar_value=float(scalar_value),
        served=TFN(F.f1, F.f2, F.f3),
        spent=spent,
        feasible=feasible,
    )


# ----------------------------------------------------------------------
# Scalarizations
# ----------------------------------------------------------------------
class _ObjectiveBase:
    @property
    def columns(self) -> Tuple[int, ...]:
        """Columns of ``(F1, F2, F3, F1 + F2 + F3)`` the objective depends on."""
        return ()

    def accepts(self, F: ObjectiveTriple) -> bool:
        return True

    def accepts_array(self, F: np.ndarray) -> np.ndarray:
        return np.ones(F.shape[0], dtype=bool)

    def score(self, F: ObjectiveTriple) -> float:
        raise NotImplementedError

    def value(self, F: ObjectiveTriple) -> float:
        raise NotImplementedError

    def score_array(self, F: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bound_scores(self, upper: np.ndarray) -> np.ndarray:
        """Lowest reachable score for rows of optimistic ``(F1, F2, F3, total)``."""
        raise NotImplementedError


@dataclass(frozen=True)
class Single(_ObjectiveBase):
    """Maximize ``F_r`` alone."""

    r: int

    def __post_init__(self) -> None:
        if self.r not in (1, 2, 3):
            raise DomainViolation("Objective index must be 1, 2 or 3, got {}".format(self.r))

    @property
    def columns(self) -> Tuple[int, ...]:
        return (self.r - 1,)

    def score(self, F: ObjectiveTriple) -> float:
        return -F[self.r - 1]

    def value(self, F: ObjectiveTriple) -> float:
        return F[self.r - 1]

    def score_array(self, F: np.ndarray) -> np.ndarray:
        return -F[:, self.r - 1]

    def bound_scores(self, upper: np.ndarray) -> np.ndarray:
        return -upper[:, self.r - 1]


@dataclass(frozen=True)
class AugTcheby(_ObjectiveBase):
    """Minimize ``max_r lambda_r (I_r - F_r) + rho * sum_r (I_r - F_r)``."""

    weights: WeightVector
    ideal: ObjectiveTriple

    @property
    def columns(self) -> Tuple[int, ...]:
        chosen = tuple(r for r, weight in enumerate(self.weights.lambdas) if weight > 0)
        return chosen + ((3,) if self.weights.rho > 0 else ())

    def value(self, F: ObjectiveTriple) -> float:
        gaps = [self.ideal[r] - F[r] for r in range(3)]
        worst = max(weight * gap for weight, gap in zip(self.weights.lambdas, gaps))
        return worst + self.weights.rho * math.fsum(gaps)

    score = value

    def score_array(self, F: np.ndarray) -> np.ndarray:
        gaps = np.asarray(self.ideal, dtype=float)[None, :] - F
        lambdas = np.asarray(self.weights.lambdas, dtype=float)[None, :]
        return (lambdas * gaps).max(axis=1) + self.weights.rho * gaps.sum(axis=1)

    def bound_scores(self, upper: np.ndarray) -> np.ndarray:
        ideal = np.asarray(self.ideal, dtype=float)
        lambdas = np.asarray(self.weights.lambdas, dtype=float)
        worst = (lambdas[None, :] * (ideal[None, :] - upper[:, :3])).max(axis=1)
        total = np.minimum(upper[:, 3], upper[:, :3].sum(axis=1))
        return worst + self.weights.rho * (ideal.sum() - total)


ScalarObjective = Union[Single, AugTcheby]


@dataclass(frozen=True)
class _TotalAbove(_ObjectiveBase):
    """Maximize ``F1 + F2 + F3`` over sets whose triple dominates *floor*."""

    floor: ObjectiveTriple

    @property
    def columns(self) -> Tuple[int, ...]:
        return (3, 0, 1, 2)

    def _slacks(self) -> np.ndarray:
        return np.array([max(OBJECTIVE_ABS_TOLERANCE, 1e-12 * abs(v)) for v in self.floor])

    def accepts(self, F: ObjectiveTriple) -> bool:
        return bool(self.accepts_array(np.asarray(F, dtype=float)[None, :])[0])

    def accepts_array(self, F: np.ndarray) -> np.ndarray:
        lowest = np.asarray(self.floor, dtype=float) - self._slacks()
        return (F[:, :3] >= lowest[None, :]).all(axis=1)

    def score(self, F: ObjectiveTriple) -> float:
        return -math.fsum(F)

    def value(self, F: ObjectiveTriple) -> float:
        return math.fsum(F)

    def score_array(self, F: np.ndarray) -> np.ndarray:
        return -F.sum(axis=1)

    def bound_scores(self, upper: np.ndarray) -> np.ndarray:
        total = np.minimum(upper[:, 3], upper[:, :3].sum(axis=1))
        return np.where(self.accepts_array(upper), -total, np.inf)


# ----------------------------------------------------------------------
# Branch and bound
# ----------------------------------------------------------------------
ROOT_ITERATIONS = 300
NODE_ITERATIONS = 30
_SWAP_PASSES = 50
_ZERO_COST = 1e-12


def _fractional_knapsack(
    values: np.ndarray, weights: np.ndarray, capacity: float
) -> Tuple[float, np.ndarray]:
    """Continuous knapsack optimum and the item fractions attaining it."""
    taken = np.zeros(values.size)
    positive = values > 0
    free = positive & (weights <= _ZERO_COST)
    taken[free] = 1.0
    total = float(values[free].sum())
    items = np.flatnonzero(positive & ~free)
    if items.size == 0:
        return total, taken
    order = items[np.argsort(-values[items] / weights[items], kind="stable")]
    cumulative = np.cumsum(weights[order])
    full = int(np.searchsorted(cumulative, capacity, side="right"))
    taken[order[:full]] = 1.0
    total += float(values[order[:full]].sum())
    if full < order.size:
        used = float(cumulative[full - 1]) if full > 0 else 0.0
        fraction = max(0.0, capacity - used) / float(weights[order[full]])
        taken[order[full]] = fraction
        total += float(values[order[full]]) * fraction
    return total, taken


def _knapsack_forcing_each(values: np.ndarray, weights: np.ndarray, capacity: float) -> np.ndarray:
    """Continuous knapsack optimum with item ``k`` forced in, for every ``k``."""
    positive = values > 0
    free = weights <= _ZERO_COST
    base = float(values[positive & free].sum())
    items = np.flatnonzero(positive & ~free)
    order = items[np.argsort(-values[items] / weights[items], kind="stable")]
    cum_weight = np.concatenate(([0.0], np.cumsum(weights[order])))
    cum_value = np.concatenate(([0.0], np.cumsum(values[order])))
    # the relaxation over all items bounds the one without item k
    forced = base + np.maximum(values, 0.0) + np.interp(
        np.maximum(capacity - weights, 0.0), cum_weight, cum_value
    )
    inside = free.copy()
    inside[order[cum_weight[1:] <= capacity]] = True
    forced[inside] = base + float(np.interp(capacity, cum_weight, cum_value))
    return forced


class _Relaxation:
    """Lagrangian bound on one objective column with the coverage links priced out.

    For prices ``0 <= u <= v`` every completion gains at most
    ``sum(v - u) + knapsack(links @ u)`` in each budget row.  ``u = 0`` gives
    the union bound and ``u = v`` the plain knapsack bound; the prices in
    between are tuned by projected subgradient steps.
    """

    def __init__(self, links: np.ndarray, values: np.ndarray, costs: np.ndarray, residual: np.ndarray):
        self.links = links
        self.values = values
        self.costs = costs
        self.residual = residual

    def evaluate(self, prices: np.ndarray) -> Tuple[float, np.ndarray]:
        gains = self.links @ prices
        best_total, best_taken = math.inf, np.zeros(gains.size)
        for q in range(3):
            total, taken = _fractional_knapsack(gains, self.costs[:, q], self.residual[q])
            if total < best_total:
                best_total, best_taken = total, taken
        return float(np.maximum(self.values - prices, 0.0).sum()) + best_total, best_taken

    def minimize(
        self,
        prices: np.ndarray,
        target: float,
        settled: Callable[[float], bool],
        iterations: int,
    ) -> Tuple[float, np.ndarray]:
        prices = np.clip(prices, 0.0, self.values)
        best, best_prices = math.inf, prices
        step, stalled = 2.0, 0
        for _ in range(iterations):
            value, taken = self.evaluate(prices)
            if value < best:
                stalled = 0 if best - value > 1e-9 * max(1.0, value) else stalled + 1
                best, best_prices = value, prices
            else:
                stalled += 1
            if settled(best):
                break
            if stalled >= 4:
                step, stalled = step / 2.0, 0
                if step < 1e-3:
                    break
            gradient = taken @ self.links - (prices < self.values).astype(float)
            norm = float(gradient @ gradient)
            if norm <= 1e-18:
                break
            gap = value - target
            if gap <= 1e-9 * max(1.0, value):
                gap = 0.05 * value
            if gap <= 0.0:
                break
            prices = np.clip(prices - (step * gap / norm) * gradient, 0.0, self.values)
        return best, best_prices

    def forced(self, prices: np.ndarray) -> np.ndarray:
        """Bound for every candidate when that candidate is opened."""
        gains = self.links @ prices
        rows = [_knapsack_forcing_each(gains, self.costs[:, q], self.residual[q]) for q in range(3)]
        return float(np.maximum(self.values - prices, 0.0).sum()) + np.min(rows, axis=0)


def _with_total(F: Sequence[float]) -> np.ndarray:
    return np.array([F[0], F[1], F[2], math.fsum(F)], dtype=float)


class _SearchSpace:
    """Facilities and points that can matter, in branching order."""

    def __init__(self, problem: Problem):
        budget = np.asarray(problem.budget, dtype=float)
        incidence = problem.incidence
        fits = (problem.costs <= budget[None, :] + BUDGET_TOLERANCE).all(axis=1)
        useful = incidence.any(axis=1)

        representative: Dict[Tuple[bytes, bytes], int] = {}
        self.alias: Dict[int, int] = {}
        kept: List[int] = []
        for j in range(problem.m):
            if not (fits[j] and useful[j]):
                continue
            signature = (incidence[j].tobytes(), problem.costs[j].tobytes())
            if signature in representative:
                self.alias[j] = representative[signature]
                continue
            representative[signature] = j
            self.alias[j] = j
            kept.append(j)

        if kept:
            point_mask = incidence[kept].any(axis=0)
        else:
            point_mask = np.zeros(problem.n, dtype=bool)
        self.point_ids = np.flatnonzero(point_mask)
        self.weights = problem.demands[self.point_ids]
        self.values = np.column_stack([self.weights, self.weights.sum(axis=1)])

        def score(j: int) -> float:
            gain = float(self.weights[:, 1] @ incidence[j, self.point_ids])
            cost = float(problem.costs[j, 1])
            return math.inf if cost <= _ZERO_COST else gain / cost

        self.ids: Tuple[int, ...] = tuple(sorted(kept, key=lambda j: (-score(j), j)))
        self.position = {j: p for p, j in enumerate(self.ids)}
        self.matrix = incidence[np.ix_(list(self.ids), self.point_ids)] if self.ids else np.zeros(
            (0, self.point_ids.size), dtype=bool
        )
        self.matrix_f = self.matrix.astype(float)
        self.costs = problem.costs[list(self.ids)] if self.ids else np.zeros((0, 3))
        self.budget = budget
        logger.debug(
            "Search space: %d of %d facilities, %d of %d points",
            len(self.ids), problem.m, self.point_ids.size, problem.n,
        )

    @property
    def size(self) -> int:
        return len(self.ids)

    def covered(self, positions: Sequence[int]) -> np.ndarray:
        if len(positions) == 0:
            return np.zeros(self.point_ids.size, dtype=bool)
        return self.matrix[list(positions)].any(axis=0)

    def objective(self, covered: np.ndarray) -> ObjectiveTriple:
        return ObjectiveTriple(*_column_sums(self.weights, covered))

    def key(self, positions: Tuple[int, ...]) -> Tuple[int, Tuple[int, ...]]:
        return (len(positions), tuple(sorted(self.ids[p] for p in positions)))

    def positions_of(self, open_ids: Sequence[int]) -> Tuple[int, ...]:
        positions = set()
        for j in open_ids:
            kept = self.alias.get(int(j))
            if kept is not None:
                positions.add(self.position[kept])
        return tuple(sorted(positions))

    def greedy(self, column: int = 1) -> List[int]:
        """Greedy gain-per-mid-cost sequence on one objective column."""
        covered = np.zeros(self.point_ids.size, dtype=bool)
        spent = np.zeros(3)
        remaining = np.ones(self.size, dtype=bool)
        chosen: List[int] = []
        while remaining.any():
            residual = self.budget - spent + BUDGET_TOLERANCE
            candidates = np.flatnonzero(remaining & (self.costs <= residual[None, :]).all(axis=1))
            if candidates.size == 0:
                break
            gains = self.matrix_f[candidates] @ (self.values[:, column] * ~covered)
            costs = self.costs[candidates, 1]
            ratios = np.where(costs <= _ZERO_COST, np.inf, gains / np.maximum(costs, _ZERO_COST))
            ratios = np.where(gains > 0, ratios, -np.inf)
            best = int(np.argmax(ratios))
            if ratios[best] == -np.inf:
                break
            position = int(candidates[best])
            chosen.append(position)
            remaining[position] = False
            covered |= self.matrix[position]
            spent = spent + self.costs[position]
        return chosen


@dataclass
class _Incumbent:
    score: float
    key: Tuple[int, Tuple[int, ...]]
    positions: Tuple[int, ...]
    F: np.ndarray


@dataclass
class _Node:
    positions: Tuple[int, ...]
    free: np.ndarray
    covered: np.ndarray
    F: np.ndarray
    spent: np.ndarray
    depth: int
    prices: Dict[int, np.ndarray]
    branch: int = -1


class BranchAndBound:
    """Best-first branch-and-bound over facility subsets for one objective.

    Nodes are bounded by a Lagrangian relaxation of the coverage links whose
    prices are tuned by subgradient steps and inherited by both children.
    The final prices also close facilities that cannot belong to a strictly
    better set and suggest a rounded completion for the incumbent.
    """

    def __init__(
        self,
        problem: Problem,
        objective: _ObjectiveBase,
        *,
        node_log: bool = False,
        seed_open: Optional[Sequence[int]] = None,
    ):
        self._problem = problem
        self._objective = objective
        self._columns = objective.columns
        self._node_log = node_log
        self._space = _SearchSpace(problem)
        self._seed_open = seed_open
        self._incumbent: Optional[_Incumbent] = None
        self.nodes = 0

    def _offer(self, positions: Tuple[int, ...], F: ObjectiveTriple) -> None:
        if not self._objective.accepts(F):
            return
        score = self._objective.score(F)
        key = self._space.key(positions)
        incumbent = self._incumbent
        if incumbent is None:
            self._incumbent = _Incumbent(score, key, positions, _with_total(F))
            return
        tolerance = _tie_tolerance(incumbent.score)
        if score < incumbent.score - tolerance or (
            score <= incumbent.score + tolerance and key < incumbent.key
        ):
            self._incumbent = _Incumbent(score, key, positions, _with_total(F))

    def _try(self, positions: Sequence[int]) -> None:
        positions = tuple(sorted(positions))
        self._offer(positions, self._space.objective(self._space.covered(positions)))

    def _prunable(self, bound: float, positions: Tuple[int, ...]) -> bool:
        incumbent = self._incumbent
        if incumbent is None:
            return False
        tolerance = _tie_tolerance(incumbent.score)
        if bound > incumbent.score + tolerance:
            return True
        if bound >= incumbent.score - tolerance:
            # only a tie is reachable; the node's own set has the smallest key below it
            return self._space.key(positions) >= incumbent.key
        return False

    def _finished(self, bound: float, positions: Tuple[int, ...]) -> bool:
        # an infinite bound means no set below the node passes the objective filter
        return math.isinf(bound) or self._prunable(bound, positions)

    def _bound_score(self, upper: np.ndarray) -> float:
        return float(self._objective.bound_scores(upper[None, :])[0])

    def _score_of(self, positions: Tuple[int, ...]) -> float:
        F = self._space.objective(self._space.covered(positions))
        return self._objective.score(F) if self._objective.accepts(F) else math.inf

    def _local_search(self, positions: Tuple[int, ...]) -> Tuple[int, ...]:
        """Apply the best single add or swap while the score strictly improves."""
        space = self._space
        objective = self._objective
        current = tuple(sorted(positions))
        for _ in range(_SWAP_PASSES):
            score = self._score_of(current)
            threshold = score - _tie_tolerance(score) if math.isfinite(score) else math.inf
            move: Optional[Tuple[int, ...]] = None
            outside = np.ones(space.size, dtype=bool)
            outside[list(current)] = False
            for removed in (None,) + current:
                base = tuple(p for p in current if p != removed)
                spent = space.costs[list(base)].sum(axis=0) if base else np.zeros(3)
                residual = space.budget - spent + BUDGET_TOLERANCE
                options = np.flatnonzero(outside & (space.costs <= residual[None, :]).all(axis=1))
                if options.size == 0:
                    continue
                uncovered = ~space.covered(base)
                gains = space.matrix_f[np.ix_(options, np.flatnonzero(uncovered))] @ space.weights[uncovered]
                F = np.asarray(space.objective(~uncovered), dtype=float)[None, :] + gains
                scores = np.where(objective.accepts_array(F), objective.score_array(F), np.inf)
                best = int(np.argmin(scores))
                if scores[best] < threshold:
                    threshold = float(scores[best])
                    move = tuple(sorted(base + (int(options[best]),)))
            if move is None:
                break
            current = move
        return current

    def _bound(self, node: _Node) -> Optional[float]:
        """Bound *node* and pick its branching facility; ``None`` marks a leaf."""
        space = self._space
        residual = space.budget - node.spent + BUDGET_TOLERANCE
        node.free &= (space.costs <= residual[None, :]).all(axis=1)
        candidates = np.flatnonzero(node.free)
        if candidates.size == 0:
            return None
        points = np.flatnonzero(space.matrix[candidates].any(axis=0) & ~node.covered)
        if points.size == 0:
            return None
        links = space.matrix_f[np.ix_(candidates, points)]
        costs = space.costs[candidates]
        values = space.values[points]

        upper = node.F + values.sum(axis=0)
        for k in self._columns:
            knapsack = min(
                _fractional_knapsack(links @ values[:, k], costs[:, q], residual[q])[0]
                for q in range(3)
            )
            upper[k] = min(upper[k], node.F[k] + knapsack)
        bound = self._bound_score(upper)
        if self._finished(bound, node.positions):
            return bound

        iterations = ROOT_ITERATIONS if node.depth == 0 else NODE_ITERATIONS
        relaxations: Dict[int, Tuple[_Relaxation, np.ndarray]] = {}
        for k in self._columns:
            relaxation = _Relaxation(links, values[:, k], costs, residual)
            inherited = node.prices.get(k)
            if inherited is None:
                start = values[:, k] / np.maximum(links.sum(axis=0), 1.0)
            else:
                start = inherited[points]
            target = 0.0
            if self._incumbent is not None:
                target = max(0.0, float(self._incumbent.F[k] - node.F[k]))

            def settled(gain: float, k: int = k) -> bool:
                trial = upper.copy()
                trial[k] = min(trial[k], node.F[k] + gain)
                return self._finished(self._bound_score(trial), node.positions)

            gain, prices = relaxation.minimize(start, target, settled, iterations)
            upper[k] = min(upper[k], node.F[k] + gain)
            relaxations[k] = (relaxation, prices)
            bound = self._bound_score(upper)
            if self._finished(bound, node.positions):
                return bound

        node.prices = dict(node.prices)
        for k, (_, prices) in relaxations.items():
            inherited = node.prices.get(k)
            full = np.zeros(space.point_ids.size) if inherited is None else inherited.copy()
            full[points] = prices
            node.prices[k] = full

        keep = np.ones(candidates.size, dtype=bool)
        priority = np.zeros(candidates.size)
        if relaxations:
            relaxation, prices = relaxations[self._columns[0]]
            priority = links @ prices
            _, taken = relaxation.evaluate(prices)
            chosen = list(node.positions)
            spent = node.spent.copy()
            for index in sorted(np.flatnonzero(taken > 0), key=lambda i: -priority[i]):
                if (spent + costs[index] <= space.budget + BUDGET_TOLERANCE).all():
                    chosen.append(int(candidates[index]))
                    spent = spent + costs[index]
            self._try(chosen)
            if self._finished(bound, node.positions):
                return bound

            forced = np.tile(upper, (candidates.size, 1))
            for k, (relaxation, prices) in relaxations.items():
                forced[:, k] = np.minimum(forced[:, k], node.F[k] + relaxation.forced(prices))
            scores = self._objective.bound_scores(forced)
            keep = np.isfinite(scores)
            incumbent = self._incumbent
            if incumbent is not None:
                keep &= scores <= incumbent.score + _tie_tolerance(incumbent.score)
            node.free[candidates[~keep]] = False
            if not keep.any():
                return None

        options = np.flatnonzero(keep)
        node.branch = int(candidates[options[int(np.argmax(priority[options]))]])
        return bound

    def run(self) -> Solution:
        space = self._space
        heap: List[Tuple[float, int, _Node]] = []
        counter = itertools.count()

        self._try(())
        if self._seed_open is not None:
            self._try(space.positions_of(self._seed_open))
        for column in dict.fromkeys(self._columns[:1] + (1,)):
            greedy = space.greedy(column)
            for length in range(1, len(greedy) + 1):
                self._try(greedy[:length])

        def push(node: _Node) -> None:
            bound = self._bound(node)
            if bound is None or self._finished(bound, node.positions):
                return
            heapq.heappush(heap, (bound, next(counter), node))

        if self._incumbent is not None:
            self._try(self._local_search(self._incumbent.positions))
        root_covered = space.covered(())
        push(
            _Node(
                positions=(),
                free=np.ones(space.size, dtype=bool),
                covered=root_covered,
                F=_with_total(space.objective(root_covered)),
                spent=np.zeros(3),
                depth=0,
                prices={},
            )
        )
        if self._incumbent is not None:
            self._try(self._local_search(self._incumbent.positions))

        while heap:
            bound, _, node = heapq.heappop(heap)
            if self._prunable(bound, node.positions):
                continue
            self.nodes += 1
            if self._node_log:
                logger.debug(
                    "node depth=%d bound=%.9g incumbent=%.9g",
                    node.depth,
                    bound,
                    self._incumbent.score if self._incumbent else math.nan,
                )
            j = node.branch
            free = node.free.copy()
            free[j] = False
            spent = node.spent + space.costs[j]
            if (spent <= space.budget + BUDGET_TOLERANCE).all():
                positions = tuple(sorted(node.positions + (j,)))
                covered = node.covered | space.matrix[j]
                F = space.objective(covered)
                self._offer(positions, F)
                push(_Node(positions, free.copy(), covered, _with_total(F), spent, node.depth + 1, node.prices))
            push(_Node(node.positions, free, node.covered, node.F, node.spent, node.depth + 1, node.prices))

        if self._incumbent is None:
            raise DomainViolation("No feasible set satisfies the search filter")
        open_ids = [space.ids[p] for p in self._incumbent.positions]
        solution = evaluate(self._problem, open_ids)
        logger.debug("Branch and bound expanded %d nodes", self.nodes)
        return solution.with_value(self._objective.value(solution.F), nodes=self.nodes)


def solve_scalar(
    problem: Problem, objective: ScalarObjective, *, node_log: bool = False
) -> Solution:
    """Return a provably optimal solution for *objective* over all budget-feasible sets.

    Ties within the scalar tolerance go to the smallest open set, then to the
    lexicographically smallest sorted facility tuple.
    """
    return BranchAndBound(problem, objective, node_log=node_log).run()


def maximize_total_above(
    problem: Problem,
    floor: ObjectiveTriple,
    *,
    seed_open: Optional[Sequence[int]] = None,
    node_log: bool = False,
) -> Solution:
    """Maximize ``F1 + F2 + F3`` over feasible sets whose triple dominates *floor*.

    *seed_open* must satisfy the filter; it becomes the first incumbent.
    """
    search = BranchAndBound(problem, _TotalAbove(floor), node_log=node_log, seed_open=seed_open)
    return search.run()


def ideal_point(problem: Problem, *, node_log: bool = False) -> ObjectiveTriple:
    """Individually maximized objective values."""
    values = [solve_scalar(problem, Single(r), node_log=node_log).F[r - 1] for r in (1, 2, 3)]
    return ObjectiveTriple(*values)


def csp1(problem: Problem, ideal: ObjectiveTriple, *, node_log: bool = False) -> Solution:
    """l1 compromise: minimize the total deviation from the ideal point."""
    return solve_scalar(problem, AugTcheby(WeightVector(0.0, 0.0, 0.0, 1.0), ideal), node_log=node_log)


def cspinf(problem: Problem, ideal: ObjectiveTriple, *, node_log: bool = False) -> Solution:
    """l-infinity compromise; the optimum may be only weakly Pareto."""
    return solve_scalar(problem, AugTcheby(WeightVector(1.0, 1.0, 1.0, 0.0), ideal), node_log=node_log)


# ----------------------------------------------------------------------
# Exhaustive oracle
# ----------------------------------------------------------------------
def enumerate_feasible(
    problem: Problem, cap: int = DEFAULT_ORACLE_CAP
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the budget-feasible subset bitmasks and their objective triples."""
    m = problem.m
    if m > cap:
        raise TooLarge("Exhaustive enumeration over {} facilities exceeds the cap of {}".format(m, cap))
    total = 1 << m
    incidence = problem.incidence.astype(float)
    budget = np.asarray(problem.budget, dtype=float)
    shifts = np.arange(m, dtype=np.int64)
    masks_parts: List[np.ndarray] = []
    values_parts: List[np.ndarray] = []
    for start in range(0, total, _ENUMERATION_CHUNK):
        masks = np.arange(start, min(total, start + _ENUMERATION_CHUNK), dtype=np.int64)
        bits = ((masks[:, None] >> shifts[None, :]) & 1).astype(float)
        spent = bits @ problem.costs
        feasible = (spent <= budget[None, :] + BUDGET_TOLERANCE).all(axis=1)
        if not feasible.any():
            continue
        bits = bits[feasible]
        covered = (bits @ incidence) > 0
        masks_parts.append(masks[feasible])
        values_parts.append(covered.astype(float) @ problem.demands)
    if not masks_parts:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 3))
    return np.concatenate(masks_parts), np.concatenate(values_parts)


def mask_to_open(mask: int, m: int) -> Tuple[int, ...]:
    return tuple(j for j in range(m) if (int(mask) >> j) & 1)


def solve_by_enumeration(
    problem: Problem, objective: ScalarObjective, cap: int = DEFAULT_ORACLE_CAP
) -> Solution:
    """Exhaustive counterpart of :func:`solve_scalar`, with the same tie-breaking."""
    masks, values = enumerate_feasible(problem, cap)
    scores = objective.score_array(values)
    best = float(scores.min())
    tied = np.flatnonzero(scores <= best + _tie_tolerance(best))
    open_sets = [mask_to_open(masks[index], problem.m) for index in tied]
    chosen = min(open_sets, key=lambda open_set: (len(open_set), open_set))
    solution = evaluate(problem, chosen)
    return solution.with_value(objective.value(solution.F), nodes=len(masks))


@dataclass(frozen=True)
class CrossEvaluation:
    """A crisp open set judged with fuzzy demands, costs and budgets."""

    open: Tuple[int, ...]
    F: ObjectiveTriple
    served: TFN
    fuzzy_feasible: bool
    crisp_feasible: bool


def cross_evaluate(
    fuzzy_problem: Problem, crisp_problem: Problem, open_set: Sequence[int]
) -> CrossEvaluation:
    """Served fuzzy demand of *open_set* under the crisp coverage sets.

    The crisp optimum is usually infeasible for the fuzzy model because the
    fuzzy coverage sets and budget rows are more restrictive.
    """
    if (fuzzy_problem.n, fuzzy_problem.m) != (crisp_problem.n, crisp_problem.m):
        raise DomainViolation("Fuzzy and crisp problems differ in size")
    crisp_solution = evaluate(crisp_problem, open_set)
    fuzzy_solution = evaluate(fuzzy_problem, open_set)
    covered = np.asarray(crisp_solution.z, dtype=bool)
    F = ObjectiveTriple(*_column_sums(fuzzy_problem.demands, covered))
    return CrossEvaluation(
        open=crisp_solution.open,
        F=F,
        served=TFN(F.f1, F.f2, F.f3),
        fuzzy_feasible=fuzzy_solution.feasible,
        crisp_feasible=crisp_solution.feasible,
    )
