"""Crisp and fuzzy covering location instances.

This module owns the instance data model: demand points, co-located candidate
facilities, set-up costs and budgets for the two experiment classes
(cardinality and general budgets), the fuzzification of every parameter into
triangular fuzzy numbers, and the crisp / fuzzy coverage sets.

Random draws go through :class:`numpy.random.Generator` backed by the PCG64
bit generator seeded with the user supplied seed.  PCG64 is fully specified
and produces the same stream on every platform, so a seed stored in an
instance file is enough to regenerate it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import FrozenSet, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DomainViolation, ModeMismatch
from tfn import TFN
from utils import format_real

logger = logging.getLogger(__name__)

__all__ = [
    "CardinalityBudget",
    "CostSpec",
    "CoverageMap",
    "CrispInstance",
    "DemandPoint",
    "ExplicitBudget",
    "ExplicitCosts",
    "Facility",
    "FuzzyInstance",
    "BudgetSpec",
    "NormalCosts",
    "SumSmallestBudget",
    "UniformCosts",
    "UnitCosts",
    "coverage_crisp",
    "coverage_fuzzy",
    "crisp_points",
    "distances",
    "fuzzify",
    "make_facilities",
    "make_generator",
    "set_budget",
]


def make_generator(seed: int) -> np.random.Generator:
    """Return the portable PCG64 generator used for every random draw."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class DemandPoint:
    id: int
    x: float
    y: float
    demand: float


@dataclass(frozen=True)
class Facility:
    id: int
    x: float
    y: float
    radius: float
    cost: float


# ----------------------------------------------------------------------
# Cost and budget specifications
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class UnitCosts:
    """Every set-up cost fixed to one (cardinality experiments)."""

    @property
    def label(self) -> str:
        return "unit"


@dataclass(frozen=True)
class NormalCosts:
    """Costs drawn from N(mean, sd), truncated below at zero."""

    seed: int = 0
    mean: float = 100.0
    sd: float = 10.0

    @property
    def label(self) -> str:
        return "normal:{}:{}:{}".format(format_real(self.mean), format_real(self.sd), self.seed)


@dataclass(frozen=True)
class UniformCosts:
    """Costs drawn from U[low, high]."""

    seed: int = 0
    low: float = 100.0
    high: float = 1000.0

    @property
    def label(self) -> str:
        return "uniform:{}:{}:{}".format(format_real(self.low), format_real(self.high), self.seed)


@dataclass(frozen=True)
class ExplicitCosts:
    values: Tuple[float, ...]

    @property
    def label(self) -> str:
        return "explicit"


CostSpec = Union[UnitCosts, NormalCosts, UniformCosts, ExplicitCosts]


@dataclass(frozen=True)
class CardinalityBudget:
    p: int

    @property
    def label(self) -> str:
        return "card:{}".format(self.p)


@dataclass(frozen=True)
class SumSmallestBudget:
    p: int

    @property
    def label(self) -> str:
        return "smallest:{}".format(self.p)


@dataclass(frozen=True)
class ExplicitBudget:
    value: float

    @property
    def label(self) -> str:
        return "value:{}".format(format_real(self.value))


BudgetSpec = Union[CardinalityBudget, SumSmallestBudget, ExplicitBudget]


# ----------------------------------------------------------------------
# Instances
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CrispInstance:
    """Demand points, candidate facilities and a set-up budget."""

    points: Tuple[DemandPoint, ...]
    facilities: Tuple[Facility, ...] = ()
    budget: Optional[float] = None
    name: str = ""
    radius: Optional[float] = None
    cost_mode: str = ""
    budget_mode: str = ""

    def __post_init__(self) -> None:
        point_ids = [p.id for p in self.points]
        if len(set(point_ids)) != len(point_ids):
            raise DomainViolation("Demand point ids must be unique")
        facility_ids = [f.id for f in self.facilities]
        if len(set(facility_ids)) != len(facility_ids):
            raise DomainViolation("Facility ids must be unique")
        for point in self.points:
            if point.demand < 0:
                raise DomainViolation("Point {} has negative demand {}".format(point.id, point.demand))
        for facility in self.facilities:
            if facility.radius <= 0:
                raise DomainViolation(
                    "Facility {} has non-positive radius {}".format(facility.id, facility.radius)
                )
            if facility.cost < 0:
                raise DomainViolation("Facility {} has negative cost {}".format(facility.id, facility.cost))
        if self.budget is not None and self.budget < 0:
            raise DomainViolation("Budget must be nonnegative, got {}".format(self.budget))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.facilities)

    def demands(self) -> np.ndarray:
        return np.array([p.demand for p in self.points], dtype=float)

    def costs(self) -> np.ndarray:
        return np.array([f.cost for f in self.facilities], dtype=float)

    def radii(self) -> np.ndarray:
        return np.array([f.radius for f in self.facilities], dtype=float)

    def total_demand(self) -> float:
        return math.fsum(p.demand for p in self.points)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FuzzyInstance:
    """Fuzzified instance; every TFN is stored as a ``(lo, mid, hi)`` row.

    ``demands`` has shape ``(n, 3)``, ``distances`` ``(n, m, 3)``, ``radii``
    and ``costs`` ``(m, 3)``.  The mid column always equals the crisp value of
    :attr:`center`.
    """

    center: CrispInstance
    demands: np.ndarray
    distances: np.ndarray
    radii: np.ndarray
    costs: np.ndarray
    budget: TFN
    seed: int
    spread: float

    def __post_init__(self) -> None:
        n, m = self.center.n, self.center.m
        object.__setattr__(self, "demands", _frozen(self.demands))
        object.__setattr__(self, "distances", _frozen(self.distances))
        object.__setattr__(self, "radii", _frozen(self.radii))
        object.__setattr__(self, "costs", _frozen(self.costs))
        expected = {
            "demands": (n, 3),
            "distances": (n, m, 3),
            "radii": (m, 3),
            "costs": (m, 3),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise DomainViolation("{} has shape {}, expected {}".format(name, actual, shape))
        for name in expected:
            triples = getattr(self, name).reshape(-1, 3)
            if triples.size and (triples[:, 0] < 0).any():
                raise DomainViolation("Fuzzy {} must be nonnegative".format(name))
            if triples.size and ((triples[:, 0] > triples[:, 1]) | (triples[:, 1] > triples[:, 2])).any():
                raise DomainViolation("Fuzzy {} contain misordered triplets".format(name))
        if self.budget.lo < 0:
            raise DomainViolation("Fuzzy budget must be nonnegative")
        centers = {
            "demands": self.center.demands(),
            "distances": distances(self.center),
            "radii": self.center.radii(),
            "costs": self.center.costs(),
        }
        for name, crisp_values in centers.items():
            if not np.array_equal(getattr(self, name)[..., 1], crisp_values):
                raise DomainViolation("Fuzzy {} do not match the crisp center".format(name))
        if self.center.budget is None or self.budget.mid != self.center.budget:
            raise DomainViolation("Fuzzy budget does not match the crisp center")

    @property
    def n(self) -> int:
        return self.center.n

    @property
    def m(self) -> int:
        return self.center.m

    def demand(self, i: int) -> TFN:
        return TFN(*self.demands[i])

    def distance(self, i: int, j: int) -> TFN:
        return TFN(*self.distances[i, j])

    def radius(self, j: int) -> TFN:
        return TFN(*self.radii[j])

    def cost(self, j: int) -> TFN:
        return TFN(*self.costs[j])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FuzzyInstance):
            return NotImplemented
        return (
            self.center == other.center
            and self.budget == other.budget
            and self.seed == other.seed
            and self.spread == other.spread
            and np.array_equal(self.demands, other.demands)
            and np.array_equal(self.distances, other.distances)
            and np.array_equal(self.radii, other.radii)
            and np.array_equal(self.costs, other.costs)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class CoverageMap:
    """Per demand point, the set of facility indices covering it."""

    sets: Tuple[FrozenSet[int], ...]
    facility_count: int = field(default=0)

    def __post_init__(self) -> None:
        for i, covering in enumerate(self.sets):
            for j in covering:
                if not 0 <= j < self.facility_count:
                    raise DomainViolation(
                        "Coverage of point {} references unknown facility {}".format(i, j)
                    )

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, i: int) -> FrozenSet[int]:
        return self.sets[i]

    def __iter__(self) -> Iterator[FrozenSet[int]]:
        return iter(self.sets)

    @classmethod
    def from_matrix(cls, covered: np.ndarray) -> "CoverageMap":
        """Build from an ``(n, m)`` boolean matrix, entry ``[i, j]`` true when j covers i."""
        covered = np.asarray(covered, dtype=bool)
        n, m = covered.shape
        sets = tuple(frozenset(int(j) for j in np.flatnonzero(covered[i])) for i in range(n))
        return cls(sets=sets, facility_count=m)

    def as_matrix(self) -> np.ndarray:
        """Return the ``(m, n)`` facility-by-point incidence matrix."""
        matrix = np.zeros((self.facility_count, len(self.sets)), dtype=bool)
        for i, covering in enumerate(self.sets):
            for j in covering:
                matrix[j, i] = True
        return matrix

    def is_subset_of(self, other: "CoverageMap") -> bool:
        return len(self.sets) == len(other.sets) and all(
            mine <= theirs for mine, theirs in zip(self.sets, other.sets)
        )


# ----------------------------------------------------------------------
# Construction helpers
# ----------------------------------------------------------------------
def make_facilities(
    inst: CrispInstance,
    radius: float,
    costs: CostSpec,
    mode: str = "colocated",
) -> CrispInstance:
    """Open one candidate facility at every demand point."""
    if mode != "colocated":
        raise DomainViolation("Unsupported facility mode '{}'".format(mode))
    if not radius > 0:
        raise DomainViolation("Coverage radius must be positive, got {}".format(radius))
    n = inst.n
    values = _draw_costs(costs, n)
    facilities = tuple(
        Facility(id=index, x=point.x, y=point.y, radius=float(radius), cost=float(values[index]))
        for index, point in enumerate(inst.points)
    )
    logger.debug("Created %d co-located facilities with %s costs", n, costs.label)
    return replace(
        inst,
        facilities=facilities,
        budget=None,
        radius=float(radius),
        cost_mode=costs.label,
        budget_mode="",
    )


def _draw_costs(costs: CostSpec, count: int) -> np.ndarray:
    if isinstance(costs, UnitCosts):
        return np.ones(count)
    if isinstance(costs, NormalCosts):
        if costs.sd < 0:
            raise DomainViolation("Standard deviation must be nonnegative")
        draws = make_generator(costs.seed).normal(costs.mean, costs.sd, size=count)
        return np.maximum(draws, 0.0)
    if isinstance(costs, UniformCosts):
        if not 0 <= costs.low <= costs.high:
            raise DomainViolation("Uniform cost range must satisfy 0 <= low <= high")
        return make_generator(costs.seed).uniform(costs.low, costs.high, size=count)
    if isinstance(costs, ExplicitCosts):
        values = np.asarray(costs.values, dtype=float)
        if values.shape != (count,):
            raise DomainViolation(
                "Expected {} explicit costs, got {}".format(count, len(costs.values))
            )
        if (values < 0).any():
            raise DomainViolation("Explicit costs must be nonnegative")
        return values
    raise DomainViolation("Unknown cost specification {!r}".format(costs))


def set_budget(inst: CrispInstance, mode: BudgetSpec) -> CrispInstance:
    """Fix the set-up budget according to *mode*."""
    costs = inst.costs()
    if isinstance(mode, (CardinalityBudget, SumSmallestBudget)):
        if not 1 <= mode.p <= inst.m:
            raise DomainViolation(
                "Budget parameter p={} outside [1, {}]".format(mode.p, inst.m)
            )
    if isinstance(mode, CardinalityBudget):
        if not (costs == 1.0).all():
            raise ModeMismatch("Cardinality budgets require unit set-up costs")
        budget = float(mode.p)
    elif isinstance(mode, SumSmallestBudget):
        budget = math.fsum(sorted(costs.tolist())[: mode.p])
    elif isinstance(mode, ExplicitBudget):
        if mode.value < 0:
            raise DomainViolation("Budget must be nonnegative, got {}".format(mode.value))
        budget = float(mode.value)
    else:
        raise DomainViolation("Unknown budget mode {!r}".format(mode))
    return replace(inst, budget=budget, budget_mode=mode.label)


def distances(inst: CrispInstance) -> np.ndarray:
    """Euclidean point-to-facility distance matrix of shape ``(n, m)``."""
    px = np.array([p.x for p in inst.points], dtype=float)
    py = np.array([p.y for p in inst.points], dtype=float)
    fx = np.array([f.x for f in inst.facilities], dtype=float)
    fy = np.array([f.y for f in inst.facilities], dtype=float)
    return np.hypot(px[:, None] - fx[None, :], py[:, None] - fy[None, :])


def _fuzzify_values(rng: np.random.Generator, values: np.ndarray, spread: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    low_bound = (1.0 - spread) * values
    high_bound = (1.0 + spread) * values
    lo = rng.uniform(low_bound, values)
    hi = rng.uniform(values, high_bound)
    lo = np.clip(lo, low_bound, values)
    hi = np.clip(hi, values, high_bound)
    return np.stack([lo, values, hi], axis=-1)


def fuzzify(inst: CrispInstance, spread: float, seed: int) -> FuzzyInstance:
    """Turn every crisp parameter ``a`` into ``(U[(1-s)a, a], a, U[a, (1+s)a])``.

    Draw order is fixed: demands, distances (row-major), radii, costs, budget.
    """
    if not 0.0 < spread <= 1.0:
        raise DomainViolation("Spread must lie in (0, 1], got {}".format(spread))
    if inst.budget is None:
        raise DomainViolation("Instance budget must be set before fuzzification")
    if inst.m == 0:
        raise DomainViolation("Instance has no candidate facilities")
    rng = make_generator(seed)
    demands = _fuzzify_values(rng, inst.demands(), spread)
    fuzzy_distances = _fuzzify_values(rng, distances(inst), spread)
    radii = _fuzzify_values(rng, inst.radii(), spread)
    costs = _fuzzify_values(rng, inst.costs(), spread)
    budget_row = _fuzzify_values(rng, np.array([inst.budget]), spread)[0]
    logger.debug("Fuzzified instance %r with spread %s and seed %s", inst.name, spread, seed)
    return FuzzyInstance(
        center=inst,
        demands=demands,
        distances=fuzzy_distances,
        radii=radii,
        costs=costs,
        budget=TFN(*budget_row),
        seed=int(seed),
        spread=float(spread),
    )


def coverage_crisp(inst: CrispInstance) -> CoverageMap:
    """``J_i = {j : d_ij <= R_j}``."""
    covered = distances(inst) <= inst.radii()[None, :]
    return CoverageMap.from_matrix(covered)


def coverage_fuzzy(finst: FuzzyInstance) -> CoverageMap:
    """Facilities whose radius triplet dominates the distance triplet componentwise."""
    d = finst.distances
    r = finst.radii
    covered = (
        (d[:, :, 0] <= r[None, :, 0])
        & (d[:, :, 1] <= r[None, :, 1])
        & (d[:, :, 2] <= r[None, :, 2])
    )
    return CoverageMap.from_matrix(covered)


def crisp_points(points: Sequence[Tuple[float, float, float]]) -> CrispInstance:
    """Build a points-only instance from ``(x, y, w)`` triples."""
    return CrispInstance(
        points=tuple(
            DemandPoint(id=index, x=float(x), y=float(y), demand=float(w))
            for index, (x, y, w) in enumerate(points)
        )
    )
