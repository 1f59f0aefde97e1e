from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

import sys

sys.path.append(str(Path(__file__).resolve().parent.parent))

import numpy as np
import pytest

from services.instance_model import (
    CardinalityBudget,
    CoverageMap,
    CrispInstance,
    DemandPoint,
    ExplicitBudget,
    Facility,
    FuzzyInstance,
    UnitCosts,
    crisp_points,
    fuzzify,
    make_facilities,
    make_generator,
    set_budget,
)
from services.scalar_solver import Problem, problem_from_fuzzy


def coverage_from_lists(lists, facility_count: int) -> CoverageMap:
    return CoverageMap(sets=tuple(frozenset(covering) for covering in lists), facility_count=facility_count)


@pytest.fixture
def toy_problem() -> Problem:
    """Three points, three unit-cost facilities and a budget of one."""

    return Problem(
        coverage=coverage_from_lists([{0}, {0}, {1}], 3),
        demands=np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 1.0, 1.0]]),
        costs=np.ones((3, 3)),
        budget=(1.0, 1.0, 1.0),
    )


@pytest.fixture
def weak_pareto_problem() -> Problem:
    """Each facility covers one point; the l-infinity optimum ties {0} with {1}."""

    return Problem(
        coverage=coverage_from_lists([{0}, {1}, {2}], 3),
        demands=np.array([[1.0, 5.0, 9.0], [2.0, 5.0, 9.0], [0.0, 0.0, 12.0]]),
        costs=np.ones((3, 3)),
        budget=(1.0, 1.0, 1.0),
    )


def random_crisp(
    seed: int,
    n: int,
    m: Optional[int] = None,
    *,
    radius: float = 30.0,
    budget_share: float = 0.35,
) -> CrispInstance:
    """Random plane instance with *m* facilities at random points and random costs."""

    rng = make_generator(seed)
    xy = rng.uniform(0.0, 100.0, size=(n, 2))
    demand = rng.integers(1, 100, size=n)
    points = tuple(
        DemandPoint(id=i, x=float(xy[i, 0]), y=float(xy[i, 1]), demand=float(demand[i])) for i in range(n)
    )
    m = n if m is None else m
    sites = rng.choice(n, size=m, replace=False)
    costs = rng.uniform(1.0, 10.0, size=m)
    facilities = tuple(
        Facility(id=j, x=points[site].x, y=points[site].y, radius=radius, cost=float(costs[j]))
        for j, site in enumerate(sites)
    )
    inst = CrispInstance(points=points, facilities=facilities, name="random-{}".format(seed))
    return set_budget(inst, ExplicitBudget(budget_share * float(costs.sum())))


@pytest.fixture
def random_fuzzy() -> Callable[..., FuzzyInstance]:
    def factory(seed: int, n: int = 12, m: int = 8, spread: float = 0.2, **kwargs) -> FuzzyInstance:
        return fuzzify(random_crisp(seed, n, m, **kwargs), spread, seed)

    return factory


@pytest.fixture
def random_problem(random_fuzzy) -> Callable[..., Problem]:
    def factory(seed: int, n: int = 12, m: int = 8, **kwargs) -> Problem:
        return problem_from_fuzzy(random_fuzzy(seed, n, m, **kwargs))

    return factory


@pytest.fixture
def grid30() -> CrispInstance:
    """Thirty points on a jittered grid with unit costs and a cardinality budget of 3."""

    rng = make_generator(2024)
    triples = []
    for row in range(5):
        for column in range(6):
            x = 10.0 * column + float(rng.uniform(-2.0, 2.0))
            y = 10.0 * row + float(rng.uniform(-2.0, 2.0))
            triples.append((x, y, float(rng.integers(10, 100))))
    inst = make_facilities(crisp_points(triples), 12.0, UnitCosts())
    return set_budget(inst, CardinalityBudget(3))


@pytest.fixture
def points_file(tmp_path) -> Path:
    path = tmp_path / "tiny.txt"
    path.write_text("4\n0 0 10\n1 0 20\n5 5 30\n6 5 5\n", encoding="utf-8")
    return path
