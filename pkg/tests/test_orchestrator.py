from __future__ import annotations

import pytest

from errors import DomainViolation, EmptyWeightSet, InstanceParseError
from services.instance_store import InstanceStore, UnknownInstance
from services.pareto_engine import DEFAULT_WEIGHTS
from services.scalar_solver import WeightVector, objectives_close
from webapi.orchestrator import SolveOrchestrator

POINTS = "4\n0 0 10\n1 0 20\n5 5 30\n6 5 5\n"


@pytest.fixture
def orchestrator() -> SolveOrchestrator:
    return SolveOrchestrator(InstanceStore())


def test_create_instance_stores_crisp_and_fuzzy_parts(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0, budget="card:1", seed=4)

    assert record.is_fuzzy
    assert record.seed == 4
    assert record.crisp.budget == 1.0
    assert orchestrator.store.ids() == [record.instance_id]
    assert orchestrator.get_instance(record.instance_id) is record


def test_create_instance_requires_exactly_one_source(orchestrator):
    with pytest.raises(DomainViolation):
        orchestrator.create_instance(radius=2.0)
    with pytest.raises(DomainViolation):
        orchestrator.create_instance(points=POINTS, document="<Instance />", radius=2.0)


def test_create_instance_propagates_parse_errors(orchestrator):
    with pytest.raises(InstanceParseError):
        orchestrator.create_instance(points="3\n0 0 1\n", radius=1.0)


def test_unknown_instance(orchestrator):
    with pytest.raises(UnknownInstance):
        orchestrator.solve("nope", "crisp")
    with pytest.raises(UnknownInstance):
        orchestrator.store.remove("nope")


def test_solve_modes_share_the_cached_ideal(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0, budget="card:1", seed=4)

    crisp = orchestrator.solve(record.instance_id, "crisp")
    assert crisp.solution.open == (2,)
    assert crisp.cross is not None and crisp.cross.crisp_feasible

    ideal = record.ideal()
    for mode in ("single", "csp1", "cspinf", "tcheby"):
        outcome = orchestrator.solve(record.instance_id, mode, r=1)
        assert outcome.mode == mode
        assert outcome.solution.feasible
        assert outcome.wall_seconds >= 0.0
        assert all(outcome.solution.F[r] <= ideal[r] + 1e-9 for r in range(3))
    assert record.ideal() is ideal

    single = orchestrator.solve(record.instance_id, "single", r=1)
    assert objectives_close(single.solution.F.f1, ideal.f1)


def test_solve_rejects_unknown_mode(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0)
    with pytest.raises(DomainViolation):
        orchestrator.solve(record.instance_id, "greedy")


def test_crisp_only_record_solves_without_cross_evaluation(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0, budget="card:1", fuzzify=False)
    outcome = orchestrator.solve(record.instance_id, "crisp")
    assert outcome.cross is None
    assert outcome.solution.F.f2 == 35.0


def test_frontier_uses_default_weights_and_oracle(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0, budget="card:2", seed=8)

    outcome = orchestrator.frontier(record.instance_id, early_stop=False, oracle=True)
    run = outcome.run
    assert run.weights == DEFAULT_WEIGHTS
    assert len(run.trace) == len(DEFAULT_WEIGHTS)
    assert run.oracle_verified and all(run.oracle_verified)


def test_frontier_with_parallel_workers_matches_sequential():
    store = InstanceStore()
    sequential = SolveOrchestrator(store)
    parallel = SolveOrchestrator(store, workers=3)
    record = sequential.create_instance(points=POINTS, radius=2.0, budget="card:2", seed=8)

    first = sequential.frontier(record.instance_id, early_stop=False).run
    second = parallel.frontier(record.instance_id, early_stop=False).run
    assert [s.open for s in first.solutions] == [s.open for s in second.solutions]


def test_frontier_rejects_empty_weight_list(orchestrator):
    record = orchestrator.create_instance(points=POINTS, radius=2.0)
    with pytest.raises(EmptyWeightSet):
        orchestrator.frontier(record.instance_id, weights=[])
    run = orchestrator.frontier(record.instance_id, weights=[WeightVector(1, 1, 1)]).run
    assert len(run.trace) == 1
