"""FastAPI routes for instance upload, scalar solves and Pareto runs."""
from __future__ import annotations

from fastapi import APIRouter, Depends, HTTPException, Request, status

from errors import FuzzyCoverError, TooLarge
from services.instance_store import UnknownInstance

from .dependencies import get_orchestrator, require_token
from .orchestrator import SolveOrchestrator
from .schemas import (
    FrontierRequest,
    InstanceCreateRequest,
    InstanceSummary,
    ParetoRunResponse,
    SolveRequest,
    SolveResponse,
)

api_router = APIRouter()

instances_router = APIRouter(
    prefix="/instances", tags=["instances"], dependencies=[Depends(require_token)]
)


def _domain_error(request: Request, exc: FuzzyCoverError) -> HTTPException:
    request.state.solver_error = exc
    if isinstance(exc, UnknownInstance):
        return HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(exc))
    if isinstance(exc, TooLarge):
        return HTTPException(status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail=str(exc))
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))


@instances_router.post("", response_model=InstanceSummary, status_code=status.HTTP_201_CREATED)
def create_instance(
    payload: InstanceCreateRequest,
    request: Request,
    orchestrator: SolveOrchestrator = Depends(get_orchestrator),
) -> InstanceSummary:
    try:
        record = orchestrator.create_instance(
            document=payload.document,
            points=payload.points,
            radius=payload.radius,
            costs=payload.costs,
            cost_range=(payload.cost_range[0], payload.cost_range[1]),
            budget=payload.budget,
            spread=payload.spread,
            seed=payload.seed,
            fuzzify=payload.fuzzify,
            name=payload.name,
        )
    except FuzzyCoverError as exc:
        raise _domain_error(request, exc) from exc
    return InstanceSummary.from_record(record)


@instances_router.get("/{instance_id}", response_model=InstanceSummary)
def get_instance(
    instance_id: str,
    request: Request,
    orchestrator: SolveOrchestrator = Depends(get_orchestrator),
) -> InstanceSummary:
    try:
        record = orchestrator.get_instance(instance_id)
    except FuzzyCoverError as exc:
        raise _domain_error(request, exc) from exc
    return InstanceSummary.from_record(record)


@instances_router.post("/{instance_id}/solve", response_model=SolveResponse)
def solve_instance(
    instance_id: str,
    payload: SolveRequest,
    request: Request,
    orchestrator: SolveOrchestrator = Depends(get_orchestrator),
) -> SolveResponse:
    try:
        outcome = orchestrator.solve(
            instance_id,
            payload.mode,
            r=payload.r,
            weight=payload.weights.to_weight() if payload.weights else None,
        )
    except FuzzyCoverError as exc:
        raise _domain_error(request, exc) from exc
    request.state.solver_stats = {
        "mode": outcome.mode,
        "nodes": outcome.solution.nodes,
        "wall_seconds": outcome.wall_seconds,
    }
    return SolveResponse.from_outcome(outcome)


@instances_router.post("/{instance_id}/frontier", response_model=ParetoRunResponse)
def run_frontier(
    instance_id: str,
    request: Request,
    payload: FrontierRequest = FrontierRequest(),
    orchestrator: SolveOrchestrator = Depends(get_orchestrator),
) -> ParetoRunResponse:
    try:
        outcome = orchestrator.frontier(
            instance_id,
            weights=[weight.to_weight() for weight in payload.weights] if payload.weights is not None else None,
            early_stop=payload.early_stop,
            oracle=payload.oracle,
        )
    except FuzzyCoverError as exc:
        raise _domain_error(request, exc) from exc
    request.state.solver_stats = {
        "mode": "frontier",
        "solutions": len(outcome.run.solutions),
        "wall_seconds": outcome.wall_seconds,
    }
    return ParetoRunResponse.from_outcome(outcome)


api_router.include_router(instances_router)
