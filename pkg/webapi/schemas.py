"""Pydantic schemas shared by the web API endpoints."""
from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, confloat, conint, model_validator

from services.instance_store import InstanceRecord
from services.pareto_engine import ParetoRun, TraceEntry
from services.scalar_solver import CrossEvaluation, Solution, WeightVector
from tfn import format_tfn

from .orchestrator import FrontierOutcome, SolveOutcome

__all__ = [
    "CrossEvaluationSchema",
    "FrontierRequest",
    "InstanceCreateRequest",
    "InstanceSummary",
    "ParetoRunResponse",
    "ParetoSolutionSchema",
    "SolutionSchema",
    "SolveRequest",
    "SolveResponse",
    "TraceEntrySchema",
    "WeightSchema",
]


class WeightSchema(BaseModel):
    l1: confloat(ge=0)
    l2: confloat(ge=0)
    l3: confloat(ge=0)
    rho: confloat(ge=0) = 0.001

    def to_weight(self) -> WeightVector:
        return WeightVector(self.l1, self.l2, self.l3, self.rho)

    @classmethod
    def from_weight(cls, weight: WeightVector) -> "WeightSchema":
        return cls(l1=weight.l1, l2=weight.l2, l3=weight.l3, rho=weight.rho)


class InstanceCreateRequest(BaseModel):
    document: Optional[str] = Field(None, description="Canonical XML instance document.")
    points: Optional[str] = Field(None, description="PlainXYW text: a count line, then 'x y w' lines.")
    name: str = ""
    radius: Optional[confloat(gt=0)] = Field(None, description="Coverage radius for co-located facilities.")
    costs: Literal["unit", "normal", "uniform"] = "unit"
    cost_range: List[confloat(ge=0)] = Field(default_factory=lambda: [100.0, 1000.0], min_length=2, max_length=2)
    budget: str = Field("card:2", description="card:p, smallest:p or value:B")
    spread: confloat(gt=0, le=1) = 0.2
    seed: conint(ge=0) = 1
    fuzzify: bool = True

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "InstanceCreateRequest":
        if (self.document is None) == (self.points is None):
            raise ValueError("Provide exactly one of 'document' or 'points'")
        return self


class InstanceSummary(BaseModel):
    id: str
    name: str
    n: int
    m: int
    fuzzy: bool
    seed: Optional[int]
    spread: Optional[float]
    budget: List[float]

    @classmethod
    def from_record(cls, record: InstanceRecord) -> "InstanceSummary":
        if record.fuzzy is not None:
            budget = list(record.fuzzy.budget.as_tuple())
            spread = record.fuzzy.spread
        else:
            budget = [record.crisp.budget] * 3
            spread = None
        return cls(
            id=record.instance_id,
            name=record.crisp.name,
            n=record.crisp.n,
            m=record.crisp.m,
            fuzzy=record.is_fuzzy,
            seed=record.seed,
            spread=spread,
            budget=budget,
        )


class SolveRequest(BaseModel):
    mode: Literal["crisp", "single", "csp1", "cspinf", "tcheby"] = "tcheby"
    r: conint(ge=1, le=3) = 2
    weights: Optional[WeightSchema] = None


class SolutionSchema(BaseModel):
    open: List[int]
    F: List[float]
    served: str
    scalar_value: float
    feasible: bool
    spent: List[float]
    covered: int
    nodes: int

    @classmethod
    def from_solution(cls, solution: Solution) -> "SolutionSchema":
        return cls(
            open=list(solution.open),
            F=list(solution.F),
            served=format_tfn(solution.served),
            scalar_value=solution.scalar_value,
            feasible=solution.feasible,
            spent=list(solution.spent),
            covered=solution.covered_count,
            nodes=solution.nodes,
        )


class CrossEvaluationSchema(BaseModel):
    served: str
    F: List[float]
    fuzzy_feasible: bool

    @classmethod
    def from_cross(cls, cross: CrossEvaluation) -> "CrossEvaluationSchema":
        return cls(served=format_tfn(cross.served), F=list(cross.F), fuzzy_feasible=cross.fuzzy_feasible)


class SolveResponse(BaseModel):
    mode: str
    solution: SolutionSchema
    wall_seconds: float
    cross: Optional[CrossEvaluationSchema] = None

    @classmethod
    def from_outcome(cls, outcome: SolveOutcome) -> "SolveResponse":
        return cls(
            mode=outcome.mode,
            solution=SolutionSchema.from_solution(outcome.solution),
            wall_seconds=round(outcome.wall_seconds, 3),
            cross=CrossEvaluationSchema.from_cross(outcome.cross) if outcome.cross else None,
        )


class FrontierRequest(BaseModel):
    weights: Optional[List[WeightSchema]] = Field(
        None, description="Weight vectors in loop order; the nine default vectors when omitted."
    )
    early_stop: bool = True
    oracle: bool = False


class TraceEntrySchema(BaseModel):
    weight: WeightSchema
    solution: int
    scalar_value: float
    reached_ideal: bool
    path: Literal["direct", "checked-delta0", "improved"]
    delta: Optional[List[float]] = None

    @classmethod
    def from_entry(cls, entry: TraceEntry) -> "TraceEntrySchema":
        return cls(
            weight=WeightSchema.from_weight(entry.weight),
            solution=entry.solution_index,
            scalar_value=entry.scalar_value,
            reached_ideal=entry.reached_ideal,
            path=entry.path.value,
            delta=list(entry.delta) if entry.delta is not None else None,
        )


class ParetoSolutionSchema(SolutionSchema):
    path: str
    oracle_verified: Optional[bool] = None


class ParetoRunResponse(BaseModel):
    ideal: List[float]
    reached_ideal: bool
    terminated_early: bool
    trace: List[TraceEntrySchema]
    solutions: List[ParetoSolutionSchema]
    wall_seconds: float

    @classmethod
    def from_outcome(cls, outcome: FrontierOutcome) -> "ParetoRunResponse":
        run: ParetoRun = outcome.run
        solutions = []
        for index, solution in enumerate(run.solutions):
            base = SolutionSchema.from_solution(solution).model_dump()
            solutions.append(
                ParetoSolutionSchema(
                    **base,
                    path=run.path_of(index).value,
                    oracle_verified=run.oracle_verified[index] if run.oracle_verified else None,
                )
            )
        return cls(
            ideal=list(run.ideal),
            reached_ideal=run.reached_ideal,
            terminated_early=run.terminated_early,
            trace=[TraceEntrySchema.from_entry(entry) for entry in run.trace],
            solutions=solutions,
            wall_seconds=round(outcome.wall_seconds, 3),
        )
