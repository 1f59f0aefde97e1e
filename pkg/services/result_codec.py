"""Canonical XML documents for solutions and Pareto runs."""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple
from xml.etree import ElementTree as XMLTree

from errors import DomainViolation
from tfn import format_tfn
from utils import format_real, format_seconds

from .instance_loader import (
    InstanceFormatError,
    Source,
    _children,
    _find_child,
    _int_attr,
    _local_name,
    _normalize_key,
    _optional_real,
    _real_attr,
    _require_attr,
    _tfn_attr,
    _to_text,
    parse_document,
)
from .pareto_engine import CertificationPath, ParetoRun, TraceEntry
from .scalar_solver import ObjectiveTriple, Solution, WeightVector

__all__ = [
    "dump_pareto_run",
    "dump_solution",
    "load_pareto_run",
    "load_solution",
]


def _indices_text(values) -> str:
    return " ".join(str(value) for value in values)


def _parse_indices(node, what: str) -> Tuple[int, ...]:
    text = (node.text or "").strip() if node is not None else ""
    if not text:
        return ()
    try:
        return tuple(int(token, 10) for token in text.split())
    except ValueError as exc:
        raise InstanceFormatError("Invalid index list in <{}>".format(what)) from exc


def _set_triple(node: XMLTree.Element, values, names=("f1", "f2", "f3")) -> None:
    for name, value in zip(names, values):
        node.set(name, format_real(value))


def _read_triple(node, names=("f1", "f2", "f3")) -> Tuple[float, float, float]:
    return tuple(_real_attr(node, name) for name in names)  # type: ignore[return-value]


def _solution_element(
    solution: Solution,
    tag: str = "Solution",
    extras: Optional[Dict[str, str]] = None,
) -> XMLTree.Element:
    node = XMLTree.Element(tag)
    node.set("scalarValue", format_real(solution.scalar_value))
    node.set("feasible", "true" if solution.feasible else "false")
    node.set("nodes", str(solution.nodes))
    for key, value in (extras or {}).items():
        node.set(key, value)
    XMLTree.SubElement(node, "Open").text = _indices_text(solution.open)
    _set_triple(XMLTree.SubElement(node, "Objectives"), solution.F)
    XMLTree.SubElement(node, "Served").set("value", format_tfn(solution.served))
    _set_triple(XMLTree.SubElement(node, "Spent"), solution.spent, ("lo", "mid", "hi"))
    coverage = XMLTree.SubElement(node, "Coverage")
    coverage.set("covered", str(solution.covered_count))
    coverage.set("total", str(len(solution.z)))
    coverage.text = _indices_text(i for i, value in enumerate(solution.z) if value)
    return node


def _read_solution(node) -> Solution:
    objectives = _find_child(node, "Objectives")
    served = _find_child(node, "Served")
    spent = _find_child(node, "Spent")
    coverage = _find_child(node, "Coverage")
    if objectives is None or served is None or spent is None or coverage is None:
        raise InstanceFormatError("<Solution> requires Objectives, Served, Spent and Coverage")
    total = _int_attr(coverage, "total")
    covered = _parse_indices(coverage, "Coverage")
    if any(not 0 <= i < total for i in covered):
        raise InstanceFormatError("Covered point index outside 0..{}".format(total - 1))
    z = [0] * total
    for i in covered:
        z[i] = 1
    feasible = _require_attr(node, "feasible").strip().lower()
    if feasible not in ("true", "false"):
        raise InstanceFormatError("Attribute 'feasible' must be true or false")
    return Solution(
        open=_parse_indices(_find_child(node, "Open"), "Open"),
        z=tuple(z),
        F=ObjectiveTriple(*_read_triple(objectives)),
        scalar_value=_real_attr(node, "scalarValue"),
        served=_tfn_attr(served, "value"),
        spent=_read_triple(spent, ("lo", "mid", "hi")),
        feasible=feasible == "true",
        nodes=_int_attr(node, "nodes") if node.attrib.get("nodes") else 0,
    )


def dump_solution(
    solution: Solution, mode: str = "", wall_seconds: Optional[float] = None
) -> str:
    """Serialize one solve result; ``wallSeconds`` is the only timing attribute."""
    extras: Dict[str, str] = {}
    if mode:
        extras["mode"] = mode
    if wall_seconds is not None:
        extras["wallSeconds"] = format_seconds(wall_seconds)
    return _to_text(_solution_element(solution, extras=extras))


def load_solution(source: Source) -> Solution:
    root = parse_document(source)
    if _normalize_key(_local_name(root.tag)) != "solution":
        raise InstanceFormatError("Root element must be <Solution>, got <{}>".format(root.tag))
    return _read_solution(root)


def dump_pareto_run(run: ParetoRun) -> str:
    root = XMLTree.Element("ParetoRun")
    root.set("earlyStop", "true" if run.early_stop else "false")
    root.set("terminatedEarly", "true" if run.terminated_early else "false")
    _set_triple(XMLTree.SubElement(root, "Ideal"), run.ideal)

    weights = XMLTree.SubElement(root, "Weights")
    for weight in run.weights:
        _set_triple(XMLTree.SubElement(weights, "Weight"), (weight.l1, weight.l2, weight.l3, weight.rho),
                    ("l1", "l2", "l3", "rho"))

    trace = XMLTree.SubElement(root, "Trace")
    for entry in run.trace:
        step = XMLTree.SubElement(trace, "Step")
        _set_triple(step, (entry.weight.l1, entry.weight.l2, entry.weight.l3, entry.weight.rho),
                    ("l1", "l2", "l3", "rho"))
        step.set("solution", str(entry.solution_index))
        step.set("scalarValue", format_real(entry.scalar_value))
        step.set("reachedIdeal", "true" if entry.reached_ideal else "false")
        step.set("path", entry.path.value)
        step.set("tested", "true" if entry.tested else "false")
        if entry.delta is not None:
            _set_triple(step, entry.delta, ("d1", "d2", "d3"))

    solutions = XMLTree.SubElement(root, "Solutions")
    for index, solution in enumerate(run.solutions):
        extras = {"index": str(index), "path": run.path_of(index).value}
        if run.oracle_verified:
            extras["oracleVerified"] = "true" if run.oracle_verified[index] else "false"
        solutions.append(_solution_element(solution, extras=extras))
    return _to_text(root)


def _flag(node, name: str) -> bool:
    value = node.attrib.get(name, "false").strip().lower()
    if value not in ("true", "false"):
        raise InstanceFormatError("Attribute '{}' must be true or false".format(name))
    return value == "true"


def _read_weight(node) -> WeightVector:
    try:
        return WeightVector(*_read_triple(node, ("l1", "l2", "l3", "rho")))
    except DomainViolation as exc:
        raise InstanceFormatError(str(exc)) from exc


def load_pareto_run(source: Source) -> ParetoRun:
    root = parse_document(source)
    if _normalize_key(_local_name(root.tag)) != "paretorun":
        raise InstanceFormatError("Root element must be <ParetoRun>, got <{}>".format(root.tag))
    ideal_node = _find_child(root, "Ideal")
    if ideal_node is None:
        raise InstanceFormatError("<ParetoRun> requires an <Ideal> element")

    weights = tuple(_read_weight(node) for node in _children(_find_child(root, "Weights"), "Weight"))
    solution_nodes = _children(_find_child(root, "Solutions"), "Solution")
    solutions = tuple(_read_solution(node) for node in solution_nodes)
    verified: List[bool] = [
        _flag(node, "oracleVerified") for node in solution_nodes if "oracleVerified" in node.attrib
    ]
    if verified and len(verified) != len(solutions):
        raise InstanceFormatError("oracleVerified must be set on every solution or none")

    trace: List[TraceEntry] = []
    for node in _children(_find_child(root, "Trace"), "Step"):
        index = _int_attr(node, "solution")
        if not 0 <= index < len(solutions):
            raise InstanceFormatError("Trace step references unknown solution {}".format(index))
        try:
            path = CertificationPath(_require_attr(node, "path"))
        except ValueError as exc:
            raise InstanceFormatError("Unknown certification path {!r}".format(node.attrib["path"])) from exc
        delta = None
        if _optional_real(node, "d1") is not None:
            delta = ObjectiveTriple(*_read_triple(node, ("d1", "d2", "d3")))
        trace.append(
            TraceEntry(
                weight=_read_weight(node),
                solution_index=index,
                scalar_value=_real_attr(node, "scalarValue"),
                reached_ideal=_flag(node, "reachedIdeal"),
                path=path,
                tested=_flag(node, "tested"),
                delta=delta,
            )
        )
    return ParetoRun(
        weights=weights,
        solutions=solutions,
        trace=tuple(trace),
        ideal=ObjectiveTriple(*_read_triple(ideal_node)),
        terminated_early=_flag(root, "terminatedEarly"),
        early_stop=_flag(root, "earlyStop"),
        oracle_verified=tuple(verified),
    )
