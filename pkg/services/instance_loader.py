"""Utilities to parse and write covering location instance documents.

Two formats are understood:

* ``plain`` (PlainXYW): line 1 holds the number of points ``n``, lines
  ``2..n+1`` hold ``x y w`` as whitespace separated decimals.
* ``canonical``: an XML document describing a crisp or fuzzy instance
  completely.  Every real is written with :func:`utils.format_real` so the
  round trip is bit exact.
"""
from __future__ import annotations

from pathlib import Path
from typing import IO, Dict, List, Optional, Union
from xml.etree import ElementTree as XMLTree

import numpy as np
from defusedxml import ElementTree as ET
from defusedxml.common import DefusedXmlException

try:  # pragma: no cover - exercised indirectly in tests
    import xmlschema
except Exception:  # pragma: no cover - protects optional dependency import errors
    xmlschema = None

from errors import DomainViolation, EmptyInstance, FuzzyCoverError, InstanceParseError
from tfn import TFN, format_tfn, parse_tfn
from utils import format_real, parse_real

from .instance_model import CrispInstance, DemandPoint, Facility, FuzzyInstance

__all__ = [
    "InstanceFormatError",
    "Source",
    "dump_instance",
    "dump_points",
    "load_instance",
    "load_points",
    "parse_document",
    "validate_document",
]

Source = Union[str, bytes, bytearray, Path, IO[str], IO[bytes]]

_ROOT_TAG = "instance"

_SCHEMA_FILENAME = "instance_schema.xsd"
_SCHEMA_PATH = Path(__file__).with_name(_SCHEMA_FILENAME)

if xmlschema is not None:
    try:
        _INSTANCE_SCHEMA = xmlschema.XMLSchema(str(_SCHEMA_PATH))
    except Exception:  # pragma: no cover - schema load errors are surfaced during validation
        _INSTANCE_SCHEMA = None
else:  # pragma: no cover - schema validation disabled when dependency missing
    _INSTANCE_SCHEMA = None


class InstanceFormatError(InstanceParseError):
    """Raised when a canonical document is malformed or fails its schema."""


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InstanceParseError("invalid UTF-8 at byte {}: {}".format(exc.start, exc.reason)) from exc


def _read_text(source: Source) -> str:
    if isinstance(source, Path):
        return _decode(source.read_bytes())
    if isinstance(source, (bytes, bytearray)):
        return _decode(bytes(source))
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return _decode(data)
    return data


# ----------------------------------------------------------------------
# Plain x y w format
# ----------------------------------------------------------------------
def load_points(source: Source, format: str = "plain") -> CrispInstance:
    """Read demand points; facilities and budget are left unset."""

    if format == "canonical":
        inst = load_instance(source)
        center = inst.center if isinstance(inst, FuzzyInstance) else inst
        return CrispInstance(points=center.points, name=center.name)
    if format != "plain":
        raise DomainViolation("Unknown point format '{}'".format(format))

    lines = _read_text(source).splitlines()
    if not lines or not lines[0].strip():
        raise InstanceParseError("missing point count", line=1)
    try:
        count = int(lines[0].split()[0])
    except ValueError as exc:
        raise InstanceParseError("invalid point count {!r}".format(lines[0].strip()), line=1) from exc
    if count < 0:
        raise InstanceParseError("negative point count", line=1)
    if count == 0:
        raise EmptyInstance("Instance declares no demand points")

    points: List[DemandPoint] = []
    for index in range(count):
        line_number = index + 2
        if line_number > len(lines):
            raise InstanceParseError(
                "expected {} points, file ends after {}".format(count, index), line=line_number
            )
        tokens = lines[line_number - 1].split()
        if len(tokens) != 3:
            raise InstanceParseError(
                "expected 'x y w', got {} fields".format(len(tokens)), line=line_number
            )
        try:
            x, y, w = (parse_real(token) for token in tokens)
        except ValueError as exc:
            raise InstanceParseError("invalid number in {!r}".format(" ".join(tokens)), line=line_number) from exc
        if w < 0:
            raise InstanceParseError("negative demand {}".format(w), line=line_number)
        points.append(DemandPoint(id=index, x=x, y=y, demand=w))
    for offset, extra in enumerate(lines[count + 1:], start=count + 2):
        if extra.strip():
            raise InstanceParseError("unexpected trailing data", line=offset)
    return CrispInstance(points=tuple(points))


def dump_points(inst: CrispInstance) -> str:
    lines = [str(inst.n)]
    for point in inst.points:
        lines.append(
            "{} {} {}".format(format_real(point.x), format_real(point.y), format_real(point.demand))
        )
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Canonical XML format
# ----------------------------------------------------------------------
def parse_document(source: Source) -> XMLTree.Element:
    """Parse and schema-check a canonical XML document, returning its root."""
    payload = _read_text(source)
    try:
        root = ET.fromstring(payload)
    except (XMLTree.ParseError, DefusedXmlException) as exc:
        raise InstanceFormatError("Malformed XML payload") from exc
    validate_document(root)
    return root


def validate_document(root) -> None:
    if _INSTANCE_SCHEMA is None:
        return

    normalized_root = _clone_without_namespace(root)
    if normalized_root is None:
        return

    try:
        _INSTANCE_SCHEMA.validate(normalized_root)
    except Exception as exc:
        raise InstanceFormatError("Document does not match the canonical schema: {}".format(exc)) from exc


def _clone_without_namespace(node) -> Optional[XMLTree.Element]:
    tag = getattr(node, "tag", None)
    if not isinstance(tag, str):
        return None

    clone = XMLTree.Element(_local_name(tag))
    for key, value in node.attrib.items():
        clone.set(_local_name(key), value)
    if node.text:
        clone.text = node.text
    if node.tail:
        clone.tail = node.tail
    for child in node:
        child_clone = _clone_without_namespace(child)
        if child_clone is not None:
            clone.append(child_clone)
    return clone


def _local_name(tag: str) -> str:
    if "}" in tag:
        return tag.rsplit("}", 1)[-1]
    return tag


def _normalize_key(value: str) -> str:
    return "".join(ch for ch in value.lower() if ch.isalnum())


def _find_child(node, *names: str):
    targets = {_normalize_key(name) for name in names}
    for child in node:
        if _normalize_key(_local_name(child.tag)) in targets:
            return child
    return None


def _children(node, name: str) -> List:
    if node is None:
        return []
    token = _normalize_key(name)
    return [child for child in node if _normalize_key(_local_name(child.tag)) == token]


def _require_attr(node, name: str) -> str:
    value = node.attrib.get(name)
    if value is None or not value.strip():
        raise InstanceFormatError(
            "Element <{}> is missing required attribute '{}'".format(_local_name(node.tag), name)
        )
    return value


def _real_attr(node, name: str) -> float:
    text = _require_attr(node, name)
    try:
        return parse_real(text)
    except ValueError as exc:
        raise InstanceFormatError("Invalid real value '{}' for '{}'".format(text, name)) from exc


def _optional_real(node, name: str) -> Optional[float]:
    if node.attrib.get(name) is None:
        return None
    return _real_attr(node, name)


def _int_attr(node, name: str) -> int:
    text = _require_attr(node, name)
    try:
        return int(text, 10)
    except ValueError as exc:
        raise InstanceFormatError("Invalid integer value '{}' for '{}'".format(text, name)) from exc


def _tfn_attr(node, name: str) -> TFN:
    text = _require_attr(node, name)
    try:
        return parse_tfn(text)
    except ValueError as exc:
        raise InstanceFormatError("Invalid TFN '{}' for '{}'".format(text, name)) from exc


def load_instance(source: Source) -> Union[CrispInstance, FuzzyInstance]:
    """Parse a canonical instance document."""

    root = parse_document(source)
    root_tag = _normalize_key(_local_name(root.tag))
    if root_tag != _ROOT_TAG:
        raise InstanceFormatError("Root element must be <Instance>, got <{}>".format(root.tag))

    kind = root.attrib.get("kind", "crisp").strip().lower()
    points_node = _find_child(root, "Points")
    facilities_node = _find_child(root, "Facilities")

    points = [
        DemandPoint(
            id=_int_attr(node, "id"),
            x=_real_attr(node, "x"),
            y=_real_attr(node, "y"),
            demand=_real_attr(node, "demand"),
        )
        for node in _children(points_node, "Point")
    ]
    if not points:
        raise EmptyInstance("Instance declares no demand points")
    facility_nodes = _children(facilities_node, "Facility")
    facilities = [
        Facility(
            id=_int_attr(node, "id"),
            x=_real_attr(node, "x"),
            y=_real_attr(node, "y"),
            radius=_real_attr(node, "radius"),
            cost=_real_attr(node, "cost"),
        )
        for node in facility_nodes
    ]
    try:
        center = CrispInstance(
            points=tuple(points),
            facilities=tuple(facilities),
            budget=_optional_real(root, "budget"),
            name=root.attrib.get("name", ""),
            radius=_optional_real(root, "radius"),
            cost_mode=root.attrib.get("costMode", ""),
            budget_mode=root.attrib.get("budgetMode", ""),
        )
    except FuzzyCoverError as exc:
        raise InstanceFormatError(str(exc)) from exc

    if kind == "crisp":
        return center
    if kind != "fuzzy":
        raise InstanceFormatError("Unsupported instance kind '{}'".format(kind))
    return _load_fuzzy_parts(root, center, points_node, facility_nodes)


def _load_fuzzy_parts(root, center: CrispInstance, points_node, facility_nodes) -> FuzzyInstance:
    n, m = center.n, center.m
    demands = np.array(
        [_tfn_attr(node, "fuzzyDemand").as_tuple() for node in _children(points_node, "Point")],
        dtype=float,
    ).reshape(n, 3)
    radii = np.array(
        [_tfn_attr(node, "fuzzyRadius").as_tuple() for node in facility_nodes], dtype=float
    ).reshape(m, 3)
    costs = np.array(
        [_tfn_attr(node, "fuzzyCost").as_tuple() for node in facility_nodes], dtype=float
    ).reshape(m, 3)
    budget_node = _find_child(root, "FuzzyBudget")
    if budget_node is None:
        raise InstanceFormatError("Fuzzy instance is missing <FuzzyBudget>")
    budget = _tfn_attr(budget_node, "value")

    rows: Dict[int, List[TFN]] = {}
    for row in _children(_find_child(root, "Distances"), "Row"):
        index = _int_attr(row, "point")
        text = (row.text or "").strip()
        try:
            rows[index] = [parse_tfn(chunk) for chunk in text.split(";")] if text else []
        except ValueError as exc:
            raise InstanceFormatError("Invalid distance row for point {}".format(index)) from exc
    fuzzy_distances = np.zeros((n, m, 3), dtype=float)
    for i in range(n):
        row_values = rows.get(i)
        if row_values is None or len(row_values) != m:
            raise InstanceFormatError("Distance row for point {} must hold {} TFNs".format(i, m))
        for j, value in enumerate(row_values):
            fuzzy_distances[i, j] = value.as_tuple()

    try:
        return FuzzyInstance(
            center=center,
            demands=demands,
            distances=fuzzy_distances,
            radii=radii,
            costs=costs,
            budget=budget,
            seed=_int_attr(root, "seed"),
            spread=_real_attr(root, "spread"),
        )
    except FuzzyCoverError as exc:
        raise InstanceFormatError(str(exc)) from exc


def _set_optional(element: XMLTree.Element, name: str, value: Optional[object]) -> None:
    if value is None or value == "":
        return
    element.set(name, format_real(value) if isinstance(value, float) else str(value))


def dump_instance(inst: Union[CrispInstance, FuzzyInstance]) -> str:
    """Serialize *inst* to the canonical XML text."""

    fuzzy = inst if isinstance(inst, FuzzyInstance) else None
    center = fuzzy.center if fuzzy is not None else inst
    root = XMLTree.Element("Instance")
    root.set("kind", "fuzzy" if fuzzy is not None else "crisp")
    _set_optional(root, "name", center.name)
    _set_optional(root, "radius", center.radius)
    _set_optional(root, "costMode", center.cost_mode)
    _set_optional(root, "budgetMode", center.budget_mode)
    _set_optional(root, "budget", center.budget)
    if fuzzy is not None:
        root.set("seed", str(fuzzy.seed))
        root.set("spread", format_real(fuzzy.spread))

    points_node = XMLTree.SubElement(root, "Points")
    for index, point in enumerate(center.points):
        node = XMLTree.SubElement(points_node, "Point")
        node.set("id", str(point.id))
        node.set("x", format_real(point.x))
        node.set("y", format_real(point.y))
        node.set("demand", format_real(point.demand))
        if fuzzy is not None:
            node.set("fuzzyDemand", format_tfn(fuzzy.demand(index)))

    if center.facilities:
        facilities_node = XMLTree.SubElement(root, "Facilities")
        for index, facility in enumerate(center.facilities):
            node = XMLTree.SubElement(facilities_node, "Facility")
            node.set("id", str(facility.id))
            node.set("x", format_real(facility.x))
            node.set("y", format_real(facility.y))
            node.set("radius", format_real(facility.radius))
            node.set("cost", format_real(facility.cost))
            if fuzzy is not None:
                node.set("fuzzyRadius", format_tfn(fuzzy.radius(index)))
                node.set("fuzzyCost", format_tfn(fuzzy.cost(index)))

    if fuzzy is not None:
        budget_node = XMLTree.SubElement(root, "FuzzyBudget")
        budget_node.set("value", format_tfn(fuzzy.budget))
        distances_node = XMLTree.SubElement(root, "Distances")
        for i in range(center.n):
            row = XMLTree.SubElement(distances_node, "Row")
            row.set("point", str(i))
            row.text = ";".join(format_tfn(fuzzy.distance(i, j)) for j in range(center.m))

    return _to_text(root)


def _to_text(root: XMLTree.Element) -> str:
    XMLTree.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + XMLTree.tostring(root, encoding="unicode") + "\n"
