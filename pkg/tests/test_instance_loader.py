from __future__ import annotations

import io

import numpy as np
import pytest

from errors import EmptyInstance, InstanceParseError
from services.instance_loader import (
    InstanceFormatError,
    dump_instance,
    dump_points,
    load_instance,
    load_points,
)
from services.instance_model import CrispInstance, FuzzyInstance, fuzzify
from tfn import TFN, format_tfn

from conftest import random_crisp


CRISP_DOCUMENT = """
<Instance kind="crisp" name="two-points" radius="0.5" budget="1.0" costMode="unit" budgetMode="card:1">
  <Points>
    <Point id="0" x="0" y="0" demand="10" />
    <Point id="1" x="0.25" y="0" demand="20.5" />
  </Points>
  <Facilities>
    <Facility id="0" x="0" y="0" radius="0.5" cost="1" />
    <Facility id="1" x="0.25" y="0" radius="0.5" cost="1" />
  </Facilities>
</Instance>
""".strip()


def test_load_points_reads_plain_format():
    inst = load_points("2\n0 0 10\n3 4 20\n")
    assert inst.n == 2
    assert [p.demand for p in inst.points] == [10.0, 20.0]
    assert [p.id for p in inst.points] == [0, 1]
    assert inst.facilities == () and inst.budget is None


def test_load_points_accepts_streams_and_paths(points_file):
    from_path = load_points(points_file)
    from_stream = load_points(io.BytesIO(points_file.read_bytes()))
    assert from_path == from_stream
    assert from_path.n == 4


def test_load_points_rejects_empty_instance():
    with pytest.raises(EmptyInstance):
        load_points("0\n")


@pytest.mark.parametrize(
    "payload, line",
    [
        ("1\n0 0 ten\n", 2),
        ("", 1),
        ("two\n", 1),
        ("2\n0 0 1\n", 3),
        ("1\n0 0\n", 2),
        ("1\n0 0 -4\n", 2),
        ("1\n0 0 1\n5 5 5\n", 3),
    ],
)
def test_load_points_reports_line_numbers(payload, line):
    with pytest.raises(InstanceParseError) as excinfo:
        load_points(payload)
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith("line {}:".format(line))


def test_points_round_trip_is_exact():
    inst = random_crisp(3, 20, 5)
    points_only = CrispInstance(points=inst.points)
    assert load_points(dump_points(points_only)) == points_only


def test_load_instance_reads_crisp_document():
    inst = load_instance(CRISP_DOCUMENT)
    assert isinstance(inst, CrispInstance)
    assert inst.name == "two-points"
    assert inst.budget == 1.0
    assert inst.m == 2
    assert inst.points[1].demand == 20.5
    assert inst.budget_mode == "card:1"


def test_crisp_document_round_trip():
    inst = random_crisp(8, 12, 6)
    assert load_instance(dump_instance(inst)) == inst


def test_fuzzy_document_round_trip_is_bit_exact():
    fuzzy = fuzzify(random_crisp(8, 12, 6), 0.2, seed=8)
    loaded = load_instance(dump_instance(fuzzy))

    assert isinstance(loaded, FuzzyInstance)
    assert loaded == fuzzy
    assert loaded.seed == 8 and loaded.spread == 0.2
    assert np.array_equal(loaded.distances, fuzzy.distances)


def test_load_points_from_canonical_document_drops_facilities():
    inst = load_points(CRISP_DOCUMENT, format="canonical")
    assert inst.n == 2
    assert inst.facilities == ()


def test_load_instance_rejects_malformed_xml():
    with pytest.raises(InstanceFormatError):
        load_instance("<Instance kind='crisp'><Points>")


def test_load_instance_rejects_unknown_root():
    with pytest.raises(InstanceFormatError):
        load_instance('<Scenario kind="crisp"><Points /></Scenario>')


def test_load_instance_rejects_schema_violations():
    with pytest.raises(InstanceFormatError):
        load_instance('<Instance kind="crisp"><Points><Point id="0" x="0" y="0" /></Points></Instance>')


def test_load_instance_rejects_empty_point_list():
    with pytest.raises(EmptyInstance):
        load_instance('<Instance kind="crisp"><Points /></Instance>')


def test_load_instance_rejects_fuzzy_document_with_wrong_mid():
    fuzzy = fuzzify(random_crisp(2, 6, 3), 0.2, seed=2)
    text = dump_instance(fuzzy)
    first = fuzzy.demand(0)
    shifted = TFN(first.lo, first.mid + 1.0, first.hi + 1.0)
    tampered = text.replace(
        'fuzzyDemand="{}"'.format(format_tfn(first)), 'fuzzyDemand="{}"'.format(format_tfn(shifted)), 1
    )
    assert tampered != text
    with pytest.raises(InstanceFormatError):
        load_instance(tampered)


def test_load_instance_rejects_missing_fuzzy_budget():
    fuzzy = fuzzify(random_crisp(2, 6, 3), 0.2, seed=2)
    text = dump_instance(fuzzy)
    start = text.index("<FuzzyBudget")
    end = text.index("/>", start) + 2
    with pytest.raises(InstanceFormatError):
        load_instance(text[:start] + text[end:])


def test_entity_expansion_is_refused():
    payload = (
        '<?xml version="1.0"?><!DOCTYPE lolz [<!ENTITY lol "lol">]>'
        '<Instance kind="crisp"><Points><Point id="0" x="0" y="0" demand="&lol;" /></Points></Instance>'
    )
    with pytest.raises(InstanceFormatError):
        load_instance(payload)


@pytest.mark.parametrize("payload", [b"1\n0 0 \xff\n", b"\xc3\x28", bytearray(b"2\n0 0 1\n\xe2\x82\n")])
def test_load_points_rejects_invalid_utf8_bytes(payload):
    with pytest.raises(InstanceParseError) as excinfo:
        load_points(payload)
    assert "invalid UTF-8" in str(excinfo.value)


def test_invalid_utf8_files_and_streams_raise_parse_errors(tmp_path):
    path = tmp_path / "latin1.txt"
    path.write_bytes("1\n0 0 10 é\n".encode("latin-1"))

    with pytest.raises(InstanceParseError, match="invalid UTF-8"):
        load_points(path)
    with pytest.raises(InstanceParseError, match="invalid UTF-8"):
        load_points(io.BytesIO(path.read_bytes()))
    with pytest.raises(InstanceParseError, match="invalid UTF-8"):
        load_instance(path)
