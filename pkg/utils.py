"""Useful routines and utilities which simplify code writing"""
from __future__ import annotations

import math
from typing import List, Sequence


def format_real(value) -> str:
    """Return the shortest decimal text that parses back to the same double"""
    return repr(float(value))


def parse_real(text: str) -> float:
    """Parse a decimal, rejecting NaN and infinities"""
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("non-finite value {!r}".format(text))
    return value


def format_seconds(seconds: float) -> str:
    """Render a duration in seconds with millisecond resolution"""
    return "{:.3f}".format(seconds)


def percent(part: float, total: float) -> float:
    if total <= 0.0:
        return 0.0
    return 100.0 * part / total


def format_index_set(indices: Sequence[int]) -> str:
    return "{" + ",".join(str(i) for i in sorted(indices)) + "}"


def parse_index_list(text: str) -> List[int]:
    """Parse ``"2,3,4"`` or ``"2-5"`` style lists of integers"""
    values: List[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk[1:]:
            head, tail = chunk.split("-", 1)
            values.extend(range(int(head), int(tail) + 1))
        else:
            values.append(int(chunk))
    return values


def mean(values: Sequence[float]) -> float:
    if not values:
        return 0.0
    return math.fsum(values) / len(values)
