"""Triangular fuzzy numbers, their alpha-cuts, arithmetic and the LU order.

A triangular fuzzy number (TFN) is identified with the triplet
``(lo, mid, hi)``: membership rises linearly from ``lo`` to the apex ``mid``
and falls linearly to ``hi``.  Crisp reals are the degenerate triplets
``(p, p, p)``.

All values are immutable and may be shared freely between threads.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Tuple

from errors import DomainViolation, NegativityViolation, OrderViolation
from utils import format_real

__all__ = [
    "Interval",
    "OrderRelation",
    "TFN",
    "ZERO",
    "add",
    "alpha_cut",
    "compare",
    "crisp",
    "format_tfn",
    "interval_add",
    "interval_product",
    "is_nonnegative",
    "membership",
    "mul_nonneg",
    "parse_tfn",
    "scale",
    "tfn_new",
]


@dataclass(frozen=True)
class TFN:
    """Triangular fuzzy number ``(lo, mid, hi)`` with ``lo <= mid <= hi``."""

    lo: float
    mid: float
    hi: float

    def __post_init__(self) -> None:
        lo, mid, hi = float(self.lo), float(self.mid), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(mid) and math.isfinite(hi)):
            raise DomainViolation("TFN components must be finite: ({}, {}, {})".format(lo, mid, hi))
        if lo > mid or mid > hi:
            raise OrderViolation(
                "TFN requires lo <= mid <= hi, got ({}, {}, {})".format(lo, mid, hi)
            )
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "mid", mid)
        object.__setattr__(self, "hi", hi)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.lo, self.mid, self.hi)

    @property
    def is_crisp(self) -> bool:
        return self.lo == self.mid == self.hi

    def __add__(self, other: "TFN") -> "TFN":
        return add(self, other)

    def __str__(self) -> str:
        return format_tfn(self)


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise OrderViolation("Interval requires lo <= hi, got [{}, {}]".format(self.lo, self.hi))

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


class OrderRelation(enum.Enum):
    """Outcome of comparing two TFNs under the LU partial order."""

    LessOrEqual = "<="
    GreaterOrEqual = ">="
    Equal = "="
    Incomparable = "<>"


ZERO = TFN(0.0, 0.0, 0.0)


def tfn_new(lo: float, mid: float, hi: float) -> TFN:
    """Build a TFN, raising :class:`errors.OrderViolation` on a misordered triplet."""
    return TFN(lo, mid, hi)


def crisp(value: float) -> TFN:
    return TFN(value, value, value)


def alpha_cut(t: TFN, alpha: float) -> Interval:
    """Return the interval of values whose membership is at least *alpha*."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainViolation("alpha must lie in [0, 1], got {}".format(alpha))
    if alpha == 1.0:
        return Interval(t.mid, t.mid)
    # rounding must not push either end past the apex
    lo = min(t.lo + alpha * (t.mid - t.lo), t.mid)
    hi = max(t.hi - alpha * (t.hi - t.mid), t.mid)
    return Interval(lo, hi)


def membership(t: TFN, x: float) -> float:
    if x < t.lo or x > t.hi:
        return 0.0
    if x == t.mid:
        return 1.0
    if x < t.mid:
        return (x - t.lo) / (t.mid - t.lo)
    return (t.hi - x) / (t.hi - t.mid)


def add(a: TFN, b: TFN) -> TFN:
    return TFN(a.lo + b.lo, a.mid + b.mid, a.hi + b.hi)


def scale(factor: float, t: TFN) -> TFN:
    """Multiply *t* by a real; a negative factor reverses the triplet."""
    if factor >= 0:
        return TFN(factor * t.lo, factor * t.mid, factor * t.hi)
    return TFN(factor * t.hi, factor * t.mid, factor * t.lo)


def mul_nonneg(a: TFN, b: TFN) -> TFN:
    """Triplet product of two nonnegative TFNs."""
    if a.lo < 0 or b.lo < 0:
        raise NegativityViolation("mul_nonneg requires nonnegative operands, got {} and {}".format(a, b))
    return TFN(a.lo * b.lo, a.mid * b.mid, a.hi * b.hi)


def is_nonnegative(t: TFN) -> bool:
    return t.lo >= 0


def compare(a: TFN, b: TFN) -> OrderRelation:
    """Compare two TFNs componentwise; the order is partial."""
    le = a.lo <= b.lo and a.mid <= b.mid and a.hi <= b.hi
    ge = a.lo >= b.lo and a.mid >= b.mid and a.hi >= b.hi
    if le and ge:
        return OrderRelation.Equal
    if le:
        return OrderRelation.LessOrEqual
    if ge:
        return OrderRelation.GreaterOrEqual
    return OrderRelation.Incomparable


def interval_add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def interval_product(a: Interval, b: Interval) -> Interval:
    """General product of two intervals (min/max over endpoint products).

    Only used to check the triplet product at alpha in {0, 1}.
    """
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(products), max(products))


def format_tfn(t: TFN) -> str:
    return "({}, {}, {})".format(format_real(t.lo), format_real(t.mid), format_real(t.hi))


_TFN_PATTERN = re.compile(r"^\s*\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)\s*$")


def parse_tfn(text: str) -> TFN:
    """Parse the ``(lo, mid, hi)`` textual form produced by :func:`format_tfn`."""
    match = _TFN_PATTERN.match(text)
    if match is None:
        raise ValueError("Malformed TFN literal {!r}".format(text))
    lo, mid, hi = (float(group) for group in match.groups())
    return TFN(lo, mid, hi)
