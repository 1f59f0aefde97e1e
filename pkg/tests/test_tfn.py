from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DomainViolation, NegativityViolation, OrderViolation
from tfn import (
    TFN,
    Interval,
    OrderRelation,
    ZERO,
    add,
    alpha_cut,
    compare,
    crisp,
    format_tfn,
    interval_add,
    interval_product,
    is_nonnegative,
    membership,
    mul_nonneg,
    parse_tfn,
    scale,
    tfn_new,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
nonnegative = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
small_ints = st.integers(min_value=-50, max_value=50)
unit = st.floats(min_value=0.0, max_value=1.0)


@st.composite
def tfns(draw, values=finite):
    lo, mid, hi = sorted(draw(st.tuples(values, values, values)))
    return TFN(lo, mid, hi)


@st.composite
def integer_tfns(draw):
    lo, mid, hi = sorted(draw(st.tuples(small_ints, small_ints, small_ints)))
    return TFN(lo, mid, hi)


def test_tfn_new_accepts_ordered_triplets():
    assert tfn_new(2, 5, 9) == TFN(2.0, 5.0, 9.0)
    three = tfn_new(3, 3, 3)
    assert three == crisp(3) and three.is_crisp


@pytest.mark.parametrize("triplet", [(5, 2, 9), (1, 9, 5)])
def test_tfn_new_rejects_misordered_triplets(triplet):
    with pytest.raises(OrderViolation):
        tfn_new(*triplet)


def test_tfn_rejects_non_finite_components():
    with pytest.raises(DomainViolation):
        tfn_new(0, 1, math.inf)


@pytest.mark.parametrize(
    "alpha, expected",
    [(0.5, Interval(3.5, 7.0)), (1.0, Interval(5.0, 5.0)), (0.0, Interval(2.0, 9.0))],
)
def test_alpha_cut_examples(alpha, expected):
    assert alpha_cut(TFN(2, 5, 9), alpha) == expected


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_alpha_cut_rejects_alpha_outside_unit_interval(alpha):
    with pytest.raises(DomainViolation):
        alpha_cut(TFN(2, 5, 9), alpha)


def test_add_scale_and_product_examples():
    assert add(TFN(1, 2, 3), TFN(4, 5, 6)) == TFN(5, 7, 9)
    assert add(ZERO, TFN(1, 2, 3)) == TFN(1, 2, 3)
    assert TFN(1, 2, 3) + TFN(1, 2, 3) == scale(2, TFN(1, 2, 3)) == TFN(2, 4, 6)
    assert scale(0, TFN(1, 2, 3)) == ZERO
    assert scale(-1, TFN(1, 2, 3)) == TFN(-3, -2, -1)
    assert mul_nonneg(TFN(1, 2, 3), TFN(2, 3, 4)) == TFN(2, 6, 12)
    assert mul_nonneg(ZERO, TFN(5, 6, 7)) == ZERO
    assert mul_nonneg(TFN(2, 3, 4), crisp(1)) == TFN(2, 3, 4)


def test_mul_nonneg_rejects_negative_operand():
    with pytest.raises(NegativityViolation):
        mul_nonneg(TFN(-1, 2, 3), TFN(1, 1, 1))


def test_compare_examples():
    assert compare(TFN(1, 2, 3), TFN(1, 2, 3)) is OrderRelation.Equal
    assert compare(TFN(1, 2, 3), TFN(0, 5, 6)) is OrderRelation.Incomparable
    assert compare(TFN(1, 2, 3), TFN(1, 2, 4)) is OrderRelation.LessOrEqual
    assert compare(TFN(1, 2, 4), TFN(1, 2, 3)) is OrderRelation.GreaterOrEqual
    served_a = TFN(2437.80, 3290, 3970.53)
    served_b = TFN(2392.47, 3250, 3971.95)
    assert compare(served_a, served_b) is OrderRelation.Incomparable


def test_membership_is_triangular():
    t = TFN(2, 5, 9)
    assert membership(t, 5) == 1.0
    assert membership(t, 3.5) == pytest.approx(0.5)
    assert membership(t, 7) == pytest.approx(0.5)
    assert membership(t, 1) == 0.0
    assert membership(t, 10) == 0.0
    assert membership(crisp(4), 4) == 1.0


def test_format_and_parse_tfn():
    t = TFN(0.1, 2.5, 1e20)
    assert format_tfn(t) == "(0.1, 2.5, 1e+20)"
    assert parse_tfn(" ( 0.1 ,2.5, 1e+20 ) ") == t
    with pytest.raises(ValueError):
        parse_tfn("(1, 2)")
    with pytest.raises(OrderViolation):
        parse_tfn("(3, 2, 1)")


@settings(max_examples=2000)
@given(tfns(), unit, unit)
def test_alpha_cuts_are_nested(t, first, second):
    low, high = sorted((first, second))
    outer = alpha_cut(t, low)
    inner = alpha_cut(t, high)
    slack = 1e-9 * max(1.0, abs(t.lo), abs(t.hi))
    assert outer.lo <= inner.lo + slack
    assert inner.hi <= outer.hi + slack
    assert inner.lo <= inner.hi + slack


@settings(max_examples=2000)
@given(tfns(nonnegative), tfns(nonnegative), st.sampled_from([0.0, 1.0]))
def test_endpoint_cuts_match_interval_arithmetic(a, b, alpha):
    cut_a, cut_b = alpha_cut(a, alpha), alpha_cut(b, alpha)
    assert alpha_cut(add(a, b), alpha) == interval_add(cut_a, cut_b)
    assert alpha_cut(mul_nonneg(a, b), alpha) == interval_product(cut_a, cut_b)


@settings(max_examples=2000)
@given(tfns(), tfns(), tfns())
def test_compare_is_a_partial_order(a, b, c):
    assert compare(a, a) is OrderRelation.Equal
    if compare(a, b) is OrderRelation.Equal:
        assert a == b
    ab, ba = compare(a, b), compare(b, a)
    mirrored = {
        OrderRelation.LessOrEqual: OrderRelation.GreaterOrEqual,
        OrderRelation.GreaterOrEqual: OrderRelation.LessOrEqual,
        OrderRelation.Equal: OrderRelation.Equal,
        OrderRelation.Incomparable: OrderRelation.Incomparable,
    }
    assert ba is mirrored[ab]
    below = {OrderRelation.LessOrEqual, OrderRelation.Equal}
    if compare(a, b) in below and compare(b, c) in below:
        assert compare(a, c) in below


@settings(max_examples=2000)
@given(small_ints, small_ints, integer_tfns())
def test_scale_composes_multiplicatively(first, second, t):
    assert scale(first, scale(second, t)) == scale(first * second, t)


@settings(max_examples=2000)
@given(tfns())
def test_nonnegativity_agrees_with_order_against_zero(t):
    relation = compare(ZERO, t)
    assert is_nonnegative(t) == (relation in {OrderRelation.LessOrEqual, OrderRelation.Equal})
