from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from riccisym.liealgebra import TABLE1, LieElement, StructureConstants
from riccisym.symcore import Num, evaluate, parse, simplify
from riccisym.vectorfields import (
    EQ3_BASIS,
    MAIN,
    ChartMismatch,
    CoordinateChart,
    SpanError,
    apply,
    commutator,
    element_field,
    field_from_text,
    flow_point,
    generator_coefficients,
    parse_vector_field,
    structure_constants_from_basis,
    transform_solution,
)

PLANE = CoordinateChart(("x", "y"), "y")
X1, X2, X3, X4, X5, X6 = EQ3_BASIS


def vf(text: str, chart=MAIN):
    return parse_vector_field(text, chart, named={})


@pytest.mark.parametrize(
    "field, expr, expected",
    [
        ("X1 + X6", "y*exp(-x)", "0"),
        ("X1 + X6", "u*y", "0"),
        ("X1", "x", "1"),
        ("X4", "u/t", "0"),
        ("X5", "x*u", "0"),
        ("t*d_t + u*d_u", "u^2", "2*u^2"),
    ],
)
def test_apply(field, expr, expected):
    assert apply(field_from_text(field), parse(expr)) == parse(expected)


def test_apply_rejects_foreign_variables():
    with pytest.raises(ChartMismatch):
        apply(X1, parse("z*x", variables=("z",)))


def test_commutator_examples():
    assert commutator(X1, vf("x*d_x - u*d_u")) == X1
    assert commutator(X1, X2).is_zero()
    assert commutator(X4, X3) == -1 * X3


def test_commutator_chart_mismatch():
    with pytest.raises(ChartMismatch):
        commutator(X1, vf("d_x", PLANE))


def test_structure_constants_reproduce_table1():
    assert structure_constants_from_basis(EQ3_BASIS) == TABLE1


def test_abelian_plane():
    sc = structure_constants_from_basis([vf("d_x", PLANE), vf("d_y", PLANE)])
    assert sc == StructureConstants.zeros(2)


def test_span_error():
    with pytest.raises(SpanError):
        structure_constants_from_basis([vf("d_x", PLANE), vf("x^2*d_x", PLANE)])


def test_named_combination_matches_element():
    assert field_from_text("X1 + 2*X4 - X5") == element_field(LieElement((1, 0, 0, 2, -1, 0)))


@pytest.mark.parametrize("bad", ["d_x*d_y", "x + d_x", "X1*x"])
def test_parse_vector_field_rejects(bad):
    with pytest.raises(ValueError):
        parse_vector_field(bad)


def test_render_round_trip():
    for B in EQ3_BASIS:
        assert vf(B.render()) == B


def test_flow_examples():
    assert flow_point(1, 0.7, (1, 2, 3, 4)) == pytest.approx((1.7, 2, 3, 4))
    assert flow_point(5, math.log(2), (1, 1, 1, 1)) == pytest.approx((2, 1, 1, 0.5))
    for k in range(1, 7):
        assert flow_point(k, 0.0, (1.5, 2.5, 3.5, 4.5)) == (1.5, 2.5, 3.5, 4.5)


@pytest.mark.parametrize("k", range(1, 7))
def test_flow_generates_field(k):
    # d/ds at s=0 equals the generator coefficients (central differences)
    rng = np.random.default_rng(k)
    h = 1e-6
    for _ in range(10):
        p = tuple(rng.uniform(0.5, 2.0, 4))
        plus, minus = np.array(flow_point(k, h, p)), np.array(flow_point(k, -h, p))
        fd = (plus - minus) / (2 * h)
        exact = np.array(generator_coefficients(k, p))
        assert np.allclose(fd, exact, rtol=1e-5, atol=1e-8)


@pytest.mark.parametrize("k", range(1, 7))
def test_flow_group_law(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(10):
        p = tuple(rng.uniform(0.5, 2.0, 4))
        s1, s2 = rng.uniform(-1, 1, 2)
        lhs = flow_point(k, s1, flow_point(k, s2, p))
        assert lhs == pytest.approx(flow_point(k, s1 + s2, p), rel=1e-12, abs=1e-12)


def test_flow_index_checked():
    with pytest.raises(ValueError):
        flow_point(7, 0.1, (1, 1, 1, 1))


@pytest.mark.parametrize(
    "k, s, u, expected",
    [
        (1, "s", "x*y + t", "(x - s)*y + t"),
        (4, "s", "c1/y", "exp(s)*c1/y"),
        (4, "s", "t", "t"),
        (5, Fraction(1, 2), "x", "exp(-1)*x"),
        (6, 0, "x^2*exp(y)/t", "x^2*exp(y)/t"),
    ],
)
def test_transform_solution(k, s, u, expected):
    got = transform_solution(k, s, parse(u, variables=("s",)))
    assert simplify(got - parse(expected, variables=("s",))) == Num(0)


def test_transform_is_numerically_consistent():
    # g_5(s) moves the graph point (x, u) to (x e^s, u e^-s)
    u = parse("x^2 + y*t")
    v = transform_solution(5, 0.4, u)
    x, y, t = 1.3, 0.7, 2.1
    xs = x * math.exp(0.4)
    u_old = evaluate(u, {"x": x, "y": y, "t": t})
    assert evaluate(v, {"x": xs, "y": y, "t": t}) == pytest.approx(u_old * math.exp(-0.4))
