from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccisym.liealgebra import (
    TABLE1,
    AlgebraFormatError,
    LieElement,
    NonClosedExponential,
    StructureConstants,
    adjoint_matrix,
    adjoint_table,
    apply_adjoint,
    bracket,
    commutator_table,
    minimal_polynomial,
    parse_element,
    rational_roots,
    validate_algebra,
)
from riccisym.symcore import Num, Var, exp, ln, mul, parse, simplify

X = {i: LieElement.basis(i) for i in range(1, 7)}

# published adjoint table: row i, column j is Ad(exp(s X_i)) X_j
GOLDEN_ADJOINT = [
    ["X1", "X2", "X3", "X4", "X5 - s*X1", "X6"],
    ["X1", "X2", "X3", "X4", "X5", "X6 - s*X2"],
    ["X1", "X2", "X3", "X4 - s*X3", "X5", "X6"],
    ["X1", "X2", "exp(s)*X3", "X4", "X5", "X6"],
    ["exp(s)*X1", "X2", "X3", "X4", "X5", "X6"],
    ["X1", "exp(s)*X2", "X3", "X4", "X5", "X6"],
]

GOLDEN_COMMUTATORS = [
    ["0", "0", "0", "0", "X1", "0"],
    ["0", "0", "0", "0", "0", "X2"],
    ["0", "0", "0", "X3", "0", "0"],
    ["0", "0", "-X3", "0", "0", "0"],
    ["-X1", "0", "0", "0", "0", "0"],
    ["0", "-X2", "0", "0", "0", "0"],
]


def rational_element(rng: np.random.Generator) -> LieElement:
    return LieElement(tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(6)))


def test_commutator_table_matches_golden():
    assert commutator_table() == GOLDEN_COMMUTATORS


@pytest.mark.parametrize(
    "i, j, expected",
    [(3, 4, X[3]), (1, 2, LieElement.zero()), (4, 3, -X[3]), (6, 2, -X[2]), (1, 5, X[1])],
)
def test_bracket_of_basis(i, j, expected):
    assert bracket(X[i], X[j]) == expected


def test_text_round_trip():
    again = StructureConstants.from_text(TABLE1.to_text(), dim=6)
    assert again == TABLE1


def test_malformed_text():
    with pytest.raises(AlgebraFormatError):
        StructureConstants.from_text("1 5\n", dim=6)


def test_validate_table1():
    report = validate_algebra(TABLE1)
    assert report.ok
    assert report.to_dict()["ok"] is True


def test_validate_flags_broken_antisymmetry():
    bad = StructureConstants.from_entries(3, {(1, 2, 3): Fraction(1)})
    assert not validate_algebra(bad).ok


@pytest.mark.parametrize("i", range(1, 7))
def test_adjoint_row_matches_golden(i):
    expected = [simplify(parse(t, variables=tuple(f"X{k}" for k in range(1, 7)) + ("s",))) for t in GOLDEN_ADJOINT[i - 1]]
    got = [simplify(parse(t, variables=tuple(f"X{k}" for k in range(1, 7)) + ("s",))) for t in adjoint_table()[i - 1]]
    assert got == expected


@pytest.mark.parametrize("i", range(1, 7))
def test_adjoint_is_identity_at_zero(i):
    M = adjoint_matrix(i).at(Fraction(0))
    assert M == [[Fraction(int(k == j)) for j in range(6)] for k in range(6)]


def test_adjoint_fixes_own_generator():
    for i in range(1, 7):
        assert apply_adjoint(adjoint_matrix(i), Fraction(3, 2), X[i]) == X[i]


def test_exponential_parameter_stays_exact():
    # Ad(exp(ln2 X5)) X1 = 2 X1
    out = apply_adjoint(adjoint_matrix(5), ln(Num(2)), X[1])
    assert out == 2 * X[1]
    assert out.is_exact


def test_symbolic_parameter():
    s = mul(Num(-1), Var("s"))
    out = apply_adjoint(adjoint_matrix(4), s, X[3])
    assert simplify(out[3] - exp(s)) == Num(0)


def test_minimal_polynomial_and_roots():
    # ad X4 has eigenvalues 0 and -1 acting on X3
    p = minimal_polynomial(TABLE1.ad(4))
    roots = rational_roots(p)
    assert set(roots) == {Fraction(0), Fraction(-1)}


def test_non_closed_exponential_detected():
    # ad of a nilpotent Jordan block of size 8 has minimal degree above 6
    entries = {(1, k, k + 1): Fraction(1) for k in range(2, 9)}
    entries.update({(k, 1, k + 1): Fraction(-1) for k in range(2, 9)})
    sc = StructureConstants.from_entries(9, entries)
    with pytest.raises(NonClosedExponential):
        adjoint_matrix(1, sc=sc)


def test_parse_element():
    assert parse_element("X1 + 2*X4 - X5") == LieElement((1, 0, 0, 2, -1, 0))
    with pytest.raises(ValueError):
        parse_element("X1*X2")


@pytest.mark.parametrize("seed", range(5))
def test_bracket_bilinear_and_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        A, B, C = (rational_element(rng) for _ in range(3))
        k = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        assert bracket(A, A).is_zero()
        assert bracket(A, B) == -bracket(B, A)
        assert bracket(k * A + B, C) == k * bracket(A, C) + bracket(B, C)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=6, max_size=6), st.fractions(-3, 3, max_denominator=7))
def test_adjoint_preserves_brackets(coeffs, s):
    # Ad is a Lie algebra automorphism: Ad[A, B] = [Ad A, Ad B]
    A = LieElement(tuple(coeffs))
    B = LieElement(tuple(reversed(coeffs)))
    for i in (1, 3):
        M = adjoint_matrix(i)
        lhs = apply_adjoint(M, s, bracket(A, B))
        rhs = bracket(apply_adjoint(M, s, A), apply_adjoint(M, s, B))
        assert lhs == rhs
