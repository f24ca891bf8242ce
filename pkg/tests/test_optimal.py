from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riccisym.liealgebra import LieElement, adjoint_matrices, apply_adjoint
from riccisym.optimal import (
    AdjointWord,
    NormalForm,
    ZeroElementError,
    canonicalize,
    canonicalize_checked,
    classify,
    snap,
    verify_orbit,
)

coeff = st.fractions(min_value=-5, max_value=5, max_denominator=6)
sparse = st.one_of(st.just(Fraction(0)), coeff)
elements = st.lists(sparse, min_size=6, max_size=6).filter(lambda v: any(v)).map(lambda v: LieElement(tuple(v)))


@pytest.mark.parametrize(
    "vec, case",
    [
        ((0, 0, 0, 1, 2, 3), 1),
        ((0, 0, 1, 0, 0, 0), 8),
        ((1, 0, 0, 2, 0, 0), 4),
        ((0, 1, 0, 1, 1, 0), 2),
        ((1, 0, 0, 1, 0, 1), 3),
        ((0, 0, 1, 0, 1, 1), 5),
        ((0, 1, 1, 0, 1, 0), 6),
        ((1, 0, 1, 0, 0, 1), 7),
    ],
)
def test_classify(vec, case):
    assert classify(LieElement(vec)) == case


def test_zero_element_rejected():
    with pytest.raises(ZeroElementError):
        classify(LieElement.zero())
    with pytest.raises(ZeroElementError):
        canonicalize(LieElement.zero())


def test_already_normal():
    nf, w = canonicalize(LieElement((0, 0, 0, 1, 2, 3)))
    assert (nf.case_id, nf.a, nf.b) == (1, 2, 3)
    assert w == AdjointWord((), Fraction(1))


def test_case4_example():
    X = LieElement((1, 0, 0, 2, 0, 0))
    nf, w = canonicalize(X)
    assert (nf.case_id, nf.eps, nf.epsp) == (4, 1, 0)
    assert w.lam == Fraction(1, 2)
    assert [i for i, _ in w.steps] == [5]
    assert verify_orbit(X, w, nf)


def test_case2_example():
    X = LieElement((4, 0, 1, 2, 1, 0))
    nf, w = canonicalize(X)
    assert (nf.case_id, nf.a, nf.eps) == (2, Fraction(1, 2), 0)
    assert nf.vector == LieElement((0, 0, 0, 1, Fraction(1, 2), 0))
    assert verify_orbit(X, w, nf)


def test_wrong_sign_is_rejected():
    X = LieElement((0, 0, 1, 1, 0, 0))
    nf, w = canonicalize(X)
    assert verify_orbit(X, w, nf)
    flipped = AdjointWord(tuple((i, -s) for i, s in w.steps), w.lam)
    assert not verify_orbit(X, flipped, nf)


def test_negative_scale_allowed():
    nf, w = canonicalize(LieElement((0, 0, 0, -2, 1, 0)))
    assert w.lam == Fraction(-1, 2)
    assert nf.vector[4] == 1


def test_float_input_snaps():
    X = LieElement((0.1, 0.0, 0.0, 0.2, 0.0, 0.0))
    assert snap(0.1) == Fraction(1, 10)
    res = canonicalize_checked(X)
    assert res.normal_form.case_id == 4
    assert res.verified


def test_normal_form_validation():
    with pytest.raises(ValueError):
        NormalForm(1, a=Fraction(0), b=Fraction(1))
    with pytest.raises(ValueError):
        NormalForm(9)
    with pytest.raises(ValueError):
        NormalForm(4, eps=2, epsp=0)


def test_to_dict_shape():
    d = canonicalize_checked(LieElement((1, 0, 0, 2, -1, 0))).to_dict()
    assert d["normal_form"]["case"] == 2
    assert d["verified"] is True
    assert d["word"]["lambda"] == "1/2"


def test_random_rational_elements():
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(1000):
        v = rng.integers(-4, 5, 6) * (rng.random(6) < 0.6)
        if not v.any():
            continue
        X = LieElement(tuple(Fraction(int(k), 3) for k in v))
        nf, w = canonicalize(X)
        seen.add(nf.case_id)
        assert verify_orbit(X, w, nf)
    assert seen == set(range(1, 9))


@settings(max_examples=200, deadline=None)
@given(elements)
def test_idempotent(X):
    nf, _ = canonicalize(X)
    again, w = canonicalize(nf.vector)
    assert again == nf
    assert w == AdjointWord((), Fraction(1))


@settings(max_examples=100, deadline=None)
@given(elements, st.integers(1, 6), st.fractions(-2, 2, max_denominator=5))
def test_case_is_orbit_invariant(X, i, s):
    Y = apply_adjoint(adjoint_matrices()[i - 1], s, X)
    assert classify(Y) == classify(X)
    assert canonicalize(Y)[0].case_id == canonicalize(X)[0].case_id
