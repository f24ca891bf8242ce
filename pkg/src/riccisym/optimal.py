"""Canonical representatives of one-dimensional subalgebras under the adjoint action.

An element ``X = sum a_k X_k`` is classified by which of ``a4, a5, a6`` vanish;
these three coefficients are fixed by every adjoint map, so the class is an orbit
invariant.  Within a class, the translation-type maps ``M1, M2, M3`` remove
``a1, a2, a3`` whenever the matching scaling coefficient is nonzero, and the
exponential maps ``M4, M5, M6`` bring the survivors to ``+-1``.

Adjoint parameters are solved from this module's convention
``Ad(exp(s X_i)) = exp(-s ad X_i)``: ``M3`` sends ``a3`` to ``a3 - s a4`` (so
``s = a3/a4`` kills it) and ``M4`` sends ``a3`` to ``e^s a3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .liealgebra import (
    TABLE1,
    LieElement,
    adjoint_matrices,
    apply_adjoint,
    render_combination,
)
from .symcore import Expr, Num, evaluate, ln, render

Number = Fraction | float

SNAP_TOL = 1e-12

# case -> (leading index, kill steps (target, map), normalizing steps (target, map))
_CASES = {
    1: (4, ((3, 3), (1, 1), (2, 2)), ()),
    2: (4, ((3, 3), (1, 1)), ((2, 6),)),
    3: (4, ((3, 3), (2, 2)), ((1, 5),)),
    4: (4, ((3, 3),), ((1, 5), (2, 6))),
    5: (5, ((1, 1), (2, 2)), ((3, 4),)),
    6: (5, ((1, 1),), ((2, 6), (3, 4))),
    7: (6, ((2, 2),), ((1, 5), (3, 4))),
    8: (None, (), ((1, 5), (3, 4))),
}

# the scaling coefficient each translation map uses: M1 uses a5, M2 a6, M3 a4
_KILL_PIVOT = {1: 5, 2: 6, 3: 4}

TEMPLATES = {
    1: "X4 + a*X5 + b*X6",
    2: "eps*X2 + X4 + a*X5",
    3: "eps*X1 + X4 + a*X6",
    4: "eps*X1 + epsp*X2 + X4",
    5: "eps*X3 + X5 + a*X6",
    6: "eps*X2 + epsp*X3 + X5",
    7: "eps*X1 + epsp*X3 + X6",
    8: "eps*X1 + c*X2 + epsp*X3",
}


class ZeroElementError(ValueError):
    pass


@dataclass(frozen=True)
class NormalForm:
    case_id: int
    a: Number | None = None
    b: Number | None = None
    c: Number | None = None
    eps: int | None = None
    epsp: int | None = None

    def __post_init__(self):
        if self.case_id not in _CASES:
            raise ValueError(f"case id must be 1..8, got {self.case_id}")
        for e in (self.eps, self.epsp):
            if e is not None and e not in (-1, 0, 1):
                raise ValueError("eps values must be -1, 0 or 1")
        if self.case_id == 1 and (self.a == 0 or self.b == 0):
            raise ValueError("case 1 needs a != 0 and b != 0")

    @property
    def vector(self) -> LieElement:
        a, b, c, e, ep = self.a, self.b, self.c, self.eps, self.epsp
        z = Fraction(0)
        one = Fraction(1)
        v = {
            1: (z, z, z, one, a, b),
            2: (z, e, z, one, a, z),
            3: (e, z, z, one, z, a),
            4: (e, ep, z, one, z, z),
            5: (z, z, e, z, one, a),
            6: (z, e, ep, z, one, z),
            7: (e, z, ep, z, z, one),
            8: (e, c, ep, z, z, z),
        }[self.case_id]
        return LieElement(tuple(Fraction(0) if x is None else x for x in v))

    def parameters(self) -> dict:
        out = {}
        for name in ("a", "b", "c", "eps", "epsp"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    def render(self) -> str:
        return render_combination(self.vector.a)

    def to_dict(self) -> dict:
        return {
            "case": self.case_id,
            "template": TEMPLATES[self.case_id],
            "parameters": {k: _num_json(v) for k, v in self.parameters().items()},
            "element": self.render(),
        }


@dataclass(frozen=True)
class AdjointWord:
    """Adjoint maps applied left to right, then an overall scale ``lam``.

    ``lam`` may be negative: a one-dimensional subalgebra is unchanged by any
    nonzero rescaling, and the leading coefficient of the normal form is +1.
    """

    steps: tuple = ()
    lam: Number = Fraction(1)

    def apply(self, X: LieElement) -> LieElement:
        mats = adjoint_matrices(TABLE1)
        Y = X
        for i, s in self.steps:
            Y = apply_adjoint(mats[i - 1], s, Y)
        return self.lam * Y

    def render(self) -> str:
        parts = [f"F{i}(s={render(s) if isinstance(s, Expr) else s})" for i, s in self.steps]
        return " -> ".join(parts + [f"scale {self.lam}"])

    def to_dict(self) -> dict:
        return {
            "steps": [{"map": i, "s": render(s) if isinstance(s, Expr) else _num_json(s), "s_value": _s_float(s)} for i, s in self.steps],
            "lambda": _num_json(self.lam),
        }


def _s_float(s) -> float:
    if isinstance(s, Expr):
        return evaluate(s, {})
    return float(s)


def _num_json(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def snap(v: Number, tol: float = SNAP_TOL) -> Fraction:
    """Simple rational within ``tol`` (relative) by continued fractions.

    Magnitudes up to ``tol`` become exactly zero.  A float with no simple
    rational nearby keeps its exact binary value, so canonicalization never
    adds an error that the adjoint word would later amplify.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if abs(v) <= tol:
        return Fraction(0)
    exact = Fraction(v)
    # denominators up to 1e4: larger ones approximate almost any float to 1e-12
    for den in (10**k for k in range(5)):
        f = exact.limit_denominator(den)
        if abs(float(f) - v) <= tol * abs(v):
            return f
    return exact


def _snapped(X: LieElement) -> tuple[Fraction, ...]:
    if len(X.a) != 6:
        raise ValueError("elements of the six-dimensional algebra are required")
    out = []
    for v in X.a:
        if isinstance(v, Expr):
            raise TypeError("symbolic coefficients cannot be classified")
        out.append(snap(v))
    return tuple(out)


def classify(X: LieElement) -> int:
    """Case 1..8 from the zero pattern of ``(a4, a5, a6)``."""
    a = _snapped(X)
    if all(v == 0 for v in a):
        raise ZeroElementError("the zero element spans no subalgebra")
    nz4, nz5, nz6 = (a[3] != 0, a[4] != 0, a[5] != 0)
    if nz4:
        if nz5:
            return 1 if nz6 else 2
        return 3 if nz6 else 4
    if nz5:
        return 5 if nz6 else 6
    return 7 if nz6 else 8


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


def canonicalize(X: LieElement) -> tuple[NormalForm, AdjointWord]:
    """Normal form and the adjoint word reaching it.

    The word's translation parameters are rational and its exponential
    parameters are ``ln q`` with rational ``q``, so applying the word to a
    rational element reproduces the normal form exactly.
    """
    a = list(_snapped(X))
    case = classify(X)
    lead, kills, norms = _CASES[case]
    lam = Fraction(1) if lead is None else 1 / a[lead - 1]
    steps: list = []
    for target, m in kills:
        pivot = a[_KILL_PIVOT[m] - 1]
        if a[target - 1] != 0:
            steps.append((m, a[target - 1] / pivot))
            a[target - 1] = Fraction(0)
    eps: dict[int, int] = {}
    for target, m in norms:
        v = lam * a[target - 1]
        eps[target] = _sign(v)
        if v != 0 and abs(v) != 1:
            # e^s * |v| = 1
            steps.append((m, ln(Num(1 / abs(v)))))
    out = [lam * v for v in a]
    if case == 1:
        nf = NormalForm(1, a=out[4], b=out[5])
    elif case == 2:
        nf = NormalForm(2, a=out[4], eps=eps[2])
    elif case == 3:
        nf = NormalForm(3, a=out[5], eps=eps[1])
    elif case == 4:
        nf = NormalForm(4, eps=eps[1], epsp=eps[2])
    elif case == 5:
        nf = NormalForm(5, a=out[5], eps=eps[3])
    elif case == 6:
        nf = NormalForm(6, eps=eps[2], epsp=eps[3])
    elif case == 7:
        nf = NormalForm(7, eps=eps[1], epsp=eps[3])
    else:
        nf = NormalForm(8, c=out[1], eps=eps[1], epsp=eps[3])
    return nf, AdjointWord(tuple(steps), lam)


def verify_orbit(X: LieElement, w: AdjointWord, n: NormalForm, tol: float = 1e-10) -> bool:
    """True iff the word carries ``X`` to ``n`` (exactly for rational data).

    Float coefficients are replaced by their exact binary values before the
    word is applied; evaluating it in floating point would let the large
    translation parameters of nearly degenerate elements swamp ``tol``.
    """
    floats = any(isinstance(v, float) for v in X.a)
    X = LieElement(tuple(Fraction(v) if isinstance(v, float) else v for v in X.a))
    try:
        Y = w.apply(X)
    except (ArithmeticError, ValueError, TypeError):
        return False
    target = n.vector.a
    if not floats and Y.is_exact and all(isinstance(v, Fraction) for v in target):
        return tuple(Y.a) == tuple(target)
    for y, t in zip(Y.a, target):
        if isinstance(y, Expr):
            return False
        if abs(float(y) - float(t)) > tol * max(1.0, abs(float(t))):
            return False
    return True


@dataclass
class CanonicalizationResult:
    element: LieElement
    normal_form: NormalForm
    word: AdjointWord
    verified: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "input": self.element.render(),
            "normal_form": self.normal_form.to_dict(),
            "word": self.word.to_dict(),
            "verified": self.verified,
        }


def canonicalize_checked(X: LieElement) -> CanonicalizationResult:
    nf, w = canonicalize(X)
    return CanonicalizationResult(X, nf, w, verify_orbit(X, w, nf))


__all__ = [
    "TEMPLATES",
    "AdjointWord",
    "CanonicalizationResult",
    "NormalForm",
    "ZeroElementError",
    "canonicalize",
    "canonicalize_checked",
    "classify",
    "snap",
    "verify_orbit",
]
