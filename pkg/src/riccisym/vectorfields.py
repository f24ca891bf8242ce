"""First-order differential operators on named coordinate charts.

A :class:`VectorField` holds one coefficient per chart variable; ``t*d_t + u*d_u``
is the text form.  The six generators of the target equation's symmetry
algebra, their closed-form flows and the induced action on solutions live here.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .liealgebra import (
    LieElement,
    StructureConstants,
    _least_squares_exact,
    parse_element,
)
from .symcore import (
    Expr,
    Num,
    Var,
    add,
    as_expr,
    differentiate,
    evaluate,
    free_variables,
    mul,
    parse,
    render,
    simplify,
    split_coeff,
    substitute,
)


class ChartMismatch(ValueError):
    pass


class SpanError(ValueError):
    """A commutator of basis fields is not a constant combination of the basis."""


@dataclass(frozen=True)
class CoordinateChart:
    variables: tuple[str, ...]
    dependent: str

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("chart variables must be distinct")
        if self.dependent not in self.variables:
            raise ValueError("the dependent variable must be a chart variable")

    @property
    def independent(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if v != self.dependent)

    def parse(self, text: str) -> Expr:
        """Parse ``text`` treating every chart symbol (including ``f``/``g``) as a coordinate."""
        return parse(text, variables=self.variables)


MAIN = CoordinateChart(("x", "y", "t", "u"), "u")
REDUCED = CoordinateChart(("z", "w", "f"), "f")
ODE_CHART = CoordinateChart(("s", "g"), "g")


@dataclass(frozen=True)
class VectorField:
    chart: CoordinateChart
    coefficients: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.chart.variables):
            raise ValueError("one coefficient per chart variable is required")
        coeffs = tuple(simplify(as_expr(c)) for c in self.coefficients)
        stray = set().union(*(free_variables(c) for c in coeffs)) - set(self.chart.variables)
        if stray:
            raise ChartMismatch(f"coefficients use non-chart variables {sorted(stray)}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_dict(cls, chart: CoordinateChart, coeffs: dict) -> VectorField:
        return cls(chart, tuple(as_expr(coeffs.get(v, 0)) for v in chart.variables))

    def coefficient(self, var: str) -> Expr:
        return self.coefficients[self.chart.variables.index(var)]

    def __add__(self, other: VectorField) -> VectorField:
        _same_chart(self, other)
        return VectorField(self.chart, tuple(add(p, q) for p, q in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: VectorField) -> VectorField:
        _same_chart(self, other)
        return VectorField(self.chart, tuple(add(p, mul(Num(-1), q)) for p, q in zip(self.coefficients, other.coefficients)))

    def __rmul__(self, k) -> VectorField:
        k = as_expr(k)
        return VectorField(self.chart, tuple(mul(k, c) for c in self.coefficients))

    def is_zero(self) -> bool:
        return all(c == Num(0) for c in self.coefficients)

    def render(self) -> str:
        parts = []
        for v, c in zip(self.chart.variables, self.coefficients):
            if c == Num(0):
                continue
            text = render(c)
            neg = text.startswith("-")
            body = text[1:] if neg else text
            if body == "1":
                term = f"d_{v}"
            elif any(ch in body for ch in "+-") and not _atomic(body):
                term = f"({body})*d_{v}"
            else:
                term = f"{body}*d_{v}"
            if not parts:
                parts.append(("-" if neg else "") + term)
            else:
                parts.append((" - " if neg else " + ") + term)
        return "".join(parts) if parts else "0"

    def __str__(self):
        return self.render()


def _atomic(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "+-" and i > 0 and text[i - 1] not in "^*/(":
            return False
    return True


def _same_chart(X: VectorField, Y: VectorField):
    if X.chart != Y.chart:
        raise ChartMismatch(f"charts differ: {X.chart.variables} vs {Y.chart.variables}")


def apply(X: VectorField, e: Expr) -> Expr:
    """``X(e) = sum_v coeff_v * de/dv``, simplified."""
    stray = free_variables(e) - set(X.chart.variables)
    if stray:
        raise ChartMismatch(f"expression uses non-chart variables {sorted(stray)}")
    return simplify(add(*(mul(c, differentiate(e, v)) for v, c in zip(X.chart.variables, X.coefficients) if c != Num(0))))


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]``: the ``v`` coefficient is ``X(Y_v) - Y(X_v)``."""
    _same_chart(X, Y)
    return VectorField(
        X.chart,
        tuple(add(apply(X, yc), mul(Num(-1), apply(Y, xc))) for xc, yc in zip(X.coefficients, Y.coefficients)),
    )


def _monomial_vector(X: VectorField) -> dict:
    out: dict = {}
    for idx, c in enumerate(X.coefficients):
        terms = c.terms if hasattr(c, "terms") else (c,)
        for t in terms:
            k, m = split_coeff(t)
            if k != 0:
                out[(idx, m.key)] = out.get((idx, m.key), Fraction(0)) + k
    return out


def decompose(X: VectorField, basis: Sequence[VectorField]) -> list[Fraction] | None:
    """Constant rational coefficients of ``X`` over ``basis``, or ``None``."""
    vecs = [_monomial_vector(B) for B in basis]
    target = _monomial_vector(X)
    keys = sorted(set(target).union(*vecs))
    columns = [[v.get(k, Fraction(0)) for k in keys] for v in vecs]
    return _least_squares_exact(columns, [target.get(k, Fraction(0)) for k in keys])


def structure_constants_from_basis(basis: Sequence[VectorField]) -> StructureConstants:
    """Exact structure constants by coefficient matching over monomials."""
    n = len(basis)
    for B in basis[1:]:
        _same_chart(basis[0], B)
    entries = {}
    for i in range(n):
        for j in range(n):
            comm = commutator(basis[i], basis[j])
            coeffs = decompose(comm, basis)
            if coeffs is None:
                raise SpanError(f"[B{i + 1}, B{j + 1}] = {comm.render()} is outside the span of the basis")
            for k, v in enumerate(coeffs):
                if v:
                    entries[(i + 1, j + 1, k + 1)] = v
    return StructureConstants.from_entries(n, entries)


def parse_vector_field(text: str, chart: CoordinateChart = MAIN, named: dict | None = None) -> VectorField:
    """Parse ``coef*d_var + ...`` or a combination of named fields such as ``X1 + X6``.

    ``named`` maps names (e.g. ``V1``) to fields; it defaults to ``X1``..``X6``
    on the main chart.
    """
    if named is None:
        named = {f"X{i}": B for i, B in enumerate(EQ3_BASIS, 1)} if chart == MAIN else {}
    dnames = [f"d_{v}" for v in chart.variables]
    e = parse(text, variables=tuple(chart.variables) + tuple(dnames) + tuple(named))
    symbols = dnames + list(named)
    coeffs = {}
    for n in symbols:
        c = simplify(differentiate(e, n))
        if any(simplify(differentiate(c, m)) != Num(0) for m in symbols):
            raise ValueError(f"{text!r} is not linear in the derivations")
        coeffs[n] = c
    rest = simplify(substitute(e, {n: Num(0) for n in symbols}))
    if rest != Num(0):
        raise ValueError(f"{text!r} contains a term without a derivation (d_<var> or named field)")
    out = VectorField(chart, tuple(coeffs[f"d_{v}"] for v in chart.variables))
    for name, F in named.items():
        c = coeffs[name]
        if c != Num(0):
            if free_variables(c):
                raise ValueError(f"named field {name} must have a constant coefficient")
            out = out + c * F
    return out


# ---------------------------------------------------------------------------
# the symmetry generators and their flows

EQ3_TEXT = ("d_x", "d_y", "d_t", "t*d_t + u*d_u", "x*d_x - u*d_u", "y*d_y - u*d_u")
EQ3_BASIS: tuple[VectorField, ...] = tuple(parse_vector_field(t, MAIN, named={}) for t in EQ3_TEXT)


def element_field(X: LieElement, basis: Sequence[VectorField] = EQ3_BASIS) -> VectorField:
    """The vector field ``sum a_k B_k``."""
    out = VectorField(basis[0].chart, (Num(0),) * len(basis[0].chart.variables))
    for a, B in zip(X.a, basis):
        if a != 0:
            out = out + as_expr(a) * B
    return out


def field_from_text(text: str) -> VectorField:
    """Vector field on (x, y, t, u) from ``d_`` notation or an ``X1..X6`` combination."""
    try:
        return element_field(parse_element(text))
    except ValueError:
        return parse_vector_field(text, MAIN)


_S = Var("s")
_FLOW_TEXT = {
    1: ("x + s", "y", "t", "u"),
    2: ("x", "y + s", "t", "u"),
    3: ("x", "y", "t + s", "u"),
    4: ("x", "y", "t*exp(s)", "u*exp(s)"),
    5: ("x*exp(s)", "y", "t", "u*exp(-s)"),
    6: ("x", "y*exp(s)", "t", "u*exp(-s)"),
}
FLOWS: dict[int, tuple[Expr, ...]] = {k: tuple(parse(c) for c in v) for k, v in _FLOW_TEXT.items()}


def _check_k(k: int):
    if k not in FLOWS:
        raise ValueError(f"generator index must be 1..6, got {k}")


def flow_expr(k: int, s=None) -> tuple[Expr, ...]:
    """Closed-form image of ``(x, y, t, u)`` under ``g_k(s)``; ``s`` defaults to the symbol ``s``."""
    _check_k(k)
    if s is None:
        return FLOWS[k]
    return tuple(substitute(c, {"s": _param(s)}) for c in FLOWS[k])


def flow_point(k: int, s: float, p: Sequence[float]) -> tuple[float, ...]:
    _check_k(k)
    b = dict(zip(MAIN.variables, (float(v) for v in p)))
    b["s"] = float(s)
    return tuple(evaluate(c, b) for c in FLOWS[k])


def _param(s) -> Expr:
    if isinstance(s, Expr):
        return s
    if isinstance(s, str):
        return parse(s)
    if isinstance(s, float):
        return Num(Fraction(repr(s)))
    return Num(Fraction(s))


def transform_solution(k: int, s, u_expr: Expr) -> Expr:
    """Image of the solution ``u = u_expr(x, y, t)`` under ``g_k(s)``.

    The graph point ``(x, y, t, u)`` is moved by the flow, so the new solution is
    the u-component of the flow at ``+s`` evaluated on the old solution at the
    independent-variable preimage (flow at ``-s``).
    """
    _check_k(k)
    sp = _param(s)
    back = flow_expr(k, mul(Num(-1), sp))
    old = substitute(u_expr, dict(zip(("x", "y", "t"), back[:3])), simplify_result=False)
    u_image = flow_expr(k, sp)[3]
    return simplify(substitute(u_image, {"u": old}, simplify_result=False))


def generator_coefficients(k: int, p: Sequence[float]) -> tuple[float, ...]:
    b = dict(zip(MAIN.variables, (float(v) for v in p)))
    return tuple(evaluate(c, b) for c in EQ3_BASIS[k - 1].coefficients)


__all__ = [
    "EQ3_BASIS",
    "FLOWS",
    "MAIN",
    "ODE_CHART",
    "REDUCED",
    "ChartMismatch",
    "CoordinateChart",
    "SpanError",
    "VectorField",
    "apply",
    "commutator",
    "decompose",
    "element_field",
    "field_from_text",
    "flow_expr",
    "flow_point",
    "generator_coefficients",
    "parse_vector_field",
    "structure_constants_from_basis",
    "transform_solution",
]
