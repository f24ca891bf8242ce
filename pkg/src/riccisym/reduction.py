"""Invariants of one-parameter groups and similarity reduction.

For a vector field whose coefficients each depend only on their own variable
and lie in the integrable family ``alpha``, ``beta*v``, ``alpha + beta*v``,
``beta*v*ln(v)``, the characteristic system ``dv/xi(v)`` separates: every
variable has a closed-form primitive ``P(v)`` that advances by exactly 1 along
the flow.  Differences ``P(v) - P(pivot)`` are therefore invariants, and they
are emitted in product form (``y*exp(-x)`` rather than ``ln(y) - x``) whenever
``P(v)`` is logarithmic.

Reduction substitutes the solved dependent variable into a residual, expands
by the chain rule, replaces the remaining original variables through the
chart's inverse map and splits off the factor carrying the pivot variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .symcore import (
    ONE,
    SIGNATURES,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Num,
    Pow,
    SamplingBox,
    Unknown,
    Var,
    ZeroVerdict,
    add,
    differentiate,
    evaluate,
    exp,
    free_variables,
    has_unknown,
    is_zero,
    ln,
    mul,
    power,
    render,
    simplify,
    split_coeff,
    substitute,
    substitute_function,
    walk,
)
from .symcore.numeric import EvaluationError
from .vectorfields import MAIN, REDUCED, CoordinateChart, VectorField, apply


class IntegrabilityError(ValueError):
    """A coefficient falls outside the separable family handled here."""


class ReductionError(ValueError):
    """The substituted residual does not factor into chart variables."""


# default names of the reduced coordinates for each source chart
CHART_NAMES = {
    MAIN: (("z", "w"), "f"),
    REDUCED: (("s",), "g"),
}

DEFAULT_RANGE = (0.5, 2.0)
LOG_RANGE = (1.5, 4.0)
PARAM_RANGE = (0.5, 2.0)


# ---------------------------------------------------------------------------
# coefficient classes


@dataclass(frozen=True)
class CoefficientClass:
    """``xi(v)`` in one of the separable shapes; ``alpha``/``beta`` are constants."""

    kind: str  # zero | constant | linear | affine | loglog
    alpha: Expr = ZERO
    beta: Expr = ZERO

    def primitive(self, v: str) -> Expr:
        """``P(v)`` with ``dP/dv = 1/xi(v)``."""
        V = Var(v)
        if self.kind == "constant":
            return mul(V, power(self.alpha, Num(-1)))
        if self.kind == "linear":
            return mul(ln(V), power(self.beta, Num(-1)))
        if self.kind == "affine":
            return mul(ln(add(self.alpha, mul(self.beta, V))), power(self.beta, Num(-1)))
        if self.kind == "loglog":
            return mul(ln(ln(V)), power(self.beta, Num(-1)))
        raise ValueError("a zero coefficient has no primitive")

    @property
    def is_logarithmic(self) -> bool:
        return self.kind == "linear"


def classify_coefficient(c: Expr, v: str) -> CoefficientClass:
    c = simplify(c)
    if c == Num(0):
        return CoefficientClass("zero")
    stray = free_variables(c) - {v}
    if stray:
        raise IntegrabilityError(f"coefficient {render(c)} of d_{v} depends on {sorted(stray)}")
    if v not in free_variables(c):
        return CoefficientClass("constant", alpha=c)
    d1 = simplify(differentiate(c, v))
    if v not in free_variables(d1):
        alpha = simplify(substitute(c, {v: Num(0)}))
        if alpha == Num(0):
            return CoefficientClass("linear", beta=d1)
        return CoefficientClass("affine", alpha=alpha, beta=d1)
    beta = simplify(mul(c, power(mul(Var(v), ln(Var(v))), Num(-1))), positive=True)
    if v not in free_variables(beta):
        return CoefficientClass("loglog", beta=beta)
    raise IntegrabilityError(f"coefficient {render(c)} of d_{v} is outside the integrable family")


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class InvariantChart:
    """Similarity coordinates for one generator.

    ``invariants`` gives the new independent variables (``names``) in the
    source coordinates; ``f_def`` is the invariant that becomes the new
    dependent variable and ``u_solve`` expresses the source dependent variable
    through ``Var(dependent)`` and the source independent variables.
    ``inverse`` maps every non-pivot source independent variable to an
    expression in the new names and the pivot.
    """

    source: CoordinateChart
    names: tuple[str, ...]
    dependent: str
    invariants: tuple[Expr, ...]
    f_def: Expr
    u_solve: Expr
    pivot: str
    inverse: tuple[tuple[str, Expr], ...]
    generator: VectorField | None = None
    label: str = ""

    @property
    def inverse_map(self) -> dict[str, Expr]:
        return dict(self.inverse)

    @property
    def forward_map(self) -> dict[str, Expr]:
        return dict(zip(self.names, self.invariants))

    def describe(self) -> dict:
        out = {n: render(e) for n, e in zip(self.names, self.invariants)}
        out[self.dependent] = render(self.f_def)
        out[self.source.dependent] = render(self.u_solve)
        out["pivot"] = self.pivot
        out["inverse"] = {k: render(v) for k, v in self.inverse}
        if self.generator is not None:
            out["generator"] = self.generator.render()
        return out


def _names_for(chart: CoordinateChart, names, dependent):
    if names is None or dependent is None:
        default = CHART_NAMES.get(chart)
        if default is None:
            raise ValueError("reduced variable names are required for a custom chart")
        names = default[0] if names is None else names
        dependent = default[1] if dependent is None else dependent
    return tuple(names), dependent


def characteristic_invariants(X: VectorField, names=None, dependent=None) -> InvariantChart:
    """Closed-form invariants of ``X`` by integrating the separated characteristic system."""
    chart = X.chart
    names, dependent = _names_for(chart, names, dependent)
    indep = chart.independent
    if len(names) != len(indep) - 1:
        raise ValueError(f"need {len(indep) - 1} new independent names, got {len(names)}")
    classes = {v: classify_coefficient(X.coefficient(v), v) for v in chart.variables}
    active = [v for v in indep if classes[v].kind != "zero"]
    if not active:
        raise IntegrabilityError("the generator moves no independent variable; no reduction exists")
    pivot = active[0]
    P = classes[pivot].primitive(pivot)
    logs = [v for v in indep if classes[v].is_logarithmic]
    u_pivot = logs[0] if logs else pivot
    invariants, inverse = [], []
    others = [v for v in indep if v != pivot]
    for v, name in zip(others, names):
        inv, solved = _pair_invariant(v, classes[v], P, Var(name))
        invariants.append(inv)
        inverse.append((v, solved))
    dep = chart.dependent
    Pu = classes[u_pivot].primitive(u_pivot)
    f_def, u_solve = _pair_invariant(dep, classes[dep], Pu, Var(dependent))
    out = InvariantChart(
        chart, names, dependent, tuple(invariants), f_def, u_solve, pivot, tuple(inverse), X, ""
    )
    report = verify_chart(out)
    if not report.annihilation_ok:
        raise IntegrabilityError(f"computed invariants are not annihilated by {X.render()}: {report.failures()}")
    return out


def _pair_invariant(v: str, cls: CoefficientClass, P: Expr, new: Expr) -> tuple[Expr, Expr]:
    """Invariant of ``v`` relative to primitive ``P`` and ``v`` solved from ``invariant == new``."""
    V = Var(v)
    if cls.kind == "zero":
        return V, new
    b = cls.beta
    if cls.kind == "constant":
        inv = simplify(add(V, mul(Num(-1), cls.alpha, P)), positive=True)
        return inv, simplify(add(new, mul(cls.alpha, P)), positive=True)
    grow = exp(mul(b, P))
    shrink = exp(mul(Num(-1), b, P))
    if cls.kind == "linear":
        return simplify(mul(V, shrink), positive=True), simplify(mul(new, grow), positive=True)
    if cls.kind == "affine":
        inv = simplify(mul(add(cls.alpha, mul(b, V)), shrink), positive=True)
        solved = mul(add(mul(new, grow), mul(Num(-1), cls.alpha)), power(b, Num(-1)))
        return inv, simplify(solved, positive=True)
    if cls.kind == "loglog":
        return simplify(mul(ln(V), shrink), positive=True), simplify(exp(mul(new, grow)), positive=True)
    raise ValueError(cls.kind)


def make_chart(
    source: CoordinateChart,
    invariants: dict,
    f_def,
    u_solve,
    pivot: str,
    inverse: dict,
    *,
    dependent: str | None = None,
    generator: VectorField | None = None,
    label: str = "",
) -> InvariantChart:
    """Build a chart from text or expressions (used for published charts)."""
    names = tuple(invariants)
    names, dependent = _names_for(source, names, dependent)
    variables = tuple(source.variables) + (dependent,)

    def ex(v):
        return v if isinstance(v, Expr) else _parse_in(v, variables + names)

    return InvariantChart(
        source,
        names,
        dependent,
        tuple(ex(invariants[n]) for n in names),
        ex(f_def),
        ex(u_solve),
        pivot,
        tuple((k, ex(v)) for k, v in inverse.items()),
        generator,
        label,
    )


def _parse_in(text: str, variables) -> Expr:
    from .symcore import parse

    return parse(text, variables=tuple(variables))


# ---------------------------------------------------------------------------
# sampling boxes


def auto_box(*exprs: Expr, extra: dict | None = None) -> SamplingBox:
    """Positive sampling box; variables under a logarithm are kept above 1."""
    ranges: dict[str, tuple[float, float]] = {}
    for e in exprs:
        for n in walk(e):
            if isinstance(n, Func) and n.name == "ln":
                for v in free_variables(n.arg):
                    ranges[v] = LOG_RANGE
            elif isinstance(n, Const):
                ranges.setdefault(n.name, PARAM_RANGE)
    if extra:
        ranges.update(extra)
    return SamplingBox(ranges, DEFAULT_RANGE)


@dataclass
class ChartReport:
    annihilation: dict = field(default_factory=dict)
    round_trip: ZeroVerdict | None = None
    jacobian_rank: int | None = None
    expected_rank: int | None = None
    inverse: dict = field(default_factory=dict)

    @property
    def annihilation_ok(self) -> bool:
        return all(v.is_zero for v in self.annihilation.values())

    @property
    def ok(self) -> bool:
        return (
            self.annihilation_ok
            and (self.round_trip is None or self.round_trip.is_zero)
            and self.jacobian_rank == self.expected_rank
            and all(v.is_zero for v in self.inverse.values())
        )

    def failures(self) -> list[str]:
        out = [f"{k} not annihilated" for k, v in self.annihilation.items() if not v.is_zero]
        if self.round_trip is not None and not self.round_trip.is_zero:
            out.append("round trip fails")
        if self.jacobian_rank != self.expected_rank:
            out.append(f"jacobian rank {self.jacobian_rank} != {self.expected_rank}")
        out += [f"inverse of {k} inconsistent" for k, v in self.inverse.items() if not v.is_zero]
        return out

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "annihilation": {k: v.status.value for k, v in self.annihilation.items()},
            "round_trip": None if self.round_trip is None else self.round_trip.status.value,
            "jacobian_rank": self.jacobian_rank,
            "expected_rank": self.expected_rank,
            "inverse": {k: v.status.value for k, v in self.inverse.items()},
            "failures": self.failures(),
        }


def verify_chart(
    c: InvariantChart,
    generator: VectorField | None = None,
    *,
    samples: int = 50,
    seed: int = 0,
) -> ChartReport:
    """Annihilation, ``u_solve`` round trip, Jacobian rank and inverse consistency."""
    X = generator if generator is not None else c.generator
    src = c.source
    exprs = list(c.invariants) + [c.f_def]
    box = auto_box(*exprs, c.u_solve)
    rep = ChartReport()
    if X is not None:
        for name, e in zip(c.names + (c.dependent,), exprs):
            rep.annihilation[name] = is_zero(apply(X, e), box, samples, seed=seed, positive=True)
    back = substitute(c.u_solve, {c.dependent: c.f_def}, positive=True)
    rep.round_trip = is_zero(add(back, mul(Num(-1), Var(src.dependent))), box, samples, seed=seed, positive=True)
    rep.expected_rank = len(exprs)
    rep.jacobian_rank = _jacobian_rank(exprs, src.variables, box, seed)
    # each invariant, rewritten through the inverse map, must return its own name
    inv = dict(c.inverse)
    for name, e in zip(c.names, c.invariants):
        r = substitute(e, inv, positive=True)
        box2 = auto_box(r, extra={n: DEFAULT_RANGE for n in c.names if n not in box.ranges})
        rep.inverse[name] = is_zero(add(r, mul(Num(-1), Var(name))), box2, samples, seed=seed, positive=True)
    return rep


def _jacobian_rank(exprs, variables, box: SamplingBox, seed: int, points: int = 5) -> int:
    jac = [[differentiate(e, v) for v in variables] for e in exprs]
    rng = np.random.default_rng(seed)
    names = sorted(set().union(*(free_variables(e) for e in exprs)) | set(variables) | _consts(exprs))
    best = 0
    for _ in range(points * 4):
        p = box.draw(names, rng)
        try:
            J = np.array([[evaluate(d, p) for d in row] for row in jac], dtype=float)
        except EvaluationError:
            continue
        if not np.all(np.isfinite(J)):
            continue
        scale = max(1.0, float(np.abs(J).max()))
        best = max(best, int(np.linalg.matrix_rank(J, tol=1e-8 * scale)))
        points -= 1
        if points == 0:
            break
    return best


def _consts(exprs) -> set[str]:
    return {n.name for e in exprs for n in walk(e) if isinstance(n, Const)}


# ---------------------------------------------------------------------------
# reduction


@dataclass
class ReducedPDE:
    chart: InvariantChart
    equation: Expr
    prefactor: Expr
    raw: Expr
    factorization: ZeroVerdict | None = None

    @property
    def order_names(self) -> tuple[str, ...]:
        return self.chart.names

    def to_dict(self) -> dict:
        return {
            "chart": self.chart.describe(),
            "equation": render(self.equation),
            "prefactor": render(self.prefactor),
            "factorization": None if self.factorization is None else self.factorization.status.value,
        }


@dataclass
class ReducedODE(ReducedPDE):
    parent: ReducedPDE | None = None


def reference_monomial(dependent: str, names: tuple[str, ...]) -> Expr:
    """``f^2 f_w`` style term: the dependent variable squared times its last derivative."""
    F = Unknown(dependent)
    d = [0] * len(F.args)
    d[-1] = 1
    return mul(power(F, Num(2)), Unknown(dependent, None, d))


def _factors(t: Expr) -> tuple[Fraction, list[Expr]]:
    c, m = split_coeff(t)
    if m == ONE:
        return c, []
    return c, list(m.factors) if isinstance(m, Mul) else [m]


def _split_term(t: Expr, pivot: str):
    """``(coeff, unknown part, pivot part, rest)`` of one monomial."""
    c, fs = _factors(t)
    unk, piv, rest = [], [], []
    for f in fs:
        if has_unknown(f):
            unk.append(f)
        elif pivot in free_variables(f):
            if isinstance(f, Func) and f.name == "exp":
                terms = f.arg.terms if isinstance(f.arg, Add) else (f.arg,)
                dep = [x for x in terms if pivot in free_variables(x)]
                ind = [x for x in terms if pivot not in free_variables(x)]
                piv.append(exp(add(*dep)))
                if ind:
                    rest.append(exp(add(*ind)))
            else:
                piv.append(f)
        else:
            rest.append(f)
    return c, mul(*unk), mul(*piv), mul(*rest)


def _group_by_unknown(e: Expr) -> dict:
    out: dict = {}
    order = []
    for t in e.terms if isinstance(e, Add) else (e,):
        c, fs = _factors(t)
        unk = mul(*(f for f in fs if has_unknown(f)))
        rest = mul(Num(c), *(f for f in fs if not has_unknown(f)))
        if unk not in out:
            out[unk] = []
            order.append(unk)
        out[unk].append(rest)
    return {k: add(*out[k]) for k in order}


def reduce(residual: Expr, chart: InvariantChart, *, check: bool = True, samples: int = 60, seed: int = 0) -> ReducedPDE:
    """Rewrite ``residual`` in the chart's coordinates as ``prefactor * equation``."""
    raw, in_chart = _substitute_chart(residual, chart)
    src_vars = set(chart.source.variables) - set(chart.names) - {chart.dependent}
    equation, pre_new = _pivot_factor(in_chart, chart, src_vars)
    equation, content = normalize_content(equation, chart.dependent, chart.names)
    pre_new = mul(pre_new, content)
    prefactor = simplify(substitute(pre_new, chart.forward_map, simplify_result=False), positive=True)
    out = ReducedPDE(chart, equation, prefactor, raw)
    if check:
        out.factorization = check_factorization(out, samples=samples, seed=seed)
    return out


def _substitute_chart(residual: Expr, chart: InvariantChart) -> tuple[Expr, Expr]:
    src = chart.source
    if SIGNATURES.get(src.dependent) != src.independent:
        raise ReductionError(f"source chart {src.variables} does not match the unknown {src.dependent!r}")
    F = Unknown(chart.dependent, chart.invariants)
    repl = substitute(chart.u_solve, {chart.dependent: F}, simplify_result=False)
    raw = substitute_function(residual, src.dependent, repl, positive=True)
    in_chart = substitute(raw, chart.inverse_map, positive=True)
    expected_args = tuple(Var(n) for n in chart.names)
    for n in walk(in_chart):
        if isinstance(n, Unknown) and n.name == chart.dependent and n.args != expected_args:
            raise ReductionError(f"unknown-function arguments did not collapse to {chart.names}: {render(n)}")
    return raw, in_chart


def _pivot_factor(e: Expr, chart: InvariantChart, src_vars: set[str]):
    terms = e.terms if isinstance(e, Add) else (e,)
    if e == Num(0):
        return Num(0), ONE
    split = [_split_term(t, chart.pivot) for t in terms]
    base = split[0][2]
    inv_base = power(base, Num(-1))
    out = []
    for (c, unk, piv, rest), t in zip(split, terms):
        ratio = simplify(mul(piv, inv_base), positive=True)
        term = simplify(mul(Num(c), unk, rest, ratio), positive=True)
        leftover = free_variables(term) & src_vars
        if leftover:
            raise ReductionError(f"term {render(t)} keeps {sorted(leftover)} after removing the pivot factor")
        out.append(term)
    return simplify(add(*out), positive=True), base


def _monomial_exponents(t: Expr, bases: set[Expr]) -> dict:
    _, fs = _factors(t)
    out = {}
    for f in fs:
        b, e = (f.base, f.exp) if isinstance(f, Pow) else (f, Num(1))
        if b in bases:
            out[b] = e
    return out


def normalize_content(eq: Expr, dependent: str, names: tuple[str, ...]) -> tuple[Expr, Expr]:
    """Remove the common monomial content and make the reference term positive.

    Returns ``(equation, content)`` with ``original == content * equation``.
    The content collects the lowest power of each chart variable and named
    constant shared by all terms, the numeric gcd, and the sign.
    """
    eq = simplify(eq, positive=True)
    if eq == Num(0):
        return eq, ONE
    terms = list(eq.terms) if isinstance(eq, Add) else [eq]
    bases = {Var(n) for n in names} | {n for t in terms for n in walk(t) if isinstance(n, Const)}
    exps = [_monomial_exponents(t, bases) for t in terms]
    content = []
    for b in sorted(bases, key=lambda e: e.key):
        vals = [d.get(b, Num(0)) for d in exps]
        if all(isinstance(v, Num) for v in vals):
            m = min(v.value for v in vals)
            if m != 0:
                content.append(power(b, Num(m)))
        elif all(v == vals[0] for v in vals):
            content.append(power(b, vals[0]))
    coeffs = [split_coeff(t)[0] for t in terms]
    lcm = math.lcm(*(c.denominator for c in coeffs))
    g = math.gcd(*(int(c * lcm) for c in coeffs))
    scale = Fraction(g, lcm)
    ref = reference_monomial(dependent, names)
    grouped = _group_by_unknown(eq)
    key = ref if ref in grouped else min(grouped, key=lambda m: m.key)
    lead = grouped[key]
    lead_coeff = split_coeff(lead.terms[0] if isinstance(lead, Add) else lead)[0]
    if lead_coeff < 0:
        scale = -scale
    c = mul(Num(scale), *content)
    out = simplify(mul(eq, power(c, Num(-1))), positive=True)
    return out, c


def check_factorization(r: ReducedPDE, *, samples: int = 60, seed: int = 0) -> ZeroVerdict:
    """``prefactor * equation`` (back in source coordinates) equals the raw residual."""
    ch = r.chart
    back = substitute(r.equation, ch.forward_map, simplify_result=False)
    diff = add(mul(r.prefactor, back), mul(Num(-1), r.raw))
    box = auto_box(diff)
    return is_zero(diff, box, samples, seed=seed, positive=True, jet=True)


def reduce_ode(parent: ReducedPDE, V: VectorField | InvariantChart, **kw) -> ReducedODE:
    """Second-level reduction of a reduced PDE by a symmetry on ``(z, w, f)``."""
    chart = V if isinstance(V, InvariantChart) else characteristic_invariants(V)
    r = reduce(parent.equation, chart, **kw)
    return ReducedODE(r.chart, r.equation, r.prefactor, r.raw, r.factorization, parent=parent)


# ---------------------------------------------------------------------------
# comparison of equations


def primitive_part(e: Expr) -> Expr:
    """``e`` divided by the monomial content shared by all terms, including unknown powers."""
    e = simplify(e, positive=True)
    if e == Num(0):
        return e
    terms = list(e.terms) if isinstance(e, Add) else [e]
    per_term = []
    for t in terms:
        _, fs = _factors(t)
        d = {}
        for f in fs:
            b, x = (f.base, f.exp) if isinstance(f, Pow) else (f, Num(1))
            if isinstance(b, (Var, Const, Unknown)) and isinstance(x, Num):
                d[b] = x.value
        per_term.append(d)
    common = set(per_term[0])
    for d in per_term[1:]:
        common &= set(d)
    content = [power(b, Num(min(d[b] for d in per_term))) for b in sorted(common, key=lambda b: b.key)]
    coeffs = [split_coeff(t)[0] for t in terms]
    lcm = math.lcm(*(c.denominator for c in coeffs))
    g = math.gcd(*(int(c * lcm) for c in coeffs))
    out = simplify(mul(e, power(mul(Num(Fraction(g, lcm)), *content), Num(-1))), positive=True)
    first = out.terms[0] if isinstance(out, Add) else out
    if split_coeff(first)[0] < 0:
        out = simplify(mul(Num(-1), out))
    return out


@dataclass
class Comparison:
    kind: str  # exact | sign | content | numeric | mismatch
    detail: str = ""

    @property
    def matches(self) -> bool:
        return self.kind != "mismatch"

    @property
    def structural(self) -> bool:
        return self.kind in ("exact", "sign", "content")


def compare_equations(derived: Expr, reference: Expr, *, samples: int = 100, seed: int = 0) -> Comparison:
    """Equality up to sign, then up to monomial content, then numerically up to a factor."""
    d = simplify(derived, positive=True)
    p = simplify(reference, positive=True)
    if d == p:
        return Comparison("exact")
    if simplify(add(d, p)) == Num(0):
        return Comparison("sign")
    pd, pp = primitive_part(d), primitive_part(p)
    if pd == pp or simplify(add(pd, pp)) == Num(0):
        return Comparison("content", f"primitive part {render(pd)}")
    gd, gp = _group_by_unknown(pd), _group_by_unknown(pp)
    shared = [m for m in gd if m in gp]
    if shared:
        m = shared[0]
        diff = add(mul(pd, power(gd[m], Num(-1))), mul(Num(-1), pp, power(gp[m], Num(-1))))
        v = is_zero(diff, auto_box(diff), samples, seed=seed, positive=True, jet=True)
        if v.is_zero:
            return Comparison("numeric", "equal up to a non-constant factor")
    return Comparison("mismatch", f"derived {render(pd)} vs catalogued {render(pp)}")


__all__ = [
    "CHART_NAMES",
    "ChartReport",
    "CoefficientClass",
    "Comparison",
    "IntegrabilityError",
    "InvariantChart",
    "ReducedODE",
    "ReducedPDE",
    "ReductionError",
    "auto_box",
    "characteristic_invariants",
    "check_factorization",
    "classify_coefficient",
    "compare_equations",
    "make_chart",
    "normalize_content",
    "primitive_part",
    "reduce",
    "reduce_ode",
    "reference_monomial",
    "verify_chart",
]
