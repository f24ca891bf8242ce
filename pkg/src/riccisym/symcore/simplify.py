"""Normal form: expanded sums of monomials with exact rational coefficients.

Products of sums and positive integer powers of sums are expanded; negative
powers of sums stay as atoms.  The log/exp inverse rules that need positive
arguments (``exp(ln a) = a``, ``ln(a*b) = ln a + ln b``, ``(a*b)^p = a^p*b^p``
for symbolic ``p``) fire only with ``positive=True``.
"""

from __future__ import annotations

from .expr import (
    ONE,
    ZERO,
    Add,
    Expr,
    Func,
    Mul,
    Num,
    Pow,
    Unknown,
    add,
    func,
    mul,
    power,
    split_coeff,
)

MAX_EXPANSION_POWER = 12


class _Simplifier:
    def __init__(self, positive: bool):
        self.positive = positive
        self.memo: dict[Expr, Expr] = {}

    def __call__(self, e: Expr) -> Expr:
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        r = self._simplify(e)
        self.memo[e] = r
        # a normal form is its own normal form
        self.memo.setdefault(r, r)
        return r

    def _simplify(self, e: Expr) -> Expr:
        if isinstance(e, Add):
            return add(*(self(t) for t in e.terms))
        if isinstance(e, Mul):
            return self.expand_product([self(f) for f in e.factors])
        if isinstance(e, Pow):
            return self.power(self(e.base), self(e.exp))
        if isinstance(e, Func):
            return self.function(e.name, self(e.arg))
        if isinstance(e, Unknown):
            return Unknown(e.name, [self(a) for a in e.args], e.derivs)
        return e

    def expand_product(self, factors: list[Expr]) -> Expr:
        merged = mul(*factors)
        if not isinstance(merged, Mul):
            if isinstance(merged, (Pow, Func)) and merged not in factors:
                return self(merged)
            return merged
        sums = [f for f in merged.factors if isinstance(f, Add)]
        others = [f for f in merged.factors if not isinstance(f, Add)]
        if not sums:
            # power merging may have produced something reducible, e.g. exp(k ln x)
            if self.positive:
                return mul(*(self._refine(f) for f in merged.factors))
            return merged
        terms = [mul(*others)]
        for s in sums:
            terms = [mul(t, u) for t in terms for u in s.terms]
        return add(*(self._refine_term(t) for t in terms))

    def _refine(self, f: Expr) -> Expr:
        if isinstance(f, Func):
            return self.function(f.name, f.arg)
        if isinstance(f, Pow):
            return self.power(f.base, f.exp)
        return f

    def _refine_term(self, t: Expr) -> Expr:
        if not self.positive:
            return t
        if isinstance(t, Mul):
            return mul(*(self._refine(f) for f in t.factors))
        return self._refine(t)

    def power(self, b: Expr, e: Expr) -> Expr:
        if isinstance(e, Num) and e.is_integer and 1 < e.value <= MAX_EXPANSION_POWER and isinstance(b, Add):
            terms = list(b.terms)
            for _ in range(int(e.value) - 1):
                terms = [mul(p, q) for p in terms for q in b.terms]
            return add(*(self._refine_term(t) for t in terms))
        if self.positive:
            if isinstance(b, Mul):
                return self.expand_product([self.power(f, e) for f in b.factors])
            if isinstance(b, Pow):
                return self.power(b.base, self(mul(b.exp, e)))
        r = power(b, e)
        if isinstance(r, Mul):
            return self.expand_product(list(r.factors))
        if isinstance(r, Func) and not (isinstance(b, Func) and b == r):
            return self.function(r.name, self(r.arg))
        return r

    def function(self, name: str, arg: Expr) -> Expr:
        if not self.positive:
            return func(name, arg)
        if name == "exp":
            return self.exp_positive(arg)
        if name == "ln":
            return self.ln_positive(arg)
        return func(name, arg)

    def exp_positive(self, arg: Expr) -> Expr:
        # exp(p*ln(A) + rest) -> A^p * exp(rest)
        terms = arg.terms if isinstance(arg, Add) else (arg,)
        pulled: list[Expr] = []
        rest: list[Expr] = []
        for t in terms:
            logs = _single_log(t)
            if logs is None:
                rest.append(t)
            else:
                coeff, inner = logs
                pulled.append(self.power(inner, coeff))
        if not pulled:
            return func("exp", arg)
        return self.expand_product(pulled + [func("exp", add(*rest))])

    def ln_positive(self, arg: Expr) -> Expr:
        if isinstance(arg, Mul):
            return add(*(self.ln_positive(f) for f in arg.factors))
        if isinstance(arg, Num) and arg.value > 0 and arg.value.denominator != 1:
            v = arg.value
            return add(self.ln_positive(Num(v.numerator)), mul(Num(-1), self.ln_positive(Num(v.denominator))))
        if isinstance(arg, Pow):
            return self.expand_product([arg.exp, self.ln_positive(arg.base)])
        if isinstance(arg, Func) and arg.name == "exp":
            return arg.arg
        return func("ln", arg)


def _single_log(t: Expr):
    """``(p, A)`` when ``t == p*ln(A)`` with exactly one ln factor, else ``None``."""
    if isinstance(t, Func) and t.name == "ln":
        return ONE, t.arg
    if not isinstance(t, Mul):
        return None
    logs = [f for f in t.factors if isinstance(f, Func) and f.name == "ln"]
    if len(logs) != 1:
        return None
    rest = [f for f in t.factors if f is not logs[0]]
    coeff = mul(*rest)
    if any(isinstance(f, Func) and f.name == "ln" for f in (coeff.factors if isinstance(coeff, Mul) else (coeff,))):
        return None
    return coeff, logs[0].arg


def simplify(e: Expr, positive: bool = False) -> Expr:
    """Return the normal form of ``e``.

    With ``positive=True`` every symbol and every ln argument is assumed
    positive, enabling the log/exp inverse rules.
    """
    s = _Simplifier(positive)
    r = s(e)
    # a second pass settles terms created by late merges (e.g. exp rewrites)
    for _ in range(8):
        r2 = _Simplifier(positive)(r)
        if r2 == r:
            break
        r = r2
    return r


def is_literal_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0


def numerator_denominator(e: Expr) -> tuple[Expr, Expr]:
    """Split a monomial into factors with non-negative / negative exponents."""
    c, m = split_coeff(e)
    factors = m.factors if isinstance(m, Mul) else (() if m == ONE else (m,))
    num, den = [Num(c.numerator)], [Num(c.denominator)]
    for f in factors:
        if isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0:
            den.append(power(f.base, Num(-f.exp.value)))
        else:
            num.append(f)
    return mul(*num), mul(*den)


__all__ = ["ZERO", "is_literal_zero", "numerator_denominator", "simplify"]
