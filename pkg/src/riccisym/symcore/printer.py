"""Render expressions back into the text grammar accepted by :func:`parse`."""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    SIGNATURES,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Num,
    Pow,
    Unknown,
    Var,
    split_coeff,
)

# binding strength of the rendered top-level operator
_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def render(e: Expr) -> str:
    return _render(e)[0]


def _frac(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        return (str(v.numerator), _ATOM) if v >= 0 else (str(v.numerator), _UNARY)
    s = f"{v.numerator}/{v.denominator}"
    return s, _PRODUCT if v > 0 else _UNARY


def _wrap(text: str, prec: int, need: int) -> str:
    return text if prec >= need else f"({text})"


def _unknown(e: Unknown) -> str:
    sig = SIGNATURES.get(e.name)
    if sig is None:
        raise ValueError(f"no signature registered for unknown function {e.name!r}")
    if len(sig) == 1:
        suffix = "'" * e.derivs[0]
    else:
        letters = "".join(v * d for v, d in zip(sig, e.derivs))
        suffix = "_" + letters if letters else ""
    head = e.name + suffix
    if e.has_default_args() and (suffix or e.name != "u"):
        return head
    return head + "(" + ", ".join(render(a) for a in e.args) + ")"


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _frac(e.value)
    if isinstance(e, (Var, Const)):
        return e.name, _ATOM
    if isinstance(e, Unknown):
        return _unknown(e), _ATOM
    if isinstance(e, Func):
        return f"{e.name}({render(e.arg)})", _ATOM
    if isinstance(e, Pow):
        base, bp = _render(e.base)
        if isinstance(e.base, Num) and e.base.value < 0:
            bp = _UNARY
        ex, ep = _render(e.exp)
        return f"{_wrap(base, bp, _ATOM)}^{_wrap(ex, ep, _ATOM)}", _POWER
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.terms):
            c, m = split_coeff(t)
            if i and c < 0:
                body = render(_scaled(-c, m))
                body = body if _render(_scaled(-c, m))[1] > _SUM else f"({body})"
                out.append(" - " + body)
            else:
                s, p = _render(t)
                out.append((" + " if i else "") + (s if p > _SUM else f"({s})"))
        return "".join(out), _SUM
    if isinstance(e, Mul):
        return _render_mul(e)
    raise TypeError(type(e))


def _scaled(c: Fraction, m: Expr) -> Expr:
    from .expr import mul

    return mul(Num(c), m)


def _render_mul(e: Mul) -> tuple[str, int]:
    c, m = split_coeff(e)
    factors = m.factors if isinstance(m, Mul) else (m,)
    num: list[str] = []
    den: list[str] = []
    for f in factors:
        if isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0:
            inv = f.base if f.exp.value == -1 else Pow(f.base, Num(-f.exp.value))
            den.append(_factor_text(inv))
        else:
            num.append(_factor_text(f))
    sign = "-" if c < 0 else ""
    c = abs(c)
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.insert(0, str(c.denominator))
    text = "*".join(num)
    if den:
        d = den[0] if len(den) == 1 and _is_atomic_text(den[0]) else "(" + "*".join(den) + ")"
        text = f"{text}/{d}"
    if sign:
        return sign + text, _UNARY
    return text, _PRODUCT


def _is_atomic_text(s: str) -> bool:
    depth = 0
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "+-*/^":
            return False
    return True


def _factor_text(f: Expr) -> str:
    s, p = _render(f)
    return s if p >= _POWER else f"({s})"
