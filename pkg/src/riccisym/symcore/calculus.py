"""Differentiation and substitution."""

from __future__ import annotations

from .expr import (
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
    Unknown,
    Var,
    add,
    ln,
    mul,
    power,
    rebuild,
)


def _name(v) -> str:
    return v.name if isinstance(v, Var) else str(v)


def differentiate(e: Expr, v) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``.

    Unknown-function nodes differentiate by the chain rule through their
    arguments, incrementing the multi-index of the slot involved.
    """
    name = _name(v)
    memo: dict[Expr, Expr] = {}

    def d(n: Expr) -> Expr:
        hit = memo.get(n)
        if hit is not None:
            return hit
        r = _d(n)
        memo[n] = r
        return r

    dep: dict[Expr, bool] = {}

    def depends(n: Expr) -> bool:
        hit = dep.get(n)
        if hit is None:
            if isinstance(n, Var):
                hit = n.name == name
            else:
                hit = any(depends(k) for k in n.children())
            dep[n] = hit
        return hit

    def _d(n: Expr) -> Expr:
        if not depends(n):
            return ZERO
        if isinstance(n, (Num, Const)):
            return ZERO
        if isinstance(n, Var):
            return ONE if n.name == name else ZERO
        if isinstance(n, Add):
            return add(*(d(t) for t in n.terms))
        if isinstance(n, Mul):
            parts = []
            fs = n.factors
            for i, f in enumerate(fs):
                df = d(f)
                if df == ZERO:
                    continue
                parts.append(mul(*fs[:i], df, *fs[i + 1 :]))
            return add(*parts)
        if isinstance(n, Pow):
            b, x = n.base, n.exp
            if not depends(x):
                db = d(b)
                if db == ZERO:
                    return ZERO
                return mul(x, power(b, add(x, Num(-1))), db)
            if not depends(b):
                return mul(n, ln(b), d(x))
            return mul(n, add(mul(d(x), ln(b)), mul(x, d(b), power(b, Num(-1)))))
        if isinstance(n, Func):
            da = d(n.arg)
            if da == ZERO:
                return ZERO
            if n.name == "exp":
                return mul(n, da)
            if n.name == "ln":
                return mul(da, power(n.arg, Num(-1)))
            if n.name == "tanh":
                return mul(add(ONE, mul(Num(-1), power(n, Num(2)))), da)
        if isinstance(n, Unknown):
            parts = []
            for slot, arg in enumerate(n.args):
                da = d(arg)
                if da != ZERO:
                    parts.append(mul(n.derivative(slot), da))
            return add(*parts)
        raise TypeError(f"cannot differentiate {type(n).__name__}")

    return d(e)


def substitute(e: Expr, replacements: dict, *, simplify_result: bool = True, positive: bool = False) -> Expr:
    """Simultaneous substitution of symbols (variables or named constants).

    Keys are symbol names; values are expressions.  Replacement is performed in
    one pass, so ``{x: y, y: x}`` swaps.  The result is simplified unless
    ``simplify_result`` is false.
    """
    reps = {_name(k): v for k, v in replacements.items()}
    out = _subst(e, reps)
    if simplify_result:
        from .simplify import simplify

        out = simplify(out, positive=positive)
    return out


def _subst(e: Expr, reps: dict) -> Expr:
    memo: dict[Expr, Expr] = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, (Var, Const)):
            r = reps.get(n.name, n)
        else:
            kids = n.children()
            if not kids:
                r = n
            else:
                new = [go(k) for k in kids]
                r = n if all(a is b for a, b in zip(new, kids)) else rebuild(n, new)
        memo[n] = r
        return r

    return go(e)


def substitute_function(e: Expr, name: str, replacement: Expr, *, simplify_result: bool = True, positive: bool = False) -> Expr:
    """Replace every ``name(args)`` node (and its derivatives) by ``replacement``.

    ``replacement`` is written in the default slot variables of ``name`` (for
    ``u`` these are x, y, t).  A node with multi-index ``alpha`` becomes the
    matching partial derivative of ``replacement`` with the slot variables then
    set to the node's arguments.
    """
    slots = SIGNATURES[name]
    cache: dict[tuple, Expr] = {}

    def derived(alpha: tuple) -> Expr:
        hit = cache.get(alpha)
        if hit is not None:
            return hit
        if not any(alpha):
            r = replacement
        else:
            k = next(i for i, a in enumerate(alpha) if a)
            lower = list(alpha)
            lower[k] -= 1
            r = differentiate(derived(tuple(lower)), slots[k])
        cache[alpha] = r
        return r

    memo: dict[Expr, Expr] = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(n)
        if hit is not None:
            return hit
        kids = n.children()
        new = [go(k) for k in kids]
        if isinstance(n, Unknown) and n.name == name:
            body = derived(n.derivs)
            if tuple(new) != tuple(Var(s) for s in slots):
                body = _subst(body, dict(zip(slots, new)))
            r = body
        elif kids and not all(a is b for a, b in zip(new, kids)):
            r = rebuild(n, new)
        else:
            r = n
        memo[n] = r
        return r

    out = go(e)
    if simplify_result:
        from .simplify import simplify

        out = simplify(out, positive=positive)
    return out
