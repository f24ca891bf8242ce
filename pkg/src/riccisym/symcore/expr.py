"""Immutable expression trees.

Every node carries a structural key used for equality, hashing and the total
ordering that keeps sums and products canonical.  Nodes should be built with
the smart constructors (:func:`add`, :func:`mul`, :func:`power`, :func:`func`)
which flatten, fold numbers, collect like terms and merge powers.  Direct class
instantiation skips that normalisation and is reserved for internal use.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

FUNCTIONS = ("exp", "ln", "tanh")

# Default argument slots of the unknown functions; the slot names double as the
# derivative-suffix alphabet (u_xy, f_zw, g'').
SIGNATURES: dict[str, tuple[str, ...]] = {
    "u": ("x", "y", "t"),
    "f": ("z", "w"),
    "g": ("s",),
}

_RANK = {"Num": 0, "Const": 1, "Var": 2, "Unknown": 3, "Func": 4, "Pow": 5, "Mul": 6, "Add": 7}


class Expr:
    __slots__ = ("_hash", "_key")

    def __init__(self, key):
        self._key = key
        self._hash = hash(key)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Num) and self.value == other
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < other._key

    @property
    def key(self):
        return self._key

    # arithmetic sugar; foreign operand types defer to the other operand
    def __add__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else add(self, o)

    def __radd__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else add(o, self)

    def __sub__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else add(self, neg(o))

    def __rsub__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else add(o, neg(self))

    def __mul__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else mul(self, o)

    def __rmul__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else mul(o, self)

    def __truediv__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else mul(self, power(o, MINUS_ONE))

    def __rtruediv__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else mul(o, power(self, MINUS_ONE))

    def __pow__(self, other):
        o = _coerce(other)
        return NotImplemented if o is None else power(self, o)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        from .printer import render

        return f"Expr({render(self)!r})"

    def __str__(self):
        from .printer import render

        return render(self)

    def children(self) -> tuple[Expr, ...]:
        return ()


class Num(Expr):
    """Exact rational constant (integers are rationals with denominator 1)."""

    __slots__ = ("value",)

    def __init__(self, value):
        value = Fraction(value)
        self.value = value
        super().__init__((0, value))

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


class Const(Expr):
    """Named constant such as ``c1`` or ``a``; constant under differentiation."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        super().__init__((1, name))


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        super().__init__((2, name))


class Unknown(Expr):
    """Unknown function ``name(args)`` differentiated ``derivs[k]`` times in slot k."""

    __slots__ = ("args", "derivs", "name")

    def __init__(self, name: str, args=None, derivs=None):
        if args is None:
            args = tuple(Var(v) for v in SIGNATURES[name])
        args = tuple(args)
        if derivs is None:
            derivs = (0,) * len(args)
        derivs = tuple(int(d) for d in derivs)
        if len(derivs) != len(args):
            raise ValueError("derivative multi-index length must equal the argument count")
        if any(d < 0 for d in derivs):
            raise ValueError("derivative orders must be non-negative")
        self.name = name
        self.args = args
        self.derivs = derivs
        super().__init__((3, name, derivs, tuple(a._key for a in args)))

    def children(self):
        return self.args

    @property
    def order(self) -> int:
        return sum(self.derivs)

    def derivative(self, slot: int) -> Unknown:
        d = list(self.derivs)
        d[slot] += 1
        return Unknown(self.name, self.args, d)

    def has_default_args(self) -> bool:
        sig = SIGNATURES.get(self.name)
        return sig is not None and self.args == tuple(Var(v) for v in sig)


class Func(Expr):
    __slots__ = ("arg", "name")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        super().__init__((4, name, arg._key))

    def children(self):
        return (self.arg,)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        self.base = base
        self.exp = exp
        super().__init__((5, base._key, exp._key))

    def children(self):
        return (self.base, self.exp)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        super().__init__((6, tuple(f._key for f in self.factors)))

    def children(self):
        return self.factors


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        super().__init__((7, tuple(t._key for t in self.terms)))

    def children(self):
        return self.terms


ZERO = Num(0)
ONE = Num(1)
MINUS_ONE = Num(-1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, Rational)) and not isinstance(value, bool):
        return Num(value)
    if isinstance(value, float):
        return Num(Fraction(value))
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def _coerce(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, float)) and not isinstance(value, bool):
        return as_expr(value)
    return None


def is_num(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# term / factor decomposition helpers


def split_coeff(term: Expr) -> tuple[Fraction, Expr]:
    """Return ``(c, m)`` with ``term == c*m`` and ``m`` free of a numeric factor."""
    if isinstance(term, Num):
        return term.value, ONE
    if isinstance(term, Mul) and isinstance(term.factors[0], Num):
        rest = term.factors[1:]
        return term.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), term


def _with_coeff(c: Fraction, m: Expr) -> Expr:
    if m is ONE or m == ONE:
        return Num(c)
    if c == 1:
        return m
    rest = m.factors if isinstance(m, Mul) else (m,)
    return Mul((Num(c),) + rest)


def base_exp(factor: Expr) -> tuple[Expr, Expr]:
    if isinstance(factor, Pow):
        return factor.base, factor.exp
    return factor, ONE


# ---------------------------------------------------------------------------
# smart constructors


def add(*args: Expr) -> Expr:
    collected: dict = {}
    order: list = []

    def push(t: Expr):
        if isinstance(t, Add):
            for s in t.terms:
                push(s)
            return
        c, m = split_coeff(t)
        if c == 0:
            return
        k = m._key
        if k in collected:
            collected[k][0] += c
        else:
            collected[k] = [c, m]
            order.append(k)

    for a in args:
        push(as_expr(a))
    terms = [_with_coeff(c, m) for c, m in (collected[k] for k in order) if c != 0]
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    terms.sort(key=lambda t: split_coeff(t)[1]._key)
    return Add(terms)


def mul(*args: Expr) -> Expr:
    coeff = Fraction(1)
    bases: dict = {}
    order: list = []
    exp_args: list[Expr] = []

    def push(f: Expr):
        nonlocal coeff
        if isinstance(f, Mul):
            for g in f.factors:
                push(g)
            return
        if isinstance(f, Num):
            coeff *= f.value
            return
        if isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
            return
        b, e = base_exp(f)
        k = b._key
        if k in bases:
            bases[k][1].append(e)
        else:
            bases[k] = [b, [e]]
            order.append(k)

    for a in args:
        push(as_expr(a))
    if coeff == 0:
        return ZERO
    factors: list[Expr] = []
    rebuild = False
    for k in order:
        b, exps = bases[k]
        e = exps[0] if len(exps) == 1 else add(*exps)
        p = power(b, e)
        if isinstance(p, Num):
            coeff *= p.value
        elif p is ONE:
            continue
        else:
            if isinstance(p, Mul) or (isinstance(p, Func) and p.name == "exp"):
                rebuild = True
            factors.append(p)
    if exp_args:
        ex = func("exp", add(*exp_args))
        if isinstance(ex, Num):
            coeff *= ex.value
        else:
            if not (isinstance(ex, Func) and ex.name == "exp"):
                rebuild = True
            factors.append(ex)
    if rebuild:
        return mul(Num(coeff), *factors)
    if coeff == 0:
        return ZERO
    factors.sort(key=_factor_order)
    if not factors:
        return Num(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    if coeff == 1:
        return Mul(factors)
    return Mul([Num(coeff)] + factors)


def _factor_order(f: Expr):
    b, e = base_exp(f)
    return (b._key, e._key)


def _int_root(n: int, k: int):
    if n < 0:
        return None
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == n:
            return c
    return None


def _num_power(b: Fraction, e: Fraction):
    """Exact ``b**e`` when representable as a rational, else ``None``."""
    if e.denominator == 1:
        if b == 0 and e < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return b ** int(e)
    if b <= 0:
        return None
    num = _int_root(b.numerator, e.denominator)
    den = _int_root(b.denominator, e.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** e.numerator


def power(b: Expr, e: Expr) -> Expr:
    b, e = as_expr(b), as_expr(e)
    if isinstance(e, Num):
        ev = e.value
        if ev == 0:
            return ONE
        if ev == 1:
            return b
        if isinstance(b, Num):
            r = _num_power(b.value, ev)
            if r is not None:
                return Num(r)
            return Pow(b, e)
        if ev.denominator == 1:
            if isinstance(b, Pow):
                return power(b.base, mul(b.exp, e))
            if isinstance(b, Mul):
                return mul(*(power(f, e) for f in b.factors))
    if isinstance(b, Num):
        if b.value == 1:
            return ONE
        if b.value == 0 and isinstance(e, Num) and e.value > 0:
            return ZERO
    if isinstance(b, Func) and b.name == "exp":
        # (e^a)^q == e^(a q) for every real a
        return func("exp", mul(b.arg, e))
    return Pow(b, e)


def func(name: str, arg: Expr) -> Expr:
    arg = as_expr(arg)
    if name == "exp":
        if is_num(arg, 0):
            return ONE
        # exp(k*ln(q)) for a positive rational q needs no domain assumption
        k, m = split_coeff(arg)
        if (
            isinstance(m, Func)
            and m.name == "ln"
            and isinstance(m.arg, Num)
            and m.arg.value > 0
            and k.denominator == 1
        ):
            return Num(m.arg.value ** int(k))
    elif name == "ln":
        if is_num(arg, 1):
            return ZERO
        if isinstance(arg, Func) and arg.name == "exp":
            return arg.arg
    elif name == "tanh":
        if is_num(arg, 0):
            return ZERO
    return Func(name, arg)


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def div(a: Expr, b: Expr) -> Expr:
    return mul(a, power(b, MINUS_ONE))


def exp(a) -> Expr:
    return func("exp", as_expr(a))


def ln(a) -> Expr:
    return func("ln", as_expr(a))


def tanh(a) -> Expr:
    return func("tanh", as_expr(a))


# ---------------------------------------------------------------------------
# generic traversal


def rebuild(e: Expr, children: list[Expr]) -> Expr:
    """Rebuild ``e`` from new children through the smart constructors."""
    if isinstance(e, Add):
        return add(*children)
    if isinstance(e, Mul):
        return mul(*children)
    if isinstance(e, Pow):
        return power(children[0], children[1])
    if isinstance(e, Func):
        return func(e.name, children[0])
    if isinstance(e, Unknown):
        return Unknown(e.name, children, e.derivs)
    return e


def walk(e: Expr):
    """Yield every node of ``e`` once (pre-order, shared subtrees deduplicated)."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        yield n
        stack.extend(reversed(n.children()))


def free_symbols(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, (Var, Const))}


def free_variables(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def unknowns(e: Expr) -> set[Unknown]:
    return {n for n in walk(e) if isinstance(n, Unknown)}


def has_unknown(e: Expr) -> bool:
    return any(isinstance(n, Unknown) for n in walk(e))


def count_nodes(e: Expr) -> int:
    total = 0
    stack = [e]
    while stack:
        n = stack.pop()
        total += 1
        stack.extend(n.children())
    return total
