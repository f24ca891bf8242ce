"""Floating-point evaluation and the sampling zero test."""

from __future__ import annotations

import decimal
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .expr import (
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Num,
    Pow,
    Unknown,
    Var,
    free_symbols,
    walk,
)
from .simplify import simplify

DEFAULT_SEED = 0x52696363
DEFAULT_SAMPLES = 200
DEFAULT_TOL = 1e-8


class EvaluationError(ArithmeticError):
    pass


class UnboundSymbolError(EvaluationError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unbound symbol"


class DomainViolation(EvaluationError):
    pass


class UnknownFunctionError(EvaluationError):
    pass


def _ln(v):
    if v <= 0:
        raise DomainViolation(f"ln of non-positive value {v!r}")
    return math.log(v)


def _exp(v):
    try:
        return math.exp(v)
    except OverflowError:
        raise DomainViolation(f"exp overflow at {v!r}") from None


def _pow(b, e):
    if b == 0 and e < 0:
        raise DomainViolation("division by zero")
    if b < 0 and not float(e).is_integer():
        raise DomainViolation(f"negative base {b!r} with non-integer exponent {e!r}")
    try:
        r = b**e
    except OverflowError:
        raise DomainViolation("power overflow") from None
    if isinstance(r, complex):
        raise DomainViolation("complex power")
    return r


_HELPERS = {"_ln": _ln, "_exp": _exp, "_pow": _pow, "_tanh": math.tanh}

PRECISE_DIGITS = 60
_D = decimal.Decimal


def _dln(v):
    if v <= 0:
        raise DomainViolation(f"ln of non-positive value {v!r}")
    return v.ln()


def _dpow(b, e):
    e = _D(e)
    if e == e.to_integral_value():
        if b == 0 and e < 0:
            raise DomainViolation("division by zero")
        return b ** int(e)
    if b <= 0:
        raise DomainViolation(f"non-positive base {b!r} with non-integer exponent")
    return b**e


def _dtanh(v):
    t = (-2 * abs(v)).exp()
    r = (1 - t) / (1 + t)
    return r if v >= 0 else -r


_PRECISE_HELPERS = {"_ln": _dln, "_exp": lambda v: v.exp(), "_pow": _dpow, "_tanh": _dtanh, "_D": _D}


class Compiled:
    """A straight-line Python function evaluating an expression.

    Shared subtrees are computed once.  Call with a mapping from symbol names
    to floats.  With ``precise=True`` the same program runs in
    ``PRECISE_DIGITS``-digit decimal arithmetic (for ill-conditioned points).
    """

    def __init__(self, e: Expr, precise: bool = False):
        bad = [n for n in walk(e) if isinstance(n, Unknown)]
        if bad:
            from .printer import render

            raise UnknownFunctionError(f"cannot evaluate unknown function node {render(bad[0])}")
        self.expr = e
        self.symbols = tuple(sorted(free_symbols(e)))
        index: dict[Expr, str] = {}
        lines: list[str] = []

        def emit(n: Expr) -> str:
            hit = index.get(n)
            if hit is not None:
                return hit
            if isinstance(n, Num):
                if precise:
                    code = f"(_D({n.value.numerator}) / _D({n.value.denominator}))"
                else:
                    code = repr(float(n.value))
            elif isinstance(n, (Var, Const)):
                code = f"_b[{n.name!r}]"
            elif isinstance(n, Add):
                code = " + ".join(emit(t) for t in n.terms)
            elif isinstance(n, Mul):
                code = " * ".join(emit(f) for f in n.factors)
            elif isinstance(n, Pow):
                if isinstance(n.exp, Num) and n.exp.value == -1:
                    code = f"_pow({emit(n.base)}, -1)"
                else:
                    code = f"_pow({emit(n.base)}, {emit(n.exp)})"
            elif isinstance(n, Func):
                code = f"_{n.name}({emit(n.arg)})"
            else:
                raise TypeError(type(n).__name__)
            name = f"v{len(index)}"
            index[n] = name
            lines.append(f"    {name} = {code}")
            return name

        out = emit(e)
        src = "def _f(_b):\n" + "\n".join(lines) + f"\n    return {out}\n"
        ns = dict(_PRECISE_HELPERS if precise else _HELPERS)
        exec(compile(src, "<riccisym-expr>", "exec"), ns)  # noqa: S102 - source generated from the expression tree
        self._fn = ns["_f"]
        self.precise = precise

    def __call__(self, bindings):
        """A float, or a ``Decimal`` for a precise program."""
        try:
            if self.precise:
                with decimal.localcontext() as ctx:
                    ctx.prec = PRECISE_DIGITS
                    ctx.traps[decimal.InvalidOperation] = True
                    return +self._fn({k: _D(v) for k, v in bindings.items()})
            return float(self._fn(bindings))
        except decimal.DivisionByZero:
            raise DomainViolation("division by zero") from None
        except (decimal.InvalidOperation, decimal.Overflow) as exc:
            raise DomainViolation(f"decimal evaluation failed: {exc!r}") from None
        except KeyError as exc:
            raise UnboundSymbolError(f"unbound symbol {exc.args[0]!r}") from None
        except ZeroDivisionError:
            raise DomainViolation("division by zero") from None
        except OverflowError:
            raise DomainViolation("overflow") from None


_cache: dict[tuple[Expr, bool], Compiled] = {}


def compiled(e: Expr, precise: bool = False) -> Compiled:
    key = (e, precise)
    c = _cache.get(key)
    if c is None:
        if len(_cache) > 4096:
            _cache.clear()
        c = _cache[key] = Compiled(e, precise)
    return c


def evaluate(e: Expr, bindings) -> float:
    """Evaluate ``e`` in IEEE double precision.

    Raises :class:`UnboundSymbolError`, :class:`DomainViolation` or
    :class:`UnknownFunctionError`.
    """
    return compiled(e)(bindings)


class ZeroStatus(str, enum.Enum):
    PROVED_ZERO = "ProvedZero"
    NUMERICALLY_ZERO = "NumericallyZero"
    NON_ZERO = "NonZero"


@dataclass
class ZeroVerdict:
    status: ZeroStatus
    max_magnitude: float = 0.0
    witness: dict | None = None
    samples: int = 0
    seed: int | None = None
    diagnostic: str = ""

    @property
    def is_zero(self) -> bool:
        return self.status is not ZeroStatus.NON_ZERO


@dataclass
class SamplingBox:
    """Axis-aligned box; symbols without an explicit range use ``default``."""

    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    default: tuple[float, float] | None = (0.5, 2.0)

    def range_of(self, name: str) -> tuple[float, float]:
        r = self.ranges.get(name, self.default)
        if r is None:
            raise KeyError(name)
        return r

    def draw(self, names, rng: np.random.Generator) -> dict[str, float]:
        out = {}
        for n in names:
            lo, hi = self.range_of(n)
            out[n] = float(rng.uniform(lo, hi))
        return out


def _as_box(domain) -> SamplingBox:
    if domain is None:
        return SamplingBox()
    if isinstance(domain, SamplingBox):
        return domain
    return SamplingBox(dict(domain))


def freeze_unknowns(e: Expr) -> tuple[Expr, dict[str, Expr]]:
    """Replace each distinct unknown-function node by a fresh variable.

    Used to test identities in jet space, where the function values and
    derivatives at a point are independent coordinates.
    """
    from .expr import rebuild

    nodes = sorted({n for n in walk(e) if isinstance(n, Unknown)}, key=lambda n: n.key)
    names = {n: f"_jet{i}" for i, n in enumerate(nodes)}
    memo: dict[Expr, Expr] = {}

    def go(n: Expr) -> Expr:
        if n in names:
            return Var(names[n])
        hit = memo.get(n)
        if hit is not None:
            return hit
        kids = n.children()
        r = rebuild(n, [go(k) for k in kids]) if kids else n
        memo[n] = r
        return r

    return go(e), {v: k for k, v in names.items()}


def top_terms(e: Expr) -> tuple[Expr, ...]:
    return e.terms if isinstance(e, Add) else (e,)


def is_zero(
    e: Expr,
    domain=None,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    *,
    seed: int = DEFAULT_SEED,
    positive: bool = False,
    jet: bool = False,
) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically on ``domain``.

    ``ProvedZero`` when the normal form is literally 0.  Otherwise ``e`` is
    sampled at ``samples`` seeded points and reported ``NumericallyZero`` when
    ``|e| < tol*(1 + largest |term|)`` everywhere.  Samples hitting a domain
    violation are redrawn, up to ten times the requested count.  With
    ``jet=True`` unknown-function nodes are sampled as free coordinates.
    """
    s = simplify(e, positive=positive)
    if isinstance(s, Num) and s.value == 0:
        return ZeroVerdict(ZeroStatus.PROVED_ZERO, 0.0, samples=0, seed=seed)
    target = e
    if jet:
        target, _ = freeze_unknowns(e)
    box = _as_box(domain)
    try:
        terms = [compiled(t) for t in top_terms(target)]
        whole = compiled(target)
    except UnknownFunctionError as exc:
        return ZeroVerdict(ZeroStatus.NON_ZERO, math.inf, seed=seed, diagnostic=str(exc))
    names = whole.symbols
    try:
        for n in names:
            box.range_of(n)
    except KeyError as exc:
        return ZeroVerdict(ZeroStatus.NON_ZERO, math.inf, seed=seed, diagnostic=f"no sampling range for {exc.args[0]!r}")
    rng = np.random.default_rng(seed)
    accepted = 0
    attempts = 0
    worst = 0.0
    while accepted < samples and attempts < 10 * samples:
        attempts += 1
        point = box.draw(names, rng)
        try:
            value = whole(point)
            scale = max((abs(t(point)) for t in terms), default=0.0)
        except EvaluationError:
            continue
        if not math.isfinite(value) or not math.isfinite(scale):
            continue
        accepted += 1
        worst = max(worst, abs(value))
        if abs(value) >= tol * (1.0 + scale):
            return ZeroVerdict(ZeroStatus.NON_ZERO, abs(value), witness={"point": point, "value": value}, samples=accepted, seed=seed)
    if accepted == 0:
        return ZeroVerdict(ZeroStatus.NON_ZERO, math.inf, samples=0, seed=seed, diagnostic="no admissible sample point in domain")
    return ZeroVerdict(ZeroStatus.NUMERICALLY_ZERO, worst, samples=accepted, seed=seed)


__all__ = [
    "DEFAULT_SEED",
    "Compiled",
    "DomainViolation",
    "EvaluationError",
    "SamplingBox",
    "UnboundSymbolError",
    "UnknownFunctionError",
    "ZeroStatus",
    "ZeroVerdict",
    "compiled",
    "evaluate",
    "freeze_unknowns",
    "is_zero",
    "top_terms",
]
