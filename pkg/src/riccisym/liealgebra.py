"""Finite-dimensional Lie algebras given by structure constants.

Conventions used throughout:

* ``c[i][j][k]`` (1-based in the public API) means ``[X_i, X_j] = sum_k c[i][j][k] X_k``.
* ``ad(X_i)`` is the matrix ``A`` with ``A[k][j] = c[i][j][k]``; it acts on column
  coefficient vectors.
* The adjoint map is ``Ad(exp(s X_i)) = exp(-s ad X_i)``, i.e.
  ``Ad(exp(s X_i)) X_j = X_j - s [X_i, X_j] + s^2/2 [X_i, [X_i, X_j]] - ...``.
* An :class:`AdjointMatrix` ``M`` sends coefficient vectors ``a`` to ``M a``;
  column ``j`` holds the coefficients of ``Ad(exp(s X_i)) X_j``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .symcore import (
    Expr,
    Num,
    Var,
    add,
    differentiate,
    evaluate,
    exp,
    free_symbols,
    mul,
    parse,
    power,
    render,
    simplify,
    substitute,
)

Scalar = Fraction | float | Expr

TABLE1_TEXT = """\
# [X_i, X_j] = value * X_k, 1-based "i j k value"
1 5 1 1
5 1 1 -1
2 6 2 1
6 2 2 -1
3 4 3 1
4 3 3 -1
"""


class NonClosedExponential(ArithmeticError):
    """``exp(s ad X)`` has no closed form in polynomials times rational exponentials."""


class AlgebraFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StructureConstants:
    dim: int
    c: tuple  # c[i][j][k], 0-based, exact Fractions

    @classmethod
    def zeros(cls, dim: int) -> StructureConstants:
        z = tuple(tuple(tuple(Fraction(0) for _ in range(dim)) for _ in range(dim)) for _ in range(dim))
        return cls(dim, z)

    @classmethod
    def from_entries(cls, dim: int, entries) -> StructureConstants:
        """Build from ``{(i, j, k): value}`` with 1-based indices; missing entries are 0."""
        c = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j, k), v in dict(entries).items():
            for idx in (i, j, k):
                if not 1 <= idx <= dim:
                    raise AlgebraFormatError(f"index {idx} outside 1..{dim}")
            c[i - 1][j - 1][k - 1] = Fraction(v)
        return cls(dim, tuple(tuple(tuple(row) for row in plane) for plane in c))

    @classmethod
    def from_text(cls, text: str, dim: int | None = None) -> StructureConstants:
        """Parse ``i j k value`` lines; ``#`` starts a comment."""
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise AlgebraFormatError(f"line {lineno}: expected 'i j k value', got {line!r}")
            try:
                i, j, k = (int(p) for p in parts[:3])
                value = Fraction(parts[3])
            except ValueError as exc:
                raise AlgebraFormatError(f"line {lineno}: {exc}") from None
            entries[(i, j, k)] = value
        if dim is None:
            dim = max((max(key) for key in entries), default=0)
        return cls.from_entries(dim, entries)

    def to_text(self) -> str:
        lines = [
            f"{i + 1} {j + 1} {k + 1} {self.c[i][j][k]}"
            for i, j, k in product(range(self.dim), repeat=3)
            if self.c[i][j][k] != 0
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    def __getitem__(self, ijk) -> Fraction:
        i, j, k = ijk
        return self.c[i - 1][j - 1][k - 1]

    def ad(self, i: int) -> list[list[Fraction]]:
        """Matrix of ``ad(X_i)`` (1-based ``i``) acting on column vectors."""
        n = self.dim
        return [[self.c[i - 1][j][k] for j in range(n)] for k in range(n)]

    def bracket_basis(self, i: int, j: int) -> LieElement:
        return LieElement(tuple(self.c[i - 1][j - 1]))


TABLE1 = StructureConstants.from_text(TABLE1_TEXT, dim=6)


@dataclass(frozen=True)
class LieElement:
    """Coefficient vector over the basis ``X_1..X_n``."""

    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(_normalize_scalar(v) for v in self.a))

    @classmethod
    def basis(cls, i: int, dim: int = 6) -> LieElement:
        return cls(tuple(Fraction(int(k == i - 1)) for k in range(dim)))

    @classmethod
    def zero(cls, dim: int = 6) -> LieElement:
        return cls((Fraction(0),) * dim)

    @property
    def dim(self) -> int:
        return len(self.a)

    def __getitem__(self, i: int) -> Scalar:
        """1-based coefficient access: ``X[4]`` is ``a_4``."""
        return self.a[i - 1]

    def __add__(self, other: LieElement) -> LieElement:
        return LieElement(tuple(p + q for p, q in zip(self.a, other.a)))

    def __sub__(self, other: LieElement) -> LieElement:
        return LieElement(tuple(p - q for p, q in zip(self.a, other.a)))

    def __rmul__(self, k) -> LieElement:
        return LieElement(tuple(k * v for v in self.a))

    def __neg__(self) -> LieElement:
        return LieElement(tuple(-v for v in self.a))

    def is_zero(self) -> bool:
        return all(_scalar_is_zero(v) for v in self.a)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.a)

    def as_expr(self, prefix: str = "X") -> Expr:
        return add(*(mul(_scalar_expr(v), Var(f"{prefix}{k + 1}")) for k, v in enumerate(self.a)))

    def render(self) -> str:
        return render_combination(self.a)

    def __str__(self):
        return self.render()


def _normalize_scalar(v) -> Scalar:
    if isinstance(v, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(v, Expr):
        return v.value if isinstance(v, Num) else v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, (Fraction, float)):
        return v
    return Fraction(v)


def _scalar_is_zero(v) -> bool:
    if isinstance(v, Expr):
        return simplify(v) == Num(0)
    return v == 0


def _scalar_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return Num(Fraction(v))


def render_combination(coeffs: Sequence[Scalar], prefix: str = "X") -> str:
    """Render ``sum a_k X_k`` in basis order, e.g. ``X5 - s*X1`` style terms."""
    parts: list[str] = []
    for k, v in enumerate(coeffs):
        if _scalar_is_zero(v):
            continue
        name = f"{prefix}{k + 1}"
        text = render(_scalar_expr(v)) if not isinstance(v, float) else repr(v)
        negative = text.startswith("-")
        body = text[1:] if negative else text
        if body == "1":
            term = name
        elif _needs_parens(body):
            term = f"({body})*{name}"
        else:
            term = f"{body}*{name}"
        if not parts:
            parts.append(("-" if negative else "") + term)
        else:
            parts.append((" - " if negative else " + ") + term)
    return "".join(parts) if parts else "0"


def _needs_parens(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and ch in "+-" and i > 0 and text[i - 1] != "^":
            return True
    return False


def parse_element(text: str, dim: int = 6, prefix: str = "X") -> LieElement:
    """Parse a linear combination such as ``"X1 + 2*X4 - X5"``."""
    names = [f"{prefix}{k + 1}" for k in range(dim)]
    e = parse(text, variables=names)
    extra = free_symbols(e) - set(names)
    coeffs = []
    for n in names:
        c = simplify(differentiate(e, n))
        if any(simplify(differentiate(c, m)) != Num(0) for m in names):
            raise ValueError(f"{text!r} is not linear in the basis elements")
        coeffs.append(c)
    rest = simplify(substitute(e, {n: Num(0) for n in names}))
    if rest != Num(0):
        raise ValueError(f"{text!r} has a term outside the span of {names[0]}..{names[-1]}")
    if extra:
        return LieElement(tuple(coeffs))
    return LieElement(tuple(c.value if isinstance(c, Num) else c for c in coeffs))


def bracket(X: LieElement, Y: LieElement, sc: StructureConstants = TABLE1) -> LieElement:
    """Bilinear extension of the structure constants."""
    n = sc.dim
    out = [Fraction(0)] * n
    for i in range(n):
        xi = X.a[i]
        if _is_literal_zero(xi):
            continue
        for j in range(n):
            yj = Y.a[j]
            if _is_literal_zero(yj):
                continue
            row = sc.c[i][j]
            for k in range(n):
                if row[k]:
                    out[k] = out[k] + row[k] * xi * yj
    return LieElement(tuple(simplify(v) if isinstance(v, Expr) else v for v in out))


def _is_literal_zero(v) -> bool:
    return (isinstance(v, (Fraction, float, int)) and v == 0) or (isinstance(v, Num) and v.value == 0)


# ---------------------------------------------------------------------------
# exact matrix utilities over Fraction


def _matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), Fraction(0)) for j in range(p)] for i in range(n)]


def _identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _solve_exact(M, b):
    """Solve ``M x = b`` (square, Fraction) by Gauss-Jordan; ``None`` if singular.

    ``b`` is a list of columns so several right-hand sides share one elimination.
    """
    n = len(M)
    aug = [list(M[i]) + [col[i] for col in b] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [[aug[i][n + c] for i in range(n)] for c in range(len(b))]


def _least_squares_exact(columns, target):
    """Exact coefficients ``x`` with ``sum x_k columns[k] == target``, or ``None``."""
    rows = len(target)
    m = len(columns)
    aug = [[columns[k][r] for k in range(m)] + [target[r]] for r in range(rows)]
    pivots = []
    r = 0
    for col in range(m):
        piv = next((q for q in range(r, rows) if aug[q][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for q in range(rows):
            if q != r and aug[q][col] != 0:
                f = aug[q][col]
                aug[q] = [v - f * w for v, w in zip(aug[q], aug[r])]
        pivots.append(col)
        r += 1
    if any(aug[q][m] != 0 for q in range(r, rows)):
        return None
    x = [Fraction(0)] * m
    for q, col in enumerate(pivots):
        x[col] = aug[q][m]
    return x


def minimal_polynomial(A, max_degree: int = 6) -> list[Fraction]:
    """Monic minimal polynomial of ``A`` as coefficients ``[p_0, ..., p_{d-1}, 1]``."""
    n = len(A)
    flat = lambda P: [P[i][j] for i in range(n) for j in range(n)]
    powers = [_identity(n)]
    for d in range(1, max_degree + 1):
        nxt = _matmul(powers[-1], A)
        coeffs = _least_squares_exact([flat(P) for P in powers], flat(nxt))
        if coeffs is not None:
            return [-c for c in coeffs] + [Fraction(1)]
        powers.append(nxt)
    raise NonClosedExponential(f"minimal polynomial of degree > {max_degree}")


def _poly_eval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_deflate(p, r):
    """Divide ``p`` (low-to-high) by ``(x - r)``; returns the quotient."""
    hi = list(reversed(p))
    out = [hi[0]]
    for c in hi[1:-1]:
        out.append(c + out[-1] * r)
    return list(reversed(out))


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def rational_roots(p) -> dict[Fraction, int]:
    """Rational roots of ``p`` with multiplicities; raises if ``p`` does not split over Q."""
    p = list(p)
    roots: dict[Fraction, int] = {}
    while len(p) > 1 and p[0] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        p = p[1:]
    if len(p) > 1:
        lcm = math.lcm(*(c.denominator for c in p))
        ints = [int(c * lcm) for c in p]
        cands = sorted(
            {Fraction(sgn * a, b) for a in _divisors(ints[0]) for b in _divisors(ints[-1]) for sgn in (1, -1)}
        )
        for r in cands:
            while len(p) > 1 and _poly_eval(p, r) == 0:
                roots[r] = roots.get(r, 0) + 1
                p = _poly_deflate(p, r)
    if len(p) > 1:
        raise NonClosedExponential("minimal polynomial has irrational or complex roots")
    return roots


def _falling(j: int, k: int) -> int:
    out = 1
    for q in range(k):
        out *= j - q
    return out


def exp_matrix(A, t: Expr, max_degree: int = 6) -> list[list[Expr]]:
    """Closed form of ``exp(t A)`` by Hermite interpolation on the spectrum of ``A``.

    ``exp(tA) = sum_j c_j(t) A^j`` where the polynomial ``sum_j c_j lam^j`` agrees
    with ``e^{t lam}`` and its first ``m-1`` lam-derivatives at every eigenvalue of
    multiplicity ``m`` in the minimal polynomial.
    """
    n = len(A)
    mp = minimal_polynomial(A, max_degree)
    d = len(mp) - 1
    roots = rational_roots(mp)
    rows, rhs = [], []
    for r, m in sorted(roots.items()):
        for k in range(m):
            rows.append([Fraction(_falling(j, k)) * (r ** (j - k) if j >= k else 0) for j in range(d)])
            rhs.append(mul(power(t, Num(k)), exp(mul(Num(r), t))))
    inv = _solve_exact(rows, [[Fraction(int(i == c)) for i in range(d)] for c in range(d)])
    if inv is None:
        raise NonClosedExponential("singular confluent Vandermonde system")
    # inv[c] is column c of the inverse; c_j = sum_c inv[c][j] * rhs[c]
    coeffs = [simplify(add(*(mul(Num(inv[c][j]), rhs[c]) for c in range(d)))) for j in range(d)]
    powers = [_identity(n)]
    for _ in range(1, d):
        powers.append(_matmul(powers[-1], A))
    return [
        [simplify(add(*(mul(Num(powers[j][a][b]), coeffs[j]) for j in range(d) if powers[j][a][b]))) for b in range(n)]
        for a in range(n)
    ]


@dataclass(frozen=True)
class AdjointMatrix:
    """``Ad(exp(s X_i))`` as an ``n x n`` matrix of expressions in ``s``."""

    index: int
    param: str
    entries: tuple
    _active: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        n = len(self.entries)
        active = tuple(
            (k, j, self.entries[k][j])
            for k in range(n)
            for j in range(n)
            if self.entries[k][j] != Num(int(k == j))
        )
        object.__setattr__(self, "_active", active)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def entry(self, k: int, j: int) -> Expr:
        """1-based entry: coefficient of ``X_k`` in ``Ad(exp(s X_i)) X_j``."""
        return self.entries[k - 1][j - 1]

    def column(self, j: int) -> tuple[Expr, ...]:
        return tuple(row[j - 1] for row in self.entries)

    def at(self, s) -> list[list[Scalar]]:
        n = self.dim
        out = [[Fraction(int(k == j)) for j in range(n)] for k in range(n)]
        for k, j, e in self._active:
            out[k][j] = _eval_entry(e, self.param, s)
        return out

    def render_column(self, j: int) -> str:
        return render_combination(self.column(j))


def adjoint_matrix(i: int, s: str = "s", sc: StructureConstants = TABLE1) -> AdjointMatrix:
    """Symbolic ``Ad(exp(s X_i)) = exp(-s ad X_i)``; raises :class:`NonClosedExponential`."""
    if not 1 <= i <= sc.dim:
        raise IndexError(f"basis index {i} outside 1..{sc.dim}")
    t = mul(Num(-1), Var(s))
    M = exp_matrix(sc.ad(i), t)
    return AdjointMatrix(i, s, tuple(tuple(row) for row in M))


_ADJ_CACHE: dict = {}


def adjoint_matrices(sc: StructureConstants = TABLE1, s: str = "s") -> tuple[AdjointMatrix, ...]:
    key = (sc, s)
    hit = _ADJ_CACHE.get(key)
    if hit is None:
        hit = _ADJ_CACHE[key] = tuple(adjoint_matrix(i, s, sc) for i in range(1, sc.dim + 1))
    return hit


def _eval_entry(e: Expr, param: str, s) -> Scalar:
    if isinstance(s, float):
        return evaluate(e, {param: s})
    sval = s if isinstance(s, Expr) else Num(Fraction(s))
    v = substitute(e, {param: sval})
    if isinstance(v, Num):
        return v.value
    if not free_symbols(v):
        return evaluate(v, {})
    return v


def apply_adjoint(M: AdjointMatrix, s, X: LieElement) -> LieElement:
    """``M(s) X``.

    ``s`` may be a float, a rational, or an expression such as ``ln(2)``.  The
    result is exact whenever the entries evaluate to rationals (rational ``s``
    in polynomial entries, ``s = k ln q`` in exponential entries); otherwise the
    affected coefficients are floats.
    """
    a = list(X.a)
    touched: dict[int, list] = {}
    for k, j, e in M._active:
        if _is_literal_zero(X.a[j]) and k != j:
            continue
        touched.setdefault(k, []).append((j, e))
    for k, items in touched.items():
        acc = X.a[k] if not any(j == k for j, _ in items) else Fraction(0)
        for j, e in items:
            acc = acc + _mul_scalar(_eval_entry(e, M.param, s), X.a[j])
        a[k] = simplify(acc) if isinstance(acc, Expr) else acc
    return LieElement(tuple(a))


def _mul_scalar(p, q):
    if isinstance(p, float) or isinstance(q, float):
        if isinstance(p, Expr) or isinstance(q, Expr):
            return _scalar_expr(p if not isinstance(p, float) else Fraction(p)) * _scalar_expr(q)
        return float(p) * float(q)
    return p * q


@dataclass
class AlgebraReport:
    antisymmetry: list[tuple[int, int, int]]
    jacobi: list[tuple[int, int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.antisymmetry and not self.jacobi

    def to_dict(self) -> dict:
        return {"ok": self.ok, "antisymmetry": [list(v) for v in self.antisymmetry], "jacobi": [list(v) for v in self.jacobi]}


def validate_algebra(sc: StructureConstants) -> AlgebraReport:
    """Check antisymmetry and the Jacobi identity; violations are 1-based index tuples."""
    n = sc.dim
    c = sc.c
    anti = [
        (i + 1, j + 1, k + 1)
        for i, j, k in product(range(n), repeat=3)
        if i <= j and c[i][j][k] != -c[j][i][k]
    ]
    jac = []
    for i, j, l, k in product(range(n), repeat=4):
        total = Fraction(0)
        for a, b, d in ((i, j, l), (j, l, i), (l, i, j)):
            # [X_a, [X_b, X_d]] component k
            total += sum((c[b][d][m] * c[a][m][k] for m in range(n)), Fraction(0))
        if total != 0:
            jac.append((i + 1, j + 1, l + 1, k + 1))
    return AlgebraReport(anti, jac)


def commutator_table(sc: StructureConstants = TABLE1) -> list[list[str]]:
    return [[render_combination(sc.c[i][j]) for j in range(sc.dim)] for i in range(sc.dim)]


def adjoint_table(sc: StructureConstants = TABLE1, s: str = "s") -> list[list[str]]:
    """Row ``i``, column ``j``: ``Ad(exp(s X_i)) X_j``."""
    mats = adjoint_matrices(sc, s)
    return [[M.render_column(j) for j in range(1, sc.dim + 1)] for M in mats]


__all__ = [
    "TABLE1",
    "TABLE1_TEXT",
    "AdjointMatrix",
    "AlgebraFormatError",
    "AlgebraReport",
    "LieElement",
    "NonClosedExponential",
    "StructureConstants",
    "adjoint_matrices",
    "adjoint_matrix",
    "adjoint_table",
    "apply_adjoint",
    "bracket",
    "commutator_table",
    "exp_matrix",
    "minimal_polynomial",
    "parse_element",
    "rational_roots",
    "render_combination",
    "validate_algebra",
]
