"""Seeded random expression trees for property tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from riccisym.symcore import Const, Var, add, exp, ln, mul, power, tanh
from riccisym.symcore.expr import Num

VARS = ("x", "y", "t")


def random_expr(rng: np.random.Generator, depth: int = 3, *, constants: bool = True):
    """A random UnknownFunc-free expression, well defined on the box [0.5, 2]^3."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.6:
            return Var(VARS[rng.integers(len(VARS))])
        if r < 0.75 and constants:
            return Const("a")
        return Num(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
    kind = rng.integers(6)
    a = random_expr(rng, depth - 1, constants=constants)
    if kind == 0:
        return add(a, random_expr(rng, depth - 1, constants=constants))
    if kind == 1:
        return mul(a, random_expr(rng, depth - 1, constants=constants))
    if kind == 2:
        n = int(rng.integers(-2, 4))
        # negative powers only of a base bounded away from zero
        return power(a if n >= 0 else add(Num(1), power(a, Num(2))), Num(n))
    if kind == 3:
        # bounded argument keeps exp in range
        return exp(tanh(a))
    if kind == 4:
        # 1 + a^2 is positive everywhere
        return ln(add(Num(1), power(a, Num(2))))
    return tanh(a)
