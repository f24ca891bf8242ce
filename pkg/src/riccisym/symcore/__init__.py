"""Symbolic kernel: expression trees, parsing, calculus, normal forms, numerics."""

from .calculus import differentiate, substitute, substitute_function
from .expr import (
    FUNCTIONS,
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
    as_expr,
    count_nodes,
    div,
    exp,
    free_symbols,
    free_variables,
    func,
    has_unknown,
    ln,
    mul,
    neg,
    power,
    split_coeff,
    sub,
    tanh,
    unknowns,
    walk,
)
from .numeric import (
    DEFAULT_SEED,
    DomainViolation,
    EvaluationError,
    SamplingBox,
    UnboundSymbolError,
    UnknownFunctionError,
    ZeroStatus,
    ZeroVerdict,
    compiled,
    evaluate,
    freeze_unknowns,
    is_zero,
)
from .parser import ParseError, parse
from .printer import render
from .simplify import simplify

__all__ = [
    "DEFAULT_SEED",
    "FUNCTIONS",
    "ONE",
    "SIGNATURES",
    "ZERO",
    "Add",
    "Const",
    "DomainViolation",
    "EvaluationError",
    "Expr",
    "Func",
    "Mul",
    "Num",
    "ParseError",
    "Pow",
    "SamplingBox",
    "UnboundSymbolError",
    "Unknown",
    "UnknownFunctionError",
    "Var",
    "ZeroStatus",
    "ZeroVerdict",
    "add",
    "as_expr",
    "compiled",
    "count_nodes",
    "differentiate",
    "div",
    "evaluate",
    "exp",
    "free_symbols",
    "free_variables",
    "freeze_unknowns",
    "func",
    "has_unknown",
    "is_zero",
    "ln",
    "mul",
    "neg",
    "parse",
    "power",
    "render",
    "simplify",
    "split_coeff",
    "sub",
    "substitute",
    "substitute_function",
    "tanh",
    "unknowns",
    "walk",
]
