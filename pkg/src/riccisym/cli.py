"""Command-line entry point: ``riccisym <subcommand> ...``.

Exit status is 0 on success, 1 when a verification reported failures and 2
for usage or input errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from . import __version__
from .catalog_verify import (
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    SolutionEntry,
    load_catalog,
    ode_chart,
    verify_all,
    verify_solution,
)
from .liealgebra import (
    adjoint_table,
    parse_element,
    render_combination,
    validate_algebra,
)
from .optimal import ZeroElementError, canonicalize_checked
from .reduction import (
    IntegrabilityError,
    InvariantChart,
    ReductionError,
    characteristic_invariants,
    compare_equations,
    reduce,
    verify_chart,
)
from .symcore import ParseError, parse, render, simplify
from .vectorfields import (
    EQ3_BASIS,
    MAIN,
    ODE_CHART,
    REDUCED,
    ChartMismatch,
    VectorField,
    commutator,
    element_field,
    parse_vector_field,
    structure_constants_from_basis,
    transform_solution,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def _table(rows: list[list[str]], header: list[str]) -> str:
    cells = [header] + rows
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def _field(text: str) -> VectorField:
    """A vector field on the first chart whose variables cover the text."""
    with contextlib.suppress(ValueError):
        return element_field(parse_element(text))
    last: Exception | None = None
    for chart in (MAIN, REDUCED, ODE_CHART):
        try:
            return parse_vector_field(text, chart)
        except (ParseError, ValueError) as exc:
            last = exc
    raise UsageError(f"cannot read {text!r} as a vector field: {last}")


def _same_field(X: VectorField, Y: VectorField) -> bool:
    if X.chart != Y.chart:
        return False
    return all(simplify(p - q) == parse("0") for p, q in zip(X.coefficients, Y.coefficients))


# ---------------------------------------------------------------------------
# subcommands


def cmd_table1(args) -> int:
    sc = structure_constants_from_basis(EQ3_BASIS)
    rows = [[f"X{i + 1}"] + [render_combination(sc.c[i][j]) for j in range(6)] for i in range(6)]
    report = validate_algebra(sc)
    payload = {"entries": [r[1:] for r in rows], "algebra": report.to_dict()}
    _emit(args, payload, _table(rows, ["[ , ]"] + [f"X{j}" for j in range(1, 7)]))
    return EXIT_OK


def cmd_table2(args) -> int:
    tab = adjoint_table()
    rows = [[f"X{i + 1}"] + r for i, r in enumerate(tab)]
    _emit(args, {"entries": tab}, _table(rows, ["Ad"] + [f"X{j}" for j in range(1, 7)]))
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    res = canonicalize_checked(parse_element(args.element))
    nf, w = res.normal_form, res.word
    text = "\n".join(
        [
            f"case     {nf.case_id}",
            f"normal   {nf.render()}",
            f"word     {w.render()}",
            f"verified {res.verified}",
        ]
    )
    _emit(args, res.to_dict(), text)
    return EXIT_OK if res.verified else EXIT_FAILED


def cmd_invariants(args) -> int:
    X = _field(args.field)
    chart = characteristic_invariants(X)
    rep = verify_chart(chart, samples=args.samples, seed=args.seed)
    payload = {"chart": chart.describe(), "verification": rep.to_dict()}
    lines = [f"generator {X.render()}"]
    lines += [f"{k} = {v}" for k, v in chart.describe().items() if k not in ("generator", "inverse", "pivot")]
    lines.append(f"verified {rep.ok}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_FAILED


def _level_one(args, catalog, X: VectorField):
    """Published chart when ``X`` is a catalogued generator, else the computed one."""
    if not args.computed:
        for entry in catalog.charts:
            if _same_field(entry.chart.generator, X):
                return entry.chart, entry
    return characteristic_invariants(X), None


def cmd_reduce(args) -> int:
    catalog = load_catalog(args.catalog)
    X = _field(args.field)
    if X.chart == MAIN:
        chart, entry = _level_one(args, catalog, X)
        residual = parse("u(x,y,t)^2*u_t + u_y*u_x - u(x,y,t)*u_xy")
    elif args.equation:
        chart, entry = characteristic_invariants(X), None
        residual = parse(args.equation)
    else:
        raise UsageError("a field on (z, w, f) needs --equation with the residual to reduce")
    r = reduce(residual, chart, samples=args.samples, seed=args.seed)
    payload = {"level": 1, "reduction": r.to_dict()}
    lines = [f"chart     {_chart_text(chart)}", f"equation  {render(r.equation)} = 0", f"prefactor {render(r.prefactor)}"]
    if entry is not None:
        cmp = compare_equations(r.equation, entry.equation, seed=args.seed)
        payload["catalogue_row"] = entry.row
        payload["comparison"] = cmp.kind
        lines.append(f"catalogue row {entry.row}: {cmp.kind}")
    ok = r.factorization is not None and r.factorization.is_zero
    if args.level == 2:
        if not args.sym:
            raise UsageError("--level 2 requires --sym")
        if entry is None:
            raise UsageError("second-level symmetries are catalogued only for the published generators")
        V = catalog.symmetry(entry.row, args.sym)
        ode = next((o for o in catalog.odes if o.row == entry.row and _same_field(catalog.symmetry(o.row, o.symmetry_text), V)), None)
        sub: InvariantChart = ode_chart(catalog, ode) if ode is not None else characteristic_invariants(V)
        r2 = reduce(r.equation, sub, samples=args.samples, seed=args.seed)
        payload["level"] = 2
        payload["ode"] = r2.to_dict()
        lines += [f"sub-chart {_chart_text(sub)}", f"ode       {render(r2.equation)} = 0", f"prefactor {render(r2.prefactor)}"]
        if ode is not None:
            cmp2 = compare_equations(r2.equation, ode.equation, seed=args.seed)
            payload["ode_label"] = ode.label
            payload["ode_comparison"] = cmp2.kind
            lines.append(f"catalogue {ode.label}: {cmp2.kind}")
        ok = ok and r2.factorization is not None and r2.factorization.is_zero
    lines.append(f"verified {ok}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAILED


def _chart_text(chart: InvariantChart) -> str:
    d = chart.describe()
    names = list(chart.names) + [chart.dependent]
    return "{" + ", ".join(f"{n}={d[n]}" for n in names) + "}" + f", {chart.source.dependent}={d[chart.source.dependent]}"


def cmd_verify(args) -> int:
    catalog = load_catalog(args.catalog)
    labels = [args.entry] if args.entry else None
    if args.entry:
        try:
            catalog.solution(args.entry)
        except KeyError:
            raise UsageError(f"no catalogue entry {args.entry!r}") from None
    rep = verify_all(catalog, args.samples, args.tol, args.seed, labels=labels, closure=not args.no_closure)
    if args.format == "json":
        print(rep.to_json())
    else:
        print(rep.render_text())
    return EXIT_OK if rep.ok else EXIT_FAILED


def cmd_transform(args) -> int:
    u = parse(args.solution)
    moved = transform_solution(args.k, args.s, u)
    entry = SolutionEntry("cli", u)
    before = verify_solution(entry, args.samples, args.tol, args.seed)
    after = verify_solution(entry, args.samples, args.tol, args.seed, u=moved, tag="/moved")
    payload = {"k": args.k, "s": args.s, "input": render(u), "output": render(moved), "input_residual": before.to_dict(), "output_residual": after.to_dict()}
    text = "\n".join([render(moved), f"residual before {before.status}, after {after.status}"])
    _emit(args, payload, text)
    return EXIT_OK if before.ok == after.ok else EXIT_FAILED


def cmd_commutator(args) -> int:
    X, Y = _field(args.first), _field(args.second)
    if X.chart != Y.chart:
        raise UsageError("both fields must live on the same chart")
    Z = commutator(X, Y)
    _emit(args, {"commutator": Z.render()}, Z.render())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="sampling seed (default 0)")
    p.add_argument("--samples", type=_positive_int, default=d(DEFAULT_SAMPLES), help="samples per check")
    p.add_argument("--tol", type=_positive_float, default=d(DEFAULT_TOL), help="relative tolerance")
    p.add_argument("--format", choices=("text", "json"), default=d("text"))
    p.add_argument("--catalog", default=d(None), help="catalogue JSON overriding the shipped one")


def _no_abbrev(add):
    def wrapped(*a, **kw):
        kw.setdefault("allow_abbrev", False)
        return add(*a, **kw)

    return wrapped


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riccisym", description="Lie-symmetry toolkit for u^2 u_t + u_y u_x - u u_xy = 0", allow_abbrev=False)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _add_globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser = _no_abbrev(sub.add_parser)

    sub.add_parser("table1", parents=[common], help="commutator table").set_defaults(fn=cmd_table1)
    sub.add_parser("table2", parents=[common], help="adjoint representation table").set_defaults(fn=cmd_table2)

    c = sub.add_parser("canonicalize", parents=[common], help="optimal-system normal form of an element")
    c.add_argument("element", help='e.g. "X1 + 2*X4 - X5"')
    c.set_defaults(fn=cmd_canonicalize)

    c = sub.add_parser("invariants", parents=[common], help="invariants of a vector field")
    c.add_argument("field", help='e.g. "X1 + X6" or "d_x + y*d_y - u*d_u"')
    c.set_defaults(fn=cmd_invariants)

    c = sub.add_parser("reduce", parents=[common], help="similarity reduction")
    c.add_argument("field")
    c.add_argument("--level", type=int, choices=(1, 2), default=1)
    c.add_argument("--sym", help="second-level symmetry, e.g. V2 or V1+V3")
    c.add_argument("--computed", action="store_true", help="use the computed chart even for catalogued generators")
    c.add_argument("--equation", help="residual to reduce when the field lives on (z, w, f)")
    c.set_defaults(fn=cmd_reduce)

    c = sub.add_parser("verify", parents=[common], help="verify the catalogue")
    c.add_argument("--entry", help="single solution label, e.g. A1_1")
    c.add_argument("--no-closure", action="store_true", help="skip the group-action closure checks")
    c.set_defaults(fn=cmd_verify)

    c = sub.add_parser("transform", parents=[common], help="apply a one-parameter group to a solution")
    c.add_argument("--k", type=int, choices=range(1, 7), required=True)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("solution")
    c.set_defaults(fn=cmd_transform)

    c = sub.add_parser("commutator", parents=[common], help="commutator of two vector fields")
    c.add_argument("first")
    c.add_argument("second")
    c.set_defaults(fn=cmd_commutator)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ZeroElementError, IntegrabilityError, ReductionError, ChartMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
