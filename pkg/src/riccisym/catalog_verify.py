"""Catalogued charts, reduced ODEs and closed-form solutions, and their verification.

Every catalogued solution is treated as a claim.  :func:`verify_all` checks
each claim independently and aggregates the verdicts into a deterministic
report; failures are report content, never exceptions.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .reduction import (
    InvariantChart,
    characteristic_invariants,
    compare_equations,
    make_chart,
    reduce,
    verify_chart,
)
from .symcore import (
    Expr,
    Num,
    Pow,
    ZeroStatus,
    add,
    compiled,
    count_nodes,
    differentiate,
    free_symbols,
    mul,
    parse,
    render,
    simplify,
    substitute,
    substitute_function,
    walk,
)
from .symcore.numeric import EvaluationError, top_terms
from .vectorfields import (
    MAIN,
    REDUCED,
    _param,
    field_from_text,
    flow_expr,
    parse_vector_field,
    transform_solution,
)

REPORT_VERSION = 1
DEFAULT_SAMPLES = 100
DEFAULT_TOL = 1e-8
GUARD_MARGIN = 1e-3
# exact simplification of a residual is only attempted below this size
PROOF_NODE_LIMIT = 3000

PARAM_RANGES = {"c1": (0.5, 2.5), "c2": (0.5, 2.0), "a": (0.5, 2.0)}
# c1 = 1 makes several power-law entries degenerate
C1_EXCLUSION = 0.05
POINT_RANGE = (0.5, 2.0)
CLOSURE_S = (0.3, -0.3)

EQ2 = parse("u(x,y,t)^2*u_t + u_y*u_x - u(x,y,t)*u_xy")


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class ChartEntry:
    row: int
    generator_text: str
    chart: InvariantChart
    equation: Expr
    prefactor: Expr | None = None

    @property
    def label(self) -> str:
        return f"T3_{self.row}"


@dataclass(frozen=True)
class OdeEntry:
    label: str
    row: int
    symmetry_text: str
    s: Expr
    g: Expr
    equation: Expr
    chart: dict | None = None


@dataclass(frozen=True)
class SolutionEntry:
    label: str
    u: Expr
    g: Expr | None = None
    domain: dict = field(default_factory=dict)
    s_domain: tuple[float, float] = POINT_RANGE
    u_text: str = ""
    g_text: str = ""

    def __post_init__(self):
        stray = free_symbols(self.u) - {"x", "y", "t", "c1", "c2", "a"}
        if stray:
            raise ValueError(f"{self.label}: solution uses unsupported symbols {sorted(stray)}")

    def point_range(self, v: str) -> tuple[float, float]:
        return tuple(self.domain.get(v, POINT_RANGE))


@dataclass
class Catalog:
    version: int = REPORT_VERSION
    charts: list[ChartEntry] = field(default_factory=list)
    symmetries: dict[int, dict[str, str]] = field(default_factory=dict)
    odes: list[OdeEntry] = field(default_factory=list)
    solutions: list[SolutionEntry] = field(default_factory=list)

    def solution(self, label: str) -> SolutionEntry:
        for s in self.solutions:
            if s.label == label:
                return s
        raise KeyError(label)

    def ode(self, label: str) -> OdeEntry:
        for o in self.odes:
            if o.label == label:
                return o
        raise KeyError(label)

    def chart_row(self, row: int) -> ChartEntry:
        for c in self.charts:
            if c.row == row:
                return c
        raise KeyError(row)

    def symmetry_fields(self, row: int) -> dict:
        return {k: parse_vector_field(v, REDUCED, named={}) for k, v in self.symmetries.get(row, {}).items()}

    def symmetry(self, row: int, text: str):
        return parse_vector_field(text, REDUCED, named=self.symmetry_fields(row))


def _chart_from_json(d: dict) -> ChartEntry:
    gen = field_from_text(d["generator"])
    chart = make_chart(
        MAIN,
        {"z": d["z"], "w": d["w"]},
        d["f"],
        d["u"],
        d["pivot"],
        d["inverse"],
        generator=gen,
        label=f"T3_{d['row']}",
    )
    pre = parse(d["prefactor"]) if "prefactor" in d else None
    return ChartEntry(int(d["row"]), d["generator"], chart, parse(d["equation"]), pre)


def catalog_from_dict(d: dict) -> Catalog:
    return Catalog(
        version=int(d.get("version", REPORT_VERSION)),
        charts=[_chart_from_json(c) for c in d.get("charts", [])],
        symmetries={int(k): dict(v) for k, v in d.get("symmetries", {}).items()},
        odes=[
            OdeEntry(
                o["label"],
                int(o["row"]),
                o["symmetry"],
                parse(o["s"]),
                parse(o["g"], variables=("f",)),
                parse(o["equation"]),
                o.get("chart"),
            )
            for o in d.get("odes", [])
        ],
        solutions=[
            SolutionEntry(
                s["label"],
                parse(s["u"]),
                parse(s["g"]) if s.get("g") else None,
                {k: tuple(v) for k, v in s.get("domain", {}).items()},
                tuple(s.get("s_domain", POINT_RANGE)),
                s["u"],
                s.get("g", ""),
            )
            for s in d.get("solutions", [])
        ],
    )


def load_catalog(path: str | Path | None = None) -> Catalog:
    """The shipped catalog, or a JSON document with the same layout."""
    if path is None:
        text = resources.files("riccisym").joinpath("data/catalog.json").read_text()
    else:
        text = Path(path).read_text()
    return catalog_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# residual checks


@dataclass
class CheckResult:
    status: str
    ok: bool
    max_residual: float = 0.0
    samples: int = 0
    witness: dict | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"status": self.status, "ok": self.ok, "max_residual": _finite(self.max_residual), "samples": self.samples}
        if self.witness is not None:
            out["witness"] = {k: _finite(v) if isinstance(v, float) else v for k, v in self.witness.items()}
        if self.detail:
            out["detail"] = self.detail
        return out


def _finite(v: float):
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def residual_terms(u: Expr) -> tuple[Expr, Expr, Expr]:
    """``(u^2 u_t, u_y u_x, -u u_xy)`` for a candidate solution ``u``."""
    ux, uy, ut = (differentiate(u, v) for v in ("x", "y", "t"))
    uxy = differentiate(ux, "y")
    return mul(u, u, ut), mul(uy, ux), mul(Num(-1), u, uxy)


def residual(u: Expr) -> Expr:
    """The target equation's left side at ``u``, simplified."""
    return simplify(substitute_function(EQ2, "u", u))


def denominators(e: Expr) -> list[Expr]:
    """Bases raised to negative numeric powers; sampling keeps them away from zero."""
    out = []
    for n in walk(e):
        neg = isinstance(n, Pow) and isinstance(n.exp, Num) and n.exp.value < 0
        if neg and free_symbols(n.base) and n.base not in out:
            out.append(n.base)
    return out


def _draw_params(names, rng: np.random.Generator) -> dict[str, float]:
    out = {}
    for n in names:
        lo, hi = PARAM_RANGES.get(n, POINT_RANGE)
        v = float(rng.uniform(lo, hi))
        if n == "c1":
            while abs(v - 1.0) < C1_EXCLUSION:
                v = float(rng.uniform(lo, hi))
        out[n] = v
    return out


def _entry_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


def relative_check(
    terms,
    ranges: dict[str, tuple[float, float]],
    rng: np.random.Generator,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    guards=(),
    exact: Expr | None = None,
) -> CheckResult:
    """Sample ``|sum terms| / max |term|`` (0 where every term vanishes); redraw inadmissible points up to 10x."""
    if exact is not None and count_nodes(exact) <= PROOF_NODE_LIMIT and simplify(exact) == Num(0):
        return CheckResult(ZeroStatus.PROVED_ZERO.value, True)
    fns = [compiled(t) for t in terms]
    gfns = [compiled(g) for g in guards]
    names = sorted(set().union(*(f.symbols for f in fns), *(g.symbols for g in gfns)))
    params = [n for n in names if n in PARAM_RANGES]
    coords = [n for n in names if n not in PARAM_RANGES]
    accepted = attempts = 0
    worst = 0.0
    while accepted < samples and attempts < 10 * samples:
        attempts += 1
        point = _draw_params(params, rng)
        for v in coords:
            lo, hi = ranges.get(v, POINT_RANGE)
            point[v] = float(rng.uniform(lo, hi))
        try:
            if any(abs(g(point)) < GUARD_MARGIN for g in gfns):
                continue
            vals = [f(point) for f in fns]
        except (EvaluationError, OverflowError, ZeroDivisionError):
            continue
        if not all(math.isfinite(v) for v in vals):
            continue
        accepted += 1
        rel = _relative(vals)
        if rel >= tol:
            # double precision cannot resolve cancellation at some points; recheck the point exactly enough
            rel = _precise_relative(terms, point)
        worst = max(worst, rel)
        if rel >= tol:
            return CheckResult(ZeroStatus.NON_ZERO.value, False, rel, accepted, {"point": point, "relative_residual": rel})
    if accepted == 0:
        return CheckResult(ZeroStatus.NON_ZERO.value, False, math.inf, 0, detail="no admissible sample point in the domain")
    return CheckResult(ZeroStatus.NUMERICALLY_ZERO.value, True, worst, accepted)


def _relative(vals) -> float:
    scale = max(abs(v) for v in vals)
    if scale == 0:
        return 0.0
    return float(abs(sum(vals)) / scale)


def _precise_relative(terms, point) -> float:
    try:
        return _relative([compiled(t, precise=True)(point) for t in terms])
    except EvaluationError:
        return math.inf


def verify_solution(
    entry: SolutionEntry,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    u: Expr | None = None,
    guards=None,
    tag: str = "",
) -> CheckResult:
    """Residual of the target equation at the entry's ``u`` (or an override), sampled on its domain."""
    u = entry.u if u is None else u
    terms = residual_terms(u)
    ranges = {v: entry.point_range(v) for v in ("x", "y", "t")}
    g = denominators(u) if guards is None else guards
    return relative_check(terms, ranges, _entry_rng(seed, entry.label + tag), samples, tol, g, exact=add(*terms))


def verify_ode_pair(
    ode: OdeEntry,
    entry: SolutionEntry,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> CheckResult:
    """Substitute the entry's ``g(s)`` into the catalogued ODE and sample over ``s``."""
    if ode.label != entry.label:
        raise ValueError(f"labels differ: {ode.label} vs {entry.label}")
    if entry.g is None:
        return CheckResult("Skipped", True, detail="no invariant solution recorded")
    terms = [substitute_function(t, "g", entry.g, positive=True) for t in top_terms(ode.equation)]
    return relative_check(
        terms,
        {"s": entry.s_domain},
        _entry_rng(seed, entry.label + "/ode"),
        samples,
        tol,
        denominators(entry.g),
        exact=add(*terms),
    )


def verify_closure(
    entry: SolutionEntry,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    s_values=CLOSURE_S,
) -> dict[str, CheckResult]:
    """Each one-parameter group image of a solution must again be a solution."""
    out = {}
    guards = denominators(entry.u)
    for k in range(1, 7):
        for s in s_values:
            moved = transform_solution(k, s, entry.u)
            shifted_guards = [_move(g, k, s) for g in guards]
            out[f"g{k}({s:+g})"] = verify_solution(
                entry, samples, tol, seed, u=moved, guards=shifted_guards, tag=f"/g{k}{s:+g}"
            )
    return out


def _move(e: Expr, k: int, s: float) -> Expr:
    """``e`` pulled back along the flow, matching the argument shift of :func:`transform_solution`."""
    back = flow_expr(k, mul(Num(-1), _param(s)))
    return substitute(e, dict(zip(("x", "y", "t"), back[:3])), simplify_result=False)


# ---------------------------------------------------------------------------
# charts and reductions


def check_chart(entry: ChartEntry, samples: int = 50, seed: int = 0) -> CheckResult:
    rep = verify_chart(entry.chart, samples=samples, seed=seed)
    return CheckResult("ok" if rep.ok else "failed", rep.ok, detail="; ".join(rep.failures()))


def check_reduction(entry: ChartEntry, samples: int = 60, seed: int = 0) -> tuple[CheckResult, object]:
    r = reduce(EQ2, entry.chart, samples=samples, seed=seed)
    cmp = compare_equations(r.equation, entry.equation, seed=seed)
    ok = r.factorization is not None and r.factorization.is_zero
    detail = f"derived {render(r.equation)}; prefactor {render(r.prefactor)}"
    if entry.prefactor is not None:
        same = simplify(add(r.prefactor, mul(Num(-1), entry.prefactor)), positive=True) == Num(0)
        detail += "; catalogued prefactor " + ("matches" if same else "differs")
        ok = ok and same
    return CheckResult(cmp.kind, ok, detail=detail), r


def check_computed_chart(entry: ChartEntry, samples: int = 20, seed: int = 0) -> CheckResult:
    """The characteristic-system chart and the catalogued chart share their invariants."""
    from .reduction import _jacobian_rank, auto_box

    X = entry.chart.generator
    try:
        c = characteristic_invariants(X)
    except Exception as exc:  # noqa: BLE001 - reported, not raised
        return CheckResult("failed", False, detail=str(exc))
    exprs = list(entry.chart.invariants) + [entry.chart.f_def] + list(c.invariants) + [c.f_def]
    rank = _jacobian_rank(exprs, MAIN.variables, auto_box(*exprs), seed)
    ok = rank == 3
    return CheckResult(f"rank {rank}", ok, detail=json.dumps(c.describe(), sort_keys=True))


def ode_chart(catalog: Catalog, ode: OdeEntry) -> InvariantChart:
    """Chart for a second-level reduction: computed when integrable, catalogued otherwise."""
    V = catalog.symmetry(ode.row, ode.symmetry_text)
    if ode.chart is not None:
        return make_chart(
            REDUCED,
            {"s": render(ode.s)},
            render(ode.g),
            ode.chart["f"],
            ode.chart["pivot"],
            ode.chart["inverse"],
            generator=V,
            label=ode.label,
        )
    c = characteristic_invariants(V)
    return InvariantChart(c.source, c.names, c.dependent, c.invariants, c.f_def, c.u_solve, c.pivot, c.inverse, V, ode.label)


def check_ode_reduction(catalog: Catalog, ode: OdeEntry, samples: int = 60, seed: int = 0):
    parent = catalog.chart_row(ode.row)
    chart = ode_chart(catalog, ode)
    same_invariants = _same(chart.invariants[0], ode.s) and _same(chart.f_def, ode.g)
    r = reduce(parent.equation, chart, samples=samples, seed=seed)
    cmp = compare_equations(r.equation, ode.equation, seed=seed)
    ok = r.factorization is not None and r.factorization.is_zero and same_invariants
    detail = f"derived {render(r.equation)}"
    if not same_invariants:
        detail += f"; invariants {render(chart.invariants[0])}, {render(chart.f_def)} differ from the catalogue"
    return CheckResult(cmp.kind, ok, detail=detail), chart


def _same(a: Expr, b: Expr) -> bool:
    return simplify(add(a, mul(Num(-1), b)), positive=True) == Num(0)


def lift_solution(catalog: Catalog, ode: OdeEntry, entry: SolutionEntry, chart: InvariantChart | None = None) -> Expr:
    """``u(x, y, t)`` obtained by pushing ``g(s)`` back through both charts."""
    chart = ode_chart(catalog, ode) if chart is None else chart
    parent = catalog.chart_row(ode.row).chart
    g_of = substitute(entry.g, {"s": chart.invariants[0]}, simplify_result=False)
    f_expr = substitute(chart.u_solve, {chart.dependent: g_of}, simplify_result=False)
    f_xyt = substitute(f_expr, parent.forward_map, simplify_result=False)
    return substitute(parent.u_solve, {parent.dependent: f_xyt}, simplify_result=False)


# ---------------------------------------------------------------------------
# report


@dataclass
class ReportRow:
    label: str
    checks: dict[str, CheckResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    @property
    def status(self) -> str:
        main = self.checks.get("solution")
        if main is not None:
            return main.status
        return "ok" if self.ok else "failed"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "status": self.status,
            "ok": self.ok,
            "checks": {k: v.to_dict() for k, v in sorted(self.checks.items())},
        }


@dataclass
class VerificationReport:
    seed: int
    tol: float
    samples: int
    rows: list[ReportRow] = field(default_factory=list)
    version: int = REPORT_VERSION

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def row(self, label: str) -> ReportRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def failures(self) -> list[str]:
        return [r.label for r in self.rows if not r.ok]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "tol": self.tol,
            "samples": self.samples,
            "rows": [r.to_dict() for r in sorted(self.rows, key=lambda r: r.label)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def render_text(self) -> str:
        lines = [f"seed={self.seed} tol={self.tol:g} samples={self.samples}"]
        for r in sorted(self.rows, key=lambda r: r.label):
            bad = [k for k, c in sorted(r.checks.items()) if not c.ok]
            mark = "ok  " if r.ok else "FAIL"
            tail = f"  failing: {', '.join(bad)}" if bad else ""
            lines.append(f"{mark} {r.label:6s} {r.status}{tail}")
        lines.append(f"{len(self.rows) - len(self.failures())}/{len(self.rows)} rows pass")
        return "\n".join(lines)


def verify_entry(
    catalog: Catalog,
    label: str,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    closure: bool = True,
) -> ReportRow:
    """All checks attached to one catalogued solution label."""
    entry = catalog.solution(label)
    row = ReportRow(label)
    row.checks["solution"] = verify_solution(entry, samples, tol, seed)
    try:
        ode = catalog.ode(label)
    except KeyError:
        ode = None
    if ode is not None:
        row.checks["ode_pair"] = verify_ode_pair(ode, entry, samples, tol, seed)
        try:
            red, chart = check_ode_reduction(catalog, ode, seed=seed)
            row.checks["ode_reduction"] = red
            if entry.g is not None:
                lifted = lift_solution(catalog, ode, entry, chart)
                row.checks["lifted"] = verify_solution(entry, samples, tol, seed, u=lifted, tag="/lifted")
        except Exception as exc:  # noqa: BLE001 - a failed derivation is report content
            row.checks["ode_reduction"] = CheckResult("error", False, detail=f"{type(exc).__name__}: {exc}")
    if closure and row.checks["solution"].ok:
        for k, v in verify_closure(entry, samples, tol, seed).items():
            row.checks[f"closure {k}"] = v
    return row


def verify_chart_row(entry: ChartEntry, seed: int = 0) -> ReportRow:
    row = ReportRow(entry.label)
    row.checks["chart"] = check_chart(entry, seed=seed)
    row.checks["computed_chart"] = check_computed_chart(entry, seed=seed)
    try:
        row.checks["reduction"], _ = check_reduction(entry, seed=seed)
    except Exception as exc:  # noqa: BLE001
        row.checks["reduction"] = CheckResult("error", False, detail=f"{type(exc).__name__}: {exc}")
    return row


def verify_all(
    catalog: Catalog | None = None,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    labels=None,
    closure: bool = True,
) -> VerificationReport:
    """Charts, reductions, ODE pairs, solutions and closure for the whole catalog."""
    catalog = load_catalog() if catalog is None else catalog
    rep = VerificationReport(seed, tol, samples)
    if labels is None:
        rep.rows.extend(verify_chart_row(c, seed) for c in catalog.charts)
        wanted = [s.label for s in catalog.solutions]
    else:
        wanted = list(labels)
    for label in wanted:
        rep.rows.append(verify_entry(catalog, label, samples, tol, seed, closure=closure))
    rep.rows.sort(key=lambda r: r.label)
    return rep


__all__ = [
    "EQ2",
    "Catalog",
    "ChartEntry",
    "CheckResult",
    "OdeEntry",
    "ReportRow",
    "SolutionEntry",
    "VerificationReport",
    "catalog_from_dict",
    "check_chart",
    "check_computed_chart",
    "check_ode_reduction",
    "check_reduction",
    "denominators",
    "lift_solution",
    "load_catalog",
    "ode_chart",
    "relative_check",
    "residual",
    "residual_terms",
    "verify_all",
    "verify_chart_row",
    "verify_closure",
    "verify_entry",
    "verify_ode_pair",
    "verify_solution",
]
