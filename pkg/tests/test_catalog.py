from __future__ import annotations

import json
from importlib import resources

import pytest

from riccisym.catalog_verify import (
    Catalog,
    SolutionEntry,
    catalog_from_dict,
    denominators,
    lift_solution,
    load_catalog,
    residual,
    residual_terms,
    verify_all,
    verify_closure,
    verify_entry,
    verify_ode_pair,
    verify_solution,
)
from riccisym.symcore import Num, parse, simplify, substitute

CATALOG = load_catalog()
PINNED = ("A1_1", "A2_2", "A3_3", "A1_7", "A1_8")


def raw_catalog() -> dict:
    return json.loads(resources.files("riccisym").joinpath("data/catalog.json").read_text())


@pytest.mark.parametrize(
    "u, expected",
    [
        ("c1", "0"),
        ("c2*y^(c1 - 1)*exp(-c1*x)", "0"),
        ("c1/y", "0"),
        ("x + t", "(x + t)^2"),
    ],
)
def test_residual(u, expected):
    assert simplify(residual(parse(u)) - parse(expected)) == Num(0)


def test_catalog_counts():
    assert len(CATALOG.charts) == 9
    assert len(CATALOG.odes) == 25
    assert len(CATALOG.solutions) == 25
    assert {o.label for o in CATALOG.odes} == {s.label for s in CATALOG.solutions}


@pytest.mark.parametrize("label", ["A1_1", "A1_7"])
def test_verify_solution_zero(label):
    res = verify_solution(CATALOG.solution(label))
    assert res.ok
    assert res.status in ("ProvedZero", "NumericallyZero")


def test_fake_solution_has_witness():
    fake = SolutionEntry("fake", parse("x + t"))
    res = verify_solution(fake)
    assert res.status == "NonZero"
    assert set(res.witness["point"]) == {"x", "t"}
    assert res.witness["relative_residual"] >= 1e-8


def test_unsupported_symbol_rejected():
    with pytest.raises(ValueError):
        SolutionEntry("bad", parse("x + k", variables=("k",)))


@pytest.mark.parametrize("label", ["A1_1", "A1_6", "A1_7"])
def test_ode_pair(label):
    assert verify_ode_pair(CATALOG.ode(label), CATALOG.solution(label)).ok


def test_ode_pair_label_mismatch():
    with pytest.raises(ValueError):
        verify_ode_pair(CATALOG.ode("A1_1"), CATALOG.solution("A1_7"))


@pytest.mark.parametrize(
    "u, expected",
    [("c1/(y*x) + exp(t)", {"x", "y"}), ("1/(1 - exp(x))", {"1 - exp(x)"}), ("x*y", set())],
)
def test_denominators(u, expected):
    assert set(denominators(parse(u))) == {parse(e) for e in expected}


def test_lifted_solution_matches_catalogue():
    ode = CATALOG.ode("A1_1")
    u = lift_solution(CATALOG, ode, CATALOG.solution("A1_1"))
    assert simplify(u - CATALOG.solution("A1_1").u, positive=True) == Num(0)


@pytest.mark.parametrize("label", PINNED)
def test_closure_of_pinned_rows(label):
    results = verify_closure(CATALOG.solution(label))
    assert len(results) == 12
    assert all(r.ok for r in results.values())


def test_empty_catalog_gives_empty_report():
    rep = verify_all(Catalog())
    assert rep.rows == []
    assert rep.ok
    assert json.loads(rep.to_json())["rows"] == []


def test_corrupted_entry_is_the_only_failure():
    d = raw_catalog()
    keep = [s for s in d["solutions"] if s["label"] in PINNED]
    keep[2] = dict(keep[2], u=keep[2]["u"] + " + x")
    cat = catalog_from_dict({"version": 1, "solutions": keep})
    rep = verify_all(cat, closure=False)
    bad = [r for r in rep.rows if r.status == "NonZero"]
    assert len(rep.rows) == len(PINNED)
    assert [r.label for r in bad] == [keep[2]["label"]]


def test_report_is_deterministic():
    a = verify_all(CATALOG, labels=["A1_1", "A2_4"], samples=30, seed=7).to_json()
    b = verify_all(CATALOG, labels=["A2_4", "A1_1"], samples=30, seed=7).to_json()
    assert a == b


def test_report_round_trip():
    rep = verify_all(CATALOG, labels=["A1_7"], samples=20)
    d = json.loads(rep.to_json())
    assert d["version"] == 1 and d["seed"] == 0 and d["samples"] == 20
    assert json.dumps(d, sort_keys=True, indent=2) == rep.to_json()


@pytest.mark.parametrize("label", ["A1_1", "A1_8"])
def test_c2_scaling_family(label):
    entry = CATALOG.solution(label)
    scaled_u = substitute(entry.u, {"c2": parse("2*c2")})
    assert simplify(residual(scaled_u) - 4 * residual(entry.u), positive=True) == Num(0)
    scaled = SolutionEntry(label, scaled_u, domain=entry.domain)
    assert verify_solution(scaled).ok == verify_solution(entry).ok


def test_verify_entry_checks():
    row = verify_entry(CATALOG, "A1_1", samples=30)
    assert row.ok
    assert {"solution", "ode_pair", "ode_reduction", "lifted"} <= set(row.checks)
    assert sum(k.startswith("closure") for k in row.checks) == 12


def test_catalog_path_override(tmp_path):
    d = raw_catalog()
    d["solutions"] = d["solutions"][:1]
    p = tmp_path / "cat.json"
    p.write_text(json.dumps(d))
    assert len(load_catalog(p).solutions) == 1

@pytest.mark.parametrize("u", ["c2*(x + t)", "c2*x*exp(t)/y", "c2*x/y"])
def test_residual_scaling_in_c2(u):
    # u^2 u_t is cubic in c2 and the other two terms are quadratic
    h = parse(u)
    t1, t2, t3 = residual_terms(h)
    scaled = residual(substitute(h, {"c2": parse("2*c2")}))
    assert simplify(scaled - (8 * t1 + 4 * (t2 + t3)), positive=True) == Num(0)
