import random

import pytest
from hypothesis import given, strategies as st

from alcself import reduction as rd
from alcself import witness as wt
from alcself.cq import (Cq, MatchBudgetExceeded, canonical_query, exists_match, expand_path,
                        find_homomorphism, find_match, find_matches, is_homomorphism, is_match)
from alcself.dl import Interpretation
from alcself.errors import ValidationError
from alcself.generators import random_cq, random_interpretation

from conftest import brute_homomorphism_exists, brute_matches


def test_guarded_path():
    q = expand_path(["A?", "r", "B?"], ("x0", "x1"))
    assert q.concept_atoms == {("A", "x0"), ("B", "x1")}
    assert q.role_atoms == {("r", "x0", "x1")}


def test_two_step_path_has_one_fresh_variable():
    q = expand_path(["r", "s"], ("x", "y"))
    (z,) = q.variables - {"x", "y"}
    assert q.role_atoms == {("r", "x", z), ("s", z, "y")}


def test_path_errors():
    with pytest.raises(ValidationError, match="degenerate path"):
        expand_path(["A?"], ("x", "y"))
    with pytest.raises(ValidationError, match="malformed path"):
        expand_path(["r", "A?", "B?", "s"], ("x", "y"))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_q_rl_shape(n):
    q = rd.build_query_rl(n)
    assert len(q.role_atoms) == 2 * n and len(q.concept_atoms) == 2
    assert len(q.variables) == 2 * n + 1


def test_q_rl_on_two_unit():
    unit = wt.build_unit(2)
    expected = {("", w) for w in ("00", "01", "10", "11")}
    assert set(find_matches(unit, rd.build_query_rl(2))) == expected
    assert brute_matches(unit, rd.build_query_rl(2)) == expected


def test_single_atom():
    i = Interpretation({"d", "e", "f"}, {"A": {"d", "e"}}, {})
    assert find_matches(i, Cq({("A", "x")}, (), ("x",))) == [("d",), ("e",)]


def test_empty_extension_gives_no_match():
    i = Interpretation({"d"}, {}, {})
    assert not exists_match(i, Cq({("A", "x")}, ()))


def test_distinguished_must_occur():
    with pytest.raises(ValidationError):
        Cq({("A", "x")}, (), ("y",))


def test_budget_exhaustion():
    dom = {f"d{k}" for k in range(8)}
    i = Interpretation(dom, {}, {"r": {(a, b) for a in dom for b in dom if a != b}})
    # r is irreflexive, so a 9-clique needs 9 distinct images and the search must exhaust 8 elements
    vs = [f"v{k}" for k in range(9)]
    q = Cq((), {("r", a, b) for a in vs for b in vs if a != b})
    with pytest.raises(MatchBudgetExceeded):
        exists_match(i, q, budget=50)


@given(st.integers(0, 10**6))
def test_matches_agree_with_brute_force(seed):
    rng = random.Random(seed)
    i = random_interpretation(rng, rng.randint(1, 6))
    q = random_cq(rng, rng.randint(1, 4), rng.randint(1, 6))
    got = find_matches(i, q)
    assert set(got) == brute_matches(i, q)
    assert got == sorted(set(got))
    assert exists_match(i, q) == bool(got)
    m = find_match(i, q)
    assert (m is None) == (not got)
    if m is not None:
        assert is_match(i, q, m)


@given(st.integers(0, 10**6))
def test_matches_grow_with_the_structure(seed):
    rng = random.Random(seed)
    i = random_interpretation(rng, rng.randint(1, 5))
    q = random_cq(rng, rng.randint(1, 4), rng.randint(1, 5))
    d, e = rng.choice(sorted(i.domain)), rng.choice(sorted(i.domain))
    bigger = i.with_edge(rng.choice(sorted(i.roles) or ["r"]), d, e)
    assert set(find_matches(i, q)) <= set(find_matches(bigger, q))


def test_identity_homomorphism():
    unit = wt.build_unit(2)
    h = find_homomorphism(unit, unit, {w: w for w in unit.domain})
    assert h == {w: w for w in sorted(unit.domain)}


def prefixed(i, tag):
    return Interpretation({tag + d for d in i.domain},
                          {c: {tag + d for d in ext} for c, ext in i.concepts.items()},
                          {r: {(tag + d, tag + e) for d, e in ext} for r, ext in i.roles.items()})


def test_unit_maps_into_any_model_root():
    target = prefixed(wt.build_unit(2), "a").disjoint_union(prefixed(wt.build_unit(2, root_left=False), "b"))
    assert len(target.ext(rd.lvl(0))) == 2
    for d in sorted(target.ext(rd.lvl(0))):
        fresh = wt.build_unit(2, root_left=d in target.ext(rd.L))
        h = find_homomorphism(fresh, target, {"": d})
        assert h is not None and h[""] == d and is_homomorphism(h, fresh, target)


def test_unit_fails_without_successor():
    broken = wt.build_unit(2).with_edge(rd.ell(1), "", "0", False)
    assert find_homomorphism(wt.build_unit(2), broken, {"": ""}) is None


def test_canonical_query_matches_itself():
    unit = wt.build_unit(1)
    q = canonical_query(unit)
    assert is_match(unit, q, {w: w for w in unit.domain})


@given(st.integers(0, 10**6))
def test_homomorphism_search_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    names, roles = ["A", "B"], ["r", "s"]
    src = random_interpretation(rng, rng.randint(1, 4), names, roles, individuals=0)
    dst = random_interpretation(rng, rng.randint(1, 4), names, roles, individuals=0)
    anchors = {}
    if rng.random() < 0.5:
        anchors = {rng.choice(sorted(src.domain)): rng.choice(sorted(dst.domain))}
    h = find_homomorphism(src, dst, anchors)
    assert (h is not None) == brute_homomorphism_exists(src, dst, anchors)
    if h is not None:
        assert is_homomorphism(h, src, dst)
        assert all(h[k] == v for k, v in anchors.items())
