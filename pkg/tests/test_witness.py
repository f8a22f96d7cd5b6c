import random

import pytest
from hypothesis import given, settings, strategies as st

from alcself import reduction as rd
from alcself import witness as wt
from alcself.atm import (Configuration, RunNode, find_accepting_run, inject_tape_fault, is_valid_quasi_run,
                         is_valid_run, successors, untouched_cells)
from alcself.cq import exists_match, find_matches, is_homomorphism
from alcself.dl import KnowledgeBase, check_kb
from alcself.errors import ValidationError
from alcself.generators import random_configuration, random_layered_atm
from alcself.lemmas import compose, expected_spoilers


def tbox(axioms):
    return KnowledgeBase((), tuple(axioms))


def test_unit_domain_n2():
    unit = wt.build_unit(2)
    assert sorted(unit.domain) == ["", "0", "00", "01", "1", "10", "11"]
    assert check_kb(unit, tbox(rd.build_kb_unit(2))).ok


def test_unit_n1():
    unit = wt.build_unit(1)
    assert sorted(unit.domain) == ["", "0", "1"]
    assert sorted(unit.rel(rd.NEXT)) == [("0", "0"), ("1", "1")]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_unit_composition(n):
    unit = wt.build_unit(n)
    chain = compose(*(unit.rel(x) for i in range(1, n + 1) for x in (rd.ell(i), rd.r(i))))
    assert {w for root, w in chain if root == ""} == set(unit.domain)
    assert len(unit.domain) == 2 ** (n + 1) - 1


def test_unit_rejects_zero():
    with pytest.raises(ValidationError):
        wt.build_unit(0)


def test_config_tree_of_initial(acc):
    tree = wt.build_config_tree(acc, Configuration("00", "s_init", 0))
    assert tree.ext(rd.HD_HERE) == {"0"}
    assert tree.ext(rd.hd_let("0")) == {""}
    assert tree.ext(rd.st("s_init")) == {""}


def test_leaf_encoding(acc):
    tree = wt.build_config_tree(acc, Configuration("01", "e1", 1))
    assert tree.ext(rd.let("0")) == {"0"} and tree.ext(rd.let("1")) == {"1"}
    # cell 0 holds 0: left child in zz0, right in zz1; cell 1 holds 1, so the pair flips
    assert tree.ext(rd.ZERO) == {"00", "11"} and tree.ext(rd.ONE) == {"01", "10"}
    assert {"00", "10"} <= tree.ext(rd.L) and {"01", "11"} <= tree.ext(rd.R)


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_random_config_trees_model_k_conf(seed, n):
    rng = random.Random(seed)
    atm = random_layered_atm(rng, n, 3)
    cfg = random_configuration(rng, atm)
    assert check_kb(wt.build_config_tree(atm, cfg, rng.random() < 0.5),
                    tbox(rd.build_kb_conf(n, atm.states))).ok


def test_enriched_init(acc):
    tree = wt.build_enriched_tree(acc, acc.initial_configuration(), wt.INIT)
    assert tree.ext(rd.PHD_HERE) == {"0"}
    assert tree.ext(rd.phd_let("0")) == {""}
    assert tree.ext(rd.INIT) == {""}


def test_enriched_after_first_transition(acc, run):
    t = acc.transitions("s_init", "0")[0]
    assert rd.transition_id(t) == "s_init.0.0.e1.+1"
    cfg = run.children[0].config
    tree = wt.build_enriched_tree(acc, cfg, t)
    assert tree.ext(rd.HD_HERE) == {"1"}
    assert tree.ext(rd.PHD_HERE) == {"0"}
    assert "" in tree.ext(rd.pr_tr(t))


def test_enriched_precondition(acc):
    t = acc.transitions("s_init", "0")[0]
    with pytest.raises(ValidationError):
        wt.build_enriched_tree(acc, Configuration("00", "s_acc", 1), t)
    with pytest.raises(ValidationError):
        wt.build_enriched_tree(acc, acc.initial_configuration(), wt.INIT, root_left=False)


def test_qct_of_m_acc(acc, run, qct):
    assert wt.component_paths(qct) == ["", "0", "00", "1", "10"]
    assert qct.individuals == {"a": "#"}
    assert check_kb(qct, rd.build_kb_machine(acc)).ok
    assert not exists_match(qct, rd.build_query_machine(acc))


def test_qct_next_edges(qct):
    roots = {e for e in qct.domain if wt.split_element(e)[1] == ""}
    leaves = {e for e in qct.domain if len(wt.split_element(e)[1]) == 2}
    between_roots = {(d, e) for d, e in qct.rel(rd.NEXT) if d != e}
    loops = {(d, e) for d, e in qct.rel(rd.NEXT) if d == e}
    assert all(d in roots and e in roots for d, e in between_roots)
    assert len(between_roots) == 4
    assert loops == {(x, x) for x in leaves}


def test_qct_rejects_rejecting_state(rej):
    root = rej.initial_configuration()
    (b1, c1), (b2, c2) = successors(rej, root)
    kids = tuple(RunNode(c, b, (RunNode(successors(rej, c)[0][1], successors(rej, c)[0][0]),))
                 for b, c in ((b1, c1), (b2, c2)))
    with pytest.raises(ValidationError, match="rejecting"):
        wt.build_quasi_computation_tree(rej, RunNode(root, None, kids))


def test_tbox_only_qct(acc, run):
    q = wt.build_quasi_computation_tree(acc, run, tbox_only=True)
    assert not q.individuals
    assert check_kb(q, rd.build_kb_machine(acc, tbox_only=True)).ok


def test_fault_spoils(acc, run):
    faulty = inject_tape_fault(run, "0", 1)
    q = wt.build_quasi_computation_tree(acc, faulty)
    assert check_kb(q, rd.build_kb_machine(acc)).ok
    matches = find_matches(q, rd.build_query_machine(acc))
    assert matches == [("#10", "0#10")]
    (x, y), = matches
    assert x in q.ext(rd.ZERO) and y in q.ext(rd.ONE) and y in q.ext(rd.NO_PHD_ABV)
    assert wt.split_element(x)[1] == wt.split_element(y)[1]


def test_recover_round_trip(acc, qct):
    rebuilt, h = wt.recover_quasi_computation_tree(acc, qct)
    assert rebuilt == qct
    assert is_homomorphism(h, rebuilt.replace(individuals={}), qct)


def test_recover_tree_decode_error(acc):
    tree = wt.build_config_tree(acc, acc.initial_configuration())
    # two states at the root cannot be decoded
    broken = tree.with_member(rd.st("e1"), "")
    with pytest.raises(wt.DecodeError):
        wt.recover_tree(acc, broken, "", "conf")


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_main_dichotomy_on_random_machines(seed, depth):
    atm = random_layered_atm(random.Random(seed), 1, depth)
    found = find_accepting_run(atm)
    if found is None:
        return
    kb, query = rd.build_kb_machine(atm), rd.build_query_machine(atm)
    q = wt.build_quasi_computation_tree(atm, found)
    assert check_kb(q, kb).ok
    assert not exists_match(q, query)
    faults = [inject_tape_fault(found, node, cell) for node, cell in untouched_cells(found)]
    # flipping the cell a node reads may change its transition and break the subtree
    faults = [f for f in faults if is_valid_quasi_run(atm, f, strict=False).ok]
    for faulty in faults[:3]:
        assert not is_valid_run(atm, faulty).ok
        fq = wt.build_quasi_computation_tree(atm, faulty)
        assert check_kb(fq, kb).ok
        assert set(find_matches(fq, query)) == expected_spoilers(fq, atm.n) != set()
