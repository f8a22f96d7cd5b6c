import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from alcself import reduction as rd
from alcself import witness as wt
from alcself.atm import Branch, m_acc, m_rej
from alcself.cq import find_matches
from alcself.dl import (BOTTOM, TOP, And, Exists, Forall, Gci, Implies, Interpretation,
                        KnowledgeBase, Name, Or, check_kb, eval_concept, subconcepts)
from alcself.errors import ValidationError
from alcself.generators import random_layered_atm


def by_label(axioms):
    return {ax.label: ax for ax in axioms}


def unit_count_from_index_ranges(n):
    lvl_disj = (n + 1) * n // 2
    ad_lvl = sum(2 * i for i in range(1, n + 1))
    # LvlCov, all-loops, leaves ≡ (2), LRCov, LRDisj
    return 6 + lvl_disj + 2 * n + 3 * n + ad_lvl + 2 * n


def test_lvlcov_n2():
    got = by_label(rd.build_kb_unit(2))["LvlCov"]
    assert got == Gci(TOP, Or(Name("Lvl_0"), Or(Name("Lvl_1"), Name("Lvl_2"))), "LvlCov")


@pytest.mark.parametrize("n", range(1, 7))
def test_unit_axiom_count(n):
    axioms = rd.build_kb_unit(n)
    assert len(axioms) == unit_count_from_index_ranges(n) == rd.unit_axiom_count(n)
    assert len(axioms) == 1.5 * n * n + 8.5 * n + 6


def test_unit_count_n2():
    assert len(rd.build_kb_unit(2)) == 29


@pytest.mark.parametrize("n", [1, 2, 3])
def test_units_model_k_unit(n):
    assert check_kb(wt.build_unit(n), KnowledgeBase((), tuple(rd.build_kb_unit(n)))).ok


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("q", [3, 5])
def test_conf_axiom_count(n, q):
    states = [f"s{k}" for k in range(q)]
    expected = unit_count_from_index_ranges(n + 1) + 20 + q * (q - 1) // 2 + 5 * n
    assert len(rd.build_kb_conf(n, states)) == expected == rd.conf_axiom_count(n, q)


def test_prop_hd_pos_shape():
    n = 2
    ax = by_label(rd.build_kb_conf(n, ["a", "b"]))["PropHdPos[2,1]"]
    assert ax.lhs == And(Name("Lvl_0"), Name("HdPos_2^1"))
    body = Implies(Name("Lvl_2"), Name("HdPos_2^1"))
    for i in (2, 1):
        body = Forall(f"ell_{i}", Forall(f"r_{i}", body))
    assert ax.rhs == body


def test_hd_here_equal_adr_shape():
    ax = by_label(rd.build_kb_conf(2, ["a", "b"]))["HdHereEqualAdr"]
    pieces = [Or(And(Name(f"Ad_{i}^0"), Name(f"HdPos_{i}^0")), And(Name(f"Ad_{i}^1"), Name(f"HdPos_{i}^1")))
              for i in (1, 2)]
    subs = set(subconcepts(ax.lhs))
    assert all(p in subs for p in pieces)
    assert ax.rhs == Name("HdHere")


def point(n, phd, hd):
    """One element carrying the bits of two n-bit addresses."""
    concepts = {}
    for i in range(1, n + 1):
        concepts[rd.phd_pos(i, phd[i - 1])] = {"e"}
        concepts[rd.hd_pos(i, hd[i - 1])] = {"e"}
    return Interpretation({"e"}, concepts, {})


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("d", [1, -1])
def test_increment_gadget_against_integers(n, d):
    gadget = rd.head_step_concept(n, d)
    for p, h in product(range(2 ** n), repeat=2):
        i = point(n, format(p, f"0{n}b"), format(h, f"0{n}b"))
        assert ("e" in eval_concept(i, gadget)) == (h == p + d), (p, h)


def test_increment_gadget_n1_plus():
    assert rd.head_step_concept(1, 1) == And(Name("PHdPos_1^0"), Name("HdPos_1^1"))
    assert rd.head_step_concept(1, -1) == And(Name("HdPos_1^0"), Name("PHdPos_1^1"))


def test_init_conf_contents(acc):
    ax = by_label(rd.build_kb_enr(acc))["InitConf"]
    subs = set(subconcepts(ax.rhs))
    assert And(Name("HdPos_1^0"), Name("PHdPos_1^0")) in subs
    assert Forall("ell_1", Forall("r_1", Implies(Name("Lvl_1"), Name("Let_0")))) in subs
    assert {Name("Lvl_0"), Name("L"), Name("St_s_init")} <= subs


def test_enr_axiom_count(acc):
    q, t, n = len(acc.states), len(acc.delta), acc.n
    expected = rd.conf_axiom_count(n, q) + 18 + 5 * n + 2 * t + t * (t - 1) // 2
    assert len(rd.build_kb_enr(acc)) == expected == rd.enr_axiom_count(n, q, t)


def test_machine_schemas(acc):
    kb = rd.build_kb_machine(acc)
    axioms = by_label(kb.tbox)
    st_ = lambda s: Name(f"St_{s}")
    assert axioms["AConfSucc[s_init]"] == Gci(st_("s_init"), And(Exists("next", Name("L")), Exists("next", Name("R"))),
                                              "AConfSucc[s_init]")
    assert axioms["NoRejectState"] == Gci(st_("s_rej"), BOTTOM, "NoRejectState")
    t1 = acc.transition("s_init", "0", Branch.FIRST)
    assert axioms["TransiUnivStateL[s_init,0]"].rhs == Forall("next", Implies(Name("L"), Name(rd.pr_tr(t1))))
    assert axioms["TransiUnivStateL[s_init,0]"].lhs == And(st_("s_init"), Name("HdLet_0"))
    assert [ax.label for ax in kb.abox] == ["InitIndividual"]


def test_machine_axiom_count_n1(acc):
    assert len(rd.build_kb_machine(acc)) == 141 == rd.machine_axiom_count(acc)


@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.integers(1, 4))
def test_machine_axiom_count_random(seed, n, depth):
    atm = random_layered_atm(random.Random(seed), n, depth)
    for tbox_only in (False, True):
        assert len(rd.build_kb_machine(atm, tbox_only)) == rd.machine_axiom_count(atm, tbox_only=tbox_only)
        assert rd.stray_symbols(rd.build_kb_machine(atm, tbox_only), atm, tbox_only) == []


def test_tbox_only_variant(acc):
    kb = rd.build_kb_machine(acc, tbox_only=True)
    assert not kb.abox
    assert "AuxInit" in kb.labels()
    assert len(kb) == len(rd.build_kb_machine(acc))


def test_labels_round_trip(acc):
    for ax in rd.build_kb_machine(acc).axioms:
        info = rd.parse_label(ax.label)
        assert info.schema in rd.SCHEMAS
        assert rd.label(info.schema, *info.indices) + (f".{info.direction}" if info.direction else "") == ax.label


def test_bad_label():
    with pytest.raises(ValidationError):
        rd.parse_label("NotASchema[1]")


def test_q_rl_counts():
    q = rd.build_query_rl(2)
    assert (len(q.role_atoms), len(q.concept_atoms), len(q.variables)) == (4, 2, 5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_component_query_sizes(n):
    m = n + 1
    assert len(rd.build_query_main(n)) == 2 * (2 * m + 2) + 1
    for i in range(1, m + 1):
        for b in (0, 1):
            assert len(rd.build_query_ith_bit(i, b, n)) == 4 * m + 1


@pytest.mark.parametrize("n", range(1, 9))
def test_q_m_atom_and_variable_counts(n):
    m = n + 1
    q = rd.build_query_machine(n)
    bag = 3 + sum(len(rd.build_query_main(n)) + len(rd.build_query_ith_bit(i, 0, n))
                  + len(rd.build_query_ith_bit(i, 1, n)) for i in range(1, m + 1))
    assert bag == 12 * m * m + 7 * m + 3
    # Lvl_m(x) and Lvl_m(y) occur 2m times each, Lvl_m(z) twice per q_addr
    assert len(q) == bag - 2 * (2 * m - 1) - m
    assert len(q) == 12 * m * m + 2 * m + 5 == rd.query_atom_count(n)
    assert len(q.variables) == 2 + m * (12 * m - 3) == rd.query_variable_count(n)


def test_q_m_asymmetry():
    q = rd.build_query_machine(1)
    assert {("zz0", "x"), ("zz1", "y"), ("NoPHdAbv", "y")} <= q.concept_atoms
    assert not {("zz1", "x"), ("zz0", "y"), ("NoPHdAbv", "x")} & q.concept_atoms


def test_bit_index_range():
    with pytest.raises(ValidationError):
        rd.build_query_ith_bit(3, 0, 1)


def test_q_main_on_single_enriched_tree(acc):
    tree = wt.build_enriched_tree(acc, acc.initial_configuration(), wt.INIT)
    q = rd.build_query_main(1)
    # the Lvl_0 guards need a root-to-root next edge, which a lone tree lacks
    assert find_matches(tree, q) == []
    unguarded = type(q)({a for a in q.concept_atoms if a[0] != "Lvl_0"}, q.role_atoms, q.distinguished)
    leaves = {w for w in tree.domain if len(w) == 2}
    assert set(find_matches(tree, unguarded)) == {(w, w) for w in leaves}


def test_reduce_stats(acc):
    bundle = rd.reduce(acc)
    stats = bundle.stats
    assert stats["axioms"] == sum(v for k, v in stats.items() if k.startswith("schema."))
    assert stats["axioms"] == stats["abox"] + stats["tbox"]
    assert stats["query_atoms"] == rd.query_atom_count(1)
    assert list(stats)[:2] == ["atm", "tbox_only"]


def test_acc_and_rej_differ_only_in_transition_schemas():
    a = set(rd.reduce(m_acc()).kb.axioms)
    r = set(rd.reduce(m_rej()).kb.axioms)
    changed = {rd.schema_of(ax.label) for ax in a ^ r}
    assert changed
    assert changed <= {"TrCov", "TrInitDisj", "TrDisj", "TransiCons", "TransiExistState",
                       "TransiUnivStateL", "TransiUnivStateR"}


def test_reduce_is_deterministic(acc):
    assert rd.reduce(acc) == rd.reduce(acc)
    assert rd.reduce(acc).fingerprint == rd.atm_fingerprint(m_acc())
