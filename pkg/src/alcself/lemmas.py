"""Desk-scale verification of the reduction's correctness lemmas.

Each ``criterion_k`` returns a list of :class:`Check` rows; the CLI prints
them as a traceability table and the acceptance tests assert on them.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from . import reduction as rd
from . import serialize as ser
from . import witness as wt
from .atm import (Atm, Configuration, OffTapeMove, find_accepting_run, inject_tape_fault,
                  is_accepting_oracle, is_valid_quasi_run, is_valid_run, m_acc, m_rej, successors,
                  untouched_cells)
from .cq import exists_match, find_homomorphism, find_matches
from .dl import Evaluator, Interpretation, KnowledgeBase, check_kb
from .errors import AlcSelfError
from .generators import all_quasi_runs, random_atm, random_cq, random_interpretation, random_kb


@dataclass(frozen=True)
class Check:
    criterion: int
    lemma: str
    passed: bool
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


def _check(criterion, lemma, passed, detail="") -> Check:
    return Check(criterion, lemma, bool(passed), detail)


def failing_schemas(interp: Interpretation, kb) -> set[str]:
    if not isinstance(kb, KnowledgeBase):
        kb = KnowledgeBase((), tuple(kb))
    return {rd.schema_of(lab) for lab in check_kb(interp, kb).failing_labels()}


def compose(*relations) -> set[tuple[str, str]]:
    """Relational composition, left to right."""
    result = {(d, e) for d, e in relations[0]}
    for rel in relations[1:]:
        index: dict[str, set[str]] = {}
        for d, e in rel:
            index.setdefault(d, set()).add(e)
        result = {(d, f) for d, e in result for f in index.get(e, ())}
    return result


# -- 1: units --------------------------------------------------------------------

def criterion_1(ns=(1, 2, 3), atm=None) -> list[Check]:
    out = []
    for n in ns:
        unit = wt.build_unit(n)
        bad = check_kb(unit, KnowledgeBase((), tuple(rd.build_kb_unit(n)))).failing_labels()
        out.append(_check(1, f"unit-model[n={n}]", not bad, ", ".join(bad)))
        expected = {(d, e) for d in unit.ext(rd.lvl(0)) for e in unit.ext(rd.lvl(n))}
        got = set(find_matches(unit, rd.build_query_rl(n)))
        out.append(_check(1, f"q_rl-root-leaf[n={n}]", got == expected, f"{len(got)} pairs"))
        chain = compose(*(unit.rel(x) for i in range(1, n + 1) for x in (rd.ell(i), rd.r(i))))
        reach = {w for root, w in chain if root == ""}
        out.append(_check(1, f"composition[n={n}]", reach == set(unit.domain),
                          f"{len(reach)}/{2 ** (n + 1) - 1} words"))
    return out


# -- 2: configuration trees --------------------------------------------------------

def conf_mutations(atm: Atm, cfg: Configuration):
    """(name, mutated tree, expected failing schemas) for one configuration."""
    n = atm.n
    tree = wt.build_config_tree(atm, cfg)
    head = wt.address(cfg.head, n)
    out = [("drop-state", tree.with_member(rd.st(cfg.state), "", False), {"StCov"}),
           ("drop-hdhere", tree.with_member(rd.HD_HERE, head, False), {"HdHereCov", "HdHereEqualAdr"}),
           ("drop-hdlet", tree.with_member(rd.hd_let(cfg.letter), "", False), {"HdLetCov", "RetrHdLet"})]
    for k, letter in enumerate(cfg.tape):
        w = wt.address(k, n)
        enc = "EncLetZero" if letter == "0" else "EncLetOne"
        zero_child, one_child = (w + "0", w + "1") if letter == "0" else (w + "1", w + "0")
        swapped = (tree.with_member(rd.ZERO, zero_child, False).with_member(rd.ONE, zero_child)
                   .with_member(rd.ONE, one_child, False).with_member(rd.ZERO, one_child))
        out.append((f"swap-leaves[{w}]", swapped, {enc}))
        out.append((f"drop-zz0[{zero_child}]", tree.with_member(rd.ZERO, zero_child, False), {"LetCov", enc}))
        expect = {"LetConCov"} | ({"HdLetUnique"} if k == cfg.head else set())
        out.append((f"drop-let[{w}]", tree.with_member(rd.let(letter), w, False), expect))
        bit = head[0]
        out.append((f"drop-hdpos[{w}]", tree.with_member(rd.hd_pos(1, bit), w, False),
                    {"HdPosCov", "PropHdPos"}))
    return out


def criterion_2(atm: Atm | None = None) -> list[Check]:
    atm = atm or m_acc()
    kb = rd.build_kb_conf(atm.n, atm.states)
    out = []
    configs = list(atm.configurations())
    bad = [str(c) for c in configs if failing_schemas(wt.build_config_tree(atm, c), kb)]
    out.append(_check(2, "conf-tree-model[all configurations]", not bad,
                      f"{len(configs) - len(bad)}/{len(configs)} models"))
    reachable = reachable_configurations(atm)
    bad = [str(c) for c in reachable if failing_schemas(wt.build_config_tree(atm, c), kb)]
    out.append(_check(2, "conf-tree-model[reachable]", not bad, f"{len(reachable)} configurations"))
    wrong = []
    total = 0
    for cfg in configs:
        for name, mutated, expected in conf_mutations(atm, cfg):
            total += 1
            got = failing_schemas(mutated, kb)
            if got != expected:
                wrong.append(f"{cfg}/{name}: {sorted(got)} != {sorted(expected)}")
    out.append(_check(2, "conf-tree-mutations", not wrong,
                      wrong[0] if wrong else f"{total} mutations fail exactly the expected schemas"))
    return out


def reachable_configurations(atm: Atm) -> list[Configuration]:
    """Configurations reachable from the initial one by proper successor steps."""
    seen = {atm.initial_configuration()}
    todo = [atm.initial_configuration()]
    while todo:
        cfg = todo.pop()
        if atm.is_final(cfg.state):
            continue
        try:
            succ = successors(atm, cfg)
        except OffTapeMove:
            continue
        for _, nxt in succ:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return sorted(seen)


# -- 3: enriched trees ---------------------------------------------------------------

def run_components(atm: Atm, tree):
    """(path, configuration, origin, root_left) for every node of a run tree."""
    origin = wt.origins(atm, tree)
    return [(p, node.config, origin[p], not p.endswith("1")) for p, node in tree.walk()]


def criterion_3(atm: Atm | None = None) -> list[Check]:
    atm = atm or m_acc()
    run = find_accepting_run(atm)
    if run is None:
        return [_check(3, "enriched-suite", False, "machine is not accepting")]
    kb = rd.build_kb_enr(atm)
    out = []
    for path, cfg, origin, left in run_components(atm, run):
        tree = wt.build_enriched_tree(atm, cfg, origin, left)
        bad = failing_schemas(tree, kb)
        tag = f"[{path or 'root'}]"
        out.append(_check(3, f"enr-tree-model{tag}", not bad, ", ".join(sorted(bad))))
        if origin is wt.INIT:
            continue
        gadget = rd.head_step_concept(atm.n, origin.move)
        out.append(_check(3, f"increment-gadget{tag}", "" in Evaluator(tree)(gadget)))
        phd = wt.previous_head(cfg, origin)
        for shifted in (phd - 1, phd + 1):
            if 0 <= shifted < atm.tape_length:
                broken = wt.build_enriched_tree(atm, cfg, origin, left, phd_override=shifted)
                got = failing_schemas(broken, kb)
                out.append(_check(3, f"off-by-one-phd{tag}[{shifted}]", got == {"TransiCons"},
                                  ", ".join(sorted(got))))
    return out


# -- 4: homomorphisms ---------------------------------------------------------------------

def pad_with_junk(interp: Interpretation, rng: random.Random, count: int) -> Interpretation:
    """Add ``count`` junk elements with random labels and edges leaving only from junk."""
    junk = [f"junk{k}" for k in range(count)]
    names = sorted(interp.concepts)
    roles = sorted(interp.roles)
    concepts = {k: set(v) for k, v in interp.concepts.items()}
    edges = {k: set(v) for k, v in interp.roles.items()}
    targets = sorted(interp.domain) + junk
    for j in junk:
        for name in rng.sample(names, min(3, len(names))):
            concepts[name].add(j)
        for role in rng.sample(roles, min(3, len(roles))):
            edges[role].add((j, rng.choice(targets)))
    return interp.replace(domain=interp.domain | set(junk), concepts=concepts, roles=edges)


def _drop_first_child(interp: Interpretation, d: str) -> Interpretation:
    child = min(e for e in interp.successors(rd.ell(1), d) if e != d)
    return interp.with_edge(rd.ell(1), d, child, False)


def _hom_rows(label, atm, interp, kind, rng):
    rows = []
    roots = sorted(interp.ext(rd.lvl(0)))
    padded = pad_with_junk(interp, rng, rng.randint(1, 3))
    for variant, target in (("", interp), ("+junk", padded)):
        ok, detail = True, ""
        for d in roots:
            try:
                if kind == "unit":
                    n = max(int(x.split("_")[1]) for x in interp.concepts if x.startswith("Lvl_"))
                    found = wt.unit_homomorphism(target, d, n)
                else:
                    found = wt.recover_tree(atm, target, d, kind)
            except AlcSelfError as exc:
                found, detail = None, str(exc)
            if found is None:
                ok, detail = False, detail or f"no homomorphism at {d}"
                break
        rows.append(_check(4, f"hom-{label}{variant}", ok, detail or f"{len(roots)} roots"))
    broken_ok = True
    for d in roots:
        broken = _drop_first_child(interp, d)
        try:
            if kind == "unit":
                n = max(int(x.split("_")[1]) for x in interp.concepts if x.startswith("Lvl_"))
                found = wt.unit_homomorphism(broken, d, n)
            else:
                found = wt.recover_tree(atm, broken, d, kind)
        except AlcSelfError:
            found = None
        if found is not None:
            broken_ok = False
    rows.append(_check(4, f"hom-{label}-missing-successor", broken_ok))
    return rows


def criterion_4(atm: Atm | None = None, seed: int = 0) -> list[Check]:
    atm = atm or m_acc()
    rng = random.Random(seed)
    out = []
    for n in (1, 2, 3):
        for left in (True, False):
            out += _hom_rows(f"unit[n={n},{'L' if left else 'R'}]", atm, wt.build_unit(n, left), "unit", rng)
    for cfg in reachable_configurations(atm):
        out += _hom_rows(f"conf[{cfg}]", atm, wt.build_config_tree(atm, cfg), "conf", rng)
    run = find_accepting_run(atm)
    if run is None:
        out.append(_check(4, "hom-qct", False, "machine is not accepting"))
        return out
    for path, cfg, origin, left in run_components(atm, run):
        out += _hom_rows(f"enr[{path or 'root'}]", atm, wt.build_enriched_tree(atm, cfg, origin, left),
                         "enr", rng)
    q = wt.build_quasi_computation_tree(atm, run)
    out += _hom_rows("qct-components", atm, q, "enr", rng)
    for variant, target in (("", q), ("+junk", pad_with_junk(q, rng, rng.randint(1, 3)))):
        try:
            rebuilt, h = wt.recover_quasi_computation_tree(atm, target)
            fresh_ok = find_homomorphism(rebuilt, target, {wt.element("", ""): target.individuals["a"]})
            out.append(_check(4, f"hom-qct{variant}", fresh_ok is not None and rebuilt == q,
                              f"{len(wt.component_paths(rebuilt))} components"))
        except AlcSelfError as exc:
            out.append(_check(4, f"hom-qct{variant}", False, str(exc)))
    root = wt.element("", "")
    first_child = min(e for e in q.successors(rd.NEXT, root) if e != root)
    cut = q.with_edge(rd.NEXT, root, first_child, False)
    try:
        wt.recover_quasi_computation_tree(atm, cut)
        out.append(_check(4, "hom-qct-missing-successor", False, "recovered despite a missing next edge"))
    except AlcSelfError:
        out.append(_check(4, "hom-qct-missing-successor", True))
    return out


# -- 5: match sets ---------------------------------------------------------------------------

def expected_main(q: Interpretation, n: int) -> set[tuple[str, str]]:
    return {(x, y) for p, c in wt.consecutive_pairs(q)
            for x in wt.leaves(q, p, n) for y in wt.leaves(q, c, n)}


def expected_bit(q: Interpretation, n: int, i: int, b: int) -> set[tuple[str, str]]:
    """M_1^b (leaf identity pairs) ∪ M_2^b (consecutive leaves with bit i equal to b)."""
    ident = {(x, x) for p in wt.component_paths(q) for x in wt.leaves(q, p, n)}
    bit = str(b)
    cross = {(x, y) for x, y in expected_main(q, n)
             if wt.split_element(x)[1][i - 1] == bit and wt.split_element(y)[1][i - 1] == bit}
    return ident | cross


def expected_addr(q: Interpretation, n: int, i: int) -> set[tuple[str, str]]:
    return {(x, y) for x, y in expected_main(q, n)
            if wt.split_element(x)[1][i - 1] == wt.split_element(y)[1][i - 1]}


def expected_spoilers(q: Interpretation, n: int) -> set[tuple[str, str]]:
    """Pairs satisfying the three conditions characterising q_M matches."""
    out = set()
    for x, y in expected_main(q, n):
        if wt.split_element(x)[1] != wt.split_element(y)[1]:
            continue
        if x in q.ext(rd.ZERO) and y in q.ext(rd.ONE) and y in q.ext(rd.NO_PHD_ABV):
            out.add((x, y))
    return out


def criterion_5(atm: Atm | None = None) -> list[Check]:
    atm = atm or m_acc()
    run = find_accepting_run(atm)
    if run is None:
        return [_check(5, "match-sets", False, "machine is not accepting")]
    n = atm.n
    q = wt.build_quasi_computation_tree(atm, run)
    out = []
    main = set(find_matches(q, rd.build_query_main(n)))
    out.append(_check(5, "q_main", main == expected_main(q, n), f"{len(main)} pairs"))
    bits = {}
    for i in range(1, n + 2):
        for b in (0, 1):
            got = bits[i, b] = set(find_matches(q, rd.build_query_ith_bit(i, b, n)))
            out.append(_check(5, f"q_bit[i={i},b={b}]", got == expected_bit(q, n, i, b), f"{len(got)} pairs"))
    for i in range(1, n + 2):
        got = set(find_matches(q, rd.build_query_addr(i, n)))
        out.append(_check(5, f"q_addr[i={i}]", got == expected_addr(q, n, i), f"{len(got)} pairs"))
        via_calculus = main & compose(bits[i, 0], bits[i, 1])
        out.append(_check(5, f"q_addr-calculus[i={i}]", got == via_calculus))
    return out


# -- 6: the main dichotomy ----------------------------------------------------------------------

def criterion_6(atm: Atm | None = None, exhaustive: bool = True) -> list[Check]:
    atm = atm or m_acc()
    out = []
    kb = rd.build_kb_machine(atm)
    query = rd.build_query_machine(atm)
    run = find_accepting_run(atm)
    if run is None:
        out.append(_check(6, "faithful-countermodel", False, "machine is not accepting"))
    else:
        q = wt.build_quasi_computation_tree(atm, run)
        out.append(_check(6, "faithful-qct-models-K_M", check_kb(q, kb).ok))
        out.append(_check(6, "faithful-qct-no-q_M-match", not exists_match(q, query)))
        kb_t = rd.build_kb_machine(atm, tbox_only=True)
        out.append(_check(6, "tbox-only-qct-models-K_M", check_kb(wt.build_quasi_computation_tree(atm, run, True), kb_t).ok))
        faults_ok, detail, count = True, "", 0
        for node, cell in untouched_cells(run):
            count += 1
            faulty = inject_tape_fault(run, node, cell)
            fq = wt.build_quasi_computation_tree(atm, faulty)
            models = check_kb(fq, kb).ok
            matches = set(find_matches(fq, query))
            conditions = bool(matches) and matches == expected_spoilers(fq, atm.n)
            quasi = is_valid_quasi_run(atm, faulty, strict=False).ok and not is_valid_run(atm, faulty).ok
            if not (models and conditions and quasi):
                faults_ok = False
                detail = f"fault ({node},{cell}): model={models} match={sorted(matches)} quasi={quasi}"
                break
        out.append(_check(6, "fault-injection-spoils", faults_ok, detail or f"{count} faults"))
    if exhaustive:
        try:
            runs = all_quasi_runs(atm)
        except RuntimeError as exc:
            out.append(_check(6, "quasi-run-dichotomy", False, str(exc)))
        else:
            bad = []
            accepting = [t for t in runs if all(leaf.config.state == atm.accepting for leaf in t.leaves)]
            for t in accepting:
                q = wt.build_quasi_computation_tree(atm, t)
                if exists_match(q, query) == is_valid_run(atm, t).ok:
                    bad.append(t)
            out.append(_check(6, "quasi-run-dichotomy", not bad,
                              f"{len(accepting)} accepting quasi-runs"))
    acc, rej = m_acc(atm.n if atm.n <= 2 else 1), m_rej(atm.n if atm.n <= 2 else 1)
    out.append(_check(6, "oracle-M_acc", is_accepting_oracle(acc)))
    out.append(_check(6, "oracle-M_rej", not is_accepting_oracle(rej)))
    out.append(_check(6, "no-run-M_rej", find_accepting_run(rej) is None))
    verdict = is_accepting_oracle(atm)
    out.append(_check(6, "oracle-vs-run", verdict == (find_accepting_run(atm) is not None)))
    return out


# -- 7: polynomial size -------------------------------------------------------------------------

def criterion_7(ns=range(1, 9), atm=None) -> list[Check]:
    out = []
    q_counts, kb_counts = [], []
    for n in ns:
        atm = m_acc(n)
        q = rd.build_query_machine(n)
        kb = rd.build_kb_machine(atm)
        q_counts.append(len(q))
        kb_counts.append(len(kb))
        out.append(_check(7, f"q_M-atoms[N={n}]", len(q) == rd.query_atom_count(n),
                          f"{len(q)} vs f(N)={rd.query_atom_count(n)}"))
        out.append(_check(7, f"K_M-axioms[N={n}]", len(kb) == rd.machine_axiom_count(atm),
                          f"{len(kb)} vs g(N)={rd.machine_axiom_count(atm)}"))
    # an exact quadratic has constant, nonzero second differences
    second = [a - 2 * b + c for a, b, c in zip(q_counts, q_counts[1:], q_counts[2:])]
    out.append(_check(7, "q_M-quadratic", len(set(second)) == 1 and second[0] > 0,
                      f"second difference {second[0] if second else None}"))
    mono = all(a < b for a, b in zip(q_counts, q_counts[1:])) and \
        all(a < b for a, b in zip(kb_counts, kb_counts[1:]))
    out.append(_check(7, "monotone", mono))
    return out


# -- 8: determinism and round trips --------------------------------------------------------------

def criterion_8(samples: int = 100, seed: int = 0, atm: Atm | None = None) -> list[Check]:
    atm = atm or m_acc()
    out = []
    emitted = []
    for _ in range(3):
        b = rd.reduce(atm)
        emitted.append((ser.emit_kb(b.kb), ser.emit_kb(b.kb, "owlfs"), ser.emit_cq(b.query)))
    out.append(_check(8, "compile-byte-stable", len(set(emitted)) == 1))
    rng = random.Random(seed)
    failures = {"atm": 0, "kb": 0, "cq": 0, "interp": 0}
    for _ in range(samples):
        m = random_atm(rng, rng.choice((1, 2)))
        text = ser.emit_atm(m)
        failures["atm"] += ser.parse_atm(text) != m or ser.emit_atm(ser.parse_atm(text)) != text
        kb = random_kb(rng, rng.randint(0, 6))
        text = ser.emit_kb(kb)
        failures["kb"] += ser.parse_kb(text) != kb or ser.emit_kb(ser.parse_kb(text)) != text
        q = random_cq(rng, rng.randint(1, 5), rng.randint(1, 6))
        text = ser.emit_cq(q)
        failures["cq"] += ser.parse_cq(text) != q or ser.emit_cq(ser.parse_cq(text)) != text
        i = random_interpretation(rng, rng.randint(1, 6))
        text = ser.emit_interp(i)
        failures["interp"] += ser.parse_interp(text) != i or ser.emit_interp(ser.parse_interp(text)) != text
    for fmt, bad in failures.items():
        out.append(_check(8, f"round-trip-{fmt}", bad == 0, f"{samples - bad}/{samples}"))
    return out


SUITES = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
          5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_suites(atm: Atm | None = None, max_n: int = 3) -> list[tuple[Check, float]]:
    """Every check with the wall time of its suite."""
    rows = []
    for k, suite in SUITES.items():
        start = time.perf_counter()
        if k == 1:
            checks = suite(tuple(range(1, max_n + 1)))
        elif k == 7:
            checks = suite()
        else:
            checks = suite(atm=atm)
        elapsed = time.perf_counter() - start
        rows += [(c, elapsed) for c in checks]
    return rows
