"""Seeded random instances for property checks and round-trip tests."""

from __future__ import annotations

import random
from itertools import product

from . import reduction as rd
from .atm import LETTERS, Atm, Branch, Configuration, RunNode, is_quasi_successor, validate_atm
from .cq import Cq
from .dl import (BOTTOM, TOP, And, ConceptAssertion, Exists, Forall, Gci, Implies, Interpretation,
                 KnowledgeBase, Name, Not, Or, RoleAssertion, SelfLoop)


def random_atm(rng: random.Random, n: int = 1, extra_states: int = 2) -> Atm:
    """A machine that passes validation; it may still move off the tape or loop."""
    universal = ["s_init"] + [f"u{k}" for k in range(rng.randint(0, extra_states))]
    existential = [f"e{k}" for k in range(1, rng.randint(1, extra_states) + 1)]
    finals = ["s_acc", "s_rej"]
    final_kind = {s: rng.random() < 0.5 for s in finals}  # True: existential
    states = universal + existential + finals
    ex_set = set(existential) | {s for s in finals if final_kind[s]}
    delta = []
    for s in universal + existential:
        pool = [t for t in states if (t in ex_set) != (s in ex_set)]
        for a in (0, 1):
            options = [(b, t, d) for b in (0, 1) for t in pool for d in (-1, 1)]
            for b, t, d in rng.sample(options, 2):
                delta.append([s, a, b, t, d])
    return validate_atm({"n": n, "states": states, "existential": sorted(ex_set, key=states.index),
                         "initial": "s_init", "accepting": "s_acc", "rejecting": "s_rej",
                         "delta": delta})


def random_layered_atm(rng: random.Random, n: int = 1, depth: int = 2, width: int = 2,
                       p_reject: float = 0.3) -> Atm:
    """A machine that always halts on the tape.

    States sit in levels that alternate universal/existential and only point to
    the next level; the head steps right on even levels and left on odd ones.
    """
    levels = [["s_init"]] + [[f"l{k}_{j}" for j in range(rng.randint(1, width))] for k in range(1, depth)]
    last_existential = (depth - 1) % 2 == 1
    finals_existential = not last_existential
    existential = [s for k, level in enumerate(levels) if k % 2 for s in level]
    if finals_existential:
        existential += ["s_acc", "s_rej"]
    delta = []
    for k, level in enumerate(levels):
        move = 1 if k % 2 == 0 else -1
        for s in level:
            for a in (0, 1):
                if k + 1 < depth:
                    pool = levels[k + 1]
                else:
                    pool = ["s_rej" if rng.random() < p_reject else "s_acc", "s_acc", "s_rej"]
                options = sorted({(b, t) for b in (0, 1) for t in pool})
                for b, t in rng.sample(options, 2):
                    delta.append([s, a, b, t, move])
    states = [s for level in levels for s in level] + ["s_acc", "s_rej"]
    return validate_atm({"n": n, "states": states, "existential": existential, "initial": "s_init",
                         "accepting": "s_acc", "rejecting": "s_rej", "delta": delta})


def random_configuration(rng: random.Random, atm: Atm) -> Configuration:
    tape = "".join(rng.choice(LETTERS) for _ in range(atm.tape_length))
    return Configuration(tape, rng.choice(atm.states), rng.randrange(atm.tape_length))


def all_quasi_runs(atm: Atm, max_nodes: int = 64) -> list[RunNode]:
    """Every quasi-run of ``atm`` (exhaustive; tiny machines only)."""

    def expand(cfg: Configuration, branch, budget: list[int]) -> list[RunNode]:
        budget[0] += 1
        if budget[0] > max_nodes * 10_000:
            raise RuntimeError("quasi-run enumeration too large")
        if atm.is_final(cfg.state):
            return [RunNode(cfg, branch)]
        per_branch = []
        for tag in (Branch.FIRST, Branch.SECOND):
            t = atm.transition(cfg.state, cfg.letter, tag)
            target = cfg.head + t.move
            if not 0 <= target < atm.tape_length:
                per_branch.append([])
                continue
            kids = []
            for bits in product(LETTERS, repeat=atm.tape_length):
                child = Configuration("".join(bits), t.target, target)
                if is_quasi_successor(atm, cfg, t, child, strict=False):
                    kids.extend(expand(child, tag, budget))
            per_branch.append(kids)
        if atm.is_existential(cfg.state):
            return [RunNode(cfg, branch, (k,)) for k in per_branch[0] + per_branch[1]]
        return [RunNode(cfg, branch, (a, b)) for a in per_branch[0] for b in per_branch[1]]

    return expand(atm.initial_configuration(), None, [0])


_CONCEPT_NAMES = ["A", "B", "C", rd.lvl(0), rd.ZERO]
_ROLE_NAMES = ["r", "s", rd.NEXT]


def random_concept(rng: random.Random, depth: int = 3, names=None, roles=None):
    names = names or _CONCEPT_NAMES
    roles = roles or _ROLE_NAMES
    if depth == 0 or rng.random() < 0.25:
        pick = rng.random()
        if pick < 0.1:
            return TOP
        if pick < 0.15:
            return BOTTOM
        if pick < 0.3:
            return SelfLoop(rng.choice(roles))
        return Name(rng.choice(names))
    kind = rng.choice(["not", "and", "or", "implies", "exists", "forall"])
    sub = lambda: random_concept(rng, depth - 1, names, roles)
    if kind == "not":
        return Not(sub())
    if kind in ("exists", "forall"):
        return (Exists if kind == "exists" else Forall)(rng.choice(roles), sub())
    return {"and": And, "or": Or, "implies": Implies}[kind](sub(), sub())


def random_interpretation(rng: random.Random, size: int = 4, names=None, roles=None,
                          individuals: int = 1) -> Interpretation:
    names = names or _CONCEPT_NAMES
    roles = roles or _ROLE_NAMES
    domain = [f"d{k}" for k in range(size)]
    concepts = {c: {d for d in domain if rng.random() < 0.4} for c in names}
    rel = {r: {(d, e) for d in domain for e in domain if rng.random() < 0.25} for r in roles}
    inds = {f"i{k}": rng.choice(domain) for k in range(individuals)} if domain else {}
    return Interpretation(domain, concepts, rel, inds)


def random_kb(rng: random.Random, axioms: int = 4) -> KnowledgeBase:
    abox, tbox = [], []
    for k in range(axioms):
        pick = rng.random()
        if pick < 0.2:
            abox.append(ConceptAssertion(random_concept(rng, 2), f"i{rng.randrange(2)}", f"ca{k}"))
        elif pick < 0.3:
            abox.append(RoleAssertion(rng.choice(_ROLE_NAMES), "i0", "i1", f"ra{k}"))
        else:
            tbox.append(Gci(random_concept(rng), random_concept(rng), f"gci{k}" if rng.random() < 0.8 else ""))
    return KnowledgeBase(tuple(abox), tuple(tbox))


def random_cq(rng: random.Random, variables: int = 4, atoms: int = 5) -> Cq:
    vs = [f"v{k}" for k in range(variables)]
    concept_atoms, role_atoms = set(), set()
    for _ in range(atoms):
        if rng.random() < 0.4:
            concept_atoms.add((rng.choice(_CONCEPT_NAMES), rng.choice(vs)))
        else:
            role_atoms.add((rng.choice(_ROLE_NAMES), rng.choice(vs), rng.choice(vs)))
    used = sorted({v for _, v in concept_atoms} | {v for _, a, b in role_atoms for v in (a, b)})
    answer = tuple(rng.sample(used, rng.randint(0, min(2, len(used)))))
    return Cq(concept_atoms, role_atoms, answer)
