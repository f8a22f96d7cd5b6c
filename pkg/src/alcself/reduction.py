"""Axiom schemata and queries of the ATM-to-ALCself reduction.

``build_kb_unit`` → ``build_kb_conf`` → ``build_kb_enr`` → ``build_kb_machine``
each extend the previous TBox; ``build_query_machine`` assembles the spoiling
query from its building blocks. Every axiom carries a label ``Schema[idx,…]``
(with ``.fwd``/``.bwd`` for the two halves of an equivalence).
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .atm import LETTERS, Atm, Transition
from .cq import Cq, concept_atom, conjoin, expand_path, role_atom
from .dl import (BOTTOM, TOP, ConceptAssertion, Exists, Forall, Gci, Implies, KnowledgeBase, Name,
                 SelfLoop, conj, disj, equivalence, exists_chain, forall_chain)
from .errors import ValidationError

# -- symbols -------------------------------------------------------------------

L, R = "L", "R"
ZERO, ONE = "zz0", "zz1"
HD_HERE, NO_HD_HERE = "HdHere", "NoHdHere"
INIT = "Init"
PHD_HERE, NO_PHD_HERE = "PHdHere", "NoPHdHere"
PHD_ABV, NO_PHD_ABV = "PHdAbv", "NoPHdAbv"
NEXT, AUX = "next", "aux"
INDIVIDUAL = "a"


def lvl(i: int) -> str:
    return f"Lvl_{i}"


def ad(i: int, b) -> str:
    return f"Ad_{i}^{b}"


def ell(i: int) -> str:
    return f"ell_{i}"


def r(i: int) -> str:
    return f"r_{i}"


def st(state: str) -> str:
    return f"St_{state}"


def hd_pos(i: int, b) -> str:
    return f"HdPos_{i}^{b}"


def phd_pos(i: int, b) -> str:
    return f"PHdPos_{i}^{b}"


def hd_let(a) -> str:
    return f"HdLet_{a}"


def phd_let(a) -> str:
    return f"PHdLet_{a}"


def let(a) -> str:
    return f"Let_{a}"


def transition_id(t: Transition) -> str:
    return f"{t.source}.{t.read}.{t.write}.{t.target}.{t.move:+d}"


def parse_transition(text: str) -> Transition:
    m = re.fullmatch(r"([A-Za-z][A-Za-z0-9_]*)\.([01])\.([01])\.([A-Za-z][A-Za-z0-9_]*)\.([+-]1)", text)
    if not m:
        raise ValidationError(f"not a transition id: {text!r}")
    s, a, b, s2, d = m.groups()
    return Transition(s, a, b, s2, int(d))


def pr_tr(t: Transition) -> str:
    return f"PrTr_{{{transition_id(t)}}}"


_SYMBOL_FORMS = [
    ("Lvl", re.compile(r"Lvl_(\d+)"), ("int",)),
    ("Ad", re.compile(r"Ad_(\d+)\^([01])"), ("int", "bit")),
    ("St", re.compile(r"St_([A-Za-z][A-Za-z0-9_]*)"), ("state",)),
    ("HdPos", re.compile(r"HdPos_(\d+)\^([01])"), ("int", "bit")),
    ("PHdPos", re.compile(r"PHdPos_(\d+)\^([01])"), ("int", "bit")),
    ("HdLet", re.compile(r"HdLet_([01])"), ("bit",)),
    ("PHdLet", re.compile(r"PHdLet_([01])"), ("bit",)),
    ("Let", re.compile(r"Let_([01])"), ("bit",)),
    ("PrTr", re.compile(r"PrTr_\{(.+)\}"), ("tr",)),
    ("ell", re.compile(r"ell_(\d+)"), ("int",)),
    ("r", re.compile(r"r_(\d+)"), ("int",)),
]
_PLAIN_SYMBOLS = {L, R, ZERO, ONE, HD_HERE, NO_HD_HERE, INIT, PHD_HERE, NO_PHD_HERE, PHD_ABV,
                  NO_PHD_ABV, NEXT, AUX}


def parse_symbol(name: str) -> tuple[str, tuple]:
    """Split a mangled name into its family and indices, e.g. ``Ad_2^1`` → ``("Ad", (2, "1"))``."""
    if name in _PLAIN_SYMBOLS:
        return name, ()
    for family, pattern, kinds in _SYMBOL_FORMS:
        m = pattern.fullmatch(name)
        if m:
            return family, tuple(_index(v, k) for v, k in zip(m.groups(), kinds))
    raise ValidationError(f"not a reduction symbol: {name!r}")


def _index(value: str, kind: str):
    if kind == "int":
        return int(value)
    if kind == "tr":
        return parse_transition(value)
    return value


# -- labels ----------------------------------------------------------------------

# Schema name → kinds of its bracketed indices.
SCHEMAS: dict[str, tuple[str, ...]] = {
    # configuration units
    "LvlCov": (), "LvlDisj": ("int", "int"), "all-loops-but-next": (), "leaves-next-loop": (),
    "LRCov": (), "LRDisj": (), "LsuccLvl": ("int",), "RsuccLvl": ("int",),
    "LBitZero": ("int",), "RBitOne": ("int",), "AdDisj": ("int",),
    "AdLvlDisj": ("int", "int", "bit"), "PropBit": ("int", "bit"),
    # configuration trees
    "StCov": (), "StDisj": ("state", "state"), "LetDisj": (), "LetCov": (), "LetConDisj": (),
    "LetConCov": (), "EncLetZero": (), "EncLetOne": (), "HdPosCov": ("int",),
    "HdPosDisj": ("int",), "PropHdPos": ("int", "bit"), "HdHereCov": (), "HdHereEqualAdr": (),
    "NoHdHereDiffrAdr": (), "HdLetCov": (), "RetrHdLet": ("bit",), "HdLetUnique": ("bit",),
    # enriched trees
    "TrCov": (), "TrInitDisj": ("tr",), "TrDisj": ("tr", "tr"), "PHdPosCov": ("int",),
    "PHdPosDisj": ("int",), "PropPHdPos": ("int", "bit"), "PHdHereCov": (),
    "PHdHereEqualAdr": (), "NoPHdHereDiffAdr": (), "PHdLetCov": (), "RetrPHdLet": ("bit",),
    "PHdLetUnique": ("bit",), "PHdAbvCov": (), "PHdAbvDisj": (), "PropPHdAbv": (),
    "PropNoPHdAbv": (), "TransiCons": ("tr",), "InitConf": (),
    # quasi-computation trees
    "EConfSucc": ("state",), "AConfSucc": ("state",), "FinConfSucc": ("state",),
    "TransHeadPos": ("int", "bit"), "TransiExistState": ("state", "bit"),
    "TransiUnivStateL": ("state", "bit"), "TransiUnivStateR": ("state", "bit"),
    "NoRejectState": (), "InitIndividual": (), "AuxInit": (),
}

SCHEMA_GROUP: dict[str, str] = {}
for _name in SCHEMAS:
    SCHEMA_GROUP[_name] = (
        "unit" if _name in ("LvlCov", "LvlDisj", "all-loops-but-next", "leaves-next-loop", "LRCov",
                            "LRDisj", "LsuccLvl", "RsuccLvl", "LBitZero", "RBitOne", "AdDisj",
                            "AdLvlDisj", "PropBit")
        else "conf" if _name in ("StCov", "StDisj", "LetDisj", "LetCov", "LetConDisj", "LetConCov",
                                 "EncLetZero", "EncLetOne", "HdPosCov", "HdPosDisj", "PropHdPos",
                                 "HdHereCov", "HdHereEqualAdr", "NoHdHereDiffrAdr", "HdLetCov",
                                 "RetrHdLet", "HdLetUnique")
        else "machine" if _name in ("EConfSucc", "AConfSucc", "FinConfSucc", "TransHeadPos",
                                    "TransiExistState", "TransiUnivStateL", "TransiUnivStateR",
                                    "NoRejectState", "InitIndividual", "AuxInit")
        else "enr")

_LABEL = re.compile(r"(?P<schema>[A-Za-z][A-Za-z-]*)(?:\[(?P<idx>[^\]]*)\])?(?:\.(?P<dir>fwd|bwd))?")


class LabelInfo(NamedTuple):
    schema: str
    indices: tuple
    direction: str | None


def label(schema: str, *indices) -> str:
    if not indices:
        return schema
    return f"{schema}[{','.join(_render_index(i) for i in indices)}]"


def _render_index(i) -> str:
    return transition_id(i) if isinstance(i, Transition) else str(i)


def parse_label(text: str) -> LabelInfo:
    m = _LABEL.fullmatch(text)
    if not m or m["schema"] not in SCHEMAS:
        raise ValidationError(f"unknown provenance label {text!r}")
    kinds = SCHEMAS[m["schema"]]
    raw = m["idx"].split(",") if m["idx"] is not None else []
    if len(raw) != len(kinds):
        raise ValidationError(f"label {text!r}: expected {len(kinds)} indices, got {len(raw)}")
    values = []
    for value, kind in zip(raw, kinds):
        if kind == "int" and not value.isdigit():
            raise ValidationError(f"label {text!r}: {value!r} is not a natural number")
        if kind == "bit" and value not in LETTERS:
            raise ValidationError(f"label {text!r}: {value!r} is not a bit")
        if kind == "state" and not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", value):
            raise ValidationError(f"label {text!r}: {value!r} is not a state id")
        values.append(_index(value, kind))
    return LabelInfo(m["schema"], tuple(values), m["dir"])


def schema_of(text: str) -> str:
    return parse_label(text).schema


# -- concept helpers --------------------------------------------------------------

def _n(name: str) -> Name:
    return Name(name)


def _lr_chain(n: int) -> list[str]:
    """ℓ_1, r_1, …, ℓ_n, r_n"""
    return [x for i in range(1, n + 1) for x in (ell(i), r(i))]


def _gci(lhs, rhs, schema, *idx) -> Gci:
    return Gci(lhs, rhs, label(schema, *idx))


def _equiv(lhs, rhs, schema, *idx) -> tuple[Gci, Gci]:
    return equivalence(lhs, rhs, label(schema, *idx))


def _require_positive(n: int, what: str):
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"{what} must be at least 1, got {n!r}")


# -- K_unit(n) ---------------------------------------------------------------------

def build_kb_unit(n: int) -> list[Gci]:
    _require_positive(n, "n")
    out: list[Gci] = [_gci(TOP, disj(*(_n(lvl(i)) for i in range(n + 1))), "LvlCov")]
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            out.append(_gci(conj(_n(lvl(i)), _n(lvl(j))), BOTTOM, "LvlDisj", i, j))
    loops = [SelfLoop(x) for x in _lr_chain(n)]
    out.append(_gci(TOP, conj(*loops), "all-loops-but-next"))
    out.extend(_equiv(_n(lvl(n)), SelfLoop(NEXT), "leaves-next-loop"))
    out.append(_gci(TOP, disj(_n(L), _n(R)), "LRCov"))
    out.append(_gci(conj(_n(L), _n(R)), BOTTOM, "LRDisj"))
    for i in range(n):
        nxt = _n(lvl(i + 1))
        out.append(_gci(_n(lvl(i)), conj(Exists(ell(i + 1), nxt), Forall(ell(i + 1), Implies(nxt, _n(L)))),
                        "LsuccLvl", i))
        out.append(_gci(_n(lvl(i)), conj(Exists(r(i + 1), nxt), Forall(r(i + 1), Implies(nxt, _n(R)))),
                        "RsuccLvl", i))
    for i in range(1, n + 1):
        out.append(_gci(conj(_n(lvl(i)), _n(L)), _n(ad(i, 0)), "LBitZero", i))
        out.append(_gci(conj(_n(lvl(i)), _n(R)), _n(ad(i, 1)), "RBitOne", i))
        out.append(_gci(conj(_n(ad(i, 0)), _n(ad(i, 1))), BOTTOM, "AdDisj", i))
        for j in range(i):
            for b in (0, 1):
                out.append(_gci(conj(_n(ad(i, b)), _n(lvl(j))), BOTTOM, "AdLvlDisj", i, j, b))
        for b in (0, 1):
            bit = _n(ad(i, b))
            body = conj(*(x for j in range(1, n + 1) for x in (Forall(ell(j), bit), Forall(r(j), bit))))
            out.append(_gci(bit, body, "PropBit", i, b))
    return out


def unit_axiom_count(n: int) -> int:
    """Closed form for ``len(build_kb_unit(n))``: 1.5n² + 8.5n + 6."""
    return (3 * n * n + 17 * n + 12) // 2


# -- K_conf ---------------------------------------------------------------------------

def _address_match(n: int, pos) -> object:
    """⊓_i ⊔_b (Ad_i^b ⊓ pos(i,b))"""
    return conj(*(disj(*(conj(_n(ad(i, b)), _n(pos(i, b))) for b in (0, 1))) for i in range(1, n + 1)))


def _address_mismatch(n: int, pos) -> object:
    """⊔_i ⊔_b (Ad_i^b ⊓ pos(i,1−b))"""
    return disj(*(conj(_n(ad(i, b)), _n(pos(i, 1 - b))) for i in range(1, n + 1) for b in (0, 1)))


def _head_family(n, pos, here, no_here, letter, prefix) -> list[Gci]:
    """Cov/Disj/Prop for the position bits, here-markers and letter retrieval."""
    out: list[Gci] = []
    chain = _lr_chain(n)
    roots_and_cells = disj(_n(lvl(0)), _n(lvl(n)))
    for i in range(1, n + 1):
        out.extend(_equiv(roots_and_cells, disj(_n(pos(i, 0)), _n(pos(i, 1))), f"{prefix}PosCov", i))
        out.append(_gci(conj(_n(pos(i, 0)), _n(pos(i, 1))), BOTTOM, f"{prefix}PosDisj", i))
    for i in range(1, n + 1):
        for b in (0, 1):
            out.append(_gci(conj(_n(lvl(0)), _n(pos(i, b))),
                            forall_chain(chain, Implies(_n(lvl(n)), _n(pos(i, b)))),
                            f"Prop{prefix}Pos", i, b))
    out.extend(_equiv(disj(_n(here), _n(no_here)), _n(lvl(n)), f"{prefix}HereCov"))
    out.append(_gci(conj(_n(lvl(n)), _address_match(n, pos)), _n(here), f"{prefix}HereEqualAdr"))
    mismatch_schema = "NoHdHereDiffrAdr" if prefix == "Hd" else "NoPHdHereDiffAdr"
    out.append(_gci(conj(_n(lvl(n)), _address_mismatch(n, pos)), _n(no_here), mismatch_schema))
    out.extend(_equiv(disj(_n(letter(0)), _n(letter(1))), _n(lvl(0)), f"{prefix}LetCov"))
    for a in LETTERS:
        out.append(_gci(conj(_n(lvl(0)), exists_chain(chain, conj(_n(here), _n(let(a))))),
                        _n(letter(a)), f"Retr{prefix}Let", a))
    for a in LETTERS:
        out.append(_gci(conj(_n(lvl(0)), _n(letter(a))),
                        forall_chain(chain, Implies(_n(here), _n(let(a)))), f"{prefix}LetUnique", a))
    return out


def build_kb_conf(n: int, states: Sequence[str]) -> list[Gci]:
    """K_conf for tape exponent ``n`` over the given state ids (declaration order)."""
    _require_positive(n, "N")
    if not states:
        raise ValidationError("state set is empty")
    out = build_kb_unit(n + 1)
    out.extend(_equiv(_n(lvl(0)), disj(*(_n(st(s)) for s in states)), "StCov"))
    for x in range(len(states)):
        for y in range(x + 1, len(states)):
            out.append(_gci(conj(_n(st(states[x])), _n(st(states[y]))), BOTTOM, "StDisj",
                            states[x], states[y]))
    leaf = _n(lvl(n + 1))
    out.append(_gci(conj(_n(ZERO), _n(ONE)), BOTTOM, "LetDisj"))
    out.extend(_equiv(leaf, disj(_n(ZERO), _n(ONE)), "LetCov"))
    out.append(_gci(conj(_n(let(0)), _n(let(1))), BOTTOM, "LetConDisj"))
    out.extend(_equiv(disj(_n(let(0)), _n(let(1))), _n(lvl(n)), "LetConCov"))
    out.append(_gci(_n(let(0)), conj(Forall(ell(n + 1), Implies(leaf, _n(ZERO))),
                                     Forall(r(n + 1), Implies(leaf, _n(ONE)))), "EncLetZero"))
    out.append(_gci(_n(let(1)), conj(Forall(ell(n + 1), Implies(leaf, _n(ONE))),
                                     Forall(r(n + 1), Implies(leaf, _n(ZERO)))), "EncLetOne"))
    out.extend(_head_family(n, hd_pos, HD_HERE, NO_HD_HERE, hd_let, "Hd"))
    return out


def conf_axiom_count(n: int, q: int) -> int:
    return unit_axiom_count(n + 1) + 20 + q * (q - 1) // 2 + 5 * n


# -- K_enr ------------------------------------------------------------------------------

def offset_concept(n: int, a_pos, b_pos) -> object:
    """Holds where the address in ``b_pos`` is the one in ``a_pos`` plus one.

    Bits are most significant first (bit 1 is the MSB): some bit i flips 0 → 1,
    every less significant bit flips 1 → 0 and every more significant bit agrees.
    """
    cases = []
    for i in range(1, n + 1):
        lower = [conj(_n(a_pos(j, 1)), _n(b_pos(j, 0))) for j in range(i + 1, n + 1)]
        upper = [disj(conj(_n(a_pos(j, 1)), _n(b_pos(j, 1))), conj(_n(a_pos(j, 0)), _n(b_pos(j, 0))))
                 for j in range(1, i)]
        cases.append(conj(_n(a_pos(i, 0)), _n(b_pos(i, 1)), *lower, *upper))
    return disj(*cases)


def head_step_concept(n: int, d: int) -> object:
    """"PHdPos + d = HdPos" as a concept."""
    if d == 1:
        return offset_concept(n, phd_pos, hd_pos)
    return offset_concept(n, hd_pos, phd_pos)


def build_kb_enr(atm: Atm) -> list[Gci]:
    n = atm.n
    out = build_kb_conf(n, atm.states)
    delta = atm.delta
    out.extend(_equiv(_n(lvl(0)), disj(_n(INIT), *(_n(pr_tr(t)) for t in delta)), "TrCov"))
    for t in delta:
        out.append(_gci(conj(_n(INIT), _n(pr_tr(t))), BOTTOM, "TrInitDisj", t))
    for x in range(len(delta)):
        for y in range(x + 1, len(delta)):
            out.append(_gci(conj(_n(pr_tr(delta[x])), _n(pr_tr(delta[y]))), BOTTOM, "TrDisj",
                            delta[x], delta[y]))
    out.extend(_head_family(n, phd_pos, PHD_HERE, NO_PHD_HERE, phd_let, "PHd"))
    leaf = _n(lvl(n + 1))
    out.extend(_equiv(disj(_n(PHD_ABV), _n(NO_PHD_ABV)), leaf, "PHdAbvCov"))
    out.append(_gci(conj(_n(PHD_ABV), _n(NO_PHD_ABV)), BOTTOM, "PHdAbvDisj"))
    out.append(_gci(_n(PHD_HERE), forall_chain([ell(n + 1), r(n + 1)], Implies(leaf, _n(PHD_ABV))),
                    "PropPHdAbv"))
    out.append(_gci(_n(NO_PHD_HERE), forall_chain([ell(n + 1), r(n + 1)], Implies(leaf, _n(NO_PHD_ABV))),
                    "PropNoPHdAbv"))
    for t in delta:
        out.append(_gci(_n(pr_tr(t)), conj(_n(phd_let(t.write)), _n(st(t.target)),
                                           head_step_concept(n, t.move)), "TransiCons", t))
    zero_bits = [conj(_n(hd_pos(i, 0)), _n(phd_pos(i, 0))) for i in range(1, n + 1)]
    out.append(_gci(_n(INIT), conj(_n(lvl(0)), _n(L), _n(st(atm.initial)), *zero_bits,
                                   forall_chain(_lr_chain(n), Implies(_n(lvl(n)), _n(let(0))))),
                    "InitConf"))
    return out


def enr_axiom_count(n: int, q: int, transitions: int) -> int:
    return conf_axiom_count(n, q) + 18 + 5 * n + 2 * transitions + transitions * (transitions - 1) // 2


# -- K_M ----------------------------------------------------------------------------------

def build_kb_machine(atm: Atm, tbox_only: bool = False) -> KnowledgeBase:
    n = atm.n
    tbox = build_kb_enr(atm)
    nonfinal = atm.nonfinal_states
    for s in nonfinal:
        if atm.is_existential(s):
            tbox.append(_gci(_n(st(s)), conj(Exists(NEXT, TOP), Forall(NEXT, _n(L))), "EConfSucc", s))
        else:
            tbox.append(_gci(_n(st(s)), conj(Exists(NEXT, _n(L)), Exists(NEXT, _n(R))), "AConfSucc", s))
    for s in (atm.accepting, atm.rejecting):
        tbox.append(_gci(_n(st(s)), Forall(NEXT, BOTTOM), "FinConfSucc", s))
    for i in range(1, n + 1):
        for b in (0, 1):
            tbox.append(_gci(conj(_n(lvl(0)), _n(hd_pos(i, b))), Forall(NEXT, _n(phd_pos(i, b))),
                             "TransHeadPos", i, b))
    for s in nonfinal:
        if atm.is_existential(s):
            for a in LETTERS:
                options = [Forall(NEXT, _n(pr_tr(t))) for t in atm.transitions(s, a)]
                tbox.append(_gci(conj(_n(st(s)), _n(hd_let(a))), disj(*options), "TransiExistState", s, a))
    for s in nonfinal:
        if not atm.is_existential(s):
            for a in LETTERS:
                first, second = atm.transitions(s, a)
                lhs = conj(_n(st(s)), _n(hd_let(a)))
                tbox.append(_gci(lhs, Forall(NEXT, Implies(_n(L), _n(pr_tr(first)))),
                                 "TransiUnivStateL", s, a))
                tbox.append(_gci(lhs, Forall(NEXT, Implies(_n(R), _n(pr_tr(second)))),
                                 "TransiUnivStateR", s, a))
    tbox.append(_gci(_n(st(atm.rejecting)), BOTTOM, "NoRejectState"))
    if tbox_only:
        tbox.append(_gci(TOP, Exists(AUX, _n(INIT)), "AuxInit"))
        return KnowledgeBase((), tuple(tbox))
    return KnowledgeBase((ConceptAssertion(_n(INIT), INDIVIDUAL, "InitIndividual"),), tuple(tbox))


def machine_axiom_count(atm: Atm, n: int | None = None, tbox_only: bool = False) -> int:
    """Closed form for ``len(build_kb_machine(atm))`` at tape exponent ``n``."""
    n = atm.n if n is None else n
    nonfinal = atm.nonfinal_states
    ex = sum(1 for s in nonfinal if atm.is_existential(s))
    un = len(nonfinal) - ex
    extra = ex + un + 2 + 2 * n + 2 * ex + 4 * un + 1 + 1
    return enr_axiom_count(n, len(atm.states), len(atm.delta)) + extra


# -- queries --------------------------------------------------------------------------------

def build_query_rl(n: int, x: str = "x0", y: str | None = None, label: str = "rl") -> Cq:
    """(Lvl_0?; ℓ_1; r_1; …; ℓ_n; r_n; Lvl_n?)(x, y)"""
    _require_positive(n, "n")
    y = f"x{2 * n}" if y is None else y
    return expand_path([f"{lvl(0)}?", *_lr_chain(n), f"{lvl(n)}?"], (x, y), label)


def build_query_down(n: int, x: str, y: str, label: str = "down") -> Cq:
    """Top-down query (ℓ_1; r_1; …; ℓ_n; r_n)(x, y)."""
    return expand_path(_lr_chain(n), (x, y), label)


def build_query_main(n: int, x: str = "x", y: str = "y", label: str = "main") -> Cq:
    """q_rl[x_r, x] ∧ next(x_r, y_r) ∧ q_rl[y_r, y] over (n+1)-units."""
    _require_positive(n, "N")
    xr, yr = f"{label}.xr", f"{label}.yr"
    return conjoin([build_query_rl(n + 1, xr, x, f"{label}.rlx"), role_atom(NEXT, xr, yr),
                    build_query_rl(n + 1, yr, y, f"{label}.rly")], (x, y))


def _bit_path(i: int, b: int, m: int) -> list[str]:
    roles = []
    for j in range(1, m + 1):
        if j == i:
            roles.append(ell(j) if b == 0 else r(j))
        else:
            roles.extend((ell(j), r(j)))
    return roles


def build_query_ith_bit(i: int, b: int, n: int, x: str = "x", y: str = "y",
                        label: str | None = None) -> Cq:
    """Lvl_{n+1}(x) ∧ q↓_i[x', x] ∧ next(x', y') ∧ q↓_i[y', y] ∧ Lvl_{n+1}(y).

    q↓_i is the top-down path with its ℓ_i;r_i block replaced by ℓ_i (b = 0)
    or r_i (b = 1).
    """
    _require_positive(n, "N")
    m = n + 1
    if not 1 <= i <= m:
        raise ValidationError(f"bit index {i} outside 1..{m}")
    if b not in (0, 1):
        raise ValidationError(f"bit value must be 0 or 1, got {b!r}")
    label = f"bit{i}^{b}" if label is None else label
    xp, yp = f"{label}.xp", f"{label}.yp"
    path = _bit_path(i, b, m)
    return conjoin([concept_atom(lvl(m), x), expand_path(path, (xp, x), f"{label}.dx"),
                    role_atom(NEXT, xp, yp), expand_path(path, (yp, y), f"{label}.dy"),
                    concept_atom(lvl(m), y)], (x, y))


def build_query_addr(i: int, n: int, x: str = "x", y: str = "y", label: str | None = None) -> Cq:
    """q_main[x, y] ∧ q_i^0[x, z] ∧ q_i^1[z, y] with z local."""
    label = f"addr{i}" if label is None else label
    z = f"{label}.z"
    return conjoin([build_query_main(n, x, y, f"{label}.main"),
                    build_query_ith_bit(i, 0, n, x, z, f"{label}.bit0"),
                    build_query_ith_bit(i, 1, n, z, y, f"{label}.bit1")], (x, y))


def build_query_machine(atm_or_n, x: str = "x", y: str = "y") -> Cq:
    """⋀_{i=1}^{N+1} q_addr_i[x, y] ∧ NoPHdAbv(y) ∧ 𝟘(x) ∧ 𝟙(y)."""
    n = atm_or_n.n if isinstance(atm_or_n, Atm) else atm_or_n
    parts = [build_query_addr(i, n, x, y) for i in range(1, n + 2)]
    parts += [concept_atom(NO_PHD_ABV, y), concept_atom(ZERO, x), concept_atom(ONE, y)]
    return conjoin(parts, (x, y))


def query_atom_count(n: int) -> int:
    """Distinct atoms of q_M: 12m² + 2m + 5 with m = N + 1."""
    m = n + 1
    return 12 * m * m + 2 * m + 5


def query_variable_count(n: int) -> int:
    m = n + 1
    return 2 + m * (12 * m - 3)


# -- bundle ------------------------------------------------------------------------------------

def atm_fingerprint(atm: Atm) -> str:
    text = json.dumps(atm.to_raw(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ReductionBundle:
    kb: KnowledgeBase
    query: Cq
    fingerprint: str
    tbox_only: bool = False
    schema_counts: dict[str, int] = field(default_factory=dict)

    @property
    def stats(self) -> dict[str, int | str]:
        """Flat key → value map in a fixed order."""
        out: dict[str, int | str] = {
            "atm": self.fingerprint,
            "tbox_only": int(self.tbox_only),
            "axioms": len(self.kb),
            "abox": len(self.kb.abox),
            "tbox": len(self.kb.tbox),
            "query_atoms": len(self.query),
            "query_concept_atoms": len(self.query.concept_atoms),
            "query_role_atoms": len(self.query.role_atoms),
            "query_variables": len(self.query.variables),
        }
        for schema, count in self.schema_counts.items():
            out[f"schema.{schema}"] = count
        return out


def reduce(atm: Atm, tbox_only: bool = False) -> ReductionBundle:
    kb = build_kb_machine(atm, tbox_only)
    counts = Counter(schema_of(ax.label) for ax in kb.axioms)
    ordered = {s: counts[s] for s in SCHEMAS if counts[s]}
    return ReductionBundle(kb, build_query_machine(atm), atm_fingerprint(atm), tbox_only, ordered)


def declared_signature(atm: Atm, tbox_only: bool = False) -> tuple[frozenset[str], frozenset[str]]:
    """Every concept and role name the reduction may use for ``atm``."""
    n = atm.n
    m = n + 1
    concepts = {L, R, ZERO, ONE, HD_HERE, NO_HD_HERE, INIT, PHD_HERE, NO_PHD_HERE, PHD_ABV, NO_PHD_ABV}
    concepts |= {lvl(i) for i in range(m + 1)}
    concepts |= {ad(i, b) for i in range(1, m + 1) for b in (0, 1)}
    concepts |= {st(s) for s in atm.states}
    concepts |= {f(i, b) for f in (hd_pos, phd_pos) for i in range(1, n + 1) for b in (0, 1)}
    concepts |= {f(a) for f in (hd_let, phd_let, let) for a in LETTERS}
    concepts |= {pr_tr(t) for t in atm.delta}
    roles = {NEXT} | {f(i) for f in (ell, r) for i in range(1, m + 1)}
    if tbox_only:
        roles.add(AUX)
    return frozenset(concepts), frozenset(roles)


def stray_symbols(kb: KnowledgeBase, atm: Atm, tbox_only: bool = False) -> list[str]:
    concepts, roles = declared_signature(atm, tbox_only)
    used_c, used_r, _ = kb.signature()
    return sorted((used_c - concepts) | (used_r - roles))


def schemas_in(axioms: Iterable) -> set[str]:
    return {schema_of(ax.label) for ax in axioms}
