"""Text formats: machines (.atm.json), knowledge bases (.kb.dl, .kb.ofn),
queries (.cq) and interpretations (.interp.json).

Every ``emit_*`` is canonical and byte-stable; every ``parse_*`` inverts it.
"""

from __future__ import annotations

import json
import re
import warnings
from typing import Iterator

from .atm import Atm, validate_atm
from .cq import Cq
from .dl import (BOTTOM, TOP, And, Bottom, Concept, ConceptAssertion, Exists, Forall, Gci, Implies,
                 Interpretation, KnowledgeBase, Name, Not, Or, RoleAssertion, SelfLoop, Top)
from .errors import ParseError, ValidationError

# -- machines --------------------------------------------------------------------

_ATM_FIELDS = ("n", "states", "existential", "initial", "accepting", "rejecting", "delta")


def emit_atm(atm: Atm) -> str:
    raw = atm.to_raw()
    raw["delta"] = sorted(raw["delta"])
    return json.dumps(raw, sort_keys=True) + "\n"


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None


def parse_atm(text: str) -> Atm:
    raw = _load_json(text)
    if not isinstance(raw, dict):
        raise ParseError("machine must be a JSON object")
    problems = [f"missing field {k!r}" for k in _ATM_FIELDS if k not in raw]
    problems += [f"unknown field {k!r}" for k in sorted(raw) if k not in _ATM_FIELDS]
    if problems:
        raise ParseError("schema: " + "; ".join(problems))
    if not isinstance(raw["n"], int) or isinstance(raw["n"], bool):
        raise ParseError("schema: n must be an integer")
    for key in ("states", "existential", "delta"):
        if not isinstance(raw[key], list):
            raise ParseError(f"schema: {key} must be a list")
    for key in ("initial", "accepting", "rejecting"):
        if not isinstance(raw[key], str):
            raise ParseError(f"schema: {key} must be a string")
    seen = set()
    for pos, row in enumerate(raw["delta"]):
        if not isinstance(row, list) or len(row) != 5:
            raise ParseError(f"schema: delta[{pos}] must be a list of 5 fields")
        s, a, b, s2, d = row
        if not (isinstance(s, str) and isinstance(s2, str)):
            raise ParseError(f"schema: delta[{pos}] states must be strings")
        for name, value in (("a", a), ("b", b)):
            if value not in (0, 1) or isinstance(value, bool):
                raise ParseError(f"schema: delta[{pos}] letter {name}={value!r} must be 0 or 1")
        if d not in (-1, 1) or isinstance(d, bool):
            raise ParseError(f"schema: delta[{pos}] move d={d!r} must be -1 or 1")
        key = (s, a, b, s2, d)
        if key in seen:
            warnings.warn(f"duplicate transition delta[{pos}] {row!r} dropped", stacklevel=2)
        seen.add(key)
    return validate_atm(raw)


# -- concepts in dltext ------------------------------------------------------------

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_^{}.+\-']*")
_KEYWORDS = {"top", "bot", "not", "and", "or", "exists", "forall", "implies", "self", "sub"}


def emit_concept(c: Concept) -> str:
    if isinstance(c, Top):
        return "top"
    if isinstance(c, Bottom):
        return "bot"
    if isinstance(c, Name):
        return c.name
    if isinstance(c, Not):
        return f"(not {emit_concept(c.arg)})"
    if isinstance(c, And):
        return f"(and {emit_concept(c.left)} {emit_concept(c.right)})"
    if isinstance(c, Or):
        return f"(or {emit_concept(c.left)} {emit_concept(c.right)})"
    if isinstance(c, Implies):
        return f"(implies {emit_concept(c.left)} {emit_concept(c.right)})"
    if isinstance(c, Exists):
        return f"(exists {c.role} {emit_concept(c.arg)})"
    if isinstance(c, Forall):
        return f"(forall {c.role} {emit_concept(c.arg)})"
    if isinstance(c, SelfLoop):
        return f"(self {c.role})"
    raise TypeError(f"not a concept: {c!r}")


def _check_name(name: str, what: str):
    if not NAME_RE.fullmatch(name) or name in _KEYWORDS:
        raise ValidationError(f"{what} {name!r} cannot be written in dltext")


def emit_axiom(ax) -> str:
    if isinstance(ax, Gci):
        return f"{emit_concept(ax.lhs)} sub {emit_concept(ax.rhs)}"
    if isinstance(ax, ConceptAssertion):
        return f"{emit_concept(ax.concept)}({ax.individual})"
    return f"{ax.role}({ax.subject},{ax.object})"


_TOKEN = re.compile(r"\s*(?:(?P<punct>[(),])|(?P<name>[A-Za-z_][A-Za-z0-9_^{}.+\-']*))")


class _Tokens:
    def __init__(self, text: str, line: int):
        self.items: list[tuple[str, int]] = []
        self.line = line
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                raise ParseError(f"unexpected character {text[col - 1]!r}", line, col)
            tok = m.group("punct") or m.group("name")
            self.items.append((tok, m.start(m.lastgroup) + 1))
            pos = m.end()
        self.end_col = len(text) + 1
        self.i = 0

    def peek(self) -> str | None:
        return self.items[self.i][0] if self.i < len(self.items) else None

    def col(self) -> int:
        return self.items[self.i][1] if self.i < len(self.items) else self.end_col

    def take(self, expected: str | None = None, what: str | None = None) -> str:
        """Next token; ``expected`` is a literal it must equal, ``what`` only describes it."""
        tok = self.peek()
        if tok is None:
            want = what or (repr(expected) if expected else "a token")
            raise ParseError(f"unexpected end of line, expected {want}", self.line, self.col())
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}", self.line, self.col())
        self.i += 1
        return tok

    def name(self, what: str) -> str:
        col = self.col()
        tok = self.take(what=what)
        if tok in "()," or tok in _KEYWORDS:
            raise ParseError(f"expected {what}, got {tok!r}", self.line, col)
        return tok


def _parse_concept(t: _Tokens) -> Concept:
    col = t.col()
    tok = t.take(what="a concept")
    if tok == "top":
        return TOP
    if tok == "bot":
        return BOTTOM
    if tok == "(":
        op = t.take(what="an operator")
        if op == "not":
            c = Not(_parse_concept(t))
        elif op in ("and", "or", "implies"):
            left = _parse_concept(t)
            right = _parse_concept(t)
            c = {"and": And, "or": Or, "implies": Implies}[op](left, right)
        elif op in ("exists", "forall"):
            role = t.name("a role name")
            c = (Exists if op == "exists" else Forall)(role, _parse_concept(t))
        elif op == "self":
            c = SelfLoop(t.name("a role name"))
        else:
            raise ParseError(f"unknown operator {op!r}", t.line, col + 1)
        t.take(")")
        return c
    if tok in ")," or tok in _KEYWORDS:
        raise ParseError(f"expected a concept, got {tok!r}", t.line, col)
    return Name(tok)


def parse_concept(text: str) -> Concept:
    t = _Tokens(text, 1)
    c = _parse_concept(t)
    if t.peek() is not None:
        raise ParseError(f"trailing input {t.peek()!r}", 1, t.col())
    return c


def _parse_axiom(text: str, line: int, label: str):
    t = _Tokens(text, line)
    head = _parse_concept(t)
    nxt = t.peek()
    if nxt == "sub":
        t.take()
        ax = Gci(head, _parse_concept(t), label)
    elif nxt == "(":
        t.take()
        first = t.name("an individual")
        if t.peek() == ",":
            t.take()
            second = t.name("an individual")
            t.take(")")
            if not isinstance(head, Name):
                raise ParseError("role assertion needs a role name", line, 1)
            ax = RoleAssertion(head.name, first, second, label)
        else:
            t.take(")")
            ax = ConceptAssertion(head, first, label)
    else:
        raise ParseError("expected 'sub' or an assertion", line, t.col())
    if t.peek() is not None:
        raise ParseError(f"trailing input {t.peek()!r}", line, t.col())
    return ax


def _axiom_lines(kb: KnowledgeBase) -> Iterator[tuple[str, str]]:
    for ax in kb.axioms:
        yield ax.label, emit_axiom(ax)


def emit_kb(kb: KnowledgeBase, format: str = "dltext") -> str:
    if format == "dltext":
        lines = []
        for lab, text in _axiom_lines(kb):
            if lab:
                lines.append(f"# label: {lab}")
            lines.append(text)
        return "".join(line + "\n" for line in lines)
    if format == "owlfs":
        return emit_owlfs(kb)
    raise ValidationError(f"unknown knowledge-base format {format!r}")


def parse_kb(text: str, format: str = "dltext") -> KnowledgeBase:
    if format == "owlfs":
        raise ParseError("owlfs is an export-only format")
    if format != "dltext":
        raise ValidationError(f"unknown knowledge-base format {format!r}")
    abox, tbox = [], []
    label = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.fullmatch(r"#\s*label:\s*(\S.*?)\s*", line)
            if m:
                label = m.group(1)
            continue
        ax = _parse_axiom(raw, lineno, label)
        label = ""
        (tbox if isinstance(ax, Gci) else abox).append(ax)
    return KnowledgeBase(tuple(abox), tuple(tbox))


# -- OWL 2 functional-style export ---------------------------------------------------

IRI_BASE = "http://example.org/alcself"


def _iri(name: str) -> str:
    return ":" + "".join(ch if re.match(r"[A-Za-z0-9_-]", ch) else f"%{ord(ch):02X}" for ch in name)


def _owl_concept(c: Concept) -> str:
    if isinstance(c, Top):
        return "owl:Thing"
    if isinstance(c, Bottom):
        return "owl:Nothing"
    if isinstance(c, Name):
        return _iri(c.name)
    if isinstance(c, Not):
        return f"ObjectComplementOf({_owl_concept(c.arg)})"
    if isinstance(c, And):
        return f"ObjectIntersectionOf({_owl_concept(c.left)} {_owl_concept(c.right)})"
    if isinstance(c, Or):
        return f"ObjectUnionOf({_owl_concept(c.left)} {_owl_concept(c.right)})"
    if isinstance(c, Implies):
        return f"ObjectUnionOf(ObjectComplementOf({_owl_concept(c.left)}) {_owl_concept(c.right)})"
    if isinstance(c, Exists):
        return f"ObjectSomeValuesFrom({_iri(c.role)} {_owl_concept(c.arg)})"
    if isinstance(c, Forall):
        return f"ObjectAllValuesFrom({_iri(c.role)} {_owl_concept(c.arg)})"
    if isinstance(c, SelfLoop):
        return f"ObjectHasSelf({_iri(c.role)})"
    raise TypeError(f"not a concept: {c!r}")


def _owl_axiom(ax) -> str:
    if isinstance(ax, Gci):
        return f"SubClassOf({_owl_concept(ax.lhs)} {_owl_concept(ax.rhs)})"
    if isinstance(ax, ConceptAssertion):
        return f"ClassAssertion({_owl_concept(ax.concept)} {_iri(ax.individual)})"
    return f"ObjectPropertyAssertion({_iri(ax.role)} {_iri(ax.subject)} {_iri(ax.object)})"


OWL_AXIOM_PREFIXES = ("SubClassOf(", "ClassAssertion(", "ObjectPropertyAssertion(")


def emit_owlfs(kb: KnowledgeBase) -> str:
    names, roles, inds = kb.signature()
    lines = [f"Prefix(:=<{IRI_BASE}#>)",
             "Prefix(owl:=<http://www.w3.org/2002/07/owl#>)",
             f"Ontology(<{IRI_BASE}>"]
    lines += [f"Declaration(Class({_iri(n)}))" for n in sorted(names)]
    lines += [f"Declaration(ObjectProperty({_iri(r)}))" for r in sorted(roles)]
    lines += [f"Declaration(NamedIndividual({_iri(i)}))" for i in sorted(inds)]
    for ax in kb.axioms:
        if ax.label:
            lines.append(f"# label: {ax.label}")
        lines.append(_owl_axiom(ax))
    lines.append(")")
    return "".join(line + "\n" for line in lines)


# -- queries ---------------------------------------------------------------------------

VAR_RE = r"[A-Za-z_][A-Za-z0-9_.#^'{}+\-]*"
_ATOM = re.compile(rf"(?P<pred>{NAME_RE.pattern})\((?P<args>{VAR_RE}(?:,{VAR_RE})?)\)")


def emit_cq(q: Cq) -> str:
    if not len(q):
        raise ValidationError("degenerate query: no atoms")
    lines = ["answer:" + "".join(f" {v}" for v in q.distinguished)]
    lines += [f"{c}({v})" for c, v in sorted(q.concept_atoms)]
    lines += [f"{r}({u},{v})" for r, u, v in sorted(q.role_atoms)]
    return "".join(line + "\n" for line in lines)


def parse_cq(text: str) -> Cq:
    answer = None
    concept_atoms, role_atoms = set(), set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if answer is None and ":" in line and "(" not in line:
            key, _, rest = line.partition(":")
            if key.strip() != "answer":
                raise ParseError(f"unknown header {key.strip()!r}", lineno, 1)
            answer = tuple(rest.split())
            continue
        m = _ATOM.fullmatch(line.replace(" ", ""))
        if not m:
            raise ParseError(f"malformed atom {line!r}", lineno, 1)
        args = m.group("args").split(",")
        if len(args) == 1:
            concept_atoms.add((m.group("pred"), args[0]))
        else:
            role_atoms.add((m.group("pred"), args[0], args[1]))
    if answer is None:
        raise ParseError("missing 'answer:' header")
    if not concept_atoms and not role_atoms:
        raise ParseError("degenerate query: no atoms")
    return Cq(concept_atoms, role_atoms, answer)


# -- interpretations ---------------------------------------------------------------------

def emit_interp(i: Interpretation) -> str:
    raw = {
        "domain": sorted(i.domain),
        "concepts": {k: sorted(v) for k, v in i.concepts.items()},
        "roles": {k: sorted(list(p) for p in v) for k, v in i.roles.items()},
        "individuals": dict(i.individuals),
    }
    return json.dumps(raw, sort_keys=True) + "\n"


def parse_interp(text: str) -> Interpretation:
    raw = _load_json(text)
    if not isinstance(raw, dict) or "domain" not in raw:
        raise ParseError("interpretation must be a JSON object with a 'domain' field")
    unknown = sorted(set(raw) - {"domain", "concepts", "roles", "individuals"})
    if unknown:
        raise ParseError(f"unknown field {unknown[0]!r}")
    try:
        roles = {k: [tuple(p) for p in v] for k, v in raw.get("roles", {}).items()}
    except TypeError:
        raise ParseError("role extensions must be lists of pairs") from None
    if any(len(p) != 2 for v in roles.values() for p in v):
        raise ParseError("role extensions must be lists of pairs")
    return Interpretation(raw["domain"], raw.get("concepts", {}), roles, raw.get("individuals", {}))
