"""ALCself concepts, knowledge bases and a model checker over finite interpretations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

from .errors import ValidationError


# -- concept AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "⊤"


@dataclass(frozen=True)
class Bottom:
    def __str__(self):
        return "⊥"


@dataclass(frozen=True)
class Name:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("concept name must be non-empty")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not:
    arg: Concept

    def __str__(self):
        return f"¬{self.arg}"


@dataclass(frozen=True)
class And:
    left: Concept
    right: Concept

    def __str__(self):
        return f"({self.left} ⊓ {self.right})"


@dataclass(frozen=True)
class Or:
    left: Concept
    right: Concept

    def __str__(self):
        return f"({self.left} ⊔ {self.right})"


@dataclass(frozen=True)
class Implies:
    left: Concept
    right: Concept

    def __str__(self):
        return f"({self.left} → {self.right})"


@dataclass(frozen=True)
class Exists:
    role: str
    arg: Concept

    def __str__(self):
        return f"∃{self.role}.{self.arg}"


@dataclass(frozen=True)
class Forall:
    role: str
    arg: Concept

    def __str__(self):
        return f"∀{self.role}.{self.arg}"


@dataclass(frozen=True)
class SelfLoop:
    role: str

    def __str__(self):
        return f"∃{self.role}.Self"


Concept = Union[Top, Bottom, Name, Not, And, Or, Implies, Exists, Forall, SelfLoop]

TOP = Top()
BOTTOM = Bottom()


def conj(*parts: Concept) -> Concept:
    """Right-nested conjunction; the empty conjunction is ⊤."""
    if not parts:
        return TOP
    return reduce(lambda acc, c: And(c, acc), reversed(parts[:-1]), parts[-1])


def disj(*parts: Concept) -> Concept:
    """Right-nested disjunction; the empty disjunction is ⊥."""
    if not parts:
        return BOTTOM
    return reduce(lambda acc, c: Or(c, acc), reversed(parts[:-1]), parts[-1])


def forall_chain(roles: Iterable[str], tail: Concept) -> Concept:
    """∀r1.∀r2.…∀rk.tail"""
    for role in reversed(list(roles)):
        tail = Forall(role, tail)
    return tail


def exists_chain(roles: Iterable[str], tail: Concept) -> Concept:
    for role in reversed(list(roles)):
        tail = Exists(role, tail)
    return tail


def children(c: Concept) -> tuple[Concept, ...]:
    if isinstance(c, (Not, Exists, Forall)):
        return (c.arg,)
    if isinstance(c, (And, Or, Implies)):
        return (c.left, c.right)
    return ()


def subconcepts(c: Concept) -> Iterator[Concept]:
    stack = [c]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def signature(c: Concept) -> tuple[frozenset[str], frozenset[str]]:
    """(concept names, role names) occurring in ``c``."""
    names, roles = set(), set()
    for node in subconcepts(c):
        if isinstance(node, Name):
            names.add(node.name)
        elif isinstance(node, (Exists, Forall, SelfLoop)):
            roles.add(node.role)
    return frozenset(names), frozenset(roles)


def expand_derived(c: Concept) -> Concept:
    """Rewrite into ⊤, names, ¬, ⊓, ∃ and Self only, using the textbook definitions."""
    if isinstance(c, Bottom):
        return Not(TOP)
    if isinstance(c, Not):
        return Not(expand_derived(c.arg))
    if isinstance(c, And):
        return And(expand_derived(c.left), expand_derived(c.right))
    if isinstance(c, Or):
        return Not(And(Not(expand_derived(c.left)), Not(expand_derived(c.right))))
    if isinstance(c, Implies):
        return expand_derived(Or(Not(c.left), c.right))
    if isinstance(c, Exists):
        return Exists(c.role, expand_derived(c.arg))
    if isinstance(c, Forall):
        return Not(Exists(c.role, Not(expand_derived(c.arg))))
    return c


# -- axioms and knowledge bases ------------------------------------------------

@dataclass(frozen=True)
class Gci:
    lhs: Concept
    rhs: Concept
    label: str = ""

    def __str__(self):
        return f"{self.lhs} ⊑ {self.rhs}"


@dataclass(frozen=True)
class ConceptAssertion:
    concept: Concept
    individual: str
    label: str = ""

    def __str__(self):
        return f"{self.concept}({self.individual})"


@dataclass(frozen=True)
class RoleAssertion:
    role: str
    subject: str
    object: str
    label: str = ""

    def __str__(self):
        return f"{self.role}({self.subject},{self.object})"


Assertion = Union[ConceptAssertion, RoleAssertion]
Axiom = Union[Gci, ConceptAssertion, RoleAssertion]


def equivalence(lhs: Concept, rhs: Concept, label: str) -> tuple[Gci, Gci]:
    """C ≡ D as its two inclusions, labelled ``label.fwd`` and ``label.bwd``."""
    return Gci(lhs, rhs, f"{label}.fwd"), Gci(rhs, lhs, f"{label}.bwd")


@dataclass(frozen=True)
class KnowledgeBase:
    """ABox and TBox, both in generation order. An empty ABox is allowed."""

    abox: tuple[Assertion, ...] = ()
    tbox: tuple[Gci, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "abox", tuple(self.abox))
        object.__setattr__(self, "tbox", tuple(self.tbox))

    @property
    def axioms(self) -> tuple[Axiom, ...]:
        return self.abox + self.tbox

    def __len__(self):
        return len(self.abox) + len(self.tbox)

    def labels(self) -> list[str]:
        return [ax.label for ax in self.axioms]

    def signature(self) -> tuple[frozenset[str], frozenset[str], frozenset[str]]:
        """(concept names, role names, individuals)."""
        names, roles, inds = set(), set(), set()
        for ax in self.axioms:
            if isinstance(ax, Gci):
                for c in (ax.lhs, ax.rhs):
                    n, r = signature(c)
                    names |= n
                    roles |= r
            elif isinstance(ax, ConceptAssertion):
                n, r = signature(ax.concept)
                names |= n
                roles |= r
                inds.add(ax.individual)
            else:
                roles.add(ax.role)
                inds |= {ax.subject, ax.object}
        return frozenset(names), frozenset(roles), frozenset(inds)


# -- interpretations -----------------------------------------------------------

def _freeze_ext(raw: Mapping | None, pairs: bool) -> dict:
    out = {}
    for name, ext in (raw or {}).items():
        ext = frozenset(tuple(p) for p in ext) if pairs else frozenset(ext)
        if ext:
            out[name] = ext
    return dict(sorted(out.items()))


@dataclass(frozen=True, eq=False)
class Interpretation:
    """A finite structure. Names missing from the maps have empty extensions."""

    domain: frozenset[str]
    concepts: Mapping[str, frozenset[str]] = field(default_factory=dict)
    roles: Mapping[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    individuals: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        domain = frozenset(self.domain)
        concepts = _freeze_ext(self.concepts, pairs=False)
        roles = _freeze_ext(self.roles, pairs=True)
        individuals = dict(sorted((self.individuals or {}).items()))
        problems = []
        for name, ext in concepts.items():
            stray = sorted(ext - domain)
            if stray:
                problems.append(f"concept {name!r} lists elements outside the domain: {stray}")
        for name, ext in roles.items():
            stray = sorted({e for pair in ext for e in pair} - domain)
            if stray:
                problems.append(f"role {name!r} lists elements outside the domain: {stray}")
            if any(len(p) != 2 for p in ext):
                problems.append(f"role {name!r} has a non-binary tuple")
        for ind, elem in individuals.items():
            if elem not in domain:
                problems.append(f"individual {ind!r} maps outside the domain: {elem!r}")
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "concepts", concepts)
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "individuals", individuals)

    def _key(self):
        return (self.domain, tuple(self.concepts.items()), tuple(self.roles.items()),
                tuple(self.individuals.items()))

    def __eq__(self, other):
        if not isinstance(other, Interpretation):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (f"Interpretation(|domain|={len(self.domain)}, concepts={len(self.concepts)}, "
                f"roles={len(self.roles)})")

    def ext(self, name: str) -> frozenset[str]:
        return self.concepts.get(name, frozenset())

    def rel(self, role: str) -> frozenset[tuple[str, str]]:
        return self.roles.get(role, frozenset())

    @cached_property
    def _succ(self) -> dict[str, dict[str, frozenset[str]]]:
        index: dict[str, dict[str, set[str]]] = {}
        for role, pairs in self.roles.items():
            table = index.setdefault(role, {})
            for d, e in pairs:
                table.setdefault(d, set()).add(e)
        return {r: {d: frozenset(es) for d, es in t.items()} for r, t in index.items()}

    @cached_property
    def _pred(self) -> dict[str, dict[str, frozenset[str]]]:
        index: dict[str, dict[str, set[str]]] = {}
        for role, pairs in self.roles.items():
            table = index.setdefault(role, {})
            for d, e in pairs:
                table.setdefault(e, set()).add(d)
        return {r: {e: frozenset(ds) for e, ds in t.items()} for r, t in index.items()}

    def successors(self, role: str, d: str) -> frozenset[str]:
        return self._succ.get(role, {}).get(d, frozenset())

    def predecessors(self, role: str, e: str) -> frozenset[str]:
        return self._pred.get(role, {}).get(e, frozenset())

    @cached_property
    def labels_of(self) -> dict[str, frozenset[str]]:
        """Element → concept names it belongs to."""
        out: dict[str, set[str]] = {d: set() for d in self.domain}
        for name, ext in self.concepts.items():
            for d in ext:
                out[d].add(name)
        return {d: frozenset(ns) for d, ns in out.items()}

    # editing helpers; each returns a new structure

    def replace(self, domain=None, concepts=None, roles=None, individuals=None) -> Interpretation:
        return Interpretation(
            self.domain if domain is None else domain,
            self.concepts if concepts is None else concepts,
            self.roles if roles is None else roles,
            self.individuals if individuals is None else individuals,
        )

    def with_member(self, name: str, element: str, present: bool = True) -> Interpretation:
        concepts = dict(self.concepts)
        ext = set(concepts.get(name, ()))
        ext.add(element) if present else ext.discard(element)
        concepts[name] = ext
        return self.replace(concepts=concepts)

    def with_edge(self, role: str, d: str, e: str, present: bool = True) -> Interpretation:
        roles = dict(self.roles)
        ext = set(roles.get(role, ()))
        ext.add((d, e)) if present else ext.discard((d, e))
        roles[role] = ext
        return self.replace(roles=roles)

    def disjoint_union(self, other: Interpretation) -> Interpretation:
        """Union of two structures with disjoint domains; individuals from ``self`` win."""
        if self.domain & other.domain:
            raise ValidationError("domains overlap")
        concepts = {k: set(v) for k, v in self.concepts.items()}
        for k, v in other.concepts.items():
            concepts.setdefault(k, set()).update(v)
        roles = {k: set(v) for k, v in self.roles.items()}
        for k, v in other.roles.items():
            roles.setdefault(k, set()).update(v)
        return Interpretation(self.domain | other.domain, concepts, roles,
                              {**other.individuals, **self.individuals})


# -- semantics -----------------------------------------------------------------

class Evaluator:
    """Memoising concept evaluator bound to one interpretation."""

    def __init__(self, interp: Interpretation):
        self.interp = interp
        self._memo: dict[Concept, frozenset[str]] = {}

    def __call__(self, c: Concept) -> frozenset[str]:
        hit = self._memo.get(c)
        if hit is None:
            hit = self._memo[c] = self._eval(c)
        return hit

    def _eval(self, c: Concept) -> frozenset[str]:
        i = self.interp
        dom = i.domain
        if isinstance(c, Top):
            return dom
        if isinstance(c, Bottom):
            return frozenset()
        if isinstance(c, Name):
            return i.ext(c.name)
        if isinstance(c, Not):
            return dom - self(c.arg)
        if isinstance(c, And):
            return self(c.left) & self(c.right)
        if isinstance(c, Or):
            return self(c.left) | self(c.right)
        if isinstance(c, Implies):
            return (dom - self(c.left)) | self(c.right)
        if isinstance(c, SelfLoop):
            return frozenset(d for d, e in i.rel(c.role) if d == e)
        if isinstance(c, Exists):
            inner = self(c.arg)
            return frozenset(d for d, e in i.rel(c.role) if e in inner)
        if isinstance(c, Forall):
            inner = self(c.arg)
            return frozenset(d for d in dom if i.successors(c.role, d) <= inner)
        raise TypeError(f"not a concept: {c!r}")


def eval_concept(interp: Interpretation, c: Concept) -> frozenset[str]:
    return Evaluator(interp)(c)


class GciVerdict(NamedTuple):
    holds: bool
    witness: str | None


def check_gci(interp: Interpretation, gci: Gci, evaluator: Evaluator | None = None) -> GciVerdict:
    """Whether lhs ⊆ rhs; on failure the least violating element is the witness."""
    ev = evaluator or Evaluator(interp)
    bad = ev(gci.lhs) - ev(gci.rhs)
    return GciVerdict(not bad, min(bad) if bad else None)


@dataclass(frozen=True)
class AxiomVerdict:
    label: str
    axiom: Axiom
    holds: bool
    witness: str | None = None
    error: str | None = None


@dataclass(frozen=True)
class KbReport:
    entries: tuple[AxiomVerdict, ...]

    @property
    def ok(self) -> bool:
        return all(e.holds for e in self.entries)

    def failures(self) -> list[AxiomVerdict]:
        return [e for e in self.entries if not e.holds]

    def failing_labels(self) -> list[str]:
        return [e.label for e in self.failures()]

    def __bool__(self):
        return self.ok


def check_kb(interp: Interpretation, kb: KnowledgeBase) -> KbReport:
    """One verdict per axiom, ABox first, in the knowledge base's order."""
    ev = Evaluator(interp)
    out = []
    for ax in kb.axioms:
        if isinstance(ax, Gci):
            holds, witness = check_gci(interp, ax, ev)
            out.append(AxiomVerdict(ax.label, ax, holds, witness))
        elif isinstance(ax, ConceptAssertion):
            elem = interp.individuals.get(ax.individual)
            if elem is None:
                out.append(AxiomVerdict(ax.label, ax, False,
                                        error=f"individual {ax.individual!r} is not mapped"))
            else:
                out.append(AxiomVerdict(ax.label, ax, elem in ev(ax.concept)))
        else:
            d = interp.individuals.get(ax.subject)
            e = interp.individuals.get(ax.object)
            if d is None or e is None:
                missing = ax.subject if d is None else ax.object
                out.append(AxiomVerdict(ax.label, ax, False,
                                        error=f"individual {missing!r} is not mapped"))
            else:
                out.append(AxiomVerdict(ax.label, ax, (d, e) in interp.rel(ax.role)))
    return KbReport(tuple(out))


def is_model(interp: Interpretation, kb: KnowledgeBase) -> bool:
    return check_kb(interp, kb).ok
