"""Conjunctive queries: path expansion, match enumeration and homomorphism search.

Matching is a small constraint solver. Concept atoms fix each variable's
candidate set, role atoms are kept arc-consistent (AC-3 up front, then after
every assignment), and the variable with the fewest remaining candidates is
assigned next, ties broken by name.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .dl import Interpretation
from .errors import BudgetExceeded, ValidationError

DEFAULT_BUDGET = 5_000_000


class MatchBudgetExceeded(BudgetExceeded):
    pass


@dataclass(frozen=True)
class Cq:
    """A conjunctive query under set semantics.

    ``concept_atoms`` holds ``(concept, var)`` pairs, ``role_atoms`` holds
    ``(role, var, var)`` triples and ``distinguished`` lists the answer
    variables in order.
    """

    concept_atoms: frozenset[tuple[str, str]]
    role_atoms: frozenset[tuple[str, str, str]]
    distinguished: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "concept_atoms", frozenset(map(tuple, self.concept_atoms)))
        object.__setattr__(self, "role_atoms", frozenset(map(tuple, self.role_atoms)))
        object.__setattr__(self, "distinguished", tuple(self.distinguished))
        missing = [v for v in self.distinguished if v not in self.variables]
        if missing:
            raise ValidationError(f"distinguished variable {missing[0]!r} does not occur in any atom")

    @property
    def variables(self) -> frozenset[str]:
        vs = {v for _, v in self.concept_atoms}
        for _, u, v in self.role_atoms:
            vs.update((u, v))
        return frozenset(vs)

    def __len__(self):
        return len(self.concept_atoms) + len(self.role_atoms)

    def rename(self, mapping: Mapping[str, str]) -> Cq:
        f = lambda v: mapping.get(v, v)
        return Cq({(c, f(v)) for c, v in self.concept_atoms},
                  {(r, f(u), f(v)) for r, u, v in self.role_atoms},
                  tuple(f(v) for v in self.distinguished))

    def with_answer(self, *distinguished: str) -> Cq:
        return Cq(self.concept_atoms, self.role_atoms, distinguished)

    def sorted_atoms(self) -> list[tuple]:
        return sorted(self.concept_atoms) + sorted(self.role_atoms)


def conjoin(parts: Iterable[Cq], distinguished: Sequence[str] = ()) -> Cq:
    """The conjunction of ``parts``; variables with the same name are identified."""
    concept_atoms, role_atoms = set(), set()
    for q in parts:
        concept_atoms |= q.concept_atoms
        role_atoms |= q.role_atoms
    return Cq(concept_atoms, role_atoms, tuple(distinguished))


def concept_atom(name: str, var: str) -> Cq:
    return Cq({(name, var)}, set())


def role_atom(role: str, u: str, v: str) -> Cq:
    return Cq(set(), {(role, u, v)})


def _guard(seg: str) -> str | None:
    return seg[:-1] if seg.endswith("?") else None


def expand_path(segments: Sequence[str], endpoints: tuple[str, str], label: str = "path") -> Cq:
    """Expand ``(G0?; r1; G1?; r2; …)(x, y)`` into atoms.

    Guards end with ``?``; a ⊤ guard (``top?``) adds no atom. Intermediate
    variables are named ``{label}#1``, ``{label}#2``, … in path order.
    """
    roles = [s for s in segments if _guard(s) is None]
    if not roles:
        raise ValidationError("degenerate path: no role names")
    x, y = endpoints
    names = [x] + [f"{label}#{k}" for k in range(1, len(roles))] + [y]
    concept_atoms, role_atoms = set(), set()
    pos, guarded = 0, False
    for seg in segments:
        g = _guard(seg)
        if g is not None:
            if guarded:
                raise ValidationError(f"malformed path: two guards in a row at {seg!r}")
            if not g:
                raise ValidationError("malformed path: empty guard")
            if g not in ("top", "⊤"):
                concept_atoms.add((g, names[pos]))
            guarded = True
        else:
            role_atoms.add((seg, names[pos], names[pos + 1]))
            pos += 1
            guarded = False
    return Cq(concept_atoms, role_atoms, (x, y))


# -- solving -------------------------------------------------------------------

class _Solver:
    def __init__(self, interp: Interpretation, q: Cq, budget: int):
        self.interp = interp
        self.budget = budget
        self.nodes = 0
        self.arcs: dict[str, list[tuple[str, str, str]]] = {v: [] for v in q.variables}
        self.loops: dict[str, list[str]] = {v: [] for v in q.variables}
        for r, u, v in q.role_atoms:
            if u == v:
                self.loops[u].append(r)
            else:
                self.arcs[u].append((r, u, v))
                self.arcs[v].append((r, u, v))
        self.q = q

    def initial_domains(self, anchors: Mapping[str, str] | None = None) -> dict[str, frozenset] | None:
        i = self.interp
        required: dict[str, list[str]] = {v: [] for v in self.q.variables}
        for c, v in self.q.concept_atoms:
            required[v].append(c)
        domains = {}
        for v in sorted(self.q.variables):
            if anchors and v in anchors:
                cand = {anchors[v]}
            elif required[v]:
                exts = sorted((i.ext(c) for c in required[v]), key=len)
                cand = set(exts[0])
            else:
                cand = set(i.domain)
            for c in required[v]:
                cand &= i.ext(c)
            for r in self.loops[v]:
                cand = {d for d in cand if d in i.successors(r, d)}
            if not cand:
                return None
            domains[v] = frozenset(cand)
        if not self.propagate(domains, list(domains)):
            return None
        return domains

    def propagate(self, domains: dict, touched: Iterable[str]) -> bool:
        """AC-3 over the role atoms, in place. False on a wipe-out."""
        i = self.interp
        queue = deque(touched)
        queued = set(queue)
        while queue:
            var = queue.popleft()
            queued.discard(var)
            for r, u, v in self.arcs[var]:
                du, dv = domains[u], domains[v]
                keep_u = frozenset(d for d in du if not i.successors(r, d).isdisjoint(dv))
                if not keep_u:
                    return False
                keep_v = frozenset(e for e in dv if not i.predecessors(r, e).isdisjoint(keep_u))
                if not keep_v:
                    return False
                for w, old, new in ((u, du, keep_u), (v, dv, keep_v)):
                    if len(new) < len(old):
                        domains[w] = new
                        if w not in queued:
                            queue.append(w)
                            queued.add(w)
        return True

    def search(self, domains: dict, todo: frozenset[str]) -> Iterator[dict]:
        """Yield domain maps in which every variable of ``todo`` is a singleton."""
        open_vars = [v for v in todo if len(domains[v]) > 1]
        if not open_vars:
            yield domains
            return
        var = min(open_vars, key=lambda v: (len(domains[v]), v))
        for value in sorted(domains[var]):
            self.nodes += 1
            if self.nodes > self.budget:
                raise MatchBudgetExceeded(f"match search exceeded its budget of {self.budget} nodes")
            trial = dict(domains)
            trial[var] = frozenset((value,))
            if self.propagate(trial, [var]):
                yield from self.search(trial, todo)


def _solver(interp, q, budget):
    return _Solver(interp, q, DEFAULT_BUDGET if budget is None else budget)


def find_matches(interp: Interpretation, q: Cq, budget: int | None = None) -> list[tuple[str, ...]]:
    """Projections of all matches onto the distinguished variables, sorted and deduplicated.

    Distinguished variables are enumerated first; each candidate answer is then
    kept if the remaining variables admit at least one completion.
    """
    s = _solver(interp, q, budget)
    domains = s.initial_domains()
    if domains is None:
        return []
    answer = frozenset(q.distinguished)
    rest = q.variables - answer
    found = set()
    for partial in s.search(domains, answer):
        if next(s.search(partial, rest), None) is not None:
            found.add(tuple(next(iter(partial[v])) for v in q.distinguished))
    return sorted(found)


def exists_match(interp: Interpretation, q: Cq, budget: int | None = None) -> bool:
    """True iff ``q`` has a match; stops at the first one found."""
    return find_match(interp, q, budget) is not None


def find_match(interp: Interpretation, q: Cq, budget: int | None = None,
               anchors: Mapping[str, str] | None = None) -> dict[str, str] | None:
    """One total match (the first in search order), or None."""
    s = _solver(interp, q, budget)
    domains = s.initial_domains(anchors)
    if domains is None:
        return None
    full = next(s.search(domains, q.variables), None)
    if full is None:
        return None
    return {v: next(iter(d)) for v, d in sorted(full.items())}


def is_match(interp: Interpretation, q: Cq, assignment: Mapping[str, str]) -> bool:
    """Direct check of every atom under a total assignment."""
    if set(assignment) < q.variables:
        return False
    return (all(assignment[v] in interp.ext(c) for c, v in q.concept_atoms)
            and all((assignment[u], assignment[v]) in interp.rel(r) for r, u, v in q.role_atoms))


def canonical_query(src: Interpretation) -> Cq:
    """One variable per element, one atom per concept membership and role edge."""
    return Cq({(c, d) for c, ext in src.concepts.items() for d in ext},
              {(r, d, e) for r, ext in src.roles.items() for d, e in ext})


def find_homomorphism(src: Interpretation, dst: Interpretation,
                      anchors: Mapping[str, str] | None = None,
                      budget: int | None = None) -> dict[str, str] | None:
    """A concept- and role-preserving map ``src.domain → dst.domain`` extending ``anchors``."""
    anchors = dict(anchors or {})
    bad = [k for k in anchors if k not in src.domain] + [v for v in anchors.values()
                                                         if v not in dst.domain]
    if bad:
        raise ValidationError(f"anchor outside the domains: {bad[0]!r}")
    q = canonical_query(src)
    isolated = src.domain - q.variables
    s = _solver(dst, q, budget)
    domains = s.initial_domains({k: v for k, v in anchors.items() if k in q.variables})
    if domains is None:
        return None
    full = next(s.search(domains, q.variables), None)
    if full is None:
        return None
    h = {v: next(iter(d)) for v, d in full.items()}
    if isolated and not dst.domain:
        return None
    fallback = min(dst.domain) if dst.domain else None
    for d in isolated:
        h[d] = anchors.get(d, fallback)
    return dict(sorted(h.items()))


def is_homomorphism(h: Mapping[str, str], src: Interpretation, dst: Interpretation) -> bool:
    if set(h) != set(src.domain) or not set(h.values()) <= dst.domain:
        return False
    return (all(h[d] in dst.ext(c) for c, ext in src.concepts.items() for d in ext)
            and all((h[d], h[e]) in dst.rel(r) for r, ext in src.roles.items() for d, e in ext))
