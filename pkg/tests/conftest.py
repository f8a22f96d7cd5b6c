"""Shared fixtures and the naive oracles the tests compare against."""

from __future__ import annotations

from itertools import product

import pytest
from hypothesis import HealthCheck, settings

from alcself import witness as wt
from alcself.atm import OffTapeMove, apply, find_accepting_run, m_acc, m_rej
from alcself.dl import And, Bottom, Exists, Forall, Implies, Name, Not, Or, SelfLoop, Top

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def acc():
    return m_acc()


@pytest.fixture(scope="session")
def rej():
    return m_rej()


@pytest.fixture(scope="session")
def run(acc):
    return find_accepting_run(acc)


@pytest.fixture(scope="session")
def qct(acc, run):
    return wt.build_quasi_computation_tree(acc, run)


# -- naive oracles -----------------------------------------------------------------

def holds_at(interp, c, d) -> bool:
    """Pointwise truth of concept ``c`` at element ``d``, straight from the semantics."""
    if isinstance(c, Top):
        return True
    if isinstance(c, Bottom):
        return False
    if isinstance(c, Name):
        return d in interp.concepts.get(c.name, ())
    if isinstance(c, Not):
        return not holds_at(interp, c.arg, d)
    if isinstance(c, And):
        return holds_at(interp, c.left, d) and holds_at(interp, c.right, d)
    if isinstance(c, Or):
        return holds_at(interp, c.left, d) or holds_at(interp, c.right, d)
    if isinstance(c, Implies):
        return not holds_at(interp, c.left, d) or holds_at(interp, c.right, d)
    edges = interp.roles.get(c.role, ())
    if isinstance(c, SelfLoop):
        return (d, d) in edges
    succ = [e for x, e in edges if x == d]
    if isinstance(c, Exists):
        return any(holds_at(interp, c.arg, e) for e in succ)
    if isinstance(c, Forall):
        return all(holds_at(interp, c.arg, e) for e in succ)
    raise TypeError(c)


def brute_matches(interp, q) -> set[tuple]:
    """Answers of ``q`` by trying every assignment of its variables."""
    vs = sorted(q.variables)
    dom = sorted(interp.domain)
    out = set()
    for values in product(dom, repeat=len(vs)):
        a = dict(zip(vs, values))
        if all(a[v] in interp.concepts.get(n, ()) for n, v in q.concept_atoms) and \
                all((a[u], a[v]) in interp.roles.get(r, ()) for r, u, v in q.role_atoms):
            out.add(tuple(a[v] for v in q.distinguished))
    return out


def brute_homomorphism_exists(src, dst, anchors=None) -> bool:
    anchors = anchors or {}
    free = sorted(set(src.domain) - set(anchors))
    for values in product(sorted(dst.domain), repeat=len(free)):
        h = dict(anchors, **dict(zip(free, values)))
        if all(h[d] in dst.concepts.get(n, ()) for n, ext in src.concepts.items() for d in ext) and \
                all((h[d], h[e]) in dst.roles.get(r, ()) for r, ext in src.roles.items() for d, e in ext):
            return True
    return False


def fixpoint_acceptance(atm) -> bool:
    """Least fixpoint of the acceptance condition over every configuration.

    An off-tape successor counts as non-accepting.
    """
    def step(c, t):
        try:
            return apply(atm, c, t)
        except OffTapeMove:
            return None

    configs = list(atm.configurations())
    accepting = {c for c in configs if c.state == atm.accepting}
    changed = True
    while changed:
        changed = False
        for c in configs:
            if c in accepting or atm.is_final(c.state):
                continue
            kids = [step(c, t) for t in atm.transitions(c.state, c.letter)]
            hits = [k is not None and k in accepting for k in kids]
            if any(hits) if atm.is_existential(c.state) else all(hits):
                accepting.add(c)
                changed = True
    return atm.initial_configuration() in accepting
