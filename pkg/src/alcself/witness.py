"""The intended models: configuration units, configuration trees, enriched
configuration trees and quasi-computation trees, plus the reverse direction
(reading a tree back out of any model through a homomorphism).
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

from . import reduction as rd
from .atm import LETTERS, Atm, Configuration, RunNode, Transition, is_valid_quasi_run, successors
from .cq import find_homomorphism, is_homomorphism
from .dl import Interpretation
from .errors import AlcSelfError, ValidationError


class _InitOrigin:
    def __repr__(self):
        return "INIT"


INIT = _InitOrigin()


def address(k: int, n: int) -> str:
    """Cell ``k`` as an n-bit word, most significant bit first."""
    return format(k, f"0{n}b") if n else ""


def words(n: int) -> list[str]:
    """All binary words of length ≤ n, shortest first."""
    return ["".join(bits) for k in range(n + 1) for bits in itertools.product("01", repeat=k)]


# -- units ---------------------------------------------------------------------

def _unit_parts(n: int, root_left: bool):
    domain = words(n)
    concepts: dict[str, set[str]] = {rd.lvl(i): set() for i in range(n + 1)}
    roles: dict[str, set[tuple[str, str]]] = {}
    for w in domain:
        concepts[rd.lvl(len(w))].add(w)
        for i, bit in enumerate(w, start=1):
            concepts.setdefault(rd.ad(i, bit), set()).add(w)
        left = w.endswith("0") or (w == "" and root_left)
        concepts.setdefault(rd.L if left else rd.R, set()).add(w)
    for i in range(1, n + 1):
        roles[rd.ell(i)] = {(w, w) for w in domain} | {(w, w + "0") for w in domain if len(w) == i - 1}
        roles[rd.r(i)] = {(w, w) for w in domain} | {(w, w + "1") for w in domain if len(w) == i - 1}
    roles[rd.NEXT] = {(w, w) for w in domain if len(w) == n}
    return domain, concepts, roles


def build_unit(n: int, root_left: bool = True) -> Interpretation:
    """The n-configuration unit; ``root_left`` puts ε in L (else in R)."""
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}")
    return Interpretation(*_unit_parts(n, root_left))


# -- configuration trees --------------------------------------------------------

def _check_cfg(atm: Atm, cfg: Configuration):
    if len(cfg.tape) != atm.tape_length:
        raise ValidationError(f"tape length {len(cfg.tape)} != {atm.tape_length}")
    if cfg.state not in atm.states:
        raise ValidationError(f"unknown state {cfg.state!r}")


def _position_bits(concepts, pos, word: str, n: int):
    for i, bit in enumerate(word, start=1):
        concepts.setdefault(pos(i, bit), set()).update(w for w in words(n) if len(w) in (0, n))


def _config_parts(atm: Atm, cfg: Configuration, root_left: bool):
    n = atm.n
    domain, concepts, roles = _unit_parts(n + 1, root_left)
    concepts[rd.st(cfg.state)] = {""}
    for k, letter in enumerate(cfg.tape):
        w = address(k, n)
        concepts.setdefault(rd.let(letter), set()).add(w)
        left, right = (rd.ZERO, rd.ONE) if letter == "0" else (rd.ONE, rd.ZERO)
        concepts.setdefault(left, set()).add(w + "0")
        concepts.setdefault(right, set()).add(w + "1")
    head = address(cfg.head, n)
    concepts[rd.HD_HERE] = {head}
    concepts[rd.NO_HD_HERE] = {address(k, n) for k in range(atm.tape_length)} - {head}
    _position_bits(concepts, rd.hd_pos, head, n)
    concepts[rd.hd_let(cfg.letter)] = {""}
    return domain, concepts, roles


def build_config_tree(atm: Atm, cfg: Configuration, root_left: bool = True) -> Interpretation:
    _check_cfg(atm, cfg)
    return Interpretation(*_config_parts(atm, cfg, root_left))


def previous_head(cfg: Configuration, origin) -> int:
    return 0 if origin is INIT else cfg.head - origin.move


def build_enriched_tree(atm: Atm, cfg: Configuration, origin, root_left: bool = True,
                        phd_override: int | None = None) -> Interpretation:
    """Configuration tree plus the previous-transition data.

    ``origin`` is :data:`INIT` or the transition that produced ``cfg``.
    ``phd_override`` forces a previous-head cell and skips the checks, for
    building deliberately broken trees.
    """
    _check_cfg(atm, cfg)
    n = atm.n
    problems = []
    if origin is INIT:
        if cfg != atm.initial_configuration():
            problems.append(f"Init origin needs the initial configuration, got {cfg}")
        if not root_left:
            problems.append("Init origin needs the root in L")
    elif isinstance(origin, Transition):
        if origin not in atm.delta:
            problems.append(f"{origin} is not a transition of the machine")
        if cfg.state != origin.target:
            problems.append(f"state {cfg.state} differs from the target of {origin}")
        if not 0 <= cfg.head - origin.move < atm.tape_length:
            problems.append(f"previous head {cfg.head - origin.move} is off the tape")
    else:
        raise ValidationError(f"origin must be INIT or a Transition, got {origin!r}")
    if problems and phd_override is None:
        raise ValidationError(problems)

    domain, concepts, roles = _config_parts(atm, cfg, root_left)
    concepts[rd.INIT if origin is INIT else rd.pr_tr(origin)] = {""}
    phd_cell = previous_head(cfg, origin) if phd_override is None else phd_override
    phd = address(phd_cell, n)
    cells = {address(k, n) for k in range(atm.tape_length)}
    concepts[rd.PHD_HERE] = {phd}
    concepts[rd.NO_PHD_HERE] = cells - {phd}
    concepts[rd.PHD_ABV] = {phd + "0", phd + "1"}
    concepts[rd.NO_PHD_ABV] = {c + x for c in cells for x in "01"} - concepts[rd.PHD_ABV]
    _position_bits(concepts, rd.phd_pos, phd, n)
    concepts[rd.phd_let(cfg.tape[phd_cell])] = {""}
    return Interpretation(domain, concepts, roles)


# -- quasi-computation trees -----------------------------------------------------

def element(path: str, word: str) -> str:
    """Element id of in-tree address ``word`` inside the component at ``path``."""
    return f"{path}#{word}"


def split_element(e: str) -> tuple[str, str]:
    path, _, word = e.partition("#")
    return path, word


def origins(atm: Atm, tree: RunNode) -> dict[str, object]:
    """Path → origin (INIT or the generating transition) for every node of ``tree``."""
    out: dict[str, object] = {}
    for path, node in tree.walk():
        if not path:
            out[path] = INIT
            continue
        parent = tree.node_at(path[:-1]).config
        out[path] = atm.transition(parent.state, parent.letter, node.branch)
    return out


def build_quasi_computation_tree(atm: Atm, tree: RunNode, tbox_only: bool = False) -> Interpretation:
    """Disjoint union of enriched trees, one per node of the quasi-run, roots linked by next.

    Component paths are child indices: universal nodes have children ``0`` and
    ``1``, existential nodes the single child ``0``.
    """
    verdict = is_valid_quasi_run(atm, tree, strict=False)
    if not verdict.ok:
        raise ValidationError(f"not a quasi-run: {verdict.violation}")
    rejecting = [p for p, node in tree.walk() if node.config.state == atm.rejecting]
    if rejecting:
        raise ValidationError(f"node {rejecting[0]!r} is in the rejecting state")
    concepts: dict[str, set[str]] = {}
    roles: dict[str, set[tuple[str, str]]] = {}
    domain: set[str] = set()
    origin_of = origins(atm, tree)
    for path, node in tree.walk():
        part = build_enriched_tree(atm, node.config, origin_of[path], root_left=not path.endswith("1"))
        domain.update(element(path, w) for w in part.domain)
        for name, ext in part.concepts.items():
            concepts.setdefault(name, set()).update(element(path, w) for w in ext)
        for name, ext in part.roles.items():
            roles.setdefault(name, set()).update((element(path, u), element(path, v)) for u, v in ext)
        for i in range(len(node.children)):
            roles.setdefault(rd.NEXT, set()).add((element(path, ""), element(path + str(i), "")))
    root = element("", "")
    if tbox_only:
        roles[rd.AUX] = {(d, root) for d in domain}
        return Interpretation(domain, concepts, roles)
    return Interpretation(domain, concepts, roles, {rd.INDIVIDUAL: root})


def component_paths(q: Interpretation) -> list[str]:
    return sorted(split_element(e)[0] for e in q.domain if split_element(e)[1] == "")


def consecutive_pairs(q: Interpretation) -> list[tuple[str, str]]:
    """(parent path, child path) for every root-to-root next edge."""
    out = []
    for d, e in q.rel(rd.NEXT):
        if d != e:
            out.append((split_element(d)[0], split_element(e)[0]))
    return sorted(out)


def leaves(q: Interpretation, path: str, n: int) -> list[str]:
    return sorted(element(path, w) for w in words(n + 1) if len(w) == n + 1)


# -- reading trees back out of models ------------------------------------------------

class DecodeError(AlcSelfError):
    """A pulled-back structure does not describe a tree of the expected kind."""


def pull_back(h: Mapping[str, str], src: Interpretation, dst: Interpretation,
              names: Iterable[str]) -> Interpretation:
    """``src`` with each of ``names`` replaced by its preimage under ``h``."""
    concepts = {k: set(v) for k, v in src.concepts.items()}
    for name in names:
        ext = dst.ext(name)
        concepts[name] = {w for w in src.domain if h[w] in ext}
    return src.replace(concepts=concepts)


def _only(ext, what):
    ext = sorted(ext)
    if len(ext) != 1:
        raise DecodeError(f"expected exactly one {what}, found {len(ext)}")
    return ext[0]


def decode_configuration(atm: Atm, tree: Interpretation) -> Configuration:
    n = atm.n
    state = _only([s for s in atm.states if "" in tree.ext(rd.st(s))], "state at the root")
    tape = []
    for k in range(atm.tape_length):
        w = address(k, n)
        tape.append(_only([a for a in LETTERS if w in tree.ext(rd.let(a))], f"letter at cell {w}"))
    head = _only(tree.ext(rd.HD_HERE), "head cell")
    return Configuration("".join(tape), state, int(head, 2) if head else 0)


def decode_origin(atm: Atm, tree: Interpretation):
    found = [INIT] if "" in tree.ext(rd.INIT) else []
    found += [t for t in atm.delta if "" in tree.ext(rd.pr_tr(t))]
    return _only(found, "origin marker at the root")


def conf_names(atm: Atm) -> set[str]:
    n = atm.n
    names = {rd.HD_HERE, rd.NO_HD_HERE, rd.ZERO, rd.ONE}
    names |= {rd.st(s) for s in atm.states}
    names |= {rd.hd_pos(i, b) for i in range(1, n + 1) for b in (0, 1)}
    names |= {f(a) for f in (rd.hd_let, rd.let) for a in LETTERS}
    return names


def enr_names(atm: Atm) -> set[str]:
    n = atm.n
    names = {rd.INIT, rd.PHD_HERE, rd.NO_PHD_HERE, rd.PHD_ABV, rd.NO_PHD_ABV}
    names |= {rd.pr_tr(t) for t in atm.delta}
    names |= {rd.phd_pos(i, b) for i in range(1, n + 1) for b in (0, 1)}
    names |= {rd.phd_let(a) for a in LETTERS}
    return names


def unit_homomorphism(interp: Interpretation, d: str, n: int) -> tuple[Interpretation, dict] | None:
    """A fresh n-unit and a homomorphism into ``interp`` sending ε to ``d``, if one exists."""
    unit = build_unit(n, root_left=d in interp.ext(rd.L))
    h = find_homomorphism(unit, interp, {"": d})
    return None if h is None else (unit, h)


def recover_tree(atm: Atm, interp: Interpretation, d: str, kind: str):
    """Rebuild the configuration tree (``kind="conf"``) or enriched tree (``"enr"``) at ``d``.

    Returns ``(tree, h)`` where ``h`` maps the rebuilt tree into ``interp``
    with ``h(ε) = d``; None if no unit maps there. Raises
    :class:`DecodeError` if the pulled-back decorations are not of the
    required shape.
    """
    found = unit_homomorphism(interp, d, atm.n + 1)
    if found is None:
        return None
    unit, h = found
    names = conf_names(atm) | (enr_names(atm) if kind == "enr" else set())
    pulled = pull_back(h, unit, interp, names)
    cfg = decode_configuration(atm, pulled)
    root_left = "" in unit.ext(rd.L)
    if kind == "conf":
        rebuilt = build_config_tree(atm, cfg, root_left)
    else:
        try:
            rebuilt = build_enriched_tree(atm, cfg, decode_origin(atm, pulled), root_left)
        except ValidationError as exc:
            raise DecodeError(str(exc)) from None
    if rebuilt != pulled:
        raise DecodeError(f"pulled-back structure at {d!r} is not the tree of {cfg}")
    if not is_homomorphism(h, rebuilt, interp):
        raise DecodeError("rebuilt tree does not map homomorphically")
    return rebuilt, h


def recover_quasi_computation_tree(atm: Atm, interp: Interpretation, start: str | None = None):
    """Follow next edges from the individual (or ``start``) and rebuild a quasi-computation tree.

    Returns ``(q, h)`` with ``h`` a homomorphism from ``q`` into ``interp`` sending
    the global root to the start element.
    """
    start = interp.individuals.get(rd.INDIVIDUAL) if start is None else start
    if start is None:
        raise DecodeError("no start element")
    images: dict[str, str] = {}
    maps: dict[str, dict] = {}

    def visit(path: str, d: str, branch) -> RunNode:
        found = recover_tree(atm, interp, d, "enr")
        if found is None:
            raise DecodeError(f"no enriched tree rooted at {d!r}")
        tree, h = found
        images[path], maps[path] = d, h
        cfg = decode_configuration(atm, tree)
        if atm.is_final(cfg.state):
            return RunNode(cfg, branch)
        nxt = sorted(e for e in interp.successors(rd.NEXT, d) if e != d)
        tags = [b for b, _ in successors(atm, cfg)]
        if atm.is_existential(cfg.state):
            if not nxt:
                raise DecodeError(f"existential root {d!r} has no next-successor")
            return RunNode(cfg, branch, (visit(path + "0", nxt[0], _branch_of(atm, cfg, interp, nxt[0], tags)),))
        left = [e for e in nxt if e in interp.ext(rd.L)]
        right = [e for e in nxt if e in interp.ext(rd.R)]
        if not left or not right:
            raise DecodeError(f"universal root {d!r} lacks an L or R next-successor")
        return RunNode(cfg, branch, (visit(path + "0", left[0], tags[0]), visit(path + "1", right[0], tags[1])))

    tree = visit("", start, None)
    q = build_quasi_computation_tree(atm, tree)
    h = {}
    for path in component_paths(q):
        for w, target in maps[path].items():
            h[element(path, w)] = target
    if not is_homomorphism(h, q.replace(individuals={}), interp):
        raise DecodeError("assembled map is not a homomorphism")
    return q, h


def _branch_of(atm, cfg, interp, e, tags):
    for tag in tags:
        t = atm.transition(cfg.state, cfg.letter, tag)
        if e in interp.ext(rd.pr_tr(t)):
            return tag
    raise DecodeError(f"successor {e!r} carries no transition marker of {cfg}")
