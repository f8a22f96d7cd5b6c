"""Alternating Turing machines over {0,1} with a tape of 2**n cells.

Machines, configurations, (quasi-)successors, run trees and a brute-force
acceptance oracle small enough to use as ground truth for the reduction.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

from .errors import AlcSelfError, BudgetExceeded, ValidationError

_STATE_ID = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

LETTERS = ("0", "1")


class OffTapeMove(AlcSelfError):
    """A transition would move the head past either end of the tape."""


class FinalConfiguration(AlcSelfError, ValueError):
    """Successors were requested for a configuration in a final state."""


class HaltingAssumptionViolated(BudgetExceeded):
    """A computation path exceeded the step budget or revisited a configuration."""


class Branch(enum.Enum):
    FIRST = "first"
    SECOND = "second"

    @property
    def index(self) -> int:
        return 0 if self is Branch.FIRST else 1


class Transition(NamedTuple):
    source: str
    read: str
    write: str
    target: str
    move: int

    def __str__(self):
        return f"({self.source},{self.read},{self.write},{self.target},{self.move:+d})"


@dataclass(frozen=True)
class Atm:
    """A validated machine. Build through :func:`validate_atm`."""

    n: int
    states: tuple[str, ...]
    existential: frozenset[str]
    initial: str
    accepting: str
    rejecting: str
    delta: tuple[Transition, ...]

    @property
    def tape_length(self) -> int:
        return 1 << self.n

    def state_index(self, state: str) -> int:
        return self.states.index(state)

    def is_existential(self, state: str) -> bool:
        return state in self.existential

    def is_final(self, state: str) -> bool:
        return state in (self.accepting, self.rejecting)

    @property
    def nonfinal_states(self) -> tuple[str, ...]:
        return tuple(s for s in self.states if not self.is_final(s))

    def transitions(self, state: str, letter: str) -> tuple[Transition, ...]:
        """The ordered pair (delta_1, delta_2) at ``(state, letter)``; empty for final states.

        Ordering is lexicographic on (write, target's declaration index, move).
        """
        rows = [t for t in self.delta if t.source == state and t.read == letter]
        rows.sort(key=lambda t: (t.write, self.state_index(t.target), t.move))
        return tuple(rows)

    def transition(self, state: str, letter: str, branch: Branch) -> Transition:
        return self.transitions(state, letter)[branch.index]

    def initial_configuration(self) -> Configuration:
        return Configuration("0" * self.tape_length, self.initial, 0)

    def configurations(self) -> Iterator[Configuration]:
        """Every configuration, in a fixed order. Exponential; desk scale only."""
        for state in self.states:
            for bits in itertools.product(LETTERS, repeat=self.tape_length):
                for head in range(self.tape_length):
                    yield Configuration("".join(bits), state, head)

    def to_raw(self) -> dict:
        return {
            "n": self.n,
            "states": list(self.states),
            "existential": [s for s in self.states if s in self.existential],
            "initial": self.initial,
            "accepting": self.accepting,
            "rejecting": self.rejecting,
            "delta": [[t.source, int(t.read), int(t.write), t.target, t.move] for t in self.delta],
        }


def _transition_key(atm_states, t):
    index = {s: i for i, s in enumerate(atm_states)}
    return (index[t.source], t.read, t.write, index[t.target], t.move)


def validate_atm(raw: Mapping) -> Atm:
    """Check a raw machine description and return the corresponding :class:`Atm`.

    ``raw`` uses the JSON field names (``n``, ``states``, ``existential``,
    ``initial``, ``accepting``, ``rejecting``, ``delta``); delta rows are
    ``[s, a, b, s2, d]`` with letters given as 0/1 (int or str).
    Raises :class:`ValidationError` listing every violation.
    """
    problems: list[str] = []
    missing = [k for k in ("n", "states", "existential", "initial", "accepting", "rejecting", "delta")
               if k not in raw]
    if missing:
        raise ValidationError([f"missing field {k!r}" for k in missing])

    n = raw["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        problems.append(f"n must be a positive integer, got {n!r}")

    states = list(raw["states"])
    if not states:
        problems.append("state set is empty")
    for s in states:
        if not isinstance(s, str) or not _STATE_ID.match(s):
            problems.append(f"bad state id {s!r}")
    if len(set(states)) != len(states):
        problems.append("duplicate state ids")
    known = set(states)

    existential = list(raw["existential"])
    for s in existential:
        if s not in known:
            problems.append(f"existential state {s!r} is not declared")

    initial, accepting, rejecting = raw["initial"], raw["accepting"], raw["rejecting"]
    for role, s in (("initial", initial), ("accepting", accepting), ("rejecting", rejecting)):
        if s not in known:
            problems.append(f"{role} state {s!r} is not declared")
    if len({initial, accepting, rejecting}) != 3:
        problems.append("initial, accepting and rejecting states must be pairwise distinct")
    if initial in existential:
        problems.append("initial state must be universal")

    delta: list[Transition] = []
    for pos, row in enumerate(raw["delta"]):
        try:
            s, a, b, s2, d = row
        except (TypeError, ValueError):
            problems.append(f"delta[{pos}]: expected 5 fields, got {row!r}")
            continue
        row_problems = []
        if s not in known:
            row_problems.append(f"unknown source state {s!r}")
        if s2 not in known:
            row_problems.append(f"unknown target state {s2!r}")
        a, b = _letter(a), _letter(b)
        if a is None or b is None:
            row_problems.append("letters must be 0 or 1")
        if d not in (-1, 1) or isinstance(d, bool):
            row_problems.append(f"move must be -1 or +1, got {d!r}")
        if row_problems:
            problems.extend(f"delta[{pos}] {list(row)!r}: {p}" for p in row_problems)
            continue
        t = Transition(s, a, b, s2, d)
        if t not in delta:
            delta.append(t)

    if problems:
        raise ValidationError(problems)

    ex = frozenset(existential)
    finals = (accepting, rejecting)
    for s in states:
        for a in LETTERS:
            fan = sum(1 for t in delta if t.source == s and t.read == a)
            want = 0 if s in finals else 2
            if fan != want:
                problems.append(f"fan-out {fan} != {want} at ({s},{a})")
    for t in delta:
        if (t.source in ex) == (t.target in ex):
            kind = "existential" if t.source in ex else "universal"
            problems.append(f"alternation violated by {t}: {kind} state leads to {kind} state")
    if problems:
        raise ValidationError(problems)

    delta.sort(key=lambda t: _transition_key(states, t))
    return Atm(n, tuple(states), ex, initial, accepting, rejecting, tuple(delta))


def _letter(x):
    if x in (0, 1) and not isinstance(x, bool):
        return str(x)
    if x in LETTERS:
        return x
    return None


@dataclass(frozen=True, order=True)
class Configuration:
    tape: str
    state: str
    head: int

    def __post_init__(self):
        if not self.tape or set(self.tape) - set(LETTERS):
            raise ValueError(f"tape must be a non-empty word over 0/1, got {self.tape!r}")
        if not 0 <= self.head < len(self.tape):
            raise ValueError(f"head {self.head} outside tape of length {len(self.tape)}")

    @property
    def letter(self) -> str:
        return self.tape[self.head]

    def with_cell(self, cell: int, letter: str) -> Configuration:
        return Configuration(self.tape[:cell] + letter + self.tape[cell + 1:], self.state, self.head)

    def __str__(self):
        return f"{self.tape[:self.head]}[{self.state}]{self.tape[self.head:]}"


def check_configuration(atm: Atm, cfg: Configuration) -> None:
    if len(cfg.tape) != atm.tape_length:
        raise ValidationError(f"tape length {len(cfg.tape)} != 2^{atm.n}")
    if cfg.state not in atm.states:
        raise ValidationError(f"unknown state {cfg.state!r}")


def apply(atm: Atm, cfg: Configuration, t: Transition) -> Configuration:
    """The proper successor of ``cfg`` under transition ``t``."""
    target = cfg.head + t.move
    if not 0 <= target < atm.tape_length:
        raise OffTapeMove(f"off-tape move: {t} at head {cfg.head} of {atm.tape_length} cells")
    written = cfg.with_cell(cfg.head, t.write)
    return Configuration(written.tape, t.target, target)


def successors(atm: Atm, cfg: Configuration) -> tuple[tuple[Branch, Configuration], ...]:
    if atm.is_final(cfg.state):
        raise FinalConfiguration(f"configuration {cfg} is final and has no successors")
    first, second = atm.transitions(cfg.state, cfg.letter)
    return ((Branch.FIRST, apply(atm, cfg, first)), (Branch.SECOND, apply(atm, cfg, second)))


def quasi_successors(atm: Atm, cfg: Configuration) -> frozenset[tuple[Branch, Configuration]]:
    """Successors with every cell other than the written one left free."""
    out = set()
    for branch, succ in successors(atm, cfg):
        free = [i for i in range(atm.tape_length) if i != cfg.head]
        for bits in itertools.product(LETTERS, repeat=len(free)):
            tape = list(succ.tape)
            for i, bit in zip(free, bits):
                tape[i] = bit
            out.add((branch, Configuration("".join(tape), succ.state, succ.head)))
    return frozenset(out)


def is_quasi_successor(atm: Atm, cfg: Configuration, t: Transition, child: Configuration,
                       strict: bool) -> bool:
    try:
        proper = apply(atm, cfg, t)
    except OffTapeMove:
        return False
    if strict:
        return child == proper
    return (child.state == proper.state and child.head == proper.head
            and len(child.tape) == len(proper.tape) and child.tape[cfg.head] == t.write)


# -- run trees -----------------------------------------------------------------

@dataclass(frozen=True)
class RunNode:
    """One node of a (quasi-)run; ``branch`` is None only at the root.

    Universal nodes keep their children in (first, second) order.
    """

    config: Configuration
    branch: Branch | None = None
    children: tuple[RunNode, ...] = ()

    def walk(self, path: str = "") -> Iterator[tuple[str, RunNode]]:
        """Pre-order ``(path, node)`` pairs; a path appends one child index per step."""
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.walk(path + str(i))

    def node_at(self, path: str) -> RunNode:
        node = self
        for step in path:
            node = node.children[int(step)]
        return node

    def replace_at(self, path: str, new: RunNode) -> RunNode:
        if not path:
            return new
        i = int(path[0])
        kids = list(self.children)
        kids[i] = kids[i].replace_at(path[1:], new)
        return RunNode(self.config, self.branch, tuple(kids))

    @property
    def leaves(self) -> list[RunNode]:
        return [node for _, node in self.walk() if not node.children]

    def __len__(self):
        return sum(1 for _ in self.walk())


RunTree = RunNode


class Verdict(NamedTuple):
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def is_valid_quasi_run(atm: Atm, tree: RunNode, strict: bool) -> Verdict:
    """Check run conditions (``strict``) or quasi-run conditions on ``tree``."""
    if tree.branch is not None:
        return Verdict(False, "root carries a branch tag")
    if tree.config != atm.initial_configuration():
        return Verdict(False, f"root is labelled {tree.config}, not the initial configuration")
    for path, node in tree.walk():
        cfg = node.config
        where = f"node {path!r}"
        if len(cfg.tape) != atm.tape_length or cfg.state not in atm.states:
            return Verdict(False, f"{where}: malformed configuration {cfg}")
        if path and node.branch is None:
            return Verdict(False, f"{where}: missing branch tag")
        if atm.is_final(cfg.state):
            if node.children:
                return Verdict(False, f"{where}: final configuration has children")
            continue
        expected = 1 if atm.is_existential(cfg.state) else 2
        if len(node.children) != expected:
            return Verdict(False, f"{where}: fan-out {len(node.children)} != {expected}")
        if expected == 2 and [c.branch for c in node.children] != [Branch.FIRST, Branch.SECOND]:
            return Verdict(False, f"{where}: universal children must be tagged (first, second)")
        for i, child in enumerate(node.children):
            t = atm.transition(cfg.state, cfg.letter, child.branch)
            if not is_quasi_successor(atm, cfg, t, child.config, strict):
                kind = "successor" if strict else "quasi-successor"
                return Verdict(False, f"node {path + str(i)!r}: {child.config} is not a {kind} "
                                      f"of {cfg} via {t}")
    return Verdict(True)


def is_valid_run(atm: Atm, tree: RunNode) -> Verdict:
    return is_valid_quasi_run(atm, tree, strict=True)


def is_accepting(atm: Atm, tree: RunNode) -> bool:
    return all(leaf.config.state == atm.accepting for leaf in tree.leaves)


# -- acceptance oracle ---------------------------------------------------------

DEFAULT_MAX_TAPE = 8


def _check_budget(atm, max_steps, max_tape):
    if atm.tape_length > max_tape:
        raise BudgetExceeded(f"tape of {atm.tape_length} cells exceeds the enumeration budget of {max_tape}")
    if max_steps is None:
        max_steps = 1 << atm.tape_length
    return max_steps


def _acceptance_table(atm: Atm, max_steps: int) -> dict[Configuration, bool]:
    # Iterative alternating evaluation. Frames are [config, depth, children, index].
    memo: dict[Configuration, bool] = {}
    on_path: set[Configuration] = set()
    stack = [[atm.initial_configuration(), 0, None, 0]]
    while stack:
        frame = stack[-1]
        cfg, depth, children, _ = frame
        if children is None:
            if cfg in memo:
                stack.pop()
                continue
            if atm.is_final(cfg.state):
                memo[cfg] = cfg.state == atm.accepting
                stack.pop()
                continue
            if cfg in on_path:
                raise HaltingAssumptionViolated(f"halting assumption violated: {cfg} repeats on a path")
            if depth >= max_steps:
                raise HaltingAssumptionViolated(
                    f"halting assumption violated: no final state within {max_steps} steps")
            on_path.add(cfg)
            frame[2] = children = [c for _, c in successors(atm, cfg)]
        existential = atm.is_existential(cfg.state)
        decided = None
        while frame[3] < len(children):
            child = children[frame[3]]
            if child not in memo:
                stack.append([child, depth + 1, None, 0])
                break
            if memo[child] == existential:
                decided = existential
                break
            frame[3] += 1
        else:
            decided = not existential
        if decided is None:
            continue
        memo[cfg] = decided
        on_path.discard(cfg)
        stack.pop()
    return memo


def is_accepting_oracle(atm: Atm, max_steps: int | None = None,
                        max_tape: int = DEFAULT_MAX_TAPE) -> bool:
    """Whether ``atm`` has an accepting run, by memoized alternating search.

    ``max_steps`` bounds path length (default ``2**(2**n)``); exceeding it, or
    revisiting a configuration on one path, raises
    :class:`HaltingAssumptionViolated`.
    """
    max_steps = _check_budget(atm, max_steps, max_tape)
    return _acceptance_table(atm, max_steps)[atm.initial_configuration()]


def find_accepting_run(atm: Atm, max_steps: int | None = None,
                       max_tape: int = DEFAULT_MAX_TAPE) -> RunNode | None:
    max_steps = _check_budget(atm, max_steps, max_tape)
    table = _acceptance_table(atm, max_steps)
    root = atm.initial_configuration()
    if not table[root]:
        return None

    def build(cfg, branch):
        if atm.is_final(cfg.state):
            return RunNode(cfg, branch)
        succ = successors(atm, cfg)
        if atm.is_existential(cfg.state):
            tag, child = next((b, c) for b, c in succ if table.get(c))
            return RunNode(cfg, branch, (build(child, tag),))
        return RunNode(cfg, branch, tuple(build(c, b) for b, c in succ))

    return build(root, None)


def inject_tape_fault(tree: RunNode, node: str, cell: int) -> RunNode:
    """Flip ``cell`` on the tape of the node at path ``node``.

    The cell must be untouched by the transition that produced the node, i.e.
    differ from the parent's head position.
    """
    if not node:
        raise ValueError("cannot inject a fault at the root")
    try:
        target = tree.node_at(node)
        parent = tree.node_at(node[:-1])
    except (IndexError, ValueError):
        raise ValueError(f"no node at path {node!r}") from None
    if not 0 <= cell < len(target.config.tape):
        raise ValueError(f"cell {cell} outside the tape")
    if cell == parent.config.head:
        raise ValueError(f"cell {cell} is not an untouched cell: the parent wrote it")
    flipped = "1" if target.config.tape[cell] == "0" else "0"
    return tree.replace_at(node, RunNode(target.config.with_cell(cell, flipped), target.branch,
                                         target.children))


def untouched_cells(tree: RunNode) -> list[tuple[str, int]]:
    """All ``(node, cell)`` pairs accepted by :func:`inject_tape_fault`."""
    out = []
    for path, node in tree.walk():
        if not path:
            continue
        written = tree.node_at(path[:-1]).config.head
        out.extend((path, c) for c in range(len(node.config.tape)) if c != written)
    return out


# -- reference machines ----------------------------------------------------------

def reference_machine(accepting: bool = True, n: int = 1) -> Atm:
    """The two-level machine: write either letter and step right, then step back.

    With ``accepting=False`` the existential state leads to the rejecting state.
    """
    end = "s_acc" if accepting else "s_rej"
    delta = []
    for a in (0, 1):
        delta += [["s_init", a, 0, "e1", 1], ["s_init", a, 1, "e1", 1],
                  ["e1", a, 0, end, -1], ["e1", a, 1, end, -1]]
    return validate_atm({
        "n": n, "states": ["s_init", "e1", "s_acc", "s_rej"], "existential": ["e1"],
        "initial": "s_init", "accepting": "s_acc", "rejecting": "s_rej", "delta": delta,
    })


def m_acc(n: int = 1) -> Atm:
    return reference_machine(True, n)


def m_rej(n: int = 1) -> Atm:
    return reference_machine(False, n)
