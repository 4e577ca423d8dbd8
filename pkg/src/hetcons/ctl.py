"""CTL formulas: parsing, fixpoint model checking, witnesses and counterexamples.

Concrete syntax::

    f ::= true | false | IDENT | ! f | f & f | f | f | f -> f
        | EX f | AX f | EF f | AF f | EG f | AG f
        | E [ f U f ] | A [ f U f ] | ( f )

Unary operators bind tighter than ``&``, which binds tighter than ``|``,
which binds tighter than the right-associative ``->``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .statespace import KripkeStructure

UNARY_TEMPORAL = ("EX", "AX", "EF", "AF", "EG", "AG")
KEYWORDS = {"true", "false", "E", "A", "U", *UNARY_TEMPORAL}


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or one of UNARY_TEMPORAL
    arg: "Formula"

    def __str__(self) -> str:
        sep = "" if self.op == "!" else " "
        return f"{self.op}{sep}{_paren(self.arg)}"


@dataclass(frozen=True)
class Binary:
    op: str  # "&", "|", "->", "EU" or "AU"
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        if self.op in ("EU", "AU"):
            return f"{self.op[0]} [ {self.left} U {self.right} ]"
        return f"{_paren(self.left)} {self.op} {_paren(self.right)}"


Formula = Union[Const, Prop, Unary, Binary]

TRUE, FALSE = Const(True), Const(False)


def _paren(f: Formula) -> str:
    return f"({f})" if isinstance(f, Binary) and f.op not in ("EU", "AU") else str(f)


def props_of(f: Formula) -> set[str]:
    if isinstance(f, Prop):
        return {f.name}
    if isinstance(f, Unary):
        return props_of(f.arg)
    if isinstance(f, Binary):
        return props_of(f.left) | props_of(f.right)
    return set()


# -- parsing --------------------------------------------------------------

class CtlSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownProposition(ValueError):
    pass


_TOKEN = re.compile(r"->|[()\[\]!&|]|[A-Za-z_][A-Za-z0-9_.]*")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise CtlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(), pos))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, expected: Optional[str] = None) -> str:
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise CtlSyntaxError(f"expected {expected!r} but found {tok!r}", pos)
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Binary("->", left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Binary("|", f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = Binary("&", f, self.unary())
        return f

    def unary(self) -> Formula:
        tok, pos = self.tokens[self.i]
        if tok == "!" or tok in UNARY_TEMPORAL:
            self.take()
            return Unary(tok, self.unary())
        if tok in ("E", "A"):
            self.take()
            self.take("[")
            left = self.formula()
            self.take("U")
            right = self.formula()
            self.take("]")
            return Binary(tok + "U", left, right)
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok in ("true", "false"):
            self.take()
            return Const(tok == "true")
        if tok not in KEYWORDS and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", tok):
            self.take()
            return Prop(tok)
        raise CtlSyntaxError(f"unexpected token {tok!r}", pos)


def parse_ctl(text: str, known: Optional[Iterable[str]] = None) -> Formula:
    p = _Parser(text)
    f = p.formula()
    tok, pos = p.tokens[p.i]
    if tok != "<end>":
        raise CtlSyntaxError(f"unexpected token {tok!r}", pos)
    if known is not None:
        unknown = props_of(f) - set(known)
        if unknown:
            raise UnknownProposition(f"unknown proposition(s): {', '.join(sorted(unknown))}")
    return f


# -- checking ---------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    state: int
    rule: Optional[str]


@dataclass(frozen=True)
class Trace:
    """A finite path, or a lasso whose last step leads back to
    ``steps[cycle_start]``."""

    kind: str
    steps: tuple[Step, ...]
    cycle_start: Optional[int] = None

    def replays(self, k: KripkeStructure) -> bool:
        def edge(a: Step, b: int) -> bool:
            return (a.rule, b) in k.successors[a.state]

        for a, b in zip(self.steps, self.steps[1:]):
            if not edge(a, b.state):
                return False
        last = self.steps[-1]
        if self.kind == "lasso":
            return self.cycle_start is not None and edge(last, self.steps[self.cycle_start].state)
        return last.rule is None


@dataclass(frozen=True)
class Verdict:
    formula: Formula
    holds: str  # "yes", "no" or "unknown"
    satisfying: frozenset[int]
    evidence: Optional[Trace] = None


class Checker:
    """Fixpoint labelling over the EX / EU / EG primitives."""

    def __init__(self, k: KripkeStructure):
        self.k = k
        self.n = len(k)
        self.all = frozenset(range(self.n))
        preds: list[set[int]] = [set() for _ in range(self.n)]
        for s, succ in enumerate(k.successors):
            for _, t in succ:
                preds[t].add(s)
        self.preds = [sorted(p) for p in preds]
        self.succ_states = [sorted({t for _, t in succ}) for succ in k.successors]
        self._memo: dict[Formula, frozenset[int]] = {}

    def sat(self, f: Formula) -> frozenset[int]:
        if f not in self._memo:
            self._memo[f] = self._sat(f)
        return self._memo[f]

    def _sat(self, f: Formula) -> frozenset[int]:
        if isinstance(f, Const):
            return self.all if f.value else frozenset()
        if isinstance(f, Prop):
            return frozenset(i for i, lab in enumerate(self.k.labeling) if f.name in lab)
        if isinstance(f, Unary):
            a = f.arg
            if f.op == "!":
                return self.all - self.sat(a)
            if f.op == "EX":
                return self.ex(self.sat(a))
            if f.op == "EG":
                return self.eg(self.sat(a))
            if f.op == "EF":
                return self.eu(self.all, self.sat(a))
            if f.op == "AX":
                return self.all - self.ex(self.all - self.sat(a))
            if f.op == "AF":
                return self.all - self.eg(self.all - self.sat(a))
            if f.op == "AG":
                return self.all - self.eu(self.all, self.all - self.sat(a))
        if isinstance(f, Binary):
            left, right = self.sat(f.left), self.sat(f.right)
            if f.op == "&":
                return left & right
            if f.op == "|":
                return left | right
            if f.op == "->":
                return (self.all - left) | right
            if f.op == "EU":
                return self.eu(left, right)
            if f.op == "AU":
                not_r = self.all - right
                bad = self.eu(not_r, not_r - left) | self.eg(not_r)
                return self.all - bad
        raise ValueError(f"unsupported formula {f!r}")

    def ex(self, target: frozenset[int]) -> frozenset[int]:
        return frozenset(p for t in target for p in self.preds[t])

    def eu(self, hold: frozenset[int], goal: frozenset[int]) -> frozenset[int]:
        result = set(goal)
        work = deque(goal)
        while work:
            t = work.popleft()
            for p in self.preds[t]:
                if p not in result and p in hold:
                    result.add(p)
                    work.append(p)
        return frozenset(result)

    def eg(self, hold: frozenset[int]) -> frozenset[int]:
        # Drop states until each survivor keeps a successor among the survivors.
        alive = set(hold)
        count = {s: sum(1 for t in self.succ_states[s] if t in alive) for s in alive}
        work = deque(s for s in alive if count[s] == 0)
        while work:
            s = work.popleft()
            if s not in alive:
                continue
            alive.discard(s)
            for p in self.preds[s]:
                if p in alive:
                    count[p] -= 1
                    if count[p] == 0:
                        work.append(p)
        return frozenset(alive)

    # -- evidence --

    def _first_edge(self, s: int, allowed) -> Optional[tuple[str, int]]:
        for rule, t in self.k.successors[s]:
            if t in allowed:
                return rule, t
        return None

    def shortest_path(self, start: int, goal: frozenset[int]) -> Optional[Trace]:
        parent: dict[int, Optional[tuple[int, str]]] = {start: None}
        work = deque([start])
        while work:
            s = work.popleft()
            if s in goal:
                steps = [Step(s, None)]
                while parent[s] is not None:
                    prev, rule = parent[s]
                    steps.append(Step(prev, rule))
                    s = prev
                return Trace("path", tuple(reversed(steps)))
            for rule, t in self.k.successors[s]:
                if t not in parent:
                    parent[t] = (s, rule)
                    work.append(t)
        return None

    def lasso_within(self, start: int, region: frozenset[int]) -> Optional[Trace]:
        if start not in region:
            return None
        seen: dict[int, int] = {}
        steps: list[Step] = []
        s = start
        while s not in seen:
            edge = self._first_edge(s, region)
            if edge is None:
                return None
            seen[s] = len(steps)
            steps.append(Step(s, edge[0]))
            s = edge[1]
        return Trace("lasso", tuple(steps), seen[s])

    def witness(self, f: Formula, state: int) -> Optional[Trace]:
        if isinstance(f, Unary) and f.op == "AG" and state not in self.sat(f):
            return self.shortest_path(state, self.all - self.sat(f.arg))
        if isinstance(f, Unary) and f.op == "AF" and state not in self.sat(f):
            return self.lasso_within(state, self.eg(self.all - self.sat(f.arg)))
        if isinstance(f, Unary) and f.op == "EF" and state in self.sat(f):
            return self.shortest_path(state, self.sat(f.arg))
        return None


def supports_witness(f: Formula) -> bool:
    return isinstance(f, Unary) and f.op in ("AG", "AF", "EF")


def witness(k: KripkeStructure, f: Formula, state: int) -> Optional[Trace]:
    """Counterexample for a failing AG/AF, witness for a holding EF.

    Returns ``None`` for other shapes or when no evidence applies.
    """
    return Checker(k).witness(f, state)


def check(k: KripkeStructure, f: Formula, checker: Optional[Checker] = None) -> Verdict:
    unknown = props_of(f) - k.propositions
    if unknown:
        raise UnknownProposition(f"unknown proposition(s): {', '.join(sorted(unknown))}")
    checker = checker or Checker(k)
    sat = checker.sat(f)
    if k.ts.truncated:
        return Verdict(f, "unknown", sat)
    ok = k.initial in sat
    evidence = checker.witness(f, k.initial)
    return Verdict(f, "yes" if ok else "no", sat, evidence)
