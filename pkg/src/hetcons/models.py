"""Finite state machines, Petri nets and atomic propositions.

Besides the data model this module carries the reference execution
semantics of both formalisms (``step_fsm`` and ``fire_pn_transition``).
The graph-grammar route never calls them; tests use them as oracles.
"""

from __future__ import annotations

import operator
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union


@dataclass(frozen=True)
class Violation:
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.element}: {self.message}"


@dataclass(frozen=True)
class SmTransition:
    id: str
    source: str
    label: str
    target: str


@dataclass(frozen=True)
class StateMachine:
    name: str
    states: tuple[str, ...]
    initial: str
    finals: tuple[str, ...] = ()
    transitions: tuple[SmTransition, ...] = ()

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions)

    def transition(self, tid: str) -> SmTransition:
        for t in self.transitions:
            if t.id == tid:
                return t
        raise KeyError(f"state machine {self.name!r} has no transition {tid!r}")


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    weight: int = 1


@dataclass(frozen=True)
class PetriNet:
    name: str
    places: tuple[str, ...]
    transitions: tuple[str, ...]
    arcs: tuple[Arc, ...] = ()
    marking: Mapping[str, int] = field(default_factory=dict)

    def pre(self, t: str) -> dict[str, int]:
        """Input weights of transition ``t`` keyed by place."""
        weights: Counter = Counter()
        for a in self.arcs:
            if a.target == t and a.source in self.places:
                weights[a.source] += a.weight
        return dict(weights)

    def post(self, t: str) -> dict[str, int]:
        weights: Counter = Counter()
        for a in self.arcs:
            if a.source == t and a.target in self.places:
                weights[a.target] += a.weight
        return dict(weights)

    def initial_marking(self) -> dict[str, int]:
        return {p: self.marking.get(p, 0) for p in self.places}


Model = Union[StateMachine, PetriNet]


# -- propositions ---------------------------------------------------------

COMPARATORS: dict[str, Callable[[int, int], bool]] = {
    "==": operator.eq,
    "<=": operator.le,
    ">=": operator.ge,
    "<": operator.lt,
    ">": operator.gt,
}


@dataclass(frozen=True)
class FsmIn:
    machine: str
    state: str


@dataclass(frozen=True)
class TokenCompare:
    net: str
    place: str
    cmp: str
    bound: int

    def holds(self, count: int) -> bool:
        return COMPARATORS[self.cmp](count, self.bound)


@dataclass(frozen=True)
class PropositionDef:
    name: str
    predicate: Union[FsmIn, TokenCompare]


# -- validation -----------------------------------------------------------

def _duplicates(items) -> list:
    return sorted(k for k, n in Counter(items).items() if n > 1)


def validate_state_machine(sm: StateMachine) -> list[Violation]:
    out: list[Violation] = []
    where = f"state machine {sm.name!r}"
    if not sm.name:
        out.append(Violation(where, "empty name"))
    for s in _duplicates(sm.states):
        out.append(Violation(f"{where} state {s!r}", "duplicate state name"))
    for s in sm.states:
        if not s:
            out.append(Violation(where, "empty state name"))
    states = set(sm.states)
    if sm.initial not in states:
        out.append(Violation(f"{where} initial {sm.initial!r}", "initial not in states"))
    for f in sm.finals:
        if f not in states:
            out.append(Violation(f"{where} final {f!r}", "final not in states"))
    for tid in _duplicates(t.id for t in sm.transitions):
        out.append(Violation(f"{where} transition {tid!r}", "duplicate transition id"))
    for trip in _duplicates((t.source, t.label, t.target) for t in sm.transitions):
        out.append(Violation(f"{where} transition {trip!r}", "duplicate transition triple"))
    for t in sm.transitions:
        tw = f"{where} transition {t.id!r}"
        if not t.label:
            out.append(Violation(tw, "empty label"))
        if t.source not in states:
            out.append(Violation(tw, f"source {t.source!r} not in states"))
        if t.target not in states:
            out.append(Violation(tw, f"target {t.target!r} not in states"))
    return out


def validate_petri_net(pn: PetriNet) -> list[Violation]:
    out: list[Violation] = []
    where = f"petri net {pn.name!r}"
    if not pn.name:
        out.append(Violation(where, "empty name"))
    if not pn.transitions:
        out.append(Violation(where, "transition set empty"))
    for p in _duplicates(pn.places):
        out.append(Violation(f"{where} place {p!r}", "duplicate place name"))
    for t in _duplicates(pn.transitions):
        out.append(Violation(f"{where} transition {t!r}", "duplicate transition name"))
    for n in list(pn.places) + list(pn.transitions):
        if not n:
            out.append(Violation(where, "empty place or transition name"))
    places, transitions = set(pn.places), set(pn.transitions)
    for n in sorted(places & transitions):
        out.append(Violation(f"{where} element {n!r}", "name used as both place and transition"))
    for a in pn.arcs:
        aw = f"{where} arc {a.source!r}->{a.target!r}"
        known = places | transitions
        for end in (a.source, a.target):
            if end not in known:
                out.append(Violation(aw, f"unknown endpoint {end!r}"))
        if a.source in known and a.target in known:
            p_to_t = a.source in places and a.target in transitions
            t_to_p = a.source in transitions and a.target in places
            if not (p_to_t or t_to_p):
                out.append(Violation(aw, "invalid flow endpoint"))
        if not isinstance(a.weight, int) or a.weight < 1:
            out.append(Violation(aw, f"weight {a.weight!r} must be a positive integer"))
    for arc in _duplicates((a.source, a.target) for a in pn.arcs):
        out.append(Violation(f"{where} arc {arc[0]!r}->{arc[1]!r}", "duplicate arc"))
    for p, n in pn.marking.items():
        if p not in places:
            out.append(Violation(f"{where} marking {p!r}", "marked place does not exist"))
        if not isinstance(n, int) or n < 0:
            out.append(Violation(f"{where} marking {p!r}", f"token count {n!r} must be a non-negative integer"))
    return out


def validate_model(model: Model) -> list[Violation]:
    if isinstance(model, StateMachine):
        return validate_state_machine(model)
    return validate_petri_net(model)


def validate_propositions(models: Mapping[str, Model],
                          props: list[PropositionDef]) -> list[Violation]:
    out: list[Violation] = []
    for n in _duplicates(p.name for p in props):
        out.append(Violation(f"proposition {n!r}", "duplicate proposition name"))
    for p in props:
        where = f"proposition {p.name!r}"
        pred = p.predicate
        if isinstance(pred, FsmIn):
            sm = models.get(pred.machine)
            if not isinstance(sm, StateMachine):
                out.append(Violation(where, f"unknown state machine {pred.machine!r}"))
            elif pred.state not in sm.states:
                out.append(Violation(where, f"unknown state {pred.state!r} in {pred.machine!r}"))
        else:
            pn = models.get(pred.net)
            if not isinstance(pn, PetriNet):
                out.append(Violation(where, f"unknown petri net {pred.net!r}"))
            elif pred.place not in pn.places:
                out.append(Violation(where, f"unknown place {pred.place!r} in {pred.net!r}"))
            if pred.cmp not in COMPARATORS:
                out.append(Violation(where, f"unknown comparator {pred.cmp!r}"))
            if not isinstance(pred.bound, int) or pred.bound < 0:
                out.append(Violation(where, f"bound {pred.bound!r} must be a non-negative integer"))
    return out


# -- reference semantics ----------------------------------------------------

def fire_pn_transition(pn: PetriNet, marking: Mapping[str, int],
                       t: str) -> Optional[dict[str, int]]:
    """Fire ``t`` under ``marking``; ``None`` when it is not enabled."""
    if t not in pn.transitions:
        raise KeyError(f"petri net {pn.name!r} has no transition {t!r}")
    pre, post = pn.pre(t), pn.post(t)
    if any(marking.get(p, 0) < w for p, w in pre.items()):
        return None
    new = {p: marking.get(p, 0) for p in pn.places}
    for p, w in pre.items():
        new[p] -= w
    for p, w in post.items():
        new[p] += w
    return new


def step_fsm(sm: StateMachine, current: str, label: str) -> frozenset[str]:
    if current not in sm.states:
        raise KeyError(f"state machine {sm.name!r} has no state {current!r}")
    return frozenset(t.target for t in sm.transitions
                     if t.source == current and t.label == label)
