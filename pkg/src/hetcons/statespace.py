"""State-space exploration, proposition labelling and deadlock detection."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Optional

from .graph import (Configuration, GraphGrammar, LabeledGraph, apply_rule,
                    canonical_certificate, configuration, find_matches)
from .models import FsmIn, PropositionDef

STUTTER = "τ-stutter"

Transition = tuple[int, str, int]


@dataclass(frozen=True)
class ExplorationLimits:
    max_states: int = 100_000
    max_depth: Optional[int] = None

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive")


@dataclass(frozen=True)
class TransitionSystem:
    states: tuple[tuple[bytes, LabeledGraph], ...]
    initial: int
    transitions: tuple[Transition, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.states)

    @cached_property
    def successors(self) -> tuple[tuple[tuple[str, int], ...], ...]:
        out: list[list[tuple[str, int]]] = [[] for _ in self.states]
        for s, rule, t in self.transitions:
            out[s].append((rule, t))
        return tuple(tuple(sorted(x, key=lambda rt: (rt[1], rt[0]))) for x in out)

    @cached_property
    def configurations(self) -> tuple[Configuration, ...]:
        return tuple(configuration(g) for _, g in self.states)


@dataclass(frozen=True)
class KripkeStructure:
    ts: TransitionSystem
    labeling: tuple[frozenset[str], ...]
    propositions: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.ts)

    @property
    def initial(self) -> int:
        return self.ts.initial

    @property
    def successors(self):
        return self.ts.successors


def explore(grammar: GraphGrammar, limits: ExplorationLimits = ExplorationLimits()) -> TransitionSystem:
    """Breadth-first closure of the start graph under all rules and matches.

    States are numbered in discovery order; duplicates are detected by
    canonical certificate.
    """
    start = grammar.start
    index = {canonical_certificate(start): 0}
    states: list[tuple[bytes, LabeledGraph]] = [(canonical_certificate(start), start)]
    depth = [0]
    transitions: set[Transition] = set()
    truncated = False
    frontier = deque([0])
    while frontier:
        i = frontier.popleft()
        host = states[i][1]
        at_depth_limit = limits.max_depth is not None and depth[i] >= limits.max_depth
        for rule in grammar.rules:
            matches = find_matches(rule, host)
            if not matches:
                continue
            if at_depth_limit:
                truncated = True
                break
            for m in matches:
                g = apply_rule(host, rule, m)
                cert = canonical_certificate(g)
                j = index.get(cert)
                if j is None:
                    if len(states) >= limits.max_states:
                        truncated = True
                        continue
                    j = len(states)
                    index[cert] = j
                    states.append((cert, g))
                    depth.append(depth[i] + 1)
                    frontier.append(j)
                transitions.add((i, rule.name, j))
    return TransitionSystem(tuple(states), 0, tuple(sorted(transitions)), truncated)


def holds(prop: PropositionDef, config: Configuration) -> bool:
    pred = prop.predicate
    if isinstance(pred, FsmIn):
        return config.state_of(pred.machine) == pred.state
    return pred.holds(config.tokens(pred.net, pred.place))


def label_states(ts: TransitionSystem, props: Iterable[PropositionDef]) -> KripkeStructure:
    props = list(props)
    labeling = tuple(frozenset(p.name for p in props if holds(p, c)) for c in ts.configurations)
    return KripkeStructure(ts, labeling, frozenset(p.name for p in props))


def complete_relation(ts: TransitionSystem) -> TransitionSystem:
    sinks = [i for i, succ in enumerate(ts.successors) if not succ]
    if not sinks:
        return ts
    loops = [(i, STUTTER, i) for i in sinks]
    return replace(ts, transitions=tuple(sorted(ts.transitions + tuple(loops))))


def find_deadlocks(ts: TransitionSystem,
                   terminal: Optional[Callable[[int], bool]] = None) -> list[int]:
    """Sinks of ``ts`` that the ``terminal`` predicate does not excuse."""
    return [i for i, succ in enumerate(ts.successors)
            if not succ and not (terminal and terminal(i))]


def dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(system) -> str:
    """DOT rendering of a ``TransitionSystem`` or ``KripkeStructure``."""
    if isinstance(system, KripkeStructure):
        ts, labeling = system.ts, system.labeling
    else:
        ts, labeling = system, None
    lines = ["digraph statespace {", "  rankdir=LR;", "  node [shape=box];",
             '  init [shape=point, label=""];']
    for i, config in enumerate(ts.configurations):
        parts = [f"s{i}", str(config)]
        if labeling is not None:
            parts.append(", ".join(sorted(labeling[i])))
        text = "\\n".join(dot_escape(p) for p in parts if p)
        lines.append(f'  s{i} [label="{text}"];')
    lines.append(f"  init -> s{ts.initial};")
    for s, rule, t in ts.transitions:
        lines.append(f'  s{s} -> s{t} [label="{dot_escape(rule)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
