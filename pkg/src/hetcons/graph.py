"""Typed labelled graphs and double-pushout rewriting.

Host graphs use a fixed vocabulary: ``State(machine, state)`` nodes for the
current state of each machine, ``Place(net, place)`` nodes, and anonymous
``Token`` nodes attached to their place by a single ``on`` edge.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional

STATE = "State"
PLACE = "Place"
TOKEN = "Token"
ON = "on"

Edge = tuple[int, str, int]


class GraphError(ValueError):
    pass


class InvalidMatch(GraphError):
    pass


@dataclass(frozen=True, order=True)
class NodeLabel:
    kind: str
    model: str = ""
    name: str = ""

    def __str__(self) -> str:
        if self.kind == TOKEN:
            return TOKEN
        return f"{self.kind}({self.model}, {self.name})"


def state_label(machine: str, state: str) -> NodeLabel:
    return NodeLabel(STATE, machine, state)


def place_label(net: str, place: str) -> NodeLabel:
    return NodeLabel(PLACE, net, place)


TOKEN_LABEL = NodeLabel(TOKEN)


@dataclass(frozen=True)
class LabeledGraph:
    nodes: tuple[tuple[int, NodeLabel], ...] = ()
    edges: frozenset[Edge] = frozenset()
    next_id: int = 0

    @classmethod
    def make(cls, nodes: Mapping[int, NodeLabel], edges: Iterable[Edge] = (),
             next_id: Optional[int] = None) -> "LabeledGraph":
        edges = frozenset(edges)
        for s, _, t in edges:
            if s not in nodes or t not in nodes:
                raise GraphError(f"edge ({s}, {t}) has a missing endpoint")
        top = max(nodes, default=-1) + 1
        if next_id is None or next_id < top:
            next_id = top
        return cls(tuple(sorted(nodes.items())), edges, next_id)

    @cached_property
    def labels(self) -> dict[int, NodeLabel]:
        return dict(self.nodes)

    @cached_property
    def by_label(self) -> dict[NodeLabel, list[int]]:
        index: dict[NodeLabel, list[int]] = defaultdict(list)
        for n, lab in self.nodes:
            index[lab].append(n)
        return dict(index)

    @cached_property
    def incident(self) -> dict[int, set[Edge]]:
        index: dict[int, set[Edge]] = defaultdict(set)
        for e in self.edges:
            index[e[0]].add(e)
            index[e[2]].add(e)
        return dict(index)

    def __len__(self) -> int:
        return len(self.nodes)


EMPTY_GRAPH = LabeledGraph()


class GraphBuilder:
    """Incremental construction helper with sequential node ids."""

    def __init__(self) -> None:
        self._nodes: dict[int, NodeLabel] = {}
        self._edges: set[Edge] = set()

    def node(self, label: NodeLabel) -> int:
        n = len(self._nodes)
        self._nodes[n] = label
        return n

    def token_on(self, place: int) -> int:
        t = self.node(TOKEN_LABEL)
        self._edges.add((t, ON, place))
        return t

    def build(self) -> LabeledGraph:
        return LabeledGraph.make(self._nodes, self._edges)


# -- morphisms and rules ----------------------------------------------------

@dataclass(frozen=True)
class ProductionRule:
    """``lhs <-l- interface -r-> rhs`` with node maps ``l`` and ``r``.

    Edge maps are induced by the node maps since graphs carry at most one
    edge per (source, label, target) triple.
    """

    name: str
    lhs: LabeledGraph
    interface: LabeledGraph
    rhs: LabeledGraph
    l: tuple[tuple[int, int], ...] = ()
    r: tuple[tuple[int, int], ...] = ()

    @cached_property
    def lmap(self) -> dict[int, int]:
        return dict(self.l)

    @cached_property
    def rmap(self) -> dict[int, int]:
        return dict(self.r)


@dataclass(frozen=True)
class GraphGrammar:
    start: LabeledGraph
    rules: tuple[ProductionRule, ...] = ()

    def rule(self, name: str) -> ProductionRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


def morphism_violations(src: LabeledGraph, dst: LabeledGraph,
                        mapping: Mapping[int, int]) -> list[str]:
    """Problems preventing ``mapping`` from being an injective,
    label- and structure-preserving morphism ``src -> dst``."""
    out = []
    if set(mapping) != set(src.labels):
        out.append("node map is not total")
    if len(set(mapping.values())) != len(mapping):
        out.append("node map is not injective")
    for n, h in mapping.items():
        if h not in dst.labels:
            out.append(f"node {n} maps to missing node {h}")
        elif n in src.labels and src.labels[n] != dst.labels[h]:
            out.append(f"node {n} label {src.labels[n]} maps to {dst.labels[h]}")
    for s, lab, t in src.edges:
        if s in mapping and t in mapping and (mapping[s], lab, mapping[t]) not in dst.edges:
            out.append(f"edge ({s}, {lab}, {t}) has no image")
    return out


def rule_violations(rule: ProductionRule) -> list[str]:
    out = [f"l: {m}" for m in morphism_violations(rule.interface, rule.lhs, rule.lmap)]
    out += [f"r: {m}" for m in morphism_violations(rule.interface, rule.rhs, rule.rmap)]
    return out


@dataclass(frozen=True)
class Match:
    nodes: tuple[tuple[int, int], ...]

    @cached_property
    def mapping(self) -> dict[int, int]:
        return dict(self.nodes)


def _deleted_nodes(rule: ProductionRule) -> list[int]:
    kept = set(rule.lmap.values())
    return [n for n, _ in rule.lhs.nodes if n not in kept]


def _kept_edges(rule: ProductionRule) -> set[Edge]:
    l = rule.lmap
    return {(l[s], lab, l[t]) for s, lab, t in rule.interface.edges}


def _dangles(rule: ProductionRule, host: LabeledGraph, m: Mapping[int, int]) -> bool:
    matched = {(m[s], lab, m[t]) for s, lab, t in rule.lhs.edges}
    for n in _deleted_nodes(rule):
        for e in host.incident.get(m[n], ()):
            if e not in matched:
                return True
    return False


def find_matches(rule: ProductionRule, host: LabeledGraph) -> list[Match]:
    lhs = rule.lhs
    # Anchor named nodes first; tokens then only range over their place's tokens.
    order = sorted(lhs.labels, key=lambda n: (lhs.labels[n].kind == TOKEN, n))
    position = {n: i for i, n in enumerate(order)}
    checks: dict[int, list[Edge]] = defaultdict(list)
    for e in lhs.edges:
        checks[order[max(position[e[0]], position[e[2]])]].append(e)

    found: list[Match] = []
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> None:
        if i == len(order):
            if not _dangles(rule, host, mapping):
                found.append(Match(tuple(sorted(mapping.items()))))
            return
        v = order[i]
        for h in host.by_label.get(lhs.labels[v], ()):
            if h in used:
                continue
            mapping[v] = h
            if all((mapping[s], lab, mapping[t]) in host.edges for s, lab, t in checks[v]):
                used.add(h)
                extend(i + 1)
                used.discard(h)
            del mapping[v]

    extend(0)
    found.sort(key=lambda m: tuple(h for _, h in m.nodes))
    return found


def apply_rule(host: LabeledGraph, rule: ProductionRule, match: Match) -> LabeledGraph:
    m = match.mapping
    problems = morphism_violations(rule.lhs, host, m)
    if problems:
        raise InvalidMatch(f"rule {rule.name!r}: " + "; ".join(problems))
    if _dangles(rule, host, m):
        raise InvalidMatch(f"rule {rule.name!r}: dangling condition violated")

    deleted = {m[n] for n in _deleted_nodes(rule)}
    kept_edges = _kept_edges(rule)
    deleted_edges = {(m[s], lab, m[t]) for s, lab, t in rule.lhs.edges
                     if (s, lab, t) not in kept_edges}
    nodes = {n: lab for n, lab in host.nodes if n not in deleted}
    edges = {e for e in host.edges if e not in deleted_edges}

    fresh = host.next_id
    r_inv = {rv: k for k, rv in rule.rmap.items()}
    image: dict[int, int] = {}
    for n, lab in rule.rhs.nodes:
        if n in r_inv:
            image[n] = m[rule.lmap[r_inv[n]]]
        else:
            image[n] = fresh
            nodes[fresh] = lab
            fresh += 1
    r = rule.rmap
    r_kept = {(r[s], lab, r[t]) for s, lab, t in rule.interface.edges}
    for s, lab, t in rule.rhs.edges:
        if (s, lab, t) not in r_kept:
            edges.add((image[s], lab, image[t]))
    return LabeledGraph.make(nodes, edges, fresh)


# -- unions and canonical forms ---------------------------------------------

def union_with_maps(g1: LabeledGraph, g2: LabeledGraph
                    ) -> tuple[LabeledGraph, dict[int, int], dict[int, int]]:
    m1 = {n: i for i, (n, _) in enumerate(g1.nodes)}
    m2 = {n: i + len(m1) for i, (n, _) in enumerate(g2.nodes)}
    nodes = {m1[n]: lab for n, lab in g1.nodes}
    nodes.update({m2[n]: lab for n, lab in g2.nodes})
    edges = {(m1[s], lab, m1[t]) for s, lab, t in g1.edges}
    edges |= {(m2[s], lab, m2[t]) for s, lab, t in g2.edges}
    return LabeledGraph.make(nodes, edges), m1, m2


def disjoint_union(g1: LabeledGraph, g2: LabeledGraph) -> LabeledGraph:
    return union_with_maps(g1, g2)[0]


@dataclass(frozen=True)
class Configuration:
    """What a host graph says about each model: current states and markings."""

    states: tuple[tuple[str, str], ...]
    markings: tuple[tuple[str, str, int], ...]

    def state_of(self, machine: str) -> Optional[str]:
        for m, s in self.states:
            if m == machine:
                return s
        return None

    def tokens(self, net: str, place: str) -> int:
        for n, p, c in self.markings:
            if n == net and p == place:
                return c
        return 0

    def __str__(self) -> str:
        parts = [f"{m}={s}" for m, s in self.states]
        nets: dict[str, list[str]] = defaultdict(list)
        for n, p, c in self.markings:
            if c:
                nets[n].append(f"{p}:{c}")
        parts += [f"{n}{{{', '.join(ps)}}}" for n, ps in nets.items()]
        return " ".join(parts)


def configuration(g: LabeledGraph) -> Configuration:
    """Read states and markings off ``g``; raises ``GraphError`` when ``g``
    falls outside the supported vocabulary."""
    states: list[tuple[str, str]] = []
    places: dict[int, NodeLabel] = {}
    counts: Counter = Counter()
    for n, lab in g.nodes:
        if lab.kind == STATE:
            states.append((lab.model, lab.name))
        elif lab.kind == PLACE:
            places[n] = lab
        elif lab.kind != TOKEN:
            raise GraphError(f"unsupported node label {lab}")
    if len(set(places.values())) != len(places):
        raise GraphError("duplicate place node")
    if len(set(states)) != len(states):
        raise GraphError("duplicate state node")
    out_edges: dict[int, list[Edge]] = defaultdict(list)
    for e in g.edges:
        s, lab, t = e
        if lab != ON or g.labels[s].kind != TOKEN or t not in places:
            raise GraphError(f"unsupported edge {e}")
        out_edges[s].append(e)
    for n, lab in g.nodes:
        if lab.kind == TOKEN:
            if len(out_edges[n]) != 1:
                raise GraphError(f"token {n} must sit on exactly one place")
            counts[out_edges[n][0][2]] += 1
    markings = sorted((lab.model, lab.name, counts[n]) for n, lab in places.items())
    return Configuration(tuple(sorted(states)), tuple(markings))


def canonical_certificate(g: LabeledGraph) -> bytes:
    c = configuration(g)
    return json.dumps([c.states, c.markings], separators=(",", ":")).encode()


def host_violations(g: LabeledGraph) -> list[str]:
    out = []
    for s, _, t in g.edges:
        if s not in g.labels or t not in g.labels:
            out.append(f"edge ({s}, {t}) dangles")
    machines = Counter(lab.model for _, lab in g.nodes if lab.kind == STATE)
    out += [f"machine {m!r} has {k} state nodes" for m, k in machines.items() if k > 1]
    try:
        configuration(g)
    except GraphError as exc:
        out.append(str(exc))
    for e in g.edges:
        if e[2] in g.labels and g.labels[e[2]].kind == TOKEN:
            out.append(f"token {e[2]} has an incoming edge")
    return out
