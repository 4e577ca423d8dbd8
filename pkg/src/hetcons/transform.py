"""Translate models into graph grammars and compose them along handshakes."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Mapping

from .alignment import SynchronizationSet, TransitionRef, synchronized_transitions
from .graph import (EMPTY_GRAPH, GraphBuilder, GraphGrammar, LabeledGraph, ProductionRule,
                    disjoint_union, place_label, state_label, union_with_maps)
from .models import (Model, PetriNet, StateMachine, validate_petri_net,
                     validate_state_machine)


class TransformError(ValueError):
    pass


def fsm_state_graph(sm: StateMachine, state: str) -> LabeledGraph:
    b = GraphBuilder()
    b.node(state_label(sm.name, state))
    return b.build()


def fsm_to_grammar(sm: StateMachine) -> GraphGrammar:
    problems = validate_state_machine(sm)
    if problems:
        raise TransformError("; ".join(map(str, problems)))
    rules = []
    for t in sm.transitions:
        rules.append(ProductionRule(
            name=t.id,
            lhs=fsm_state_graph(sm, t.source),
            interface=EMPTY_GRAPH,
            rhs=fsm_state_graph(sm, t.target),
        ))
    return GraphGrammar(fsm_state_graph(sm, sm.initial), tuple(rules))


def marking_graph(pn: PetriNet, marking: Mapping[str, int]) -> LabeledGraph:
    """All places of ``pn`` with ``marking[p]`` tokens on each."""
    b = GraphBuilder()
    for p in pn.places:
        node = b.node(place_label(pn.name, p))
        for _ in range(marking.get(p, 0)):
            b.token_on(node)
    return b.build()


def _transition_rule(pn: PetriNet, t: str) -> ProductionRule:
    pre, post = pn.pre(t), pn.post(t)
    touched = [p for p in pn.places if p in pre or p in post]

    def side(weights: Mapping[str, int]) -> tuple[LabeledGraph, dict[str, int]]:
        b = GraphBuilder()
        ids = {p: b.node(place_label(pn.name, p)) for p in touched}
        for p in touched:
            for _ in range(weights.get(p, 0)):
                b.token_on(ids[p])
        return b.build(), ids

    lhs, lids = side(pre)
    interface, kids = side({})
    rhs, rids = side(post)
    return ProductionRule(
        name=t,
        lhs=lhs,
        interface=interface,
        rhs=rhs,
        l=tuple((kids[p], lids[p]) for p in touched),
        r=tuple((kids[p], rids[p]) for p in touched),
    )


def pn_to_grammar(pn: PetriNet) -> GraphGrammar:
    problems = validate_petri_net(pn)
    if problems:
        raise TransformError("; ".join(map(str, problems)))
    rules = tuple(_transition_rule(pn, t) for t in pn.transitions)
    return GraphGrammar(marking_graph(pn, pn.initial_marking()), rules)


def to_grammar(model: Model) -> GraphGrammar:
    if isinstance(model, StateMachine):
        return fsm_to_grammar(model)
    return pn_to_grammar(model)


def _rule_model(rule: ProductionRule) -> frozenset[str]:
    return frozenset(lab.model for g in (rule.lhs, rule.interface, rule.rhs)
                     for _, lab in g.nodes if lab.model)


def merge_rules(r1: ProductionRule, r2: ProductionRule) -> ProductionRule:
    """Component-wise disjoint union of two rules from different models."""
    if _rule_model(r1) & _rule_model(r2):
        raise TransformError(f"cannot merge {r1.name!r} and {r2.name!r}: they share a model")
    lhs, l1, l2 = union_with_maps(r1.lhs, r2.lhs)
    interface, k1, k2 = union_with_maps(r1.interface, r2.interface)
    rhs, q1, q2 = union_with_maps(r1.rhs, r2.rhs)
    lmap = {k1[k]: l1[v] for k, v in r1.lmap.items()}
    lmap.update({k2[k]: l2[v] for k, v in r2.lmap.items()})
    rmap = {k1[k]: q1[v] for k, v in r1.rmap.items()}
    rmap.update({k2[k]: q2[v] for k, v in r2.rmap.items()})
    return ProductionRule(f"({r1.name}, {r2.name})", lhs, interface, rhs,
                          tuple(sorted(lmap.items())), tuple(sorted(rmap.items())))


def qualified(model: str, rule: ProductionRule) -> ProductionRule:
    return replace(rule, name=f"{model}.{rule.name}")


def compose(grammars: Mapping[str, GraphGrammar],
            sets: Iterable[SynchronizationSet] = ()) -> GraphGrammar:
    """Union of start graphs; synchronized rules replaced by one merged rule
    per pair. Rule names are qualified by model (``SM1.acquire``)."""
    sets = list(sets)

    def lookup(ref: TransitionRef) -> ProductionRule:
        g = grammars.get(ref.model)
        if g is None:
            raise TransformError(f"unresolvable pair member {ref}: unknown model")
        try:
            return qualified(ref.model, g.rule(ref.transition))
        except KeyError:
            raise TransformError(f"unresolvable pair member {ref}: unknown transition") from None

    start = EMPTY_GRAPH
    for g in grammars.values():
        start = disjoint_union(start, g.start)

    synced = synchronized_transitions(sets)
    rules = [qualified(model, r) for model, g in grammars.items() for r in g.rules
             if TransitionRef(model, r.name) not in synced]
    for s in sets:
        for a, b in s.pairs:
            rules.append(merge_rules(lookup(a), lookup(b)))
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise TransformError(f"duplicate composed rule names: {dup}")
    return GraphGrammar(start, tuple(rules))
