"""Text renderings of scenarios and grammars: model DOT and grammar dumps."""

from __future__ import annotations

from .graph import GraphGrammar, LabeledGraph, ProductionRule
from .scenario import Scenario
from .statespace import dot_escape


def _node_id(*parts: str) -> str:
    return '"' + dot_escape("::".join(parts)) + '"'


def models_dot(scn: Scenario) -> str:
    """All models side by side with handshake pairs as dashed edges.

    State-machine transitions are drawn as small boxes so that a
    synchronization can point at them just like at a Petri-net transition.
    """
    lines = ["digraph models {", "  rankdir=LR;", "  compound=true;"]
    for sm in scn.state_machines:
        lines.append(f'  subgraph "cluster_{dot_escape(sm.name)}" {{')
        lines.append(f'    label="{dot_escape(sm.name)}";')
        for s in sm.states:
            shape = "doublecircle" if s in sm.finals else "ellipse"
            style = ', style=bold' if s == sm.initial else ""
            lines.append(f'    {_node_id(sm.name, "state", s)} [label="{dot_escape(s)}", shape={shape}{style}];')
        for t in sm.transitions:
            tid = _node_id(sm.name, "transition", t.id)
            lines.append(f'    {tid} [label="{dot_escape(t.label)}", shape=box, height=0.2];')
            lines.append(f'    {_node_id(sm.name, "state", t.source)} -> {tid} [arrowhead=none];')
            lines.append(f'    {tid} -> {_node_id(sm.name, "state", t.target)};')
        lines.append("  }")
    for pn in scn.petri_nets:
        marking = pn.initial_marking()
        lines.append(f'  subgraph "cluster_{dot_escape(pn.name)}" {{')
        lines.append(f'    label="{dot_escape(pn.name)}";')
        for p in pn.places:
            tokens = f"\\n{marking[p]}" if marking[p] else ""
            lines.append(f'    {_node_id(pn.name, "place", p)} [label="{dot_escape(p)}{tokens}", shape=circle];')
        for t in pn.transitions:
            lines.append(f'    {_node_id(pn.name, "transition", t)} [label="{dot_escape(t)}", shape=box];')
        places = set(pn.places)
        for a in pn.arcs:
            src = _node_id(pn.name, "place" if a.source in places else "transition", a.source)
            dst = _node_id(pn.name, "place" if a.target in places else "transition", a.target)
            label = f' [label="{a.weight}"]' if a.weight != 1 else ""
            lines.append(f"    {src} -> {dst}{label};")
        lines.append("  }")
    for sset in scn.synchronizations:
        for a, b in sset.pairs:
            lines.append(f'  {_node_id(a.model, "transition", a.transition)} -> '
                         f'{_node_id(b.model, "transition", b.transition)} '
                         f'[dir=none, style=dashed, color=cyan, label="{dot_escape(sset.name)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graph_inventory(g: LabeledGraph) -> list[str]:
    nodes = ", ".join(f"{n}:{lab}" for n, lab in g.nodes) or "-"
    edges = ", ".join(f"{s}-{lab}->{t}" for s, lab, t in sorted(g.edges)) or "-"
    return [f"nodes: {nodes}", f"edges: {edges}"]


def _rule_lines(rule: ProductionRule) -> list[str]:
    out = [f"rule {rule.name}"]
    for tag, g in (("L", rule.lhs), ("K", rule.interface), ("R", rule.rhs)):
        for line in _graph_inventory(g):
            out.append(f"  {tag} {line}")
    out.append("  l: " + (", ".join(f"{k}->{v}" for k, v in rule.l) or "-"))
    out.append("  r: " + (", ".join(f"{k}->{v}" for k, v in rule.r) or "-"))
    return out


def grammar_dump(grammar: GraphGrammar, scn: Scenario | None = None) -> str:
    lines = []
    if scn is not None:
        lines.append("synchronizations")
        for sset in scn.synchronizations:
            for a, b in sset.pairs:
                lines.append(f"  {sset.name}: {a} <-> {b}")
        lines.append("")
    lines.append("start graph")
    lines += [f"  {line}" for line in _graph_inventory(grammar.start)]
    lines.append("")
    lines.append(f"rules ({len(grammar.rules)})")
    for rule in grammar.rules:
        lines += _rule_lines(rule)
    return "\n".join(lines) + "\n"
