"""Scenario documents and the end-to-end consistency pipeline.

A scenario bundles the models, their synchronizations, the atomic
propositions and the CTL constraints. ``run_pipeline`` validates it, builds
the composed grammar, explores it and checks every constraint.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .alignment import (SynchronizationSet, TransitionRef, pairs_by_label,
                        validate_synchronizations)
from .ctl import (Checker, CtlSyntaxError, Formula, UnknownProposition, Verdict, check,
                  parse_ctl)
from .graph import GraphGrammar
from .models import (Arc, FsmIn, Model, PetriNet, PropositionDef, SmTransition, StateMachine,
                     TokenCompare, Violation, validate_model, validate_propositions)
from .statespace import (ExplorationLimits, KripkeStructure, TransitionSystem,
                         complete_relation, explore, find_deadlocks, label_states)
from .transform import compose, to_grammar


class ScenarioError(ValueError):
    def __init__(self, violations: list[Violation]):
        super().__init__("\n".join(map(str, violations)))
        self.violations = violations


@dataclass(frozen=True)
class Scenario:
    state_machines: tuple[StateMachine, ...] = ()
    petri_nets: tuple[PetriNet, ...] = ()
    synchronizations: tuple[SynchronizationSet, ...] = ()
    propositions: tuple[PropositionDef, ...] = ()
    constraints: tuple[tuple[str, str], ...] = ()
    terminal: tuple[str, ...] = ()
    limits: ExplorationLimits = field(default_factory=ExplorationLimits)

    @property
    def models(self) -> dict[str, Model]:
        out: dict[str, Model] = {}
        for m in (*self.state_machines, *self.petri_nets):
            out.setdefault(m.name, m)
        return out


# -- parsing ----------------------------------------------------------------

def _req(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError([Violation(where, f"missing key {key!r}")])
    return obj[key]


def _state_machine(d: dict) -> StateMachine:
    name = _req(d, "name", "stateMachines[]")
    where = f"state machine {name!r}"
    raw = _req(d, "transitions", where) if "transitions" in d else []
    labels = [t.get("label", "") for t in raw]
    transitions = []
    for t in raw:
        source, label, target = (_req(t, k, f"{where} transition") for k in ("source", "label", "target"))
        default = label if labels.count(label) == 1 else f"{source}/{label}/{target}"
        transitions.append(SmTransition(str(t.get("id", default)), source, label, target))
    return StateMachine(name, tuple(_req(d, "states", where)), _req(d, "initial", where),
                        tuple(d.get("finals", ())), tuple(transitions))


def _petri_net(d: dict) -> PetriNet:
    name = _req(d, "name", "petriNets[]")
    where = f"petri net {name!r}"
    arcs = tuple(Arc(_req(a, "source", f"{where} arc"), _req(a, "target", f"{where} arc"),
                     a.get("weight", 1)) for a in d.get("arcs", ()))
    return PetriNet(name, tuple(_req(d, "places", where)), tuple(_req(d, "transitions", where)),
                    arcs, dict(d.get("marking", {})))


def _ref(d: dict, where: str) -> TransitionRef:
    return TransitionRef(str(_req(d, "model", where)), str(_req(d, "transition", where)))


def _synchronization(d: dict, models: dict[str, Model]) -> SynchronizationSet:
    name = _req(d, "name", "synchronizations[]")
    where = f"synchronization {name!r}"
    pairs = [tuple(_ref(r, where) for r in pair) for pair in d.get("pairs", ())]
    for spec in d.get("syncByLabel", ()):
        args = [_req(spec, k, f"{where} syncByLabel") for k in ("modelA", "labelA", "modelB", "labelB")]
        expanded = pairs_by_label(models, *args)
        if not expanded:
            raise ScenarioError([Violation(where, f"syncByLabel {args} matches no transitions")])
        pairs.extend(p for p in expanded if p not in pairs)
    return SynchronizationSet(name, tuple(pairs))


def _proposition(d: dict) -> PropositionDef:
    name = _req(d, "name", "propositions[]")
    if ("fsmIn" in d) == ("tokens" in d):
        raise ScenarioError([Violation(f"proposition {name!r}", "needs exactly one of fsmIn, tokens")])
    if "fsmIn" in d:
        f = d["fsmIn"]
        return PropositionDef(name, FsmIn(_req(f, "machine", name), _req(f, "state", name)))
    t = d["tokens"]
    return PropositionDef(name, TokenCompare(_req(t, "net", name), _req(t, "place", name),
                                             _req(t, "cmp", name), _req(t, "bound", name)))


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError([Violation("scenario", "top level must be an object")])
    try:
        sms = tuple(_state_machine(d) for d in doc.get("stateMachines", ()))
        pns = tuple(_petri_net(d) for d in doc.get("petriNets", ()))
        models = {m.name: m for m in (*sms, *pns)}
        syncs = tuple(_synchronization(d, models) for d in doc.get("synchronizations", ()))
        props = tuple(_proposition(d) for d in doc.get("propositions", ()))
        constraints = tuple((_req(c, "name", "constraints[]"), _req(c, "ctl", "constraints[]"))
                            for c in doc.get("constraints", ()))
        lim = doc.get("limits", {})
        limits = ExplorationLimits(lim.get("maxStates", ExplorationLimits.max_states),
                                   lim.get("maxDepth"))
    except (TypeError, AttributeError) as exc:
        raise ScenarioError([Violation("scenario", f"malformed document: {exc}")]) from None
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError([Violation("scenario", str(exc))]) from None
    return Scenario(sms, pns, syncs, props, constraints, tuple(doc.get("terminal", ())), limits)


def load_scenario(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ScenarioError([Violation(str(path), f"cannot read: {exc.strerror}")]) from None
    except json.JSONDecodeError as exc:
        raise ScenarioError([Violation(str(path), f"invalid JSON: {exc}")]) from None
    return parse_scenario(doc)


def validate_scenario(scn: Scenario) -> list[Violation]:
    out: list[Violation] = []
    names = [m.name for m in (*scn.state_machines, *scn.petri_nets)]
    for n in sorted({n for n in names if names.count(n) > 1}):
        out.append(Violation(f"model {n!r}", "duplicate model name"))
    for m in (*scn.state_machines, *scn.petri_nets):
        out += validate_model(m)
    models = scn.models
    out += validate_synchronizations(models, scn.synchronizations)
    out += validate_propositions(models, list(scn.propositions))
    known = {p.name for p in scn.propositions}
    cnames = [n for n, _ in scn.constraints]
    for n in sorted({n for n in cnames if cnames.count(n) > 1}):
        out.append(Violation(f"constraint {n!r}", "duplicate constraint name"))
    for n, text in scn.constraints:
        try:
            parse_ctl(text, known)
        except (CtlSyntaxError, UnknownProposition) as exc:
            out.append(Violation(f"constraint {n!r}", str(exc)))
    for t in scn.terminal:
        if t not in known:
            out.append(Violation(f"terminal {t!r}", "unknown proposition"))
    return out


# -- pipeline ---------------------------------------------------------------

def build_grammar(scn: Scenario) -> GraphGrammar:
    grammars = {m.name: to_grammar(m) for m in (*scn.state_machines, *scn.petri_nets)}
    return compose(grammars, scn.synchronizations)


@dataclass
class ConstraintResult:
    name: str
    text: str
    verdict: Verdict


@dataclass
class Report:
    constraints: list[ConstraintResult]
    deadlocks: list[int]
    states: int
    transitions: int
    truncated: bool
    kripke: KripkeStructure
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return not self.deadlocks and all(c.verdict.holds == "yes" for c in self.constraints)

    @property
    def exit_code(self) -> int:
        if self.truncated:
            return 3
        return 0 if self.consistent else 1

    def to_dict(self, with_timing: bool = True) -> dict:
        configs = self.kripke.ts.configurations

        def trace(t) -> Optional[dict]:
            if t is None:
                return None
            return {"kind": t.kind, "cycleStart": t.cycle_start,
                    "steps": [{"state": s.state, "rule": s.rule, "config": str(configs[s.state])}
                              for s in t.steps]}

        out = {
            "consistent": self.consistent,
            "states": self.states,
            "transitions": self.transitions,
            "truncated": self.truncated,
            "deadlocks": [{"state": d, "config": str(configs[d])} for d in self.deadlocks],
            "constraints": [{"name": c.name, "ctl": c.text, "holds": c.verdict.holds,
                             "satisfyingStates": len(c.verdict.satisfying),
                             "evidence": trace(c.verdict.evidence)} for c in self.constraints],
        }
        if with_timing:
            out["timing"] = {k: round(v, 6) for k, v in self.timing.items()}
        return out


def explore_scenario(scn: Scenario, limits: Optional[ExplorationLimits] = None
                     ) -> tuple[TransitionSystem, KripkeStructure]:
    """Raw transition system plus its relation-completed Kripke structure."""
    ts = explore(build_grammar(scn), limits or scn.limits)
    return ts, label_states(complete_relation(ts), scn.propositions)


def run_pipeline(scn: Scenario, limits: Optional[ExplorationLimits] = None) -> Report:
    problems = validate_scenario(scn)
    if problems:
        raise ScenarioError(problems)
    timing = {}
    t0 = time.perf_counter()
    grammar = build_grammar(scn)
    timing["compose"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    ts = explore(grammar, limits or scn.limits)
    timing["explore"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    raw_labels = label_states(ts, scn.propositions).labeling
    terminal = set(scn.terminal)
    deadlocks = find_deadlocks(ts, (lambda i: terminal <= raw_labels[i]) if terminal else None)
    kripke = label_states(complete_relation(ts), scn.propositions)
    checker = Checker(kripke)
    known = {p.name for p in scn.propositions}
    results = []
    for name, text in scn.constraints:
        f: Formula = parse_ctl(text, known)
        results.append(ConstraintResult(name, text, check(kripke, f, checker)))
    timing["check"] = time.perf_counter() - t0
    return Report(results, deadlocks, len(ts), len(ts.transitions), ts.truncated, kripke, timing)
