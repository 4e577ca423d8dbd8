"""Exit criteria for the running example and the randomized equivalence checks.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import io
import json
import random

import pytest

from hetcons.cli import run_check, run_export
from hetcons.graph import GraphBuilder, canonical_certificate, place_label, state_label
from hetcons.models import StateMachine
from hetcons.scenario import build_grammar, explore_scenario, parse_scenario, run_pipeline
from hetcons.statespace import explore
from hetcons.transform import compose, fsm_to_grammar, pn_to_grammar, to_grammar

from oracles import (brute_force_sat, is_acyclic, product_configuration, product_state_space,
                     random_formula, random_fsm, random_kripke, random_net)
from hetcons.ctl import check

GOAL = {"r1_available", "r2_available", "sm3_end", "n1_all_done"}
ORACLE_CAP = 1000


def _oracle_models(scn):
    return [*scn.state_machines, *scn.petri_nets]


def _local(models, state, name):
    for m, loc in zip(models, state):
        if m.name == name:
            return loc if isinstance(m, StateMachine) else dict(zip(m.places, loc))
    raise KeyError(name)


def _goal(models, g):
    n1 = _local(models, g, "N1")
    return (_local(models, g, "SM1") == "available" and _local(models, g, "SM2") == "available"
            and _local(models, g, "SM3") == "end" and n1["end"] == 3)


def _resource_one_ok(models, g):
    r1 = _local(models, g, "N1")["r1"]
    return r1 <= 1 if _local(models, g, "SM3") in ("start", "end") else r1 == 0


def _resource_two_ok(models, g):
    r2 = _local(models, g, "N1")["r2"]
    return r2 <= 1 if _local(models, g, "SM3") != "work" else r2 == 0


@pytest.mark.criterion("1  translation rule counts: N1 -> 6 rules, SM3 -> 4 rules")
def test_translation_rule_counts(n1, sm3):
    assert len(pn_to_grammar(n1).rules) == 6
    assert len(fsm_to_grammar(sm3).rules) == 4


@pytest.mark.criterion("2  composed running example has 10 rules (8 merged + 2 unsynchronized)")
def test_composed_rule_count(scenario):
    rules = build_grammar(scenario).rules
    assert len(rules) == 10
    assert sum(r.name.startswith("(") for r in rules) == 8
    assert sorted(r.name for r in rules if not r.name.startswith("(")) == ["N1.finish 1", "N1.finish 2"]


@pytest.mark.criterion("3  running example: exit 0, constraints 1-3 hold, no deadlocks (oracle-confirmed)")
def test_running_example_end_to_end(scenario, example_path):
    # independent interleaving product with handshake pairing
    models = _oracle_models(scenario)
    states, edges, complete = product_state_space(models, scenario.synchronizations)
    assert complete
    sinks = [g for g in states if not edges[g]]
    assert sinks and all(_goal(models, g) for g in sinks)
    assert is_acyclic(edges)  # every maximal run is finite and ends in a goal sink: AF goal
    assert all(_resource_one_ok(models, g) for g in states)
    assert all(_resource_two_ok(models, g) for g in states)

    ts, _ = explore_scenario(scenario)
    got = {(c.states, c.markings) for c in ts.configurations}
    assert got == {product_configuration(models, g) for g in states}

    out = io.StringIO()
    report, code = run_check(example_path, out=out, err=io.StringIO())
    assert code == 0
    assert [c.verdict.holds for c in report.constraints] == ["yes", "yes", "yes"]
    assert report.deadlocks == []


@pytest.mark.criterion("4a removing the SM2<->SM3 release pair yields a deadlock or violation with replayable trace")
def test_mutation_drop_release_pair(example_doc):
    for s in example_doc["synchronizations"]:
        if s["name"] == "SM2-SM3":
            s["pairs"] = [p for p in s["pairs"] if p[0]["transition"] != "release"]
    scn = parse_scenario(example_doc)

    models = _oracle_models(scn)
    states, edges, complete = product_state_space(models, scn.synchronizations)
    assert complete
    assert any(not edges[g] and not _goal(models, g) for g in states)

    report = run_pipeline(scn)
    assert report.exit_code == 1
    failing = [c for c in report.constraints if c.verdict.holds == "no"]
    assert report.deadlocks or failing
    traces = [c.verdict.evidence for c in failing if c.verdict.evidence is not None]
    assert traces
    for t in traces:
        assert t.steps[0].state == report.kripke.initial
        assert t.replays(report.kripke)
    configs = report.kripke.ts.configurations
    for d in report.deadlocks:
        assert not GOAL <= report.kripke.labeling[d]
        assert configs[d].state_of("SM2") == "taken"


@pytest.mark.criterion("4b constraint 2 with bound '== 0' exits 1 with a finite AG counterexample")
def test_mutation_tightened_bound(example_doc, write_doc):
    for p in example_doc["propositions"]:
        if p["name"] == "r1_at_most_one":
            p["tokens"]["cmp"], p["tokens"]["bound"] = "==", 0
    out = io.StringIO()
    report, code = run_check(write_doc(example_doc), out=out, err=io.StringIO())
    assert code == 1
    c2 = next(c for c in report.constraints if c.name == "proper_resource_one_access")
    assert c2.verdict.holds == "no"
    trace = c2.verdict.evidence
    assert trace.kind == "path" and trace.replays(report.kripke)
    last = report.kripke.ts.configurations[trace.steps[-1].state]
    assert last.state_of("SM3") in ("start", "end") and last.tokens("N1", "r1") >= 1
    for other in report.constraints:
        if other is not c2:
            assert other.verdict.holds == "yes"


@pytest.mark.criterion("5  DPO/PN equivalence on >=200 random nets: exact reachable-set equality")
def test_dpo_matches_marking_oracle():
    rng = random.Random(20211001)
    accepted = attempts = 0
    while accepted < 200:
        attempts += 1
        assert attempts < 2000, "too few bounded nets generated"
        pn = random_net(rng, "N", max_places=5, max_transitions=5, max_weight=2, max_tokens=4)
        markings, _, complete = product_state_space([pn], cap=ORACLE_CAP)
        if not complete:
            continue
        accepted += 1
        ts = explore(pn_to_grammar(pn))
        assert not ts.truncated
        grammar_set = {c.markings for c in ts.configurations}
        oracle_set = {product_configuration([pn], g)[1] for g in markings}
        assert grammar_set == oracle_set
    assert accepted >= 200


@pytest.mark.criterion("6  interleaving soundness on >=50 random model pairs: state count == product count")
def test_interleaving_product_count():
    rng = random.Random(1729)
    accepted = attempts = 0
    while accepted < 50:
        attempts += 1
        assert attempts < 1000
        kinds = rng.choice(["ff", "fp", "pp"])
        a = random_fsm(rng, "A") if kinds[0] == "f" else random_net(rng, "A", max_tokens=3)
        b = random_fsm(rng, "B") if kinds[1] == "f" else random_net(rng, "B", max_tokens=3)
        counts = []
        for m in (a, b):
            states, _, complete = product_state_space([m], cap=200)
            if not complete:
                break
            counts.append(len(states))
        if len(counts) < 2:
            continue
        accepted += 1
        ts = explore(compose({"A": to_grammar(a), "B": to_grammar(b)}, []))
        assert len(ts) == counts[0] * counts[1]
    assert accepted >= 50


def _random_config_graph(rng, config, order_seed):
    """Graph realizing ``config`` with node ids in a seed-dependent order."""
    states, markings = config
    items = [("s", m, s) for m, s in states]
    for net, place, count in markings:
        items.append(("p", net, place, count))
    random.Random(order_seed).shuffle(items)
    b = GraphBuilder()
    places = []
    for it in items:
        if it[0] == "s":
            b.node(state_label(it[1], it[2]))
        else:
            places.append((b.node(place_label(it[1], it[2])), it[3]))
    random.Random(order_seed + 1).shuffle(places)
    for node, count in places:
        for _ in range(count):
            b.token_on(node)
    return b.build()


def _random_config(rng):
    states = tuple((f"M{i}", f"s{rng.randint(0, 3)}") for i in range(rng.randint(0, 3)))
    markings = tuple((f"N{i}", f"p{j}", rng.randint(0, 4))
                     for i in range(rng.randint(0, 2)) for j in range(rng.randint(1, 4)))
    return states, markings


@pytest.mark.criterion("7  certificates: 1000 permutation trials equal, 1000 distinct-marking pairs unequal")
def test_certificate_invariance():
    rng = random.Random(99)
    for trial in range(1000):
        config = _random_config(rng)
        g1 = _random_config_graph(rng, config, 2 * trial)
        g2 = _random_config_graph(rng, config, 2 * trial + 7919)
        assert canonical_certificate(g1) == canonical_certificate(g2)
    distinct = 0
    while distinct < 1000:
        states, markings = _random_config(rng)
        if not markings:
            continue
        k = rng.randrange(len(markings))
        net, place, count = markings[k]
        changed = markings[:k] + ((net, place, count + rng.choice([1, 2]) if count == 0
                                   else count + rng.choice([-1, 1])),) + markings[k + 1:]
        if states and rng.random() < 0.3:
            m, s = states[0]
            states_b = ((m, s + "x"),) + states[1:]
        else:
            states_b = states
        g1 = _random_config_graph(rng, (states, markings), distinct)
        g2 = _random_config_graph(rng, (states_b, changed), distinct + 1)
        assert canonical_certificate(g1) != canonical_certificate(g2)
        distinct += 1


@pytest.mark.criterion("8  CTL checker agrees with brute force on >=500 random instances")
def test_ctl_matches_brute_force():
    rng = random.Random(8)
    disagreements = 0
    for _ in range(500):
        k = random_kripke(rng, max_states=8)
        f = random_formula(rng, 3)
        if check(k, f).satisfying != brute_force_sat(k, f):
            disagreements += 1
    assert disagreements == 0


@pytest.mark.criterion("9  determinism: identical reports and byte-identical exports across runs")
def test_determinism(example_path, tmp_path):
    outputs = []
    for run in ("a", "b"):
        out = io.StringIO()
        report, code = run_check(example_path, as_json=True, dot_dir=tmp_path / run, out=out,
                                 err=io.StringIO())
        data = json.loads(out.getvalue())
        data.pop("timing")
        outputs.append(data)
        for target in ("statespace-dot", "models-dot", "grammar-dump"):
            assert run_export(example_path, target, tmp_path / run / "export") == 0
    assert outputs[0] == outputs[1]
    for rel in ("statespace.dot", "export/statespace.dot", "export/models.dot", "export/grammar.txt"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
