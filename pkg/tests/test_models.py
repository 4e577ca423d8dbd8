import random

from hypothesis import given, settings, strategies as st

from hetcons.models import (Arc, PetriNet, SmTransition, StateMachine, fire_pn_transition,
                            step_fsm, validate_petri_net, validate_state_machine)

from oracles import random_net
import pytest


class TestValidateStateMachine:
    def test_resource_machine_is_valid(self, sm1):
        assert validate_state_machine(sm1) == []

    def test_initial_outside_states(self):
        sm = StateMachine("M", ("a", "b"), "x")
        report = validate_state_machine(sm)
        assert len(report) == 1
        assert report[0].message == "initial not in states"

    def test_duplicate_state(self):
        sm = StateMachine("M", ("a", "a"), "a")
        report = validate_state_machine(sm)
        assert [v.message for v in report] == ["duplicate state name"]
        assert "'a'" in report[0].element

    def test_dangling_transition_and_bad_final(self):
        sm = StateMachine("M", ("a",), "a", ("z",), (SmTransition("t", "a", "go", "b"),))
        messages = {v.message for v in validate_state_machine(sm)}
        assert messages == {"final not in states", "target 'b' not in states"}

    def test_duplicate_triple_and_empty_label(self):
        sm = StateMachine("M", ("a",), "a", (), (SmTransition("t1", "a", "", "a"),
                                                  SmTransition("t2", "a", "", "a")))
        messages = [v.message for v in validate_state_machine(sm)]
        assert "duplicate transition triple" in messages
        assert messages.count("empty label") == 2

    def test_idempotent(self):
        sm = StateMachine("M", ("a", "a"), "x")
        assert validate_state_machine(sm) == validate_state_machine(sm)


class TestValidatePetriNet:
    def test_n1_is_valid(self, n1):
        assert validate_petri_net(n1) == []

    def test_no_transitions(self):
        report = validate_petri_net(PetriNet("N", ("p",), ()))
        assert [v.message for v in report] == ["transition set empty"]

    def test_place_to_place_arc(self):
        report = validate_petri_net(PetriNet("N", ("p", "q"), ("t",), (Arc("p", "q"),)))
        assert [v.message for v in report] == ["invalid flow endpoint"]

    def test_transition_to_transition_arc(self):
        report = validate_petri_net(PetriNet("N", ("p",), ("t", "u"), (Arc("t", "u"),)))
        assert [v.message for v in report] == ["invalid flow endpoint"]

    def test_shared_names_weights_and_marking(self):
        pn = PetriNet("N", ("x",), ("x",), (Arc("x", "x", 0),), {"y": 1, "x": -1})
        messages = {v.message for v in validate_petri_net(pn)}
        assert "name used as both place and transition" in messages
        assert "weight 0 must be a positive integer" in messages
        assert "marked place does not exist" in messages
        assert "token count -1 must be a non-negative integer" in messages


class TestFirePn:
    def test_acquire_r1_from_initial(self, n1):
        new = fire_pn_transition(n1, n1.initial_marking(), "acquire r1")
        assert new == {"start": 2, "r1": 1, "done1": 0, "r2": 0, "done2": 0, "end": 0}

    def test_insufficient_tokens(self):
        pn = PetriNet("N", ("p", "q"), ("t",), (Arc("p", "t", 2), Arc("t", "q")))
        assert fire_pn_transition(pn, {"p": 1, "q": 0}, "t") is None

    def test_source_transition_always_enabled(self):
        pn = PetriNet("N", ("p",), ("t",), (Arc("t", "p", 3),))
        assert fire_pn_transition(pn, {"p": 0}, "t") == {"p": 3}

    def test_unknown_transition(self, n1):
        with pytest.raises(KeyError):
            fire_pn_transition(n1, n1.initial_marking(), "nope")

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_token_conservation(self, seed):
        rng = random.Random(seed)
        pn = random_net(rng)
        marking = {p: rng.randint(0, 4) for p in pn.places}
        for t in pn.transitions:
            new = fire_pn_transition(pn, marking, t)
            if new is None:
                continue
            for p in pn.places:
                w_in = sum(a.weight for a in pn.arcs if a.source == p and a.target == t)
                w_out = sum(a.weight for a in pn.arcs if a.source == t and a.target == p)
                assert new[p] == marking[p] - w_in + w_out


class TestStepFsm:
    def test_acquire(self, sm1):
        assert step_fsm(sm1, "available", "acquire") == {"taken"}

    def test_no_such_transition(self, sm1):
        assert step_fsm(sm1, "taken", "acquire") == frozenset()

    def test_nondeterminism(self):
        sm = StateMachine("M", ("a", "b", "c"), "a", (), (SmTransition("1", "a", "x", "b"),
                                                          SmTransition("2", "a", "x", "c")))
        assert step_fsm(sm, "a", "x") == {"b", "c"}

    def test_unknown_state(self, sm1):
        with pytest.raises(KeyError):
            step_fsm(sm1, "gone", "acquire")

    def test_successors_within_states(self, sm3):
        for s in sm3.states:
            for label in sm3.alphabet:
                assert step_fsm(sm3, s, label) <= set(sm3.states)
