"""Model-level interactions: pairs of transitions that fire as a handshake."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .models import Model, PetriNet, StateMachine, Violation


@dataclass(frozen=True, order=True)
class TransitionRef:
    model: str
    transition: str

    def __str__(self) -> str:
        return f"{self.model}.{self.transition}"


@dataclass(frozen=True)
class SynchronizationSet:
    name: str
    pairs: tuple[tuple[TransitionRef, TransitionRef], ...]


def resolves(models: Mapping[str, Model], ref: TransitionRef) -> bool:
    model = models.get(ref.model)
    if isinstance(model, StateMachine):
        return any(t.id == ref.transition for t in model.transitions)
    if isinstance(model, PetriNet):
        return ref.transition in model.transitions
    return False


def validate_synchronizations(models: Mapping[str, Model],
                              sets: Iterable[SynchronizationSet]) -> list[Violation]:
    out: list[Violation] = []
    seen_names: set[str] = set()
    seen_pairs: set[frozenset[TransitionRef]] = set()
    for sset in sets:
        where = f"synchronization {sset.name!r}"
        if sset.name in seen_names:
            out.append(Violation(where, "duplicate synchronization set name"))
        seen_names.add(sset.name)
        for pair in sset.pairs:
            if len(pair) != 2:
                out.append(Violation(where, f"pair of arity {len(pair)}; only two-party handshakes are supported"))
                continue
            a, b = pair
            pw = f"{where} pair ({a}, {b})"
            for ref in (a, b):
                if not resolves(models, ref):
                    out.append(Violation(pw, f"unknown transition {ref}"))
            if a.model == b.model:
                out.append(Violation(pw, "intra-model pair"))
            key = frozenset((a, b))
            if key in seen_pairs:
                out.append(Violation(pw, "pair declared more than once"))
            seen_pairs.add(key)
    return out


def synchronized_transitions(sets: Iterable[SynchronizationSet]) -> frozenset[TransitionRef]:
    return frozenset(ref for s in sets for pair in s.pairs for ref in pair)


def pairs_by_label(models: Mapping[str, Model], model_a: str, label_a: str,
                   model_b: str, label_b: str) -> list[tuple[TransitionRef, TransitionRef]]:
    """Every transition of ``model_a`` labelled ``label_a`` paired with every
    transition of ``model_b`` labelled ``label_b``.

    State-machine transitions match on their label, Petri-net transitions on
    their name.
    """
    def refs(name: str, label: str) -> list[TransitionRef]:
        model = models.get(name)
        if isinstance(model, StateMachine):
            return [TransitionRef(name, t.id) for t in model.transitions if t.label == label]
        if isinstance(model, PetriNet):
            return [TransitionRef(name, t) for t in model.transitions if t == label]
        return []

    return [(a, b) for a in refs(model_a, label_a) for b in refs(model_b, label_b)]
