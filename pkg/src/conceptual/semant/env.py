"""Environments, bindings and per-concept summaries."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..diagnostics import DiagnosticSink
from .typed import ActionKind, VarKind
from .types import Prim, SemType, substitute


@dataclass(frozen=True)
class Binding:
    kind: VarKind
    type: SemType
    owner: str = ""
    const: bool = False
    derived: bool = False


@dataclass(frozen=True)
class ActionSig:
    name: str
    kind: ActionKind
    params: tuple[tuple[str, SemType], ...]
    return_type: Optional[SemType] = None


Value = Union[Binding, ActionSig]


@dataclass(frozen=True)
class ConceptSummary:
    name: str
    type_params: tuple[Prim, ...]
    custom_types: tuple[Prim, ...]
    states: dict[str, Binding]
    actions: dict[str, ActionSig]

    def instantiate(self, mapping: dict[Prim, Prim], alias: Optional[str] = None) -> ConceptSummary:
        owner = alias or self.name
        states = {n: replace(b, type=substitute(b.type, mapping), owner=owner) for n, b in self.states.items()}
        actions = {
            n: replace(
                a,
                params=tuple((p, substitute(t, mapping)) for p, t in a.params),
                return_type=None if a.return_type is None else substitute(a.return_type, mapping),
            )
            for n, a in self.actions.items()
        }
        params = tuple(mapping.get(p, p) for p in self.type_params)
        return replace(self, type_params=params, states=states, actions=actions)


@dataclass
class Environment:
    """One lexical scope. `child()` copies the local tables; the sink and the
    concept/app tables are shared, so diagnostics survive scope exit."""

    sink: DiagnosticSink
    concepts: dict[str, ConceptSummary]
    apps: dict[str, str]
    types: dict[str, Prim] = field(default_factory=dict)
    values: dict[str, Value] = field(default_factory=dict)
    temps: dict[str, Binding] = field(default_factory=dict)
    in_principle: bool = False
    in_sync: bool = False
    current_concept: Optional[str] = None
    # app scope only: alias -> instantiated summary of each dependency
    deps: dict[str, ConceptSummary] = field(default_factory=dict)

    def child(self, **changes: object) -> Environment:
        env = replace(self, types=dict(self.types), values=dict(self.values))
        for k, v in changes.items():
            setattr(env, k, v)
        return env

    @property
    def in_context(self) -> bool:
        return self.in_principle or self.in_sync
