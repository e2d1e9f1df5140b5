"""Typed AST: the analyzer's output. Every expression node carries a SemType."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from ..diagnostics import NOWHERE, SourceLocation
from ..syntax import BinOp, CanPrefix, CmpOp, Mult, TypeNode, UnOp
from .types import Prim, SemType, show


def _loc() -> SourceLocation:
    return field(default=NOWHERE, compare=False, repr=False)


class VarKind(Enum):
    STATE = "state"
    PARAM = "param"
    TEMP = "temp"
    BOUND = "bound"
    SINGLETON = "singleton"


class ActionKind(Enum):
    MUTATOR = "mutator"
    QUERY = "query"


@dataclass
class TEmpty:
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TIntLit:
    value: int
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TStrLit:
    value: str
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TVar:
    name: str
    kind: VarKind
    type: SemType
    owner: str = ""  # concept that declares a state variable
    loc: SourceLocation = _loc()


@dataclass
class TJoin:
    left: TExpr
    right: TExpr
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TUnop:
    op: UnOp
    operand: TExpr
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TBinop:
    op: BinOp
    left: TExpr
    right: TExpr
    type: SemType
    arith: bool = False
    loc: SourceLocation = _loc()


@dataclass
class TCompare:
    op: CmpOp
    negated: bool
    left: TExpr
    right: TExpr
    type: SemType
    # 1-based columns of a relation on the right that an `in` tests against
    member_columns: Optional[tuple[int, ...]] = None
    loc: SourceLocation = _loc()


@dataclass
class TBox:
    target: TExpr
    args: tuple[TExpr, ...]
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TComprehension:
    decls: tuple[tuple[str, Prim], ...]
    body: TExpr
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TCall:
    action: str
    kind: ActionKind
    args: tuple[TExpr, ...]
    can: CanPrefix
    type: SemType
    concept: str = ""
    loc: SourceLocation = _loc()


TExpr = Union[TEmpty, TIntLit, TStrLit, TVar, TJoin, TUnop, TBinop, TCompare, TBox, TComprehension, TCall]


@dataclass
class TTarget:
    field: str
    prefix: Optional[TExpr]
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TStmt:
    targets: tuple[TTarget, ...]
    op: Optional[BinOp]
    rhs: TExpr
    loc: SourceLocation = _loc()


@dataclass
class TParam:
    name: str
    decl: TypeNode
    type: SemType
    loc: SourceLocation = _loc()


@dataclass
class TState:
    name: str
    decl: TypeNode
    type: SemType
    is_const: bool
    init: Optional[TExpr]
    loc: SourceLocation = _loc()

    @property
    def mutable(self) -> bool:
        """Mutable fields get init facts and frame conditions."""
        return not self.is_const and self.init is None


@dataclass
class TMutator:
    name: str
    params: tuple[TParam, ...]
    firing_cond: Optional[TExpr]
    body: tuple[TStmt, ...]
    loc: SourceLocation = _loc()


@dataclass
class TQuery:
    name: str
    params: tuple[TParam, ...]
    return_decl: TypeNode
    return_type: SemType
    body: TExpr
    loc: SourceLocation = _loc()


TAction = Union[TMutator, TQuery]


@dataclass
class TPrinciple:
    expr: TExpr
    temps: tuple[tuple[str, SemType], ...]
    loc: SourceLocation = _loc()


@dataclass
class TConcept:
    name: str
    type_params: tuple[str, ...]
    purpose: str
    custom_types: tuple[str, ...]
    states: tuple[TState, ...]
    actions: tuple[TAction, ...]
    principles: tuple[TPrinciple, ...]
    source_file: str = field(default="", compare=False)
    included: bool = field(default=False, compare=False)
    loc: SourceLocation = _loc()

    def state(self, name: str) -> Optional[TState]:
        return next((s for s in self.states if s.name == name), None)


@dataclass
class TDep:
    alias: str
    concept: str
    type_args: tuple[Prim, ...]
    loc: SourceLocation = _loc()


@dataclass
class TSyncCall:
    concept: str
    action: str
    args: tuple[TExpr, ...]
    mults: tuple[Optional[Mult], ...]
    loc: SourceLocation = _loc()


@dataclass
class TSync:
    trigger: TSyncCall
    responses: tuple[TSyncCall, ...]
    temps: tuple[tuple[str, SemType], ...]
    singletons: tuple[tuple[str, Prim], ...]
    loc: SourceLocation = _loc()


@dataclass
class TApp:
    name: str
    deps: tuple[TDep, ...]
    syncs: tuple[TSync, ...]
    source_file: str = field(default="", compare=False)
    loc: SourceLocation = _loc()


@dataclass
class TypedModel:
    concepts: list[TConcept] = field(default_factory=list)
    apps: list[TApp] = field(default_factory=list)

    def concept(self, name: str) -> Optional[TConcept]:
        return next((c for c in self.concepts if c.name == name), None)


# dump


def _at(loc: SourceLocation) -> str:
    return f"@{loc.start_line}:{loc.start_col}"


def _expr_lines(e: TExpr, indent: int, out: list[str], q: bool) -> None:
    pad = "  " * indent
    ty = show(e.type, q)
    kids: list[TExpr] = []
    if isinstance(e, TEmpty):
        head = "Empty"
    elif isinstance(e, TIntLit):
        head = f"IntLit {e.value}"
    elif isinstance(e, TStrLit):
        head = f"StrLit {e.value!r}"
    elif isinstance(e, TVar):
        head = f"Var {e.name} ({e.kind.value}{' of ' + e.owner if e.owner else ''})"
    elif isinstance(e, TJoin):
        head, kids = "Join", [e.left, e.right]
    elif isinstance(e, TUnop):
        head, kids = f"Unop {e.op.value}", [e.operand]
    elif isinstance(e, TBinop):
        head, kids = f"Binop {e.op.value}{' arith' if e.arith else ''}", [e.left, e.right]
    elif isinstance(e, TCompare):
        neg = "!" if e.negated else ""
        cols = f" columns={list(e.member_columns)}" if e.member_columns else ""
        head, kids = f"Compare {neg}{e.op.value}{cols}", [e.left, e.right]
    elif isinstance(e, TBox):
        head, kids = "BoxJoin", [e.target, *e.args]
    elif isinstance(e, TComprehension):
        decls = ", ".join(f"{n} : {p.qualified() if q else p}" for n, p in e.decls)
        head, kids = f"Comprehension {decls}", [e.body]
    elif isinstance(e, TCall):
        can = "" if e.can is CanPrefix.NONE else e.can.value + " "
        owner = f"{e.concept}." if e.concept else ""
        head, kids = f"Call {can}{owner}{e.action} ({e.kind.value})", list(e.args)
    else:
        raise TypeError(e)
    out.append(f"{pad}{head}{_at(e.loc)} : {ty}")
    for k in kids:
        _expr_lines(k, indent + 1, out, q)


def dump_typed_concept(c: TConcept) -> list[str]:
    out = [f"Concept {c.name}{_at(c.loc)}" + (f" [{', '.join(c.type_params)}]" if c.type_params else "")]
    if c.custom_types:
        out.append(f"  Types {', '.join(c.custom_types)}")
    for s in c.states:
        flag = "const " if s.is_const else ""
        out.append(f"  State {flag}{s.name}{_at(s.loc)} : {s.type}")
        if s.init is not None:
            _expr_lines(s.init, 2, out, False)
    for a in c.actions:
        params = ", ".join(f"{p.name} : {p.type}" for p in a.params)
        if isinstance(a, TQuery):
            out.append(f"  Query {a.name}({params}){_at(a.loc)} : {a.return_type}")
            _expr_lines(a.body, 2, out, False)
            continue
        out.append(f"  Mutator {a.name}({params}){_at(a.loc)}")
        if a.firing_cond is not None:
            out.append("    When")
            _expr_lines(a.firing_cond, 3, out, False)
        for s in a.body:
            op = ":=" if s.op is None else f"{s.op.value}="
            out.append(f"    Stmt {op}{_at(s.loc)}")
            for t in s.targets:
                out.append(f"      Target {t.field}{_at(t.loc)} : {t.type}")
                if t.prefix is not None:
                    _expr_lines(t.prefix, 4, out, False)
            _expr_lines(s.rhs, 3, out, False)
    for i, p in enumerate(c.principles, 1):
        temps = ", ".join(f"{n} : {t}" for n, t in p.temps)
        out.append(f"  Principle {i}{_at(p.loc)} temps=[{temps}]")
        _expr_lines(p.expr, 2, out, False)
    return out


def dump_typed_app(a: TApp) -> list[str]:
    out = [f"App {a.name}{_at(a.loc)}"]
    for d in a.deps:
        args = ", ".join(p.qualified() for p in d.type_args)
        out.append(f"  Dep {d.alias}{_at(d.loc)}" + (f" [{args}]" if d.type_args else ""))
    for s in a.syncs:
        temps = ", ".join(f"{n} : {show(t, True)}" for n, t in s.temps)
        out.append(f"  Sync{_at(s.loc)} temps=[{temps}]")
        for role, call in [("Trigger", s.trigger)] + [("Response", r) for r in s.responses]:
            out.append(f"    {role} {call.concept}.{call.action}{_at(call.loc)}")
            for m, arg in zip(call.mults, call.args):
                if m is not None:
                    out.append(f"      Mult {m.value}")
                _expr_lines(arg, 3 if m is None else 4, out, True)
    return out


def dump_typed(model: TypedModel) -> str:
    lines: list[str] = ["TypedModel"]
    for c in model.concepts:
        lines += ["  " + x for x in dump_typed_concept(c)]
    for a in model.apps:
        lines += ["  " + x for x in dump_typed_app(a)]
    return "\n".join(lines)
