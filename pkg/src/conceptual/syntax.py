"""Location-annotated AST. Locations never take part in equality."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .diagnostics import NOWHERE, SourceLocation


def _loc() -> SourceLocation:
    return field(default=NOWHERE, compare=False, repr=False)


class Mult(Enum):
    SET = "set"
    ONE = "one"
    LONE = "lone"


class PrimKind(Enum):
    STRING = "string"
    INT = "int"
    NAMED = "named"


@dataclass(frozen=True)
class PrimType:
    kind: PrimKind
    name: str = ""
    loc: SourceLocation = _loc()

    @classmethod
    def named(cls, name: str, loc: SourceLocation = NOWHERE) -> PrimType:
        return cls(PrimKind.NAMED, name, loc)

    def __str__(self) -> str:
        return self.name if self.kind is PrimKind.NAMED else self.kind.value


STRING = PrimType(PrimKind.STRING)
INT = PrimType(PrimKind.INT)


@dataclass(frozen=True)
class ScalarType:
    mult: Optional[Mult]
    prim: PrimType
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class RelationType:
    """`A -> B -> [mult] C`; only the final column may carry a multiplicity."""

    columns: tuple[PrimType, ...]
    target_mult: Optional[Mult] = None
    loc: SourceLocation = _loc()


TypeNode = Union[ScalarType, RelationType]


@dataclass(frozen=True)
class Decl:
    names: tuple[str, ...]
    type: TypeNode
    loc: SourceLocation = _loc()


# Expressions


class UnOp(Enum):
    TRANSPOSE = "~"
    CLOSURE = "^"
    REFLEXIVE_CLOSURE = "*^"
    CARD = "#"
    NO = "no"
    NOT = "!"


class BinOp(Enum):
    PLUS = "+"
    MINUS = "-"
    AMP = "&"
    DOT = "."
    ARROW = "->"
    STAR = "*"
    SLASH = "/"
    PERCENT = "%"
    LAND = "&&"
    LOR = "||"
    THEN = "then"
    UNTIL = "until"


class CmpOp(Enum):
    EQ = "="
    IN = "in"
    LT = "<"
    GT = ">"
    LTE = "<="
    GTE = ">="


class CanPrefix(Enum):
    NONE = "none"
    CAN = "can"
    CAN_NOT = "can not"


@dataclass(frozen=True)
class EmptySet:
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class StrLit:
    value: str
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Lval:
    path: tuple[str, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Unop:
    op: UnOp
    operand: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Binop:
    op: BinOp
    left: Expr
    right: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Compare:
    op: CmpOp
    negated: bool
    left: Expr
    right: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class BoxJoin:
    target: Expr
    args: tuple[Expr, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class SetComprehension:
    decls: tuple[Decl, ...]
    body: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Call:
    action: str
    args: tuple[Expr, ...]
    can: CanPrefix = CanPrefix.NONE
    loc: SourceLocation = _loc()


Expr = Union[EmptySet, IntLit, StrLit, Lval, Unop, Binop, Compare, BoxJoin, SetComprehension, Call]


# Declarations


@dataclass(frozen=True)
class StateDecl:
    names: tuple[str, ...]
    declared_type: TypeNode
    is_const: bool = False
    init: Optional[Expr] = None
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Stmt:
    """`lhs := rhs` when op is None, otherwise `lhs op= rhs`."""

    lhs: tuple[Lval, ...]
    op: Optional[BinOp]
    rhs: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Mutator:
    name: str
    params: tuple[Decl, ...]
    firing_cond: Optional[Expr]
    body: tuple[Stmt, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Query:
    name: str
    params: tuple[Decl, ...]
    return_type: TypeNode
    body: Expr
    loc: SourceLocation = _loc()


Action = Union[Mutator, Query]


@dataclass(frozen=True)
class Concept:
    name: str
    type_params: tuple[str, ...]
    purpose: str
    states: tuple[StateDecl, ...]
    actions: tuple[Action, ...]
    principles: tuple[Expr, ...]
    loc: SourceLocation = _loc()


# Apps


@dataclass(frozen=True)
class FilePath:
    """`../lib/label.con` is dirs=('..', 'lib'), name='label', ext='con'."""

    dirs: tuple[str, ...]
    name: str
    ext: Optional[str] = None
    loc: SourceLocation = _loc()

    def __str__(self) -> str:
        base = self.name if self.ext is None else f"{self.name}.{self.ext}"
        return "/".join(self.dirs + (base,))


@dataclass(frozen=True)
class QualifiedPrim:
    namespace: Optional[str]
    prim: PrimType
    loc: SourceLocation = _loc()

    def __str__(self) -> str:
        return f"{self.namespace}.{self.prim}" if self.namespace else str(self.prim)


@dataclass(frozen=True)
class Dependency:
    path: FilePath
    type_args: tuple[QualifiedPrim, ...] = ()
    brackets_present: bool = False
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class SyncArg:
    mult: Optional[Mult]
    expr: Expr
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class SyncCall:
    concept: str
    action: str
    args: tuple[SyncArg, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Sync:
    trigger: SyncCall
    responses: tuple[SyncCall, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class App:
    name: str
    deps: tuple[Dependency, ...]
    syncs: tuple[Sync, ...]
    loc: SourceLocation = _loc()


@dataclass(frozen=True)
class Model:
    concepts: tuple[Concept, ...] = ()
    apps: tuple[App, ...] = ()
    loc: SourceLocation = _loc()
