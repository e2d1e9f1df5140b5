"""Semantic types. Multiplicity is not part of a SemType: scalars and sets of the
same prim are interchangeable, so compatibility only compares arity and columns."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Prim:
    kind: str  # "int" | "string" | "named"
    name: str = ""
    owner: str = ""
    is_param: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return self.name if self.kind == "named" else self.kind

    def qualified(self) -> str:
        if self.kind == "named" and self.owner:
            return f"{self.owner}.{self.name}"
        return str(self)


INT_PRIM = Prim("int")
STRING_PRIM = Prim("string")


@dataclass(frozen=True)
class Scalar:
    prim: Prim

    def __str__(self) -> str:
        return str(self.prim)


@dataclass(frozen=True)
class SetOf:
    prim: Prim

    def __str__(self) -> str:
        return f"set {self.prim}"


@dataclass(frozen=True)
class Relation:
    columns: tuple[Prim, ...]

    def __post_init__(self) -> None:
        if len(self.columns) < 2:
            raise ValueError("a relation has at least two columns")

    def __str__(self) -> str:
        return " -> ".join(str(c) for c in self.columns)


@dataclass(frozen=True)
class Boolean:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntResult:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class EmptyType:
    """Type of `{}` before it is coerced to a concrete set or relation."""

    def __str__(self) -> str:
        return "empty"


@dataclass(frozen=True)
class ErrorType:
    def __str__(self) -> str:
        return "error"


SemType = Union[Scalar, SetOf, Relation, Boolean, IntResult, EmptyType, ErrorType]

BOOL = Boolean()
INT_RESULT = IntResult()
EMPTY = EmptyType()
ERROR = ErrorType()


def columns(t: SemType) -> Optional[tuple[Prim, ...]]:
    """Column prims of a relational type; None for non-relational types."""
    if isinstance(t, (Scalar, SetOf)):
        return (t.prim,)
    if isinstance(t, Relation):
        return t.columns
    if isinstance(t, IntResult):
        return (INT_PRIM,)
    return None


def from_columns(cols: tuple[Prim, ...], single: bool = False) -> SemType:
    if len(cols) == 1:
        return Scalar(cols[0]) if single else SetOf(cols[0])
    return Relation(cols)


def is_relational(t: SemType) -> bool:
    return columns(t) is not None or isinstance(t, EmptyType)


def is_intish(t: SemType) -> bool:
    return isinstance(t, IntResult) or (isinstance(t, (Scalar, SetOf)) and t.prim == INT_PRIM)


def is_error(t: SemType) -> bool:
    return isinstance(t, ErrorType)


def compatible(expected: SemType, actual: SemType) -> bool:
    """Does `actual` fit where `expected` is required? ErrorType fits everywhere."""
    if is_error(expected) or is_error(actual):
        return True
    if isinstance(expected, Boolean) or isinstance(actual, Boolean):
        return isinstance(expected, Boolean) and isinstance(actual, Boolean)
    if isinstance(actual, EmptyType):
        return is_relational(expected)
    if isinstance(expected, EmptyType):
        return is_relational(actual)
    if is_intish(expected) and is_intish(actual):
        return True
    return columns(expected) == columns(actual)


def substitute(t: SemType, mapping: dict[Prim, Prim]) -> SemType:
    """Instantiate type parameters."""
    if isinstance(t, Scalar):
        return Scalar(mapping.get(t.prim, t.prim))
    if isinstance(t, SetOf):
        return SetOf(mapping.get(t.prim, t.prim))
    if isinstance(t, Relation):
        return Relation(tuple(mapping.get(c, c) for c in t.columns))
    return t


def show(t: SemType, qualify: bool = False) -> str:
    if not qualify:
        return str(t)
    if isinstance(t, Scalar):
        return t.prim.qualified()
    if isinstance(t, SetOf):
        return f"set {t.prim.qualified()}"
    if isinstance(t, Relation):
        return " -> ".join(c.qualified() for c in t.columns)
    return str(t)


# First-order guard over a small type-term language. Declared types are
# first-order by construction; terms let bound variables and generated
# shapes go through the same check.


@dataclass(frozen=True)
class SetTerm:
    elem: TypeTerm


@dataclass(frozen=True)
class ProductTerm:
    left: TypeTerm
    right: TypeTerm


TypeTerm = Union[Prim, SetTerm, ProductTerm]


class NotFirstOrderError(Exception):
    pass


def _product_columns(term: TypeTerm) -> tuple[Prim, ...]:
    if isinstance(term, Prim):
        return (term,)
    if isinstance(term, ProductTerm):
        return _product_columns(term.left) + _product_columns(term.right)
    raise NotFirstOrderError("relation over sets")


def build_type(term: TypeTerm) -> SemType:
    """SemType for a term; raises NotFirstOrderError for set-of-set or relation-over-set."""
    if isinstance(term, Prim):
        return Scalar(term)
    if isinstance(term, SetTerm):
        if isinstance(term.elem, Prim):
            return SetOf(term.elem)
        inner = "sets" if isinstance(term.elem, SetTerm) else "relations"
        raise NotFirstOrderError(f"set of {inner}")
    return Relation(_product_columns(term))
