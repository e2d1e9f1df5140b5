"""A small Alloy 6 syntax tree and its deterministic serializer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

# Binding strength, low to high. An operand is parenthesized when its level
# is below what the surrounding position requires.
QUANT = 0
OR = 1
IMPLIES = 3
AND = 4
TEMPORAL_BIN = 5
PREFIX = 6
COMPARE = 7
MULT = 8
UNION = 10
CARD = 11
OVERRIDE = 12
INTERSECT = 13
ARROW = 14
RESTRICT = 15
BOX = 16
DOT = 17
UNARY = 18
ATOM = 19

BINARY_LEVEL = {
    "+": UNION, "-": UNION, "++": OVERRIDE, "&": INTERSECT, "->": ARROW,
    "<:": RESTRICT, ":>": RESTRICT, ".": DOT,
}


@dataclass(frozen=True)
class AName:
    text: str


@dataclass(frozen=True)
class AStateField:
    field: str
    module: str = ""
    primed: bool = False
    paren: bool = True


@dataclass(frozen=True)
class AInt:
    value: int


@dataclass(frozen=True)
class ANone:
    arity: int = 1


@dataclass(frozen=True)
class AUnary:
    op: str  # ~ ^ * #
    operand: AExpr


@dataclass(frozen=True)
class ABinary:
    op: str
    left: AExpr
    right: AExpr


@dataclass(frozen=True)
class ABox:
    target: AExpr
    args: tuple[AExpr, ...]


@dataclass(frozen=True)
class AApp:
    """Predicate or function application `f[a, b]`; nullary prints `f[]`."""

    fn: str
    args: tuple[AExpr, ...] = ()


@dataclass(frozen=True)
class ACompr:
    decls: tuple[tuple[str, str], ...]
    body: AExpr


@dataclass(frozen=True)
class ACompare:
    op: str  # = != in !in < > =< >=
    left: AExpr
    right: AExpr


@dataclass(frozen=True)
class AMult:
    op: str  # no some lone one
    operand: AExpr


@dataclass(frozen=True)
class ANot:
    operand: AExpr


@dataclass(frozen=True)
class AAnd:
    items: tuple[AExpr, ...]


@dataclass(frozen=True)
class AOr:
    items: tuple[AExpr, ...]


@dataclass(frozen=True)
class AImplies:
    left: AExpr
    right: AExpr


@dataclass(frozen=True)
class ATemporal:
    op: str  # always after historically eventually
    operand: AExpr


@dataclass(frozen=True)
class ATemporalBin:
    op: str  # until releases
    left: AExpr
    right: AExpr


@dataclass(frozen=True)
class AQuant:
    quant: str  # all some no
    decls: tuple[tuple[str, str], ...]
    body: AExpr


AExpr = Union[
    AName, AStateField, AInt, ANone, AUnary, ABinary, ABox, AApp, ACompr, ACompare, AMult,
    ANot, AAnd, AOr, AImplies, ATemporal, ATemporalBin, AQuant,
]


def conj(items) -> AExpr:
    items = tuple(items)
    return items[0] if len(items) == 1 else AAnd(items)


def disj(items) -> AExpr:
    items = tuple(items)
    return items[0] if len(items) == 1 else AOr(items)


def level(e: AExpr) -> int:
    if isinstance(e, AQuant):
        return QUANT
    if isinstance(e, AOr):
        return OR if e.items else ATOM
    if isinstance(e, AImplies):
        return IMPLIES
    if isinstance(e, AAnd):
        return AND if len(e.items) > 1 else ATOM
    if isinstance(e, ATemporalBin):
        return TEMPORAL_BIN
    if isinstance(e, (ANot, ATemporal)):
        return PREFIX
    if isinstance(e, ACompare):
        return COMPARE
    if isinstance(e, AMult):
        return MULT
    if isinstance(e, ABinary):
        return BINARY_LEVEL[e.op]
    if isinstance(e, AUnary):
        return CARD if e.op == "#" else UNARY
    if isinstance(e, (ABox, AApp)):
        return BOX
    if isinstance(e, ANone):
        return ATOM if e.arity == 1 else ARROW
    if isinstance(e, AStateField):
        return ATOM if e.paren else DOT
    if isinstance(e, AInt):
        return ATOM if e.value >= 0 else UNARY
    return ATOM


def decls_text(decls: tuple[tuple[str, str], ...]) -> str:
    return ", ".join(f"{n} : {t}" for n, t in decls)


def fmt(e: AExpr, min_level: int = QUANT) -> str:
    text = _fmt(e)
    return f"({text})" if level(e) < min_level else text


def _fmt(e: AExpr) -> str:
    if isinstance(e, AName):
        return e.text
    if isinstance(e, AStateField):
        mod = f"{e.module}/" if e.module else ""
        text = f"{mod}State.{e.field}" + ("'" if e.primed else "")
        return f"({text})" if e.paren else text
    if isinstance(e, AInt):
        return str(e.value)
    if isinstance(e, ANone):
        return " -> ".join(["none"] * e.arity)
    if isinstance(e, AUnary):
        lvl = CARD + 1 if e.op == "#" else UNARY
        return e.op + fmt(e.operand, lvl)
    if isinstance(e, ABinary):
        lvl = BINARY_LEVEL[e.op]
        sep = e.op if e.op == "." else f" {e.op} "
        return fmt(e.left, lvl) + sep + fmt(e.right, lvl + 1)
    if isinstance(e, ABox):
        return fmt(e.target, BOX) + "[" + ", ".join(fmt(a) for a in e.args) + "]"
    if isinstance(e, AApp):
        return e.fn + "[" + ", ".join(fmt(a) for a in e.args) + "]"
    if isinstance(e, ACompr):
        return "{" + decls_text(e.decls) + " | " + fmt(e.body) + "}"
    if isinstance(e, ACompare):
        return f"{fmt(e.left, UNION)} {e.op} {fmt(e.right, UNION)}"
    if isinstance(e, AMult):
        return f"{e.op} {fmt(e.operand, UNION)}"
    if isinstance(e, ANot):
        return "not " + fmt(e.operand, PREFIX)
    if isinstance(e, ATemporal):
        if e.op == "always":
            return f"always ({fmt(e.operand)})"
        return f"{e.op} " + fmt(e.operand, PREFIX)
    if isinstance(e, ATemporalBin):
        # nested temporal or prefix operands are always bracketed
        return f"{fmt(e.left, COMPARE)} {e.op} {fmt(e.right, COMPARE)}"
    if isinstance(e, AAnd):
        if not e.items:
            raise ValueError("empty conjunction has no Alloy spelling")
        return " and ".join(fmt(x, AND + 1) for x in e.items)
    if isinstance(e, AOr):
        return " or ".join(fmt(x, OR + 1) for x in e.items)
    if isinstance(e, AImplies):
        return f"{fmt(e.left, IMPLIES + 1)} implies {fmt(e.right, IMPLIES)}"
    if isinstance(e, AQuant):
        return f"{e.quant} {decls_text(e.decls)} | {fmt(e.body)}"
    raise TypeError(f"not an Alloy expression: {e!r}")


def walk(e: AExpr):
    """Pre-order traversal."""
    yield e
    for v in vars(e).values():
        if isinstance(v, tuple):
            for x in v:
                if not isinstance(x, (str, tuple)):
                    yield from walk(x)
        elif not isinstance(v, (str, int, bool)) and v is not None:
            yield from walk(v)


# document


@dataclass
class FieldDecl:
    name: str
    type: str
    var: bool = True


@dataclass
class SigDecl:
    name: str
    mult: Optional[str] = None
    abstract: bool = False
    fields: list[FieldDecl] = field(default_factory=list)
    extends: Optional[str] = None


@dataclass
class Open:
    module: str
    args: tuple[str, ...] = ()
    alias: Optional[str] = None


@dataclass
class Fact:
    name: str
    body: list[AExpr]


@dataclass
class Pred:
    name: str
    params: tuple[tuple[str, str], ...]
    body: list[AExpr]


@dataclass
class Fun:
    name: str
    params: tuple[tuple[str, str], ...]
    result: str
    body: AExpr


@dataclass
class Assert:
    name: str
    body: AExpr


@dataclass
class Command:
    kind: str  # check | run
    target: str
    scope: str


@dataclass
class AlloyDocument:
    module: str
    params: tuple[str, ...] = ()
    comments: list[str] = field(default_factory=list)
    opens: list[Open] = field(default_factory=list)
    sigs: list[SigDecl] = field(default_factory=list)
    facts: list[Fact] = field(default_factory=list)
    preds: list[Pred] = field(default_factory=list)
    funs: list[Fun] = field(default_factory=list)
    asserts: list[Assert] = field(default_factory=list)
    commands: list[Command] = field(default_factory=list)

    def formulas(self):
        """Every formula and expression in the document."""
        for f in self.facts:
            yield from f.body
        for p in self.preds:
            yield from p.body
        for fn in self.funs:
            yield fn.body
        for a in self.asserts:
            yield a.body


INDENT = "  "


def _block(header: str, lines: list[str]) -> str:
    if not lines:
        return header + " {}"
    return header + " {\n" + "\n".join(INDENT + ln for ln in lines) + "\n}"


def _params(params: tuple[tuple[str, str], ...]) -> str:
    return "[" + decls_text(params) + "]" if params else ""


def serialize_sig(s: SigDecl) -> str:
    head = " ".join(x for x in ("abstract" if s.abstract else "", s.mult or "", "sig", s.name) if x)
    if s.extends:
        head += f" extends {s.extends}"
    if not s.fields:
        return head + " {}"
    rows = [("var " if f.var else "") + f"{f.name} : {f.type}" for f in s.fields]
    return head + " {\n" + ",\n".join(INDENT + r for r in rows) + "\n}"


def serialize(doc: AlloyDocument) -> str:
    blocks: list[str] = []
    header = [f"// {c}" if c else "//" for c in doc.comments]
    params = f"[{', '.join(doc.params)}]" if doc.params else ""
    header.append(f"module {doc.module}{params}")
    blocks.append("\n".join(header))
    if doc.opens:
        lines = []
        for o in doc.opens:
            args = f"[{', '.join(o.args)}]" if o.args else ""
            alias = f" as {o.alias}" if o.alias else ""
            lines.append(f"open {o.module}{args}{alias}")
        blocks.append("\n".join(lines))
    # field-less sigs are grouped, one per line
    simple = [serialize_sig(s) for s in doc.sigs if not s.fields]
    if simple:
        blocks.append("\n".join(simple))
    blocks += [serialize_sig(s) for s in doc.sigs if s.fields]
    blocks += [_block(f"fact {f.name}", [fmt(x) for x in f.body]) for f in doc.facts]
    blocks += [_block(f"pred {p.name}{_params(p.params)}", [fmt(x) for x in p.body]) for p in doc.preds]
    blocks += [_block(f"fun {f.name}{_params(f.params)} : {f.result}", [fmt(f.body)]) for f in doc.funs]
    pending = list(doc.commands)
    for a in doc.asserts:
        text = _block(f"assert {a.name}", [fmt(a.body)])
        mine = [c for c in pending if c.target == a.name]
        pending = [c for c in pending if c.target != a.name]
        blocks.append("\n".join([text] + [f"{c.kind} {c.target} {c.scope}" for c in mine]))
    if pending:
        blocks.append("\n".join(f"{c.kind} {c.target} {c.scope}" for c in pending))
    return "\n\n".join(blocks) + "\n"
