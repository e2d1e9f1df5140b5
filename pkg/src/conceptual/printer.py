"""Canonical source printer, a fully parenthesized variant, and the AST dump."""

from __future__ import annotations

import dataclasses
from enum import Enum
from typing import Any

from .parser import COMPARE_LEVEL, BOX_LEVEL, INFIX, PREFIX_LEVEL, RIGHT_ASSOC
from .syntax import (
    App, BinOp, Binop, BoxJoin, Call, CanPrefix, Compare, Concept, Decl, Dependency,
    EmptySet, Expr, IntLit, Lval, Model, PrimType, Query, ScalarType,
    SetComprehension, Stmt, StrLit, SyncCall, TypeNode, Unop, UnOp,
)

ATOM_LEVEL = 15
BINOP_LEVEL = {op: level for level, op in INFIX.values()}
BINOP_SPELLING = {
    BinOp.LAND: " && ",
    BinOp.LOR: " || ",
    BinOp.THEN: " then ",
    BinOp.UNTIL: " until ",
    BinOp.DOT: ".",
    BinOp.ARROW: " -> ",
}
UNOP_SPELLING = {UnOp.NO: "no ", UnOp.NOT: "!", UnOp.CARD: "#", UnOp.TRANSPOSE: "~",
                 UnOp.CLOSURE: "^", UnOp.REFLEXIVE_CLOSURE: "*^"}
ESCAPE_OUT = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def quote(s: str) -> str:
    return '"' + "".join(ESCAPE_OUT.get(c, c) for c in s) + '"'


def level(e: Expr) -> int:
    if isinstance(e, Binop):
        return BINOP_LEVEL[e.op]
    if isinstance(e, Unop):
        return PREFIX_LEVEL[e.op]
    if isinstance(e, Compare):
        return COMPARE_LEVEL
    if isinstance(e, BoxJoin):
        return BOX_LEVEL
    if isinstance(e, Lval) and len(e.path) > 1:
        # a dotted path behaves like a left-associative join
        return BINOP_LEVEL[BinOp.DOT]
    return ATOM_LEVEL


def _binop_text(op: BinOp) -> str:
    return BINOP_SPELLING.get(op, f" {op.value} ")


def _compare_text(e: Compare) -> str:
    if not e.negated:
        return f" {e.op.value} "
    return f" !{e.op.value} "


class ExprPrinter:
    """Minimal parenthesization by default; `full=True` wraps every compound child."""

    def __init__(self, full: bool = False) -> None:
        self.full = full

    def child(self, e: Expr, needs_parens: bool) -> str:
        text = self.expr(e)
        if self.full:
            needs_parens = level(e) < ATOM_LEVEL
        return f"({text})" if needs_parens else text

    def expr(self, e: Expr) -> str:
        if isinstance(e, EmptySet):
            return "{}"
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, StrLit):
            return quote(e.value)
        if isinstance(e, Lval):
            return ".".join(e.path)
        if isinstance(e, Unop):
            p = PREFIX_LEVEL[e.op]
            return UNOP_SPELLING[e.op] + self.child(e.operand, level(e.operand) < p)
        if isinstance(e, Binop):
            p = BINOP_LEVEL[e.op]
            right_assoc = e.op in RIGHT_ASSOC
            ll, rl = level(e.left), level(e.right)
            left = self.child(e.left, ll < p or (ll == p and right_assoc))
            right = self.child(e.right, rl < p or (rl == p and not right_assoc))
            return left + _binop_text(e.op) + right
        if isinstance(e, Compare):
            left = self.child(e.left, level(e.left) <= COMPARE_LEVEL)
            right = self.child(e.right, level(e.right) <= COMPARE_LEVEL)
            return left + _compare_text(e) + right
        if isinstance(e, BoxJoin):
            target = self.child(e.target, level(e.target) < BOX_LEVEL)
            return target + "[" + ", ".join(self.expr(a) for a in e.args) + "]"
        if isinstance(e, SetComprehension):
            decls = ", ".join(print_decl(d) for d in e.decls)
            return "{" + decls + " | " + self.expr(e.body) + "}"
        if isinstance(e, Call):
            prefix = {CanPrefix.NONE: "", CanPrefix.CAN: "can ", CanPrefix.CAN_NOT: "can !"}[e.can]
            return f"{prefix}{e.action}(" + ", ".join(self.expr(a) for a in e.args) + ")"
        raise TypeError(f"not an expression: {e!r}")


def pretty_print_expr(e: Expr) -> str:
    return ExprPrinter().expr(e)


def pretty_print_fully_parenthesized(e: Expr) -> str:
    return ExprPrinter(full=True).expr(e)


def print_prim(p: PrimType) -> str:
    return str(p)


def print_type(t: TypeNode) -> str:
    if isinstance(t, ScalarType):
        return (f"{t.mult.value} " if t.mult else "") + print_prim(t.prim)
    cols = [print_prim(c) for c in t.columns]
    if t.target_mult is not None:
        cols[-1] = f"{t.target_mult.value} {cols[-1]}"
    return " -> ".join(cols)


def print_decl(d: Decl) -> str:
    return f"{', '.join(d.names)} : {print_type(d.type)}"


def print_stmt(s: Stmt) -> str:
    lhs = ", ".join(".".join(lv.path) for lv in s.lhs)
    op = ":=" if s.op is None else f"{s.op.value}="
    return f"{lhs} {op} {pretty_print_expr(s.rhs)}"


def print_concept(c: Concept) -> str:
    out = [f"concept {c.name}" + (f" [{', '.join(c.type_params)}]" if c.type_params else "")]
    out.append(f"purpose {quote(c.purpose)}")
    out.append("state")
    for s in c.states:
        line = ("const " if s.is_const else "") + f"{', '.join(s.names)} : {print_type(s.declared_type)}"
        if s.init is not None:
            line += f" = {pretty_print_expr(s.init)}"
        out.append("  " + line)
    out.append("actions")
    for a in c.actions:
        sig = f"{a.name}(" + ", ".join(print_decl(d) for d in a.params) + ")"
        if isinstance(a, Query):
            out.append(f"  {sig} : {print_type(a.return_type)}")
            out.append(f"    {pretty_print_expr(a.body)}")
            continue
        out.append("  " + sig)
        if a.firing_cond is not None:
            out.append(f"    when {pretty_print_expr(a.firing_cond)}")
        for s in a.body:
            out.append("    " + print_stmt(s))
    out.append("principle")
    for i, p in enumerate(c.principles):
        sep = "," if i + 1 < len(c.principles) else ""
        out.append(f"  {pretty_print_expr(p)}{sep}")
    return "\n".join(out)


def print_dependency(d: Dependency) -> str:
    text = str(d.path)
    if d.brackets_present:
        text += " [" + ", ".join(str(a) for a in d.type_args) + "]"
    return text


def print_sync_call(c: SyncCall) -> str:
    args = ", ".join((f"{a.mult.value} " if a.mult else "") + pretty_print_expr(a.expr) for a in c.args)
    return f"{c.concept}.{c.action}({args})"


def print_app(a: App) -> str:
    out = [f"app {a.name}", "include"]
    out += ["  " + print_dependency(d) for d in a.deps]
    for s in a.syncs:
        out.append("sync " + print_sync_call(s.trigger))
        out += ["  " + print_sync_call(r) for r in s.responses]
    return "\n".join(out)


def pretty_print(model: Model) -> str:
    blocks = [print_concept(c) for c in model.concepts] + [print_app(a) for a in model.apps]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# AST dump


def _scalar_repr(v: Any) -> str:
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, str):
        return quote(v)
    return str(v)


def _is_node(v: Any) -> bool:
    return dataclasses.is_dataclass(v) and not isinstance(v, type)


def dump_node(node: Any, indent: int = 0, lines: list[str] | None = None) -> list[str]:
    """One line per node: `Kind@line:col attr=value ...`, children indented below."""
    lines = [] if lines is None else lines
    attrs: list[str] = []
    children: list[tuple[str, Any]] = []
    for f in dataclasses.fields(node):
        if f.name == "loc":
            continue
        v = getattr(node, f.name)
        if _is_node(v):
            children.append((f.name, v))
        elif isinstance(v, tuple) and any(_is_node(x) for x in v):
            children.extend((f.name, x) for x in v)
        elif isinstance(v, tuple):
            attrs.append(f"{f.name}=[{', '.join(_scalar_repr(x) for x in v)}]")
        elif v is not None:
            attrs.append(f"{f.name}={_scalar_repr(v)}")
    loc = getattr(node, "loc", None)
    where = f"@{loc.start_line}:{loc.start_col}" if loc is not None else ""
    lines.append("  " * indent + type(node).__name__ + where + ("" if not attrs else " " + " ".join(attrs)))
    for _, child in children:
        dump_node(child, indent + 1, lines)
    return lines


def dump_ast(model: Model) -> str:
    return "\n".join(dump_node(model))
