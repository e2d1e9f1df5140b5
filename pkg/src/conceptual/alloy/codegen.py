"""Lowering of typed concepts and apps to Alloy documents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..semant.typed import (
    TApp, TBinop, TBox, TCall, TCompare, TComprehension, TConcept, TEmpty, TExpr,
    TIntLit, TJoin, TMutator, TQuery, TState, TStmt, TStrLit, TSync, TSyncCall, TUnop, TVar,
    VarKind,
)
from ..semant.types import Prim, Relation, Scalar, SemType, SetOf, columns
from ..syntax import BinOp, CanPrefix, CmpOp, Mult, ScalarType, TypeNode, UnOp
from .ir import (
    AApp, AAnd, ABinary, ABox, ACompare, ACompr, AExpr, AImplies, AInt, AlloyDocument, AMult,
    AName, ANone, ANot, AOr, AQuant, Assert, AStateField, ATemporal, ATemporalBin, AUnary,
    Command, Fact, FieldDecl, Fun, Open, Pred, SigDecl, conj, disj, serialize,
)
from .mangle import mangle, string_atom

DEFAULT_SCOPE = "for 4 but 20 steps"
STRING_SIG = "_Str"

ARITH_FUNS = {BinOp.PLUS: "plus", BinOp.MINUS: "minus", BinOp.STAR: "mul", BinOp.SLASH: "div",
              BinOp.PERCENT: "rem"}
SET_OPS = {BinOp.PLUS: "+", BinOp.MINUS: "-", BinOp.AMP: "&", BinOp.ARROW: "->", BinOp.DOT: "."}
UNARY_OPS = {UnOp.TRANSPOSE: "~", UnOp.CLOSURE: "^", UnOp.REFLEXIVE_CLOSURE: "*", UnOp.CARD: "#"}
COMPARE_OPS = {CmpOp.EQ: "=", CmpOp.IN: "in", CmpOp.LT: "<", CmpOp.GT: ">", CmpOp.LTE: "=<",
               CmpOp.GTE: ">="}


class CodegenFault(Exception):
    """Internal invariant violated; the typed input should have been rejected."""


@dataclass
class Lowering:
    """Per-document state: how names are spelled and which strings were used."""

    module: str  # owner name of state fields spelled without a module prefix
    in_app: bool = False
    strings: dict[str, None] = field(default_factory=dict)
    uses_string: bool = False

    # types

    def prim(self, p: Prim) -> str:
        if p.kind == "int":
            return "Int"
        if p.kind == "string":
            self.uses_string = True
            return STRING_SIG
        name = mangle(p.name)
        if self.in_app and p.owner:
            return f"{p.owner}/{name}"
        return name

    def sem_type(self, t: SemType, unary_mult: str = "") -> str:
        if isinstance(t, Relation):
            return " -> ".join(self.prim(c) for c in t.columns)
        if isinstance(t, (Scalar, SetOf)):
            return (unary_mult + " " if unary_mult else "") + self.prim(t.prim)
        if str(t) == "int":
            return "Int"
        raise CodegenFault(f"type {t} has no Alloy counterpart")

    # expressions

    def state_field(self, name: str, owner: str, primed: bool = False, paren: bool = True) -> AStateField:
        prefix = "" if owner == self.module or not owner else owner
        return AStateField(mangle(name), prefix, primed, paren)

    def expr(self, e: TExpr) -> AExpr:
        if isinstance(e, TEmpty):
            cols = columns(e.type)
            return ANone(len(cols) if cols else 1)
        if isinstance(e, TIntLit):
            return AInt(e.value)
        if isinstance(e, TStrLit):
            self.uses_string = True
            atom = string_atom(e.value)
            self.strings.setdefault(atom, None)
            return AName(atom)
        if isinstance(e, TVar):
            if e.kind is VarKind.STATE:
                return self.state_field(e.name, e.owner)
            return AName(mangle(e.name))
        if isinstance(e, TJoin):
            return ABinary(".", self.expr(e.left), self.expr(e.right))
        if isinstance(e, TBox):
            return ABox(self.expr(e.target), tuple(self.expr(a) for a in e.args))
        if isinstance(e, TUnop):
            if e.op is UnOp.NOT:
                return ANot(self.formula(e.operand))
            if e.op is UnOp.NO:
                return ATemporal("historically", ANot(self.formula(e.operand)))
            return AUnary(UNARY_OPS[e.op], self.expr(e.operand))
        if isinstance(e, TBinop):
            return self.binop(e)
        if isinstance(e, TCompare):
            return self.compare(e)
        if isinstance(e, TComprehension):
            decls = tuple((mangle(n), self.prim(p)) for n, p in e.decls)
            return ACompr(decls, self.formula(e.body))
        if isinstance(e, TCall):
            return self.call(e.action, e.args, e.can, e.concept)
        raise CodegenFault(f"unexpected node {type(e).__name__}")

    formula = expr

    def binop(self, e: TBinop) -> AExpr:
        if e.arith:
            return AApp(ARITH_FUNS[e.op], (self.expr(e.left), self.expr(e.right)))
        if e.op is BinOp.LAND:
            return AAnd((self.formula(e.left), self.formula(e.right)))
        if e.op is BinOp.LOR:
            return AOr((self.formula(e.left), self.formula(e.right)))
        if e.op is BinOp.THEN:
            return AAnd((self.formula(e.left), ATemporal("after", self.formula(e.right))))
        if e.op is BinOp.UNTIL:
            return weak_until(self.formula(e.left), self.formula(e.right))
        return ABinary(SET_OPS[e.op], self.expr(e.left), self.expr(e.right))

    def compare(self, e: TCompare) -> AExpr:
        left, right = self.expr(e.left), self.expr(e.right)
        if e.member_columns:
            arity = len(columns(e.right.type) or ())
            right = disj_union([project(right, k, arity) for k in e.member_columns])
        op = COMPARE_OPS[e.op]
        if e.negated:
            if e.op is CmpOp.EQ:
                return ACompare("!=", left, right)
            if e.op is CmpOp.IN:
                return ACompare("!in", left, right)
            return ANot(ACompare(op, left, right))
        return ACompare(op, left, right)

    def call(self, action: str, args, can: CanPrefix = CanPrefix.NONE, concept: str = "") -> AExpr:
        prefix = f"{concept}/" if concept and concept != self.module else ""
        lowered = tuple(self.expr(a) for a in args)
        if can is CanPrefix.NONE:
            return AApp(prefix + mangle(action), lowered)
        app = AApp(f"{prefix}_can_{action}", lowered)
        return app if can is CanPrefix.CAN else ANot(app)


def weak_until(a: AExpr, b: AExpr) -> AExpr:
    """`a` holds until `b`, without requiring that `b` ever happens."""
    return ATemporalBin("releases", b, AOr((a, b)))


def project(rel: AExpr, column: int, arity: int) -> AExpr:
    """Atoms in the given 1-based column of an n-ary relation."""
    out = rel
    for _ in range(arity - column):
        out = ABinary(".", out, AName("univ"))
    for _ in range(column - 1):
        out = ABinary(".", AName("univ"), out)
    return out


def disj_union(items: list[AExpr]) -> AExpr:
    out = items[0]
    for x in items[1:]:
        out = ABinary("+", out, x)
    return out


def lower_principle(low: Lowering, e: TExpr) -> AExpr:
    """Top-level `then` chains read as "after a, b holds": a implication whose
    later steps move one state forward each. Nested occurrences conjoin."""
    if isinstance(e, TBinop) and e.op is BinOp.THEN:
        return AImplies(low.formula(e.left), ATemporal("after", lower_principle(low, e.right)))
    return low.formula(e)


# declarations


def field_type(low: Lowering, decl: TypeNode, var: bool) -> str:
    def weaken(m: Optional[Mult]) -> Optional[Mult]:
        # a variable `one` field cannot start empty; keep it at most one instead
        return Mult.LONE if var and m in (None, Mult.ONE) else m

    if isinstance(decl, ScalarType):
        m = decl.mult if decl.mult is not None else Mult.ONE
        m = weaken(m) if var else m
        return f"{m.value} {low.prim(_decl_prim(low, decl.prim))}"
    cols = [low.prim(_decl_prim(low, c)) for c in decl.columns]
    m = decl.target_mult
    if var and m is Mult.ONE:
        m = Mult.LONE
    last = f"{m.value} {cols[-1]}" if m is not None else cols[-1]
    return " -> ".join(cols[:-1] + [last])


def _decl_prim(low: Lowering, p) -> Prim:
    if p.kind.value == "named":
        return Prim("named", p.name, low.module)
    return Prim(p.kind.value)


def param_decls(low: Lowering, params) -> tuple[tuple[str, str], ...]:
    out = []
    for p in params:
        t = p.type
        if not isinstance(t, (Scalar, SetOf)):
            raise CodegenFault(f"parameter {p.name} is not a scalar")
        out.append((mangle(p.name), low.prim(t.prim)))
    return tuple(out)


def mutable_states(c: TConcept) -> list[TState]:
    return [s for s in c.states if s.mutable]


def override_at(cur: AExpr, prefix: AExpr, value: AExpr) -> AExpr:
    """`cur` with the rows starting at `prefix` replaced by `prefix -> value`.
    Written without `++` so an empty `value` still clears the old rows."""
    kept = ABinary("-", cur, ABinary("<:", prefix, cur))
    if isinstance(value, ANone):
        return kept
    return ABinary("+", kept, ABinary("->", prefix, value))


def accumulate_statements(low: Lowering, c: TConcept, stmts: tuple[TStmt, ...]) -> dict[str, Optional[AExpr]]:
    """Final next-state expression per mutable field, None when untouched.
    Statements fold left in source order starting from the current value."""
    frame: dict[str, Optional[AExpr]] = {s.name: None for s in mutable_states(c)}
    order: list[str] = []
    modes: dict[str, set[bool]] = {}
    for stmt in stmts:
        rhs = low.expr(stmt.rhs)
        for t in stmt.targets:
            if t.field not in frame:
                raise CodegenFault(f"'{t.field}' is not a mutable field of {c.name}")
            modes.setdefault(t.field, set()).add(stmt.op is None)
            if len(modes[t.field]) > 1:
                raise CodegenFault(f"mixed assignment to '{t.field}' reached code generation")
            cur = frame[t.field]
            if cur is None:
                cur = low.state_field(t.field, c.name)
                order.append(t.field)
            frame[t.field] = _apply(cur, t.prefix and low.expr(t.prefix), stmt.op, rhs)
    # changed fields first in first-assignment order, then untouched ones
    result: dict[str, Optional[AExpr]] = {f: frame[f] for f in order}
    result.update({f: None for f, v in frame.items() if v is None})
    return result


def _combine(op: BinOp, left: AExpr, right: AExpr) -> AExpr:
    if op in (BinOp.STAR, BinOp.SLASH, BinOp.PERCENT):
        return AApp(ARITH_FUNS[op], (left, right))
    return ABinary(SET_OPS[op], left, right)


def _apply(cur: AExpr, prefix: Optional[AExpr], op: Optional[BinOp], rhs: AExpr) -> AExpr:
    if prefix is None:
        return rhs if op is None else _combine(op, cur, rhs)
    if op is None:
        return override_at(cur, prefix, rhs)
    if op in (BinOp.PLUS, BinOp.MINUS):
        return ABinary(SET_OPS[op], cur, ABinary("->", prefix, rhs))
    return override_at(cur, prefix, _combine(op, ABinary(".", prefix, cur), rhs))


def gen_action(low: Lowering, c: TConcept, a: TMutator) -> tuple[Pred, Pred]:
    params = param_decls(low, a.params)
    cond = [low.formula(a.firing_cond)] if a.firing_cond is not None else []
    body = list(cond)
    frames = []
    for name, value in accumulate_statements(low, c, a.body).items():
        nxt = low.state_field(name, c.name, primed=True)
        if value is None:
            frames.append(ACompare("=", nxt, low.state_field(name, c.name)))
        else:
            body.append(ACompare("=", nxt, value))
    return Pred(mangle(a.name), params, body + frames), Pred(f"_can_{a.name}", params, list(cond))


def gen_query(low: Lowering, a: TQuery) -> tuple[Fun, Pred]:
    params = param_decls(low, a.params)
    t = a.return_type
    if isinstance(t, (Scalar, SetOf)) and t.prim.kind != "int":
        # bodies routinely denote sets, so the result is never narrowed to `one`
        result = low.sem_type(t, "set")
    else:
        result = low.sem_type(t)
    return Fun(mangle(a.name), params, result, low.expr(a.body)), Pred(f"_can_{a.name}", params, [])


def gen_transitions(low: Lowering, c: TConcept) -> tuple[Pred, Fact]:
    stutter = [ACompare("=", low.state_field(s.name, c.name, primed=True), low.state_field(s.name, c.name))
               for s in mutable_states(c)]
    steps: list[AExpr] = [AApp("_stutter")]
    for a in c.actions:
        if not isinstance(a, TMutator):
            continue
        params = param_decls(low, a.params)
        call = AApp(mangle(a.name), tuple(AName(n) for n, _ in params))
        steps.append(AQuant("some", params, call) if params else call)
    return Pred("_stutter", (), stutter), Fact("_transitions", [ATemporal("always", disj(steps))])


def gen_principle(low: Lowering, index: int, p, scope: str) -> tuple[Assert, Command]:
    body = lower_principle(low, p.expr)
    decls = tuple((mangle(n), low.sem_type(t)) for n, t in p.temps)
    if decls:
        body = AQuant("all", decls, body)
    name = f"_principle_{index}"
    return Assert(name, ATemporal("always", body)), Command("check", name, scope)


def _string_sigs(low: Lowering) -> list[SigDecl]:
    if not (low.uses_string or low.strings):
        return []
    sigs = [SigDecl(STRING_SIG, abstract=True)]
    sigs += [SigDecl(atom, mult="one", extends=STRING_SIG) for atom in low.strings]
    return sigs


def purpose_lines(purpose: str) -> list[str]:
    return purpose.split("\n") if purpose else []


def gen_concept(c: TConcept, scope: str = DEFAULT_SCOPE) -> AlloyDocument:
    low = Lowering(c.name)
    doc = AlloyDocument(mangle(c.name), tuple(mangle(p) for p in c.type_params), purpose_lines(c.purpose))
    state = SigDecl("State", mult="one")
    for s in c.states:
        var = not s.is_const
        state.fields.append(FieldDecl(mangle(s.name), field_type(low, s.decl, var), var))

    mutable = mutable_states(c)
    if mutable:
        doc.facts.append(Fact("_init", [AMult("no", low.state_field(s.name, c.name, paren=False)) for s in mutable]))
    for s in c.states:
        if s.init is None:
            continue
        eq = ACompare("=", low.state_field(s.name, c.name), low.expr(s.init))
        doc.facts.append(Fact(f"_def_{s.name}", [eq if s.is_const else ATemporal("always", eq)]))
    stutter, transitions = gen_transitions(low, c)
    doc.facts.append(transitions)
    doc.preds.append(stutter)
    for a in c.actions:
        if isinstance(a, TMutator):
            doc.preds.extend(gen_action(low, c, a))
        else:
            fun, can = gen_query(low, a)
            doc.funs.append(fun)
            doc.preds.append(can)
    for i, p in enumerate(c.principles, 1):
        assertion, command = gen_principle(low, i, p, scope)
        doc.asserts.append(assertion)
        doc.commands.append(command)

    doc.sigs = [SigDecl(mangle(t)) for t in c.custom_types] + _string_sigs(low)
    if c.states:
        doc.sigs.append(state)
    return doc


# apps


def _temp_names(e: TExpr, out: dict[str, None]) -> None:
    if isinstance(e, TVar):
        if e.kind is VarKind.TEMP:
            out.setdefault(e.name, None)
        return
    for v in vars(e).values():
        if isinstance(v, tuple):
            for x in v:
                if hasattr(x, "type") and not isinstance(x, tuple):
                    _temp_names(x, out)
        elif hasattr(v, "type") and hasattr(v, "loc"):
            _temp_names(v, out)


def sync_call(low: Lowering, call: TSyncCall) -> AExpr:
    return AApp(f"{call.concept}/{mangle(call.action)}", tuple(low.expr(a) for a in call.args))


def gen_sync(low: Lowering, s: TSync) -> AExpr:
    trigger_temps: dict[str, None] = {}
    for a in s.trigger.args:
        _temp_names(a, trigger_temps)
    types = dict(s.temps)
    outer = tuple((mangle(n), low.sem_type(types[n])) for n in trigger_temps)
    inner = tuple((mangle(n), low.sem_type(t)) for n, t in s.temps if n not in trigger_temps)
    effect = conj(sync_call(low, r) for r in s.responses)
    if inner:
        effect = AQuant("some", inner, effect)
    body: AExpr = AImplies(sync_call(low, s.trigger), effect)
    if outer:
        body = AQuant("all", outer, body)
    return ATemporal("always", body)


def gen_app(app: TApp) -> AlloyDocument:
    low = Lowering("", in_app=True)
    doc = AlloyDocument(mangle(app.name))
    for d in app.deps:
        doc.opens.append(Open(d.concept, tuple(low.prim(p) for p in d.type_args), d.alias))
    singletons: dict[str, Prim] = {}
    for s in app.syncs:
        for name, prim in s.singletons:
            singletons.setdefault(name, prim)
    syncs = [gen_sync(low, s) for s in app.syncs]
    if syncs:
        doc.facts.append(Fact("_syncs", syncs))
    doc.sigs = _string_sigs(low)
    doc.sigs += [SigDecl(mangle(n), mult="one", extends=low.prim(p)) for n, p in singletons.items()]
    return doc


def generate(node: Union[TConcept, TApp], scope: str = DEFAULT_SCOPE) -> str:
    doc = gen_concept(node, scope) if isinstance(node, TConcept) else gen_app(node)
    return serialize(doc)
