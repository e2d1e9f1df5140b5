"""Semantic analysis: scopes, bidirectional typing, context rules and includes.

Errors never abort the traversal; they go to the shared sink and the offending
node gets ErrorType, which is compatible with everything so one mistake does
not cascade into unrelated diagnostics.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Optional

from ..diagnostics import DiagnosticKind as DK, DiagnosticSink, SourceLocation
from ..loader import IncludeError, IncludeLoader
from ..syntax import (
    App, BinOp, Binop, BoxJoin, Call, CanPrefix, CmpOp, Compare, Concept, Decl, Dependency,
    EmptySet, Expr, IntLit, Lval, Model, Mult, PrimKind, PrimType, Query, QualifiedPrim,
    ScalarType, SetComprehension, Stmt, StrLit, Sync, SyncCall, TypeNode, Unop, UnOp,
)
from .env import ActionSig, Binding, ConceptSummary, Environment
from .typed import (
    ActionKind, TBinop, TBox, TCall, TCompare, TComprehension, TConcept, TDep, TEmpty, TExpr,
    TIntLit, TJoin, TMutator, TParam, TPrinciple, TQuery, TApp, TState, TStmt, TStrLit, TSync,
    TSyncCall, TTarget, TUnop, TVar, TypedModel, VarKind,
)
from .types import (
    BOOL, EMPTY, ERROR, INT_PRIM, INT_RESULT, STRING_PRIM, EmptyType, IntResult,
    NotFirstOrderError, Prim, ProductTerm, Relation, Scalar, SemType, SetOf, SetTerm, TypeTerm,
    build_type, columns, compatible, from_columns, is_error, is_intish, show,
)

LOGICAL = {BinOp.LAND, BinOp.LOR}
TEMPORAL = {BinOp.THEN, BinOp.UNTIL}
SET_OPS = {BinOp.PLUS, BinOp.MINUS, BinOp.AMP}
ARITH_ONLY = {BinOp.STAR, BinOp.SLASH, BinOp.PERCENT}
NEVER_COMPOUND = {BinOp.ARROW, BinOp.LAND, BinOp.LOR, BinOp.THEN, BinOp.UNTIL}


def _arith_operand(t: SemType) -> bool:
    return isinstance(t, IntResult) or (isinstance(t, Scalar) and t.prim == INT_PRIM)


class Analyzer:
    def __init__(self, loader: Optional[IncludeLoader] = None, sink: Optional[DiagnosticSink] = None) -> None:
        self.loader = loader or IncludeLoader()
        self.sink = sink if sink is not None else DiagnosticSink()
        self.concepts: dict[str, ConceptSummary] = {}
        self.apps: dict[str, str] = {}
        self.typed = TypedModel()
        # id(ast node) -> number of times it was typed
        self.visits: Counter[int] = Counter()
        self._qualify = False

    # entry points

    def analyze(self, model: Model) -> tuple[TypedModel, DiagnosticSink]:
        for c in model.concepts:
            self.analyze_concept(c)
        for a in model.apps:
            self.analyze_app(a)
        return self.typed, self.sink

    def fresh_env(self) -> Environment:
        return Environment(self.sink, self.concepts, self.apps)

    def error(self, kind: DK, loc: SourceLocation, detail: str) -> None:
        self.sink.error(kind, loc, detail)

    def show(self, t: SemType) -> str:
        return show(t, self._qualify)

    # declarations and types

    def resolve_prim(self, env: Environment, p: PrimType) -> Optional[Prim]:
        if p.kind is PrimKind.STRING:
            return STRING_PRIM
        if p.kind is PrimKind.INT:
            return INT_PRIM
        found = env.types.get(p.name)
        if found is None:
            self.error(DK.UNKNOWN_TYPE, p.loc, f"unknown type '{p.name}'")
        return found

    def type_term(self, env: Environment, t: TypeNode) -> Optional[TypeTerm]:
        """Term for a declared type, or None when some prim is unknown."""
        if isinstance(t, ScalarType):
            prim = self.resolve_prim(env, t.prim)
            if prim is None:
                return None
            return SetTerm(prim) if t.mult in (Mult.SET, Mult.LONE) else prim
        prims = [self.resolve_prim(env, c) for c in t.columns]
        if any(p is None for p in prims):
            return None
        term: TypeTerm = prims[-1]  # type: ignore[assignment]
        for p in reversed(prims[:-1]):
            term = ProductTerm(p, term)  # type: ignore[arg-type]
        return term

    def resolve_type(self, env: Environment, t: TypeNode) -> SemType:
        term = self.type_term(env, t)
        if term is None:
            return ERROR
        if isinstance(term, SetTerm) and isinstance(t, ScalarType) and t.mult is Mult.LONE:
            return Scalar(term.elem)  # type: ignore[arg-type]
        return self._build(term, t.loc)

    def _build(self, term: TypeTerm, loc: SourceLocation) -> SemType:
        try:
            return build_type(term)
        except NotFirstOrderError as exc:
            self.error(DK.NOT_FIRST_ORDER, loc, f"type is not first-order: {exc}")
            return ERROR

    def resolve_var_type(self, env: Environment, d: Decl, what: str) -> SemType:
        """Type of a variable bound to single atoms (parameters, comprehension decls).
        Ranging over a set or relation would need a set of sets."""
        term = self.type_term(env, d.type)
        if term is None:
            return ERROR
        if not isinstance(term, Prim):
            try:
                build_type(SetTerm(term))
            except NotFirstOrderError as exc:
                self.error(DK.NOT_FIRST_ORDER, d.type.loc,
                           f"{what} must range over single atoms; declared type yields a {exc}")
                return ERROR
        return Scalar(term)

    def declare_value(self, env: Environment, name: str, value, loc: SourceLocation,
                      nested: bool = False) -> None:
        if name in env.values or name in env.temps:
            if nested:
                self.error(DK.SHADOWING, loc, f"'{name}' shadows an existing declaration")
            else:
                self.error(DK.DUPLICATE_NAME, loc, f"'{name}' is already declared")
            return
        env.values[name] = value

    # concepts

    def analyze_concept(self, c: Concept, included: bool = False) -> TConcept:
        env = self.fresh_env()
        env.current_concept = c.name
        self._qualify = False
        for p in c.type_params:
            if p in env.types:
                self.error(DK.DUPLICATE_NAME, c.loc, f"type parameter '{p}' is declared twice")
                continue
            env.types[p] = Prim("named", p, c.name, is_param=True)

        # pass 1: custom types, then state variables, then action names
        custom: list[str] = []
        for s in c.states:
            t = s.declared_type
            prims = [t.prim] if isinstance(t, ScalarType) else list(t.columns)
            for p in prims:
                if p.kind is PrimKind.NAMED and p.name not in env.types:
                    env.types[p.name] = Prim("named", p.name, c.name)
                    custom.append(p.name)
        state_types: dict[str, SemType] = {}
        for s in c.states:
            ty = self.resolve_type(env, s.declared_type)
            for name in s.names:
                if name in env.values:
                    self.error(DK.DUPLICATE_NAME, s.loc, f"state variable '{name}' is already declared")
                    continue
                env.values[name] = Binding(VarKind.STATE, ty, c.name, s.is_const,
                                           s.init is not None and not s.is_const)
                state_types[name] = ty
        for a in c.actions:
            if a.name in env.values:
                self.error(DK.DUPLICATE_NAME, a.loc, f"'{a.name}' is already declared")
            else:
                env.values[a.name] = self.signature(env, a)

        # pass 2
        states: list[TState] = []
        for s in c.states:
            ty = state_types.get(s.names[0], ERROR)
            init = self.check_type(env, s.init, ty) if s.init is not None else None
            for name in s.names:
                states.append(TState(name, s.declared_type, ty, s.is_const, init, s.loc))
        seen_actions: set[str] = set()
        actions = []
        for a in c.actions:
            ta = self.analyze_action(env, a)
            actions.append(ta)
            if a.name not in seen_actions:
                seen_actions.add(a.name)
                kind = ActionKind.QUERY if isinstance(a, TQuery) or isinstance(ta, TQuery) else ActionKind.MUTATOR
                ret = ta.return_type if isinstance(ta, TQuery) else None
                env.values[a.name] = ActionSig(a.name, kind, tuple((p.name, p.type) for p in ta.params), ret)
        principles = []
        for p in c.principles:
            penv = env.child(in_principle=True, temps={})
            te = self.check_type(penv, p, BOOL)
            principles.append(TPrinciple(te, tuple((n, b.type) for n, b in penv.temps.items()), p.loc))

        summary = ConceptSummary(
            c.name,
            tuple(env.types[p] for p in dict.fromkeys(c.type_params)),
            tuple(env.types[n] for n in custom),
            {n: v for n, v in env.values.items() if isinstance(v, Binding)},
            {n: v for n, v in env.values.items() if isinstance(v, ActionSig)},
        )
        if c.name in self.concepts:
            self.error(DK.DUPLICATE_NAME, c.loc, f"concept '{c.name}' is already defined")
        else:
            self.concepts[c.name] = summary
        tc = TConcept(c.name, tuple(dict.fromkeys(c.type_params)), c.purpose, tuple(custom), tuple(states),
                      tuple(actions), tuple(principles), c.loc.file_path, included, c.loc)
        self.typed.concepts.append(tc)
        return tc

    def signature(self, env: Environment, a) -> ActionSig:
        """Signature used before the action itself is analyzed; problems are
        reported later, when pass 2 resolves the same types."""
        outer, self.sink = self.sink, DiagnosticSink()
        try:
            params = tuple((n, self.resolve_type(env, d.type)) for d in a.params for n in d.names)
            if isinstance(a, Query):
                return ActionSig(a.name, ActionKind.QUERY, params, self.resolve_type(env, a.return_type))
            return ActionSig(a.name, ActionKind.MUTATOR, params)
        finally:
            self.sink = outer

    def analyze_params(self, env: Environment, decls: tuple[Decl, ...]) -> tuple[TParam, ...]:
        params = []
        local: set[str] = set()
        for d in decls:
            ty = self.resolve_var_type(env, d, "action parameters")
            for name in d.names:
                if name in local:
                    self.error(DK.DUPLICATE_NAME, d.loc, f"parameter '{name}' is declared twice")
                    continue
                local.add(name)
                if name in env.values:
                    self.error(DK.SHADOWING, d.loc, f"parameter '{name}' shadows a declaration of the concept")
                    continue
                env.values[name] = Binding(VarKind.PARAM, ty)
                params.append(TParam(name, d.type, ty, d.loc))
        return tuple(params)

    def analyze_action(self, env: Environment, a) -> object:
        aenv = env.child()
        params = self.analyze_params(aenv, a.params)
        if isinstance(a, Query):
            ret = self.resolve_type(aenv, a.return_type)
            body = self.check_type(aenv, a.body, ret)
            return TQuery(a.name, params, a.return_type, ret, body, a.loc)
        cond = self.check_type(aenv, a.firing_cond, BOOL) if a.firing_cond is not None else None
        assigned: dict[str, set[str]] = {}
        stmts = tuple(self.check_statement(aenv, s, assigned) for s in a.body)
        for fname, how in assigned.items():
            if len(how) > 1:
                self.error(DK.MIXED_ASSIGNMENT, a.loc,
                           f"action '{a.name}' assigns '{fname}' both with ':=' and a compound operator")
        if cond is None and not stmts:
            self.sink.warning(DK.EMPTY_ACTION, a.loc, f"action '{a.name}' has no firing condition and no statements")
        return TMutator(a.name, params, cond, stmts, a.loc)

    # statements

    def resolve_target(self, env: Environment, lv: Lval) -> TTarget:
        self.visits[id(lv)] += 1
        fname = lv.path[-1]
        b = env.values.get(fname)
        if b is None:
            self.error(DK.UNDECLARED_NAME, lv.loc, f"undeclared name '{fname}'")
            return TTarget(fname, None, ERROR, lv.loc)
        if not isinstance(b, Binding) or b.kind is not VarKind.STATE:
            self.error(DK.INVALID_ASSIGNMENT, lv.loc, f"'{fname}' is not a state variable and cannot be assigned")
            return TTarget(fname, None, ERROR, lv.loc)
        if b.const:
            self.error(DK.INVALID_ASSIGNMENT, lv.loc, f"cannot assign to const state variable '{fname}'")
        elif b.derived:
            self.error(DK.INVALID_ASSIGNMENT, lv.loc, f"cannot assign to '{fname}', which is defined by an expression")
        if len(lv.path) == 1:
            return TTarget(fname, None, b.type, lv.loc)
        prefix = self._infer_path(env, lv.path[:-1], lv.loc)
        ty = self.join_type(prefix.type, b.type, lv.loc)
        if not is_error(ty) and len(columns(prefix.type) or ()) != 1:
            self.error(DK.INVALID_ASSIGNMENT, lv.loc, f"the prefix of '{'.'.join(lv.path)}' must be a set or atom")
            ty = ERROR
        return TTarget(fname, prefix, ty, lv.loc)

    def check_statement(self, env: Environment, s: Stmt, assigned: dict[str, set[str]]) -> TStmt:
        targets = tuple(self.resolve_target(env, lv) for lv in s.lhs)
        for t in targets:
            assigned.setdefault(t.field, set()).add("simple" if s.op is None else "compound")
        first = next((t.type for t in targets if not is_error(t.type)), ERROR)
        op = s.op
        if op is None:
            rhs = self.check_type(env, s.rhs, first)
            rhs_type = EMPTY if isinstance(rhs, TEmpty) else rhs.type
            for t in targets:
                if not compatible(t.type, rhs_type):
                    self.error(DK.TYPE_MISMATCH, s.rhs.loc,
                               f"cannot assign a value of type {self.show(rhs.type)} to '{t.field}' of type {self.show(t.type)}")
        elif op in NEVER_COMPOUND:
            self.error(DK.ILL_TYPED_COMPOUND, s.loc, f"'{op.value}=' can never be well-typed on a state variable")
            rhs = self.infer_type(env, s.rhs)
        elif op in ARITH_ONLY:
            bad = [t for t in targets if not is_error(t.type) and not is_intish(t.type)]
            if bad:
                self.error(DK.ILL_TYPED_COMPOUND, s.loc,
                           f"'{op.value}=' needs an integer target but '{bad[0].field}' has type {self.show(bad[0].type)}")
                rhs = self.infer_type(env, s.rhs)
            else:
                rhs = self.check_type(env, s.rhs, INT_RESULT)
        elif op is BinOp.DOT:
            rhs = self.infer_type(env, s.rhs)
            for t in targets:
                joined = self.join_type(t.type, rhs.type, s.loc, quiet=True)
                if not compatible(t.type, joined) or (is_error(joined) and not is_error(t.type) and not is_error(rhs.type)):
                    self.error(DK.ILL_TYPED_COMPOUND, s.loc,
                               f"'.=' would change the type of '{t.field}' ({self.show(t.type)})")
        else:
            rhs = self.check_type(env, s.rhs, first)
        return TStmt(targets, op, rhs, s.loc)

    # expressions

    def check_type(self, env: Environment, e: Expr, expected: SemType) -> TExpr:
        if isinstance(e, EmptySet) and not isinstance(expected, type(BOOL)):
            self.visits[id(e)] += 1
            return TEmpty(expected if not is_intish(expected) else EMPTY, e.loc)
        te = self.infer_type(env, e)
        if not compatible(expected, te.type):
            self.error(DK.TYPE_MISMATCH, e.loc, f"expected {self.show(expected)}, found {self.show(te.type)}")
        elif isinstance(te, TEmpty) and isinstance(te.type, EmptyType):
            te.type = expected
        return te

    def infer_type(self, env: Environment, e: Expr) -> TExpr:
        self.visits[id(e)] += 1
        if isinstance(e, EmptySet):
            return TEmpty(EMPTY, e.loc)
        if isinstance(e, IntLit):
            return TIntLit(e.value, Scalar(INT_PRIM), e.loc)
        if isinstance(e, StrLit):
            return TStrLit(e.value, Scalar(STRING_PRIM), e.loc)
        if isinstance(e, Lval):
            return self._infer_path(env, e.path, e.loc)
        if isinstance(e, Unop):
            return self._infer_unop(env, e)
        if isinstance(e, Binop):
            return self._infer_binop(env, e)
        if isinstance(e, Compare):
            return self._infer_compare(env, e)
        if isinstance(e, BoxJoin):
            target = self.infer_type(env, e.target)
            args = tuple(self.infer_type(env, a) for a in e.args)
            ty = target.type
            for a in args:
                ty = self.join_type(a.type, ty, e.loc)
            return TBox(target, args, ty, e.loc)
        if isinstance(e, SetComprehension):
            return self._infer_comprehension(env, e)
        if isinstance(e, Call):
            return self._infer_call(env, e)
        raise TypeError(f"not an expression: {e!r}")

    def lookup(self, env: Environment, name: str) -> Optional[object]:
        if name in env.temps:
            return env.temps[name]
        if name in env.values:
            return env.values[name]
        if env.deps:
            own = env.deps.get(env.current_concept or "")
            if own is not None and name in own.states:
                return own.states[name]
            found = [d.states[name] for d in env.deps.values() if name in d.states]
            if len(found) == 1:
                return found[0]
            if len(found) > 1:
                return "ambiguous"
        return None

    def _var(self, env: Environment, name: str, loc: SourceLocation) -> TVar:
        b = self.lookup(env, name)
        if b is None:
            self.error(DK.UNDECLARED_NAME, loc, f"undeclared name '{name}'")
            return TVar(name, VarKind.STATE, ERROR, "", loc)
        if b == "ambiguous":
            owners = sorted(a for a, d in env.deps.items() if name in d.states)
            self.error(DK.UNDECLARED_NAME, loc, f"'{name}' is ambiguous between concepts {', '.join(owners)}")
            return TVar(name, VarKind.STATE, ERROR, "", loc)
        if isinstance(b, ActionSig):
            self.error(DK.TYPE_MISMATCH, loc, f"'{name}' is an action, not a value")
            return TVar(name, VarKind.STATE, ERROR, "", loc)
        return TVar(name, b.kind, b.type, b.owner if b.kind is VarKind.STATE else "", loc)

    def _infer_path(self, env: Environment, path: tuple[str, ...], loc: SourceLocation) -> TExpr:
        node: TExpr = self._var(env, path[0], loc)
        for name in path[1:]:
            right = self._var(env, name, loc)
            node = TJoin(node, right, self.join_type(node.type, right.type, loc), loc)
        return node

    def join_type(self, lt: SemType, rt: SemType, loc: SourceLocation, quiet: bool = False) -> SemType:
        if is_error(lt) or is_error(rt):
            return ERROR
        lc, rc = columns(lt), columns(rt)
        if lc is None or rc is None:
            if not quiet:
                self.error(DK.TYPE_MISMATCH, loc, f"cannot join {self.show(lt)} with {self.show(rt)}")
            return ERROR
        if len(lc) + len(rc) - 2 < 1:
            if not quiet:
                self.error(DK.TYPE_MISMATCH, loc,
                           f"joining {self.show(lt)} with {self.show(rt)} leaves no columns")
            return ERROR
        if lc[-1] != rc[0]:
            if not quiet:
                self.error(DK.TYPE_MISMATCH, loc,
                           f"cannot join {self.show(lt)} with {self.show(rt)}: {lc[-1]} does not match {rc[0]}")
            return ERROR
        return from_columns(lc[:-1] + rc[1:])

    def _context(self, env: Environment, loc: SourceLocation, what: str) -> None:
        if not env.in_context:
            self.error(DK.CONTEXT_VIOLATION, loc, f"{what} is only allowed in principles and synchronizations")

    def _infer_unop(self, env: Environment, e: Unop) -> TExpr:
        op = e.op
        if op in (UnOp.NOT, UnOp.NO):
            if op is UnOp.NO:
                self._context(env, e.loc, "'no'")
            operand = self.check_type(env, e.operand, BOOL)
            return TUnop(op, operand, BOOL, e.loc)
        operand = self.infer_type(env, e.operand)
        t = operand.type
        if is_error(t):
            return TUnop(op, operand, ERROR, e.loc)
        cols = columns(t)
        if op is UnOp.CARD:
            if cols is None and not isinstance(t, EmptyType):
                self.error(DK.TYPE_MISMATCH, e.loc, f"'#' needs a set or relation, found {self.show(t)}")
                return TUnop(op, operand, ERROR, e.loc)
            return TUnop(op, operand, INT_RESULT, e.loc)
        if cols is None or len(cols) != 2:
            self.error(DK.TYPE_MISMATCH, e.loc, f"'{op.value}' needs a binary relation, found {self.show(t)}")
            return TUnop(op, operand, ERROR, e.loc)
        if op is UnOp.TRANSPOSE:
            return TUnop(op, operand, Relation((cols[1], cols[0])), e.loc)
        if cols[0] != cols[1]:
            self.error(DK.TYPE_MISMATCH, e.loc,
                       f"closure needs a relation from a type to itself, found {self.show(t)}")
            return TUnop(op, operand, ERROR, e.loc)
        return TUnop(op, operand, t, e.loc)

    def _unify_empty(self, a: TExpr, b: TExpr) -> None:
        if isinstance(a, TEmpty) and isinstance(a.type, EmptyType) and columns(b.type):
            a.type = b.type if not is_intish(b.type) else SetOf(INT_PRIM)
        if isinstance(b, TEmpty) and isinstance(b.type, EmptyType) and columns(a.type):
            b.type = a.type if not is_intish(a.type) else SetOf(INT_PRIM)

    def _infer_binop(self, env: Environment, e: Binop) -> TExpr:
        op = e.op
        if op in LOGICAL or op in TEMPORAL:
            if op in TEMPORAL:
                self._context(env, e.loc, f"'{op.value}'")
            left = self.check_type(env, e.left, BOOL)
            right = self.check_type(env, e.right, BOOL)
            return TBinop(op, left, right, BOOL, False, e.loc)
        left = self.infer_type(env, e.left)
        right = self.infer_type(env, e.right)
        lt, rt = left.type, right.type
        if is_error(lt) or is_error(rt):
            return TBinop(op, left, right, ERROR, False, e.loc)
        if op is BinOp.DOT:
            return TJoin(left, right, self.join_type(lt, rt, e.loc), e.loc)
        if op in ARITH_ONLY or (op in (BinOp.PLUS, BinOp.MINUS) and _arith_operand(lt) and _arith_operand(rt)):
            if not (is_intish(lt) and is_intish(rt)):
                self.error(DK.TYPE_MISMATCH, e.loc,
                           f"'{op.value}' needs integer operands, found {self.show(lt)} and {self.show(rt)}")
                return TBinop(op, left, right, ERROR, True, e.loc)
            return TBinop(op, left, right, INT_RESULT, True, e.loc)
        self._unify_empty(left, right)
        lt, rt = left.type, right.type
        if op is BinOp.ARROW:
            lc, rc = columns(lt), columns(rt)
            if lc is None or rc is None:
                self.error(DK.TYPE_MISMATCH, e.loc,
                           f"'->' needs sets or relations, found {self.show(lt)} and {self.show(rt)}")
                return TBinop(op, left, right, ERROR, False, e.loc)
            return TBinop(op, left, right, Relation(lc + rc), False, e.loc)
        # + - & on sets and relations
        if isinstance(lt, EmptyType) and isinstance(rt, EmptyType):
            return TBinop(op, left, right, EMPTY, False, e.loc)
        lc, rc = columns(lt), columns(rt)
        if lc is None or rc is None or lc != rc:
            self.error(DK.TYPE_MISMATCH, e.loc,
                       f"operands of '{op.value}' have incompatible types {self.show(lt)} and {self.show(rt)}")
            return TBinop(op, left, right, ERROR, False, e.loc)
        return TBinop(op, left, right, from_columns(lc), False, e.loc)

    def check_membership(self, e: Compare, left: TExpr, right: TExpr) -> Optional[tuple[int, ...]]:
        """None for ordinary subset tests; otherwise the right-hand columns matched."""
        lt, rt = left.type, right.type
        if is_error(lt) or is_error(rt) or isinstance(lt, EmptyType) or isinstance(rt, EmptyType):
            self._unify_empty(left, right)
            return None
        lc, rc = columns(lt), columns(rt)
        if lc is None or rc is None:
            self.error(DK.TYPE_MISMATCH, e.loc, f"'in' needs sets or relations, found {self.show(lt)} and {self.show(rt)}")
            return None
        if lc == rc:
            return None
        if len(lc) == 1 and len(rc) >= 2:
            hits = tuple(i for i, c in enumerate(rc, 1) if c == lc[0])
            if hits:
                return hits
        self.error(DK.TYPE_MISMATCH, e.loc,
                   f"'{self.show(lt)}' cannot be a member of '{self.show(rt)}': no column matches")
        return None

    def _infer_compare(self, env: Environment, e: Compare) -> TExpr:
        left = self.infer_type(env, e.left)
        right = self.infer_type(env, e.right)
        lt, rt = left.type, right.type
        cols = None
        if e.op is CmpOp.IN:
            cols = self.check_membership(e, left, right)
        elif e.op is CmpOp.EQ:
            self._unify_empty(left, right)
            lt, rt = left.type, right.type
            if isinstance(lt, type(BOOL)) or isinstance(rt, type(BOOL)):
                if not (is_error(lt) or is_error(rt)):
                    self.error(DK.TYPE_MISMATCH, e.loc, "'=' cannot compare formulas")
            elif not compatible(lt, rt):
                self.error(DK.TYPE_MISMATCH, e.loc, f"cannot compare {self.show(lt)} with {self.show(rt)}")
        elif not (is_error(lt) or is_error(rt)) and not (is_intish(lt) and is_intish(rt)):
            self.error(DK.TYPE_MISMATCH, e.loc,
                       f"'{e.op.value}' needs integer operands, found {self.show(lt)} and {self.show(rt)}")
        return TCompare(e.op, e.negated, left, right, BOOL, cols, e.loc)

    def _infer_comprehension(self, env: Environment, e: SetComprehension) -> TExpr:
        cenv = env.child()
        decls: list[tuple[str, Prim]] = []
        bad = False
        for d in e.decls:
            ty = self.resolve_var_type(cenv, d, "comprehension variables")
            for name in d.names:
                if self.lookup(cenv, name) is not None or name in cenv.values:
                    self.error(DK.SHADOWING, d.loc, f"'{name}' shadows an existing declaration")
                cenv.values[name] = Binding(VarKind.BOUND, ty)
                if isinstance(ty, Scalar):
                    decls.append((name, ty.prim))
                else:
                    bad = True
        body = self.check_type(cenv, e.body, BOOL)
        ty = ERROR if bad else from_columns(tuple(p for _, p in decls))
        return TComprehension(tuple(decls), body, ty, e.loc)

    def bind_temp_vars(self, env: Environment, args: tuple[Expr, ...], params: tuple[tuple[str, SemType], ...]) -> None:
        """Undeclared bare identifiers among call arguments become temporaries."""
        for i, a in enumerate(args):
            if isinstance(a, Lval) and len(a.path) == 1 and self.lookup(env, a.path[0]) is None:
                ty = params[i][1] if i < len(params) else ERROR
                if isinstance(ty, SetOf):
                    ty = Scalar(ty.prim)
                env.temps[a.path[0]] = Binding(VarKind.TEMP, ty)

    def _call_args(self, env: Environment, args: tuple[Expr, ...], sig: Optional[ActionSig],
                   loc: SourceLocation, label: str) -> tuple[TExpr, ...]:
        params = sig.params if sig is not None else ()
        if env.in_context:
            self.bind_temp_vars(env, args, params)
        if sig is not None and len(args) != len(params):
            self.error(DK.ARITY_MISMATCH, loc, f"'{label}' takes {len(params)} argument(s), {len(args)} given")
        out = []
        for i, a in enumerate(args):
            if i < len(params):
                out.append(self.check_type(env, a, params[i][1]))
            else:
                out.append(self.infer_type(env, a))
        return tuple(out)

    def _infer_call(self, env: Environment, e: Call) -> TExpr:
        what = "'can'" if e.can is not CanPrefix.NONE else f"call of '{e.action}'"
        self._context(env, e.loc, what)
        sig = env.values.get(e.action)
        if not isinstance(sig, ActionSig):
            self.error(DK.UNKNOWN_ACTION, e.loc, f"unknown action '{e.action}'")
            sig = None
        args = self._call_args(env, e.args, sig, e.loc, e.action)
        if sig is None:
            return TCall(e.action, ActionKind.MUTATOR, args, e.can, ERROR, "", e.loc)
        if sig.kind is ActionKind.QUERY and e.can is CanPrefix.NONE:
            ty = sig.return_type or ERROR
        else:
            ty = BOOL
        return TCall(e.action, sig.kind, args, e.can, ty, "", e.loc)

    # apps

    def analyze_app(self, app: App) -> TApp:
        env = self.fresh_env()
        self._qualify = True
        if app.name in self.apps:
            self.error(DK.DUPLICATE_NAME, app.loc, f"app '{app.name}' is already defined")
        else:
            self.apps[app.name] = app.name
        base_dir = Path(app.loc.file_path).parent
        raw: dict[str, ConceptSummary] = {}
        failed: set[str] = set()
        deps_by_alias: dict[str, Dependency] = {}
        for d in app.deps:
            alias = d.path.name
            if alias in deps_by_alias:
                self.error(DK.DUPLICATE_NAME, d.loc, f"'{alias}' is included twice")
                continue
            deps_by_alias[alias] = d
            summary = self.concepts.get(alias)
            if summary is None:
                try:
                    concept, _ = self.loader.resolve(base_dir, d.path)
                except IncludeError as exc:
                    self.error(exc.kind, d.loc, exc.detail)
                    failed.add(alias)
                    continue
                qualify = self._qualify
                self.analyze_concept(concept, included=True)
                self._qualify = qualify
                summary = self.concepts.get(alias)
                if summary is None:
                    failed.add(alias)
                    continue
            raw[alias] = summary

        # pass 1: instantiate type arguments, following qualified references on demand
        resolved: dict[str, dict[Prim, Prim]] = {}
        in_progress: set[str] = set()

        def instantiate(alias: str) -> Optional[dict[Prim, Prim]]:
            if alias in resolved:
                return resolved[alias]
            if alias in failed or alias not in raw:
                return None
            if alias in in_progress:
                self.error(DK.TYPE_MISMATCH, deps_by_alias[alias].loc,
                           f"type arguments of '{alias}' depend on themselves")
                failed.add(alias)
                return None
            in_progress.add(alias)
            mapping = self._instantiate_dep(deps_by_alias[alias], raw[alias], raw, failed, instantiate)
            in_progress.discard(alias)
            if mapping is None:
                failed.add(alias)
                return None
            resolved[alias] = mapping
            return mapping

        tdeps = []
        for alias, d in deps_by_alias.items():
            mapping = instantiate(alias)
            if mapping is not None:
                env.deps[alias] = raw[alias].instantiate(mapping, alias)
                tdeps.append(TDep(alias, alias, tuple(mapping[p] for p in raw[alias].type_params), d.loc))

        # pass 2: synchronizations
        syncs = [self.check_sync(env, s, failed) for s in app.syncs]
        tapp = TApp(app.name, tuple(tdeps), tuple(syncs), app.loc.file_path, app.loc)
        self.typed.apps.append(tapp)
        self._qualify = False
        return tapp

    def _instantiate_dep(self, d: Dependency, summary: ConceptSummary, raw: dict[str, ConceptSummary],
                         failed: set[str], instantiate) -> Optional[dict[Prim, Prim]]:
        params = summary.type_params
        if params and not d.type_args:
            self.error(DK.MISSING_TYPE_ARGS, d.loc,
                       f"generic concept '{summary.name}' needs {len(params)} type argument(s)")
            return None
        if len(d.type_args) != len(params):
            self.error(DK.ARITY_MISMATCH, d.loc,
                       f"concept '{summary.name}' takes {len(params)} type argument(s), {len(d.type_args)} given")
            return None
        mapping: dict[Prim, Prim] = {}
        ok = True
        for param, arg in zip(params, d.type_args):
            prim = self._resolve_type_arg(arg, raw, failed, instantiate)
            if prim is None:
                ok = False
            else:
                mapping[param] = prim
        return mapping if ok else None

    def _resolve_type_arg(self, q: QualifiedPrim, raw: dict[str, ConceptSummary], failed: set[str],
                          instantiate) -> Optional[Prim]:
        if q.prim.kind is PrimKind.STRING:
            return STRING_PRIM
        if q.prim.kind is PrimKind.INT:
            return INT_PRIM
        if q.namespace is None:
            self.error(DK.UNKNOWN_TYPE, q.loc, f"unknown type '{q.prim.name}'; qualify it with a concept name")
            return None
        if q.namespace in failed:
            return None
        summary = raw.get(q.namespace)
        if summary is None:
            self.error(DK.UNKNOWN_CONCEPT, q.loc, f"'{q.namespace}' is not an included concept")
            return None
        for p in summary.custom_types:
            if p.name == q.prim.name:
                return p
        for p in summary.type_params:
            if p.name == q.prim.name:
                mapping = instantiate(q.namespace)
                return None if mapping is None else mapping[p]
        self.error(DK.UNKNOWN_TYPE, q.loc, f"concept '{q.namespace}' has no type '{q.prim.name}'")
        return None

    def check_sync(self, env: Environment, s: Sync, failed: set[str]) -> TSync:
        senv = env.child(in_sync=True, temps={})
        singletons: list[tuple[str, Prim]] = []
        trigger = self._sync_call(senv, s.trigger, failed, singletons, is_trigger=True)
        responses = tuple(self._sync_call(senv, r, failed, singletons, is_trigger=False) for r in s.responses)
        temps = tuple((n, b.type) for n, b in senv.temps.items())
        return TSync(trigger, responses, temps, tuple(singletons), s.loc)

    def _sync_call(self, env: Environment, c: SyncCall, failed: set[str],
                   singletons: list[tuple[str, Prim]], is_trigger: bool) -> TSyncCall:
        sig: Optional[ActionSig] = None
        label = f"{c.concept}.{c.action}"
        if c.concept in failed:
            pass
        elif c.concept not in env.deps:
            self.error(DK.UNKNOWN_CONCEPT, c.loc, f"concept '{c.concept}' is not included in this app")
        else:
            sig = env.deps[c.concept].actions.get(c.action)
            if sig is None:
                self.error(DK.UNKNOWN_ACTION, c.loc, f"concept '{c.concept}' has no action '{c.action}'")
            elif sig.kind is ActionKind.QUERY:
                role = "trigger" if is_trigger else "response"
                self.error(DK.NOT_A_MUTATOR, c.loc, f"query '{label}' cannot be a synchronization {role}")
        env.current_concept = c.concept
        params = sig.params if sig is not None else ()
        exprs = tuple(a.expr for a in c.args)
        if sig is not None and len(exprs) != len(params):
            self.error(DK.ARITY_MISMATCH, c.loc, f"'{label}' takes {len(params)} argument(s), {len(exprs)} given")
        # bind singletons first so they are not mistaken for temporaries
        for i, a in enumerate(c.args):
            if a.mult is None:
                continue
            if not is_trigger:
                self.error(DK.MULT_ON_RESPONSE, a.loc, "multiplicities are only allowed on trigger arguments")
                continue
            if a.mult is not Mult.ONE:
                self.error(DK.UNSUPPORTED_MULTIPLICITY, a.loc,
                           f"only 'one' is supported on trigger arguments, found '{a.mult.value}'")
                continue
            if not (isinstance(a.expr, Lval) and len(a.expr.path) == 1):
                self.error(DK.UNSUPPORTED_MULTIPLICITY, a.loc, "'one' must prefix a plain name")
                continue
            name = a.expr.path[0]
            ty = params[i][1] if i < len(params) else ERROR
            if self.lookup(env, name) is not None:
                self.error(DK.SHADOWING, a.loc, f"'{name}' shadows an existing declaration")
            elif isinstance(ty, (Scalar, SetOf)):
                env.values[name] = Binding(VarKind.SINGLETON, Scalar(ty.prim))
                singletons.append((name, ty.prim))
            else:
                env.values[name] = Binding(VarKind.SINGLETON, ERROR)
        self.bind_temp_vars(env, exprs, params)
        args = []
        for i, a in enumerate(exprs):
            if i < len(params):
                args.append(self.check_type(env, a, params[i][1]))
            else:
                args.append(self.infer_type(env, a))
        return TSyncCall(c.concept, c.action, tuple(args), tuple(a.mult for a in c.args), c.loc)


def analyze(model: Model, loader: Optional[IncludeLoader] = None,
            sink: Optional[DiagnosticSink] = None) -> tuple[TypedModel, DiagnosticSink]:
    return Analyzer(loader, sink).analyze(model)
