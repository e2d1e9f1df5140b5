"""Recursive-descent parser with Pratt-style expression parsing.

Binding levels, loosest first: then(1, right) until(2) no(3, prefix) ||(4)
&&(5) !(6, prefix) comparisons(7, non-assoc) + -(8) #(9, prefix) & * / %(10)
->(11) box join(12, postfix) .(13) ~ ^ *^(14, prefix). Binding powers are
twice the level so right-associative operators can use level*2 - 1.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional, Union

from .diagnostics import ParseError, SourceLocation
from .lexer import Lexer, Token, TokenKind as K
from .syntax import (
    INT, STRING, Action, App, BinOp, BoxJoin, Call, CanPrefix, CmpOp, Compare, Concept, Decl,
    Dependency, EmptySet, Expr, FilePath, IntLit, Lval, Model, Mult, Mutator, PrimType,
    QualifiedPrim, Query, RelationType, ScalarType, SetComprehension, StateDecl, Stmt, StrLit,
    Sync, SyncArg, SyncCall, TypeNode, Unop, UnOp, Binop,
)

INFIX: dict[K, tuple[int, BinOp]] = {
    K.THEN: (1, BinOp.THEN),
    K.UNTIL: (2, BinOp.UNTIL),
    K.LOR: (4, BinOp.LOR),
    K.LAND: (5, BinOp.LAND),
    K.PLUS: (8, BinOp.PLUS),
    K.MINUS: (8, BinOp.MINUS),
    K.AMP: (10, BinOp.AMP),
    K.STAR: (10, BinOp.STAR),
    K.SLASH: (10, BinOp.SLASH),
    K.PERCENT: (10, BinOp.PERCENT),
    K.ARROW: (11, BinOp.ARROW),
    K.DOT: (13, BinOp.DOT),
}
RIGHT_ASSOC = {BinOp.THEN}

COMPARE: dict[K, CmpOp] = {
    K.EQ: CmpOp.EQ,
    K.IN: CmpOp.IN,
    K.LT: CmpOp.LT,
    K.GT: CmpOp.GT,
    K.LTE: CmpOp.LTE,
    K.GTE: CmpOp.GTE,
}

COMPARE_LEVEL = 7
BOX_LEVEL = 12
PREFIX_LEVEL = {UnOp.NO: 3, UnOp.NOT: 6, UnOp.CARD: 9, UnOp.TRANSPOSE: 14, UnOp.CLOSURE: 14,
                UnOp.REFLEXIVE_CLOSURE: 14}

MULTS = {K.SET: Mult.SET, K.ONE: Mult.ONE, K.LONE: Mult.LONE}

# Tokens that may start a compound assignment operator `<binop>=`.
COMPOUND_OPS = {k: op for k, (_, op) in INFIX.items()}

EXPR_START = {K.MINUS, K.INT_LIT, K.STR_LIT, K.EMPTY, K.IDENT, K.ACT, K.CAN, K.LPAR, K.LBRACE,
              K.TILDE, K.CARET, K.STAR, K.CARD, K.NO, K.NOT}

TokenSource = Union[Lexer, Iterable[Token]]


class Parser:
    def __init__(self, source: TokenSource, file_path: Optional[str] = None) -> None:
        if isinstance(source, Lexer):
            self.file_path = file_path or source.file_path
            self._tokens: Iterator[Token] = iter(source)
        else:
            self._tokens = iter(source)
            self.file_path = file_path or "<input>"
        self._buf: deque[Token] = deque()
        self._eof: Optional[Token] = None
        self.last: Optional[Token] = None

    # token plumbing

    def peek(self, k: int = 0) -> Token:
        while len(self._buf) <= k:
            if self._eof is not None:
                self._buf.append(self._eof)
                continue
            tok = next(self._tokens, None)
            if tok is None:
                tok = Token(K.EOF, None, self.approximate_error_location())
            if tok.kind is K.EOF:
                self._eof = tok
            self._buf.append(tok)
        return self._buf[k]

    def at(self, *kinds: K) -> bool:
        return self.peek().kind in kinds

    def advance(self) -> Token:
        tok = self.peek()
        self._buf.popleft()
        self.last = tok
        return tok

    def accept(self, kind: K) -> Optional[Token]:
        return self.advance() if self.at(kind) else None

    def expect(self, kind: K, what: str = "") -> Token:
        if not self.at(kind):
            raise self.error(f"expected {what or kind.name}")
        return self.advance()

    def approximate_error_location(self) -> SourceLocation:
        """End of the most recently consumed token, or the start of the file."""
        if self.last is None:
            return SourceLocation.point(self.file_path, 1, 1)
        end = self.last.loc
        return SourceLocation.point(end.file_path, end.end_line, end.end_col)

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        shown = "end of input" if tok.kind is K.EOF else f"'{tok.text or tok.kind.name}' ({tok.kind.name})"
        return ParseError(f"syntax error: unexpected {shown}, {expected}", self.approximate_error_location())

    def _span(self, start: SourceLocation) -> SourceLocation:
        end = self.last.loc if self.last is not None else start
        return start.span_to(end)

    # program structure

    def parse_model(self) -> Model:
        start = self.peek().loc
        concepts = []
        while self.at(K.CONCEPT):
            concepts.append(self.parse_concept())
        apps = []
        while self.at(K.APP):
            apps.append(self.parse_app())
        if not self.at(K.EOF):
            raise self.error("expected 'concept', 'app' or end of input")
        self.advance()
        return Model(tuple(concepts), tuple(apps), start.span_to(self.last.loc))

    def parse_concept(self) -> Concept:
        start = self.expect(K.CONCEPT).loc
        name = self.expect(K.IDENT, "concept name").value
        params: list[str] = []
        if self.accept(K.LBRACK):
            if not self.at(K.RBRACK):
                params.append(self.expect(K.IDENT, "type parameter").value)
                while self.accept(K.COMMA):
                    params.append(self.expect(K.IDENT, "type parameter").value)
            self.expect(K.RBRACK, "']'")
        self.expect(K.PURPOSE, "'purpose'")
        purpose = self.expect(K.STR_LIT, "purpose string").value
        self.expect(K.STATE, "'state'")
        states = []
        while self.at(K.CONST, K.IDENT):
            states.append(self.parse_state())
        self.expect(K.ACTIONS, "'actions'")
        actions = [self.parse_action()]
        while self.at(K.ACT):
            actions.append(self.parse_action())
        self.expect(K.OP, "'principle'")
        principles = []
        if self.peek().kind in EXPR_START:
            principles.append(self.parse_expr())
            while self.accept(K.COMMA):
                principles.append(self.parse_expr())
        return Concept(name, tuple(params), purpose, tuple(states), tuple(actions),
                       tuple(principles), self._span(start))

    def parse_state(self) -> StateDecl:
        start = self.peek().loc
        is_const = self.accept(K.CONST) is not None
        decl = self.parse_decl()
        init = self.parse_expr() if self.accept(K.EQ) else None
        return StateDecl(decl.names, decl.type, is_const, init, self._span(start))

    def parse_decl(self) -> Decl:
        start = self.peek().loc
        names = [self.expect(K.IDENT, "name").value]
        while self.accept(K.COMMA):
            names.append(self.expect(K.IDENT, "name").value)
        self.expect(K.COLON, "':'")
        ty = self.parse_type()
        return Decl(tuple(names), ty, self._span(start))

    def parse_decl_list(self, closer: K) -> tuple[Decl, ...]:
        decls: list[Decl] = []
        if self.at(closer):
            return ()
        decls.append(self.parse_decl())
        while self.accept(K.COMMA):
            decls.append(self.parse_decl())
        return tuple(decls)

    def parse_prim(self) -> PrimType:
        tok = self.peek()
        if tok.kind is K.STR:
            self.advance()
            return PrimType(STRING.kind, "", tok.loc)
        if tok.kind is K.INT:
            self.advance()
            return PrimType(INT.kind, "", tok.loc)
        if tok.kind is K.IDENT:
            self.advance()
            return PrimType.named(tok.value, tok.loc)
        raise self.error("expected a type ('string', 'int' or a type name)")

    def parse_type(self) -> TypeNode:
        start = self.peek().loc
        if self.peek().kind in MULTS:
            mult = MULTS[self.advance().kind]
            prim = self.parse_prim()
            if self.at(K.ARROW):
                raise self.error("a multiplicity may only prefix the final column of a relation")
            return ScalarType(mult, prim, self._span(start))
        cols = [self.parse_prim()]
        if not self.at(K.ARROW):
            return ScalarType(None, cols[0], self._span(start))
        target: Optional[Mult] = None
        while self.accept(K.ARROW):
            if self.peek().kind in MULTS:
                target = MULTS[self.advance().kind]
                cols.append(self.parse_prim())
                if self.at(K.ARROW):
                    raise self.error("a multiplicity may only prefix the final column of a relation")
                break
            cols.append(self.parse_prim())
        return RelationType(tuple(cols), target, self._span(start))

    def parse_action(self) -> Action:
        start = self.peek().loc
        name = self.expect(K.ACT, "action signature 'name('").value
        self.expect(K.LPAR)
        params = self.parse_decl_list(K.RPAR)
        self.expect(K.RPAR, "')'")
        if self.accept(K.COLON):
            ret = self.parse_type()
            body = self.parse_expr()
            return Query(name, params, ret, body, self._span(start))
        cond = self.parse_expr() if self.accept(K.WHEN) else None
        stmts = []
        while self.at(K.IDENT):
            stmts.append(self.parse_stmt())
        return Mutator(name, params, cond, tuple(stmts), self._span(start))

    def parse_lval_path(self) -> Lval:
        tok = self.expect(K.IDENT, "assignable name")
        path = [tok.value]
        while self.at(K.DOT) and self.peek(1).kind is K.IDENT:
            self.advance()
            path.append(self.advance().value)
        return Lval(tuple(path), self._span(tok.loc))

    def parse_stmt(self) -> Stmt:
        start = self.peek().loc
        lhs = [self.parse_lval_path()]
        while self.accept(K.COMMA):
            lhs.append(self.parse_lval_path())
        op: Optional[BinOp] = None
        if self.at(K.COLON) and self.peek(1).kind is K.EQ:
            self.advance()
            self.advance()
        elif self.peek().kind in COMPOUND_OPS and self.peek(1).kind is K.EQ:
            op = COMPOUND_OPS[self.advance().kind]
            self.advance()
        else:
            raise self.error("expected ':=' or a compound assignment such as '+='")
        rhs = self.parse_expr()
        return Stmt(tuple(lhs), op, rhs, self._span(start))

    # apps

    def parse_app(self) -> App:
        start = self.expect(K.APP).loc
        name = self.expect(K.IDENT, "app name").value
        self.expect(K.INCLUDE, "'include'")
        deps = [self.parse_dependency()]
        while self.at(K.IDENT, K.DOT):
            deps.append(self.parse_dependency())
        syncs = []
        while self.at(K.SYNC):
            syncs.append(self.parse_sync())
        return App(name, tuple(deps), tuple(syncs), self._span(start))

    def parse_filepath(self) -> FilePath:
        start = self.peek().loc
        dirs: list[str] = []
        while True:
            if self.at(K.DOT) and self.peek(1).kind is K.DOT and self.peek(2).kind is K.SLASH:
                for _ in range(3):
                    self.advance()
                dirs.append("..")
            elif self.at(K.IDENT) and self.peek(1).kind is K.SLASH:
                dirs.append(self.advance().value)
                self.advance()
            else:
                break
        name = self.expect(K.IDENT, "file name").value
        ext = None
        if self.at(K.DOT) and self.peek(1).kind is K.IDENT:
            self.advance()
            ext = self.advance().value
        return FilePath(tuple(dirs), name, ext, self._span(start))

    def parse_dependency(self) -> Dependency:
        start = self.peek().loc
        path = self.parse_filepath()
        args: list[QualifiedPrim] = []
        brackets = False
        if self.accept(K.LBRACK):
            brackets = True
            if not self.at(K.RBRACK):
                args.append(self.parse_qualified_prim())
                while self.accept(K.COMMA):
                    args.append(self.parse_qualified_prim())
            self.expect(K.RBRACK, "']'")
        return Dependency(path, tuple(args), brackets, self._span(start))

    def parse_qualified_prim(self) -> QualifiedPrim:
        start = self.peek().loc
        ns = None
        if self.at(K.IDENT) and self.peek(1).kind is K.DOT:
            ns = self.advance().value
            self.advance()
        prim = self.parse_prim()
        return QualifiedPrim(ns, prim, self._span(start))

    def parse_sync(self) -> Sync:
        start = self.expect(K.SYNC).loc
        trigger = self.parse_sync_call()
        responses = [self.parse_sync_call()]
        while self.at(K.IDENT) and self.peek(1).kind is K.DOT:
            responses.append(self.parse_sync_call())
        return Sync(trigger, tuple(responses), self._span(start))

    def parse_sync_call(self) -> SyncCall:
        start = self.peek().loc
        concept = self.expect(K.IDENT, "concept name").value
        self.expect(K.DOT, "'.'")
        action = self.expect(K.ACT, "action call 'name('").value
        self.expect(K.LPAR)
        args: list[SyncArg] = []
        if not self.at(K.RPAR):
            args.append(self.parse_sync_arg())
            while self.accept(K.COMMA):
                args.append(self.parse_sync_arg())
        self.expect(K.RPAR, "')'")
        return SyncCall(concept, action, tuple(args), self._span(start))

    def parse_sync_arg(self) -> SyncArg:
        start = self.peek().loc
        mult = MULTS[self.advance().kind] if self.peek().kind in MULTS else None
        expr = self.parse_expr()
        return SyncArg(mult, expr, self._span(start))

    # expressions

    def parse_expr(self, min_bp: int = 0) -> Expr:
        start = self.peek().loc
        left = self.parse_prefix()
        while True:
            tok = self.peek()
            if tok.kind in COMPARE or (tok.kind is K.NOT and self.peek(1).kind in COMPARE):
                bp = 2 * COMPARE_LEVEL
                if bp <= min_bp:
                    break
                negated = self.accept(K.NOT) is not None
                op = COMPARE[self.advance().kind]
                right = self.parse_expr(bp)
                left = Compare(op, negated, left, right, self._span(start))
                nxt = self.peek()
                if nxt.kind in COMPARE or (nxt.kind is K.NOT and self.peek(1).kind in COMPARE):
                    raise self.error("comparison operators do not chain; add parentheses")
                continue
            if tok.kind is K.LBRACK:
                if 2 * BOX_LEVEL <= min_bp:
                    break
                self.advance()
                args = [self.parse_expr()]
                while self.accept(K.COMMA):
                    args.append(self.parse_expr())
                self.expect(K.RBRACK, "']'")
                left = BoxJoin(left, tuple(args), self._span(start))
                continue
            if tok.kind in INFIX:
                level, op = INFIX[tok.kind]
                bp = 2 * level
                if bp <= min_bp:
                    break
                self.advance()
                right = self.parse_expr(bp - 1 if op in RIGHT_ASSOC else bp)
                if op is BinOp.DOT and isinstance(left, Lval) and isinstance(right, Lval):
                    left = Lval(left.path + right.path, self._span(start))
                else:
                    left = Binop(op, left, right, self._span(start))
                continue
            break
        return left

    def _prefix(self, op: UnOp, start: SourceLocation) -> Unop:
        operand = self.parse_expr(2 * PREFIX_LEVEL[op])
        return Unop(op, operand, self._span(start))

    def parse_prefix(self) -> Expr:
        tok = self.peek()
        start = tok.loc
        kind = tok.kind
        if kind is K.MINUS:
            self.advance()
            lit = self.expect(K.INT_LIT, "integer literal after '-'")
            return IntLit(-lit.value, self._span(start))
        if kind is K.INT_LIT:
            self.advance()
            return IntLit(tok.value, tok.loc)
        if kind is K.STR_LIT:
            self.advance()
            return StrLit(tok.value, tok.loc)
        if kind is K.EMPTY:
            self.advance()
            return EmptySet(tok.loc)
        if kind is K.IDENT:
            self.advance()
            return Lval((tok.value,), tok.loc)
        if kind is K.ACT:
            return self.parse_call(CanPrefix.NONE, start)
        if kind is K.CAN:
            self.advance()
            prefix = CanPrefix.CAN_NOT if self.accept(K.NOT) else CanPrefix.CAN
            if not self.at(K.ACT):
                raise self.error("expected an action call after 'can'")
            return self.parse_call(prefix, start)
        if kind is K.LPAR:
            self.advance()
            inner = self.parse_expr()
            self.expect(K.RPAR, "')'")
            return inner
        if kind is K.LBRACE:
            self.advance()
            decls = [self.parse_decl()]
            while self.accept(K.COMMA):
                decls.append(self.parse_decl())
            self.expect(K.PIPE, "'|'")
            body = self.parse_expr()
            self.expect(K.RBRACE, "'}'")
            return SetComprehension(tuple(decls), body, self._span(start))
        if kind is K.TILDE:
            self.advance()
            return self._prefix(UnOp.TRANSPOSE, start)
        if kind is K.CARET:
            self.advance()
            return self._prefix(UnOp.CLOSURE, start)
        if kind is K.STAR:
            self.advance()
            self.expect(K.CARET, "'^' after '*' (reflexive closure is written '*^')")
            return self._prefix(UnOp.REFLEXIVE_CLOSURE, start)
        if kind is K.CARD:
            self.advance()
            return self._prefix(UnOp.CARD, start)
        if kind is K.NO:
            self.advance()
            return self._prefix(UnOp.NO, start)
        if kind is K.NOT:
            self.advance()
            return self._prefix(UnOp.NOT, start)
        raise self.error("expected an expression")

    def parse_call(self, prefix: CanPrefix, start: SourceLocation) -> Call:
        name = self.expect(K.ACT).value
        self.expect(K.LPAR)
        args: list[Expr] = []
        if not self.at(K.RPAR):
            args.append(self.parse_expr())
            while self.accept(K.COMMA):
                args.append(self.parse_expr())
        self.expect(K.RPAR, "')'")
        return Call(name, tuple(args), prefix, self._span(start))

    def finish(self) -> None:
        if not self.at(K.EOF):
            raise self.error("expected end of input")


def _source(source: Union[str, TokenSource], file_path: str) -> Parser:
    if isinstance(source, str):
        return Parser(Lexer(source, file_path))
    return Parser(source, file_path if not isinstance(source, Lexer) else None)


def parse(source: Union[str, TokenSource], file_path: str = "<input>") -> Model:
    """Parse a whole program. Raises ParseError (or LexError) on the first problem."""
    return _source(source, file_path).parse_model()


def parse_expr(source: Union[str, TokenSource], file_path: str = "<input>") -> Expr:
    p = _source(source, file_path)
    e = p.parse_expr()
    p.finish()
    return e


def parse_type(source: Union[str, TokenSource], file_path: str = "<input>") -> TypeNode:
    p = _source(source, file_path)
    t = p.parse_type()
    p.finish()
    return t
