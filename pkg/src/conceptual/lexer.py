"""Hand-written longest-match lexer with a token cache for injected tokens."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Iterator, Optional, Union

from .diagnostics import LexError, SourceLocation

INT64_MAX = 2**63 - 1


class TokenKind(Enum):
    PLUS = auto()
    MINUS = auto()
    AMP = auto()
    COLON = auto()
    DOT = auto()
    COMMA = auto()
    TILDE = auto()
    CARET = auto()
    STAR = auto()
    SLASH = auto()
    PERCENT = auto()
    CARD = auto()
    LPAR = auto()
    RPAR = auto()
    LBRACK = auto()
    RBRACK = auto()
    LBRACE = auto()
    RBRACE = auto()
    PIPE = auto()
    LT = auto()
    GT = auto()
    LTE = auto()
    GTE = auto()
    EQ = auto()
    LAND = auto()
    LOR = auto()
    ARROW = auto()
    EMPTY = auto()
    WHEN = auto()
    IN = auto()
    NOT = auto()
    SET = auto()
    ONE = auto()
    LONE = auto()
    SOME = auto()
    CONST = auto()
    STR = auto()
    INT = auto()
    CAN = auto()
    UNTIL = auto()
    THEN = auto()
    NO = auto()
    CONCEPT = auto()
    PURPOSE = auto()
    STATE = auto()
    ACTIONS = auto()
    OP = auto()
    APP = auto()
    INCLUDE = auto()
    SYNC = auto()
    IDENT = auto()
    ACT = auto()
    INT_LIT = auto()
    STR_LIT = auto()
    EOF = auto()


K = TokenKind

KEYWORDS: dict[str, TokenKind] = {
    "and": K.LAND,
    "or": K.LOR,
    "when": K.WHEN,
    "can": K.CAN,
    "until": K.UNTIL,
    "then": K.THEN,
    "no": K.NO,
    "is": K.EQ,
    "empty": K.EMPTY,
    "none": K.EMPTY,
    "in": K.IN,
    "not": K.NOT,
    "set": K.SET,
    "one": K.ONE,
    "lone": K.LONE,
    "some": K.SOME,
    "const": K.CONST,
    "string": K.STR,
    "int": K.INT,
    "concept": K.CONCEPT,
    "purpose": K.PURPOSE,
    "state": K.STATE,
    "actions": K.ACTIONS,
    "principle": K.OP,
    "app": K.APP,
    "include": K.INCLUDE,
    "sync": K.SYNC,
}

# Two-character operators are tried before single characters (longest match).
DOUBLE_SYMBOLS: dict[str, TokenKind] = {
    "<=": K.LTE,
    ">=": K.GTE,
    "&&": K.LAND,
    "||": K.LOR,
    "->": K.ARROW,
    "{}": K.EMPTY,
}

SINGLE_SYMBOLS: dict[str, TokenKind] = {
    "=": K.EQ,
    "+": K.PLUS,
    "-": K.MINUS,
    "&": K.AMP,
    ":": K.COLON,
    ";": K.THEN,
    ".": K.DOT,
    ",": K.COMMA,
    "!": K.NOT,
    "~": K.TILDE,
    "^": K.CARET,
    "#": K.CARD,
    "*": K.STAR,
    "%": K.PERCENT,
    "/": K.SLASH,
    "(": K.LPAR,
    ")": K.RPAR,
    "[": K.LBRACK,
    "]": K.RBRACK,
    "{": K.LBRACE,
    "}": K.RBRACE,
    "|": K.PIPE,
    "<": K.LT,
    ">": K.GT,
}

ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "r": "\r"}
SEPARATORS = " \t\r\n"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: Union[str, int, None]
    loc: SourceLocation = field(compare=False)
    text: str = field(default="", compare=False)

    def __str__(self) -> str:
        if self.value is None:
            return self.kind.name
        return f"{self.kind.name}({self.value!r})"


class TokenCache:
    """FIFO of synthesized tokens consulted before fresh lexing."""

    def __init__(self) -> None:
        self._queue: deque[Token] = deque()

    def push(self, tok: Token) -> None:
        self._queue.append(tok)

    def pop(self) -> Optional[Token]:
        return self._queue.popleft() if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)


def _is_ident_start(c: str) -> bool:
    return ("a" <= c <= "z") or ("A" <= c <= "Z")


def _is_ident_char(c: str) -> bool:
    return _is_ident_start(c) or ("0" <= c <= "9") or c == "_"


class Lexer:
    def __init__(self, text: str, file_path: str = "<input>") -> None:
        self.text = text
        self.file_path = file_path
        self.pos = 0
        self.line = 1
        self.col = 1
        self.cache = TokenCache()

    # position helpers

    def _peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def _advance(self, n: int = 1) -> str:
        chunk = self.text[self.pos:self.pos + n]
        for c in chunk:
            if c == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += len(chunk)
        return chunk

    def _loc_from(self, line: int, col: int) -> SourceLocation:
        return SourceLocation(self.file_path, line, col, self.line, self.col)

    def _skip_trivia(self) -> None:
        while True:
            c = self._peek()
            if c and c in SEPARATORS:
                self._advance()
            elif c == "/" and self._peek(1) == "/":
                while self._peek() and self._peek() != "\n":
                    self._advance()
            elif c == "/" and self._peek(1) == "*":
                self._skip_block_comment()
            else:
                return

    def _skip_block_comment(self) -> None:
        line, col = self.line, self.col
        self._advance(2)
        depth = 1
        while depth:
            if not self._peek():
                raise LexError("unterminated block comment", self._loc_from(line, col))
            if self._peek() == "/" and self._peek(1) == "*":
                self._advance(2)
                depth += 1
            elif self._peek() == "*" and self._peek(1) == "/":
                self._advance(2)
                depth -= 1
            else:
                self._advance()

    def next_token(self) -> Token:
        cached = self.cache.pop()
        if cached is not None:
            return cached
        self._skip_trivia()
        line, col = self.line, self.col
        c = self._peek()
        if not c:
            return Token(K.EOF, None, self._loc_from(line, col))
        if _is_ident_start(c):
            return self._lex_word(line, col)
        if "0" <= c <= "9":
            return self._lex_int(line, col)
        if c == '"':
            return self._lex_string(line, col)
        two = self.text[self.pos:self.pos + 2]
        if two in DOUBLE_SYMBOLS:
            self._advance(2)
            return Token(DOUBLE_SYMBOLS[two], None, self._loc_from(line, col), two)
        if c in SINGLE_SYMBOLS:
            self._advance()
            return Token(SINGLE_SYMBOLS[c], None, self._loc_from(line, col), c)
        self._advance()
        raise LexError(f"unrecognized character sequence {c!r}", self._loc_from(line, col))

    def _lex_word(self, line: int, col: int) -> Token:
        start = self.pos
        while _is_ident_char(self._peek()):
            self._advance()
        word = self.text[start:self.pos]
        loc = self._loc_from(line, col)
        kind = KEYWORDS.get(word)
        if kind is not None:
            return Token(kind, None, loc, word)
        if self._peek() == "(":
            return self.lex_action_head(word, loc)
        return Token(K.IDENT, word, loc, word)

    def lex_action_head(self, name: str, loc: SourceLocation) -> Token:
        """Identifier glued to '(' becomes ACT; the paren itself goes through the cache."""
        pline, pcol = self.line, self.col
        self._advance()
        self.cache.push(Token(K.LPAR, None, self._loc_from(pline, pcol), "("))
        return Token(K.ACT, name, loc, name)

    def _lex_int(self, line: int, col: int) -> Token:
        start = self.pos
        while "0" <= self._peek() <= "9" and self._peek():
            self._advance()
        digits = self.text[start:self.pos]
        loc = self._loc_from(line, col)
        value = int(digits)
        if value > INT64_MAX:
            raise LexError(f"integer literal {digits} does not fit in 64 bits", loc)
        return Token(K.INT_LIT, value, loc, digits)

    def _lex_string(self, line: int, col: int) -> Token:
        start = self.pos
        self._advance()
        out: list[str] = []
        while True:
            c = self._peek()
            if not c or c == "\n":
                raise LexError("unterminated string literal", self._loc_from(line, col))
            if c == '"':
                self._advance()
                break
            if c == "\\":
                esc = self._peek(1)
                if esc not in ESCAPES or not esc:
                    eline, ecol = self.line, self.col
                    self._advance(2 if esc else 1)
                    raise LexError(f"invalid escape sequence '\\{esc}'", self._loc_from(eline, ecol))
                out.append(ESCAPES[esc])
                self._advance(2)
                continue
            out.append(c)
            self._advance()
        return Token(K.STR_LIT, "".join(out), self._loc_from(line, col), self.text[start:self.pos])

    def __iter__(self) -> Iterator[Token]:
        while True:
            tok = self.next_token()
            yield tok
            if tok.kind is K.EOF:
                return


def decode_string_literal(raw: str) -> str:
    """Decode a quoted literal such as '"a\\nb"' into its payload."""
    if len(raw) < 2 or raw[0] != '"':
        raise LexError("string literal must start with '\"'", SourceLocation.point("<literal>", 1, 1))
    tok = Lexer(raw, "<literal>").next_token()
    if tok.kind is not K.STR_LIT or len(tok.text) != len(raw):
        raise LexError("malformed string literal", tok.loc)
    return tok.value  # type: ignore[return-value]


def tokenize(text: str, file_path: str = "<input>") -> list[Token]:
    """All tokens of text, ending with a single EOF."""
    return list(Lexer(text, file_path))


def dump_tokens(tokens: list[Token]) -> str:
    return "\n".join(f"{t} @{t.loc.start_line}:{t.loc.start_col}" for t in tokens)
