import pytest
from hypothesis import given, settings, strategies as st

from conceptual.diagnostics import LexError
from conceptual.lexer import (
    INT64_MAX, KEYWORDS, Lexer, Token, TokenCache, TokenKind as K, decode_string_literal, dump_tokens,
    tokenize,
)
from conceptual.diagnostics import SourceLocation


def kinds(text):
    return [t.kind for t in tokenize(text)][:-1]


# One row per lexeme of the token table; payload-carrying kinds are covered below.
TOKEN_TABLE = [
    ("+", K.PLUS), ("-", K.MINUS), ("&", K.AMP), (":", K.COLON), (".", K.DOT), (",", K.COMMA),
    ("~", K.TILDE), ("^", K.CARET), ("*", K.STAR), ("/", K.SLASH), ("%", K.PERCENT), ("#", K.CARD),
    ("(", K.LPAR), (")", K.RPAR), ("[", K.LBRACK), ("]", K.RBRACK), ("{", K.LBRACE), ("}", K.RBRACE),
    ("|", K.PIPE), ("<", K.LT), (">", K.GT), ("<=", K.LTE), (">=", K.GTE), ("=", K.EQ), ("is", K.EQ),
    ("&&", K.LAND), ("and", K.LAND), ("||", K.LOR), ("or", K.LOR), ("->", K.ARROW),
    ("{}", K.EMPTY), ("empty", K.EMPTY), ("none", K.EMPTY), ("when", K.WHEN), ("in", K.IN),
    ("!", K.NOT), ("not", K.NOT), ("set", K.SET), ("one", K.ONE), ("lone", K.LONE), ("some", K.SOME),
    ("const", K.CONST), ("string", K.STR), ("int", K.INT), ("can", K.CAN), ("until", K.UNTIL),
    ("then", K.THEN), (";", K.THEN), ("no", K.NO), ("concept", K.CONCEPT), ("purpose", K.PURPOSE),
    ("state", K.STATE), ("actions", K.ACTIONS), ("principle", K.OP), ("app", K.APP),
    ("include", K.INCLUDE), ("sync", K.SYNC),
]

PAYLOAD_TABLE = [
    ("task", K.IDENT, "task"),
    ("add(", K.ACT, "add"),
    ("42", K.INT_LIT, 42),
    ('"pending"', K.STR_LIT, "pending"),
]


@pytest.mark.parametrize("text,kind", TOKEN_TABLE)
def test_token_table_row(text, kind):
    toks = tokenize(text)
    assert [t.kind for t in toks] == [kind, K.EOF]
    assert toks[0].value is None


@pytest.mark.parametrize("text,kind,value", PAYLOAD_TABLE)
def test_payload_rows(text, kind, value):
    tok = tokenize(text)[0]
    assert tok.kind is kind and tok.value == value


def test_table_is_exhaustive():
    covered = {k for _, k in TOKEN_TABLE} | {k for _, k, _ in PAYLOAD_TABLE} | {K.EOF}
    assert covered == set(K)


def test_eof_repeats():
    lx = Lexer("")
    assert [lx.next_token().kind for _ in range(3)] == [K.EOF] * 3


DOUBLES = ["<=", ">=", "&&", "||", "->", "{}"]


@pytest.mark.parametrize("op", DOUBLES)
@pytest.mark.parametrize("prefix,suffix", [("", ""), ("a", "b"), ("x ", " y"), ("1", "2")])
def test_longest_match(op, prefix, suffix):
    toks = tokenize(prefix + op + suffix)
    singles = {K.LT, K.GT, K.AMP, K.PIPE, K.MINUS, K.LBRACE, K.EQ, K.RBRACE}
    ops = [t for t in toks if t.text == op]
    assert len(ops) == 1
    assert not any(t.kind in singles for t in toks)


def test_split_braces_are_two_tokens():
    assert kinds("{ }") == [K.LBRACE, K.RBRACE]


def test_less_then_equals_with_space():
    assert kinds("< =") == [K.LT, K.EQ]


def test_reflexive_closure_is_two_tokens():
    assert kinds("*^r") == [K.STAR, K.CARET, K.IDENT]


def test_minus_before_digits_is_separate():
    assert kinds("-5") == [K.MINUS, K.INT_LIT]


class TestComments:
    def test_line_comment(self):
        assert kinds("// x\nconcept") == [K.CONCEPT]

    def test_nested_block(self):
        assert kinds("/* a /* b */ c */ concept") == [K.CONCEPT]

    def test_nesting_depth_five(self):
        text = "/*1 /*2 /*3 /*4 /*5 deep */ 4 */ 3 */ 2 */ 1 */ state"
        assert kinds(text) == [K.STATE]

    def test_depth_five_missing_one_closer(self):
        with pytest.raises(LexError):
            tokenize("/*1 /*2 /*3 /*4 /*5 */ */ */ */ state")

    def test_unterminated(self):
        with pytest.raises(LexError, match="unterminated block comment"):
            tokenize("/* open")


class TestIntegers:
    def test_max_fits(self):
        assert tokenize(str(INT64_MAX))[0].value == 2**63 - 1

    def test_overflow(self):
        with pytest.raises(LexError, match="64 bits"):
            tokenize("9223372036854775808")

    def test_overflow_location(self):
        with pytest.raises(LexError) as info:
            tokenize("a\n  99999999999999999999")
        assert (info.value.loc.start_line, info.value.loc.start_col) == (2, 3)


class TestStrings:
    def test_plain(self):
        assert decode_string_literal('"pending"') == "pending"

    @pytest.mark.parametrize("raw,value", [(r'"a\nb"', "a\nb"), (r'"t\tx"', "t\tx"), (r'"q\"q"', 'q"q'),
                                           (r'"b\\s"', "b\\s")])
    def test_escapes(self, raw, value):
        assert decode_string_literal(raw) == value

    def test_unterminated(self):
        with pytest.raises(LexError, match="unterminated"):
            tokenize('"')

    def test_newline_inside(self):
        with pytest.raises(LexError):
            tokenize('"ab\ncd"')

    def test_invalid_escape(self):
        with pytest.raises(LexError, match="invalid escape"):
            tokenize(r'"\q"')


class TestActionHeads:
    def test_glued_paren(self):
        toks = tokenize("foo(")
        assert [t.kind for t in toks] == [K.ACT, K.LPAR, K.EOF]
        assert toks[0].value == "foo"

    def test_spaced_paren(self):
        toks = tokenize("foo (")
        assert [t.kind for t in toks] == [K.IDENT, K.LPAR, K.EOF]

    def test_call(self):
        assert kinds("add(t)") == [K.ACT, K.LPAR, K.IDENT, K.RPAR]

    def test_keyword_before_paren_stays_keyword(self):
        assert kinds("in(") == [K.IN, K.LPAR]

    def test_cache_is_fifo(self):
        cache = TokenCache()
        a = Token(K.LPAR, None, SourceLocation.point("f", 1, 1))
        b = Token(K.RPAR, None, SourceLocation.point("f", 1, 2))
        cache.push(a)
        cache.push(b)
        assert cache.pop() is a and cache.pop() is b and cache.pop() is None


def test_unrecognized_character_is_quoted():
    with pytest.raises(LexError, match="'@'"):
        tokenize("a @ b")


def test_locations_are_one_based():
    toks = tokenize("concept todo\n  state")
    assert [(t.loc.start_line, t.loc.start_col) for t in toks[:3]] == [(1, 1), (1, 9), (2, 3)]


def test_dump_format():
    assert dump_tokens(tokenize("x 1")) == "IDENT('x') @1:1\nINT_LIT(1) @1:3\nEOF @1:4"


@pytest.mark.parametrize("word", sorted(KEYWORDS))
def test_keywords_never_lex_as_identifiers(word):
    toks = tokenize(word)
    assert toks[0].kind is KEYWORDS[word]
    assert toks[0].kind not in (K.IDENT, K.ACT)


identifiers = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,8}", fullmatch=True).filter(lambda w: w not in KEYWORDS)


@given(identifiers)
def test_non_keywords_are_identifiers(word):
    tok = tokenize(word)[0]
    assert tok.kind is K.IDENT and tok.value == word


pieces = st.one_of(
    identifiers,
    st.sampled_from(sorted(KEYWORDS)),
    st.integers(0, INT64_MAX).map(str),
    st.sampled_from(["+", "-", "<=", ">=", "&&", "||", "->", "{}", ";", "#", "~", "[", "]", ".", "|"]),
    st.text(alphabet="abc xyz", max_size=5).map(lambda s: f'"{s}"'),
)
separators = st.sampled_from([" ", "\n", "\t", " // note\n", " /* c /* d */ */ ", "\r\n"])


@settings(max_examples=200)
@given(st.lists(st.tuples(pieces, separators), max_size=12))
def test_spans_reconstruct_input(parts):
    text = "".join(p + s for p, s in parts)
    toks = tokenize(text)
    assert "".join(t.text for t in toks) == "".join(p for p, _ in parts)


@given(st.text(alphabet="ab +-<=>&|{}()\n", max_size=30))
def test_deterministic(text):
    try:
        first = tokenize(text)
    except LexError:
        return
    second = tokenize(text)
    assert [(t.kind, t.value, t.loc) for t in first] == [(t.kind, t.value, t.loc) for t in second]
