import pytest

from conceptual.diagnostics import (
    CompileError, Diagnostic, DiagnosticKind, DiagnosticSink, LexError, ParseError, Severity,
    SourceLocation, emit, render,
)
from conceptual.semant.env import Environment


def loc(line=1, col=1, path="a.con"):
    return SourceLocation(path, line, col, line, col + 1)


class TestSourceLocation:
    def test_rejects_zero_based_positions(self):
        with pytest.raises(ValueError):
            SourceLocation("a.con", 0, 1, 1, 1)

    def test_rejects_end_before_start(self):
        with pytest.raises(ValueError):
            SourceLocation("a.con", 3, 5, 3, 4)

    def test_span_covers_both(self):
        a = SourceLocation("f", 2, 4, 2, 9)
        b = SourceLocation("f", 1, 7, 1, 8)
        assert a.span_to(b) == SourceLocation("f", 1, 7, 2, 9)

    def test_str_is_file_line_col(self):
        assert str(SourceLocation("x.con", 3, 5, 3, 9)) == "x.con:3:5"


def test_emit_into_empty_sink():
    sink = DiagnosticSink()
    emit(sink, Diagnostic(Severity.ERROR, DiagnosticKind.TYPE_MISMATCH, "bad", loc()))
    assert len(sink) == 1


def test_emit_preserves_prefix():
    sink = DiagnosticSink()
    first = [sink.error(DiagnosticKind.UNDECLARED_NAME, loc(i), f"e{i}") for i in range(1, 4)]
    sink.warning(DiagnosticKind.EMPTY_ACTION, loc(9), "w")
    assert len(sink) == 4
    assert list(sink)[:3] == first


def test_render_empty_is_empty_string():
    assert render(DiagnosticSink()) == ""


def test_render_echoes_location():
    sink = DiagnosticSink()
    sink.error(DiagnosticKind.UNDECLARED_NAME, SourceLocation("a.con", 3, 5, 3, 6), "undeclared name 'x'")
    text = render(sink)
    assert text == "error: a.con:3:5: undeclared name 'x' [UndeclaredName]"


def test_render_keeps_insertion_order():
    sink = DiagnosticSink()
    for i, kind in enumerate([DiagnosticKind.SHADOWING, DiagnosticKind.DUPLICATE_NAME, DiagnosticKind.TYPE_MISMATCH], 1):
        sink.error(kind, loc(i), f"m{i}")
    lines = render(sink).splitlines()
    assert [ln.split(":")[2] for ln in lines] == ["1", "2", "3"]
    assert "m1" in lines[0] and "m3" in lines[2]


def test_message_embeds_line_and_column():
    d = Diagnostic(Severity.WARNING, DiagnosticKind.EMPTY_ACTION, "nothing", SourceLocation("f", 7, 2, 7, 3))
    assert d.message.startswith("7:2:")
    assert d.render().startswith("warning: f:7:2:")


def test_diagnostics_survive_discarded_scopes():
    sink = DiagnosticSink()
    env = Environment(sink, {}, {})
    for name in ("a", "b"):
        child = env.child()
        child.sink.error(DiagnosticKind.UNDECLARED_NAME, loc(), name)
        del child
    assert [d.detail for d in sink] == ["a", "b"]


def test_warnings_are_not_errors():
    sink = DiagnosticSink()
    sink.warning(DiagnosticKind.EMPTY_ACTION, loc(), "w")
    assert not sink.has_errors
    assert sink.errors == []


@pytest.mark.parametrize("cls,kind", [(LexError, DiagnosticKind.LEX_ERROR), (ParseError, DiagnosticKind.SYNTAX_ERROR)])
def test_compile_errors_convert_to_diagnostics(cls, kind):
    err = cls("boom", loc(4, 2))
    assert isinstance(err, CompileError)
    d = err.diagnostic()
    assert d.kind is kind and d.severity is Severity.ERROR and d.loc.start_line == 4
