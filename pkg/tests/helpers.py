"""Shared paths and small pipeline wrappers for the tests."""

from __future__ import annotations

import io
from pathlib import Path

from conceptual.alloy import generate
from conceptual.cli import CompileOptions, compile_files
from conceptual.diagnostics import DiagnosticKind
from conceptual.loader import IncludeLoader, load_file
from conceptual.parser import parse
from conceptual.semant import Analyzer

CORPUS = Path(__file__).parent / "corpus"
CONCEPTS = CORPUS / "concepts"
CONCEPT_FILES = sorted(CONCEPTS.glob("*.con"))
APP_FILES = [CORPUS / "todo_label" / "todo_label.con", CORPUS / "todo_label_mail" / "todo_label_mail.con"]
ALL_FILES = sorted(CORPUS.rglob("*.con"))


def analyze_text(text: str, file_path: str = "test.con", loader: IncludeLoader | None = None):
    model = parse(text, file_path)
    analyzer = Analyzer(loader or IncludeLoader(search_paths=[]))
    typed, sink = analyzer.analyze(model)
    return typed, sink


def analyze_path(path: Path):
    return analyze_text(load_file(path), str(path))


def error_kinds(sink) -> list[DiagnosticKind]:
    return [d.kind for d in sink.errors]


def concept_alloy(text: str) -> str:
    typed, sink = analyze_text(text)
    assert not sink.has_errors, [d.render() for d in sink]
    return generate(typed.concepts[0])


def compile_corpus(out_dir: Path | None = None) -> dict[Path, str]:
    result = compile_files(CompileOptions(list(ALL_FILES), out_dir), io.StringIO())
    assert result.status == 0, [d.render() for d in result.sink]
    return result.outputs


def wrap_concept(state: str, actions: str, principle: str = "", header: str = "concept c") -> str:
    """Build a small concept from its sections."""
    return (f"{header}\npurpose \"testing\"\nstate\n{state}\nactions\n{actions}\n"
            f"principle\n{principle}\n")
