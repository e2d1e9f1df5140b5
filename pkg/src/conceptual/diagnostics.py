"""Source locations and the diagnostics accumulator shared by all phases."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator


@dataclass(frozen=True, order=True)
class SourceLocation:
    """A span in a source file. Lines and columns are 1-based; the end is exclusive."""

    file_path: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if min(self.start_line, self.start_col, self.end_line, self.end_col) < 1:
            raise ValueError(f"location positions are 1-based: {self!r}")
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"location start after end: {self!r}")

    @classmethod
    def point(cls, file_path: str, line: int, col: int) -> SourceLocation:
        return cls(file_path, line, col, line, col)

    def span_to(self, other: SourceLocation) -> SourceLocation:
        """Smallest location covering both self and other."""
        start = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        end = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return SourceLocation(self.file_path, start[0], start[1], end[0], end[1])

    def __str__(self) -> str:
        return f"{self.file_path}:{self.start_line}:{self.start_col}"


NOWHERE = SourceLocation("<builtin>", 1, 1, 1, 1)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class DiagnosticKind(Enum):
    LEX_ERROR = "LexError"
    SYNTAX_ERROR = "SyntaxError"
    IO_ERROR = "IOError"
    UNDECLARED_NAME = "UndeclaredName"
    DUPLICATE_NAME = "DuplicateName"
    SHADOWING = "Shadowing"
    UNKNOWN_TYPE = "UnknownType"
    NOT_FIRST_ORDER = "NotFirstOrder"
    TYPE_MISMATCH = "TypeMismatch"
    CONTEXT_VIOLATION = "ContextViolation"
    INVALID_ASSIGNMENT = "InvalidAssignment"
    ILL_TYPED_COMPOUND = "IllTypedCompound"
    MIXED_ASSIGNMENT = "MixedAssignment"
    UNKNOWN_CONCEPT = "UnknownConcept"
    UNKNOWN_ACTION = "UnknownAction"
    ARITY_MISMATCH = "ArityMismatch"
    MISSING_TYPE_ARGS = "MissingTypeArgs"
    MULT_ON_RESPONSE = "MultOnResponse"
    UNSUPPORTED_MULTIPLICITY = "UnsupportedMultiplicity"
    NOT_A_MUTATOR = "NotAMutator"
    FILE_NOT_FOUND = "FileNotFound"
    PARSE_FAILURE_IN_INCLUDE = "ParseFailureInInclude"
    CONCEPT_NOT_IN_FILE = "ConceptNotInFile"
    OUTPUT_CONFLICT = "OutputConflict"
    EMPTY_ACTION = "EmptyAction"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    kind: DiagnosticKind
    detail: str
    loc: SourceLocation

    @property
    def message(self) -> str:
        return f"{self.loc.start_line}:{self.loc.start_col}: {self.detail} [{self.kind.value}]"

    def render(self) -> str:
        return f"{self.severity.value}: {self.loc.file_path}:{self.message}"


class DiagnosticSink:
    """Append-only, ordered diagnostics list. Pass the same instance down into nested scopes."""

    def __init__(self) -> None:
        self._items: list[Diagnostic] = []

    def emit(self, d: Diagnostic) -> None:
        self._items.append(d)

    def error(self, kind: DiagnosticKind, loc: SourceLocation, detail: str) -> Diagnostic:
        d = Diagnostic(Severity.ERROR, kind, detail, loc)
        self.emit(d)
        return d

    def warning(self, kind: DiagnosticKind, loc: SourceLocation, detail: str) -> Diagnostic:
        d = Diagnostic(Severity.WARNING, kind, detail, loc)
        self.emit(d)
        return d

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self._items if d.severity is Severity.ERROR]

    @property
    def has_errors(self) -> bool:
        return any(d.severity is Severity.ERROR for d in self._items)

    def kinds(self) -> list[DiagnosticKind]:
        return [d.kind for d in self._items]

    def __iter__(self) -> Iterator[Diagnostic]:
        return iter(list(self._items))

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i: int) -> Diagnostic:
        return self._items[i]


def emit(sink: DiagnosticSink, d: Diagnostic) -> None:
    sink.emit(d)


def render(sink: DiagnosticSink) -> str:
    return "\n".join(d.render() for d in sink)


class CompileError(Exception):
    """Fail-fast error raised by the lexer and parser."""

    kind = DiagnosticKind.SYNTAX_ERROR

    def __init__(self, detail: str, loc: SourceLocation) -> None:
        super().__init__(f"{loc}: {detail}")
        self.detail = detail
        self.loc = loc

    def diagnostic(self) -> Diagnostic:
        return Diagnostic(Severity.ERROR, self.kind, self.detail, self.loc)


class LexError(CompileError):
    kind = DiagnosticKind.LEX_ERROR


class ParseError(CompileError):
    kind = DiagnosticKind.SYNTAX_ERROR
