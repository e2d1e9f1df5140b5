"""Command-line driver: lex, parse, analyze and generate Alloy for each input file."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from .alloy import DEFAULT_SCOPE, generate
from .diagnostics import CompileError, DiagnosticKind, DiagnosticSink, SourceLocation
from .lexer import dump_tokens, tokenize
from .loader import IncludeLoader, SourceIOError, load_file, with_suffix
from .parser import parse
from .printer import dump_ast
from .semant import Analyzer, dump_typed

PHASES = ("lex", "parse", "semant", "full")
DUMPS = ("tokens", "ast", "typed-ast")

EXIT_OK = 0
EXIT_SYNTAX = 1
EXIT_SEMANTIC = 2
EXIT_IO = 3

SYNTAX_KINDS = {DiagnosticKind.LEX_ERROR, DiagnosticKind.SYNTAX_ERROR}


@dataclass
class CompileOptions:
    input_paths: list[Path]
    output_dir: Optional[Path] = None
    stop_after: str = "full"
    dump: set[str] = field(default_factory=set)
    scope: str = DEFAULT_SCOPE


@dataclass
class CompileResult:
    status: int
    sink: DiagnosticSink
    outputs: dict[Path, str]


def exit_status(sink: DiagnosticSink) -> int:
    kinds = {d.kind for d in sink.errors}
    if DiagnosticKind.IO_ERROR in kinds:
        return EXIT_IO
    if kinds & SYNTAX_KINDS:
        return EXIT_SYNTAX
    return EXIT_SEMANTIC if kinds else EXIT_OK


def _file_loc(path: Path) -> SourceLocation:
    return SourceLocation(str(path), 1, 1, 1, 1)


def compile_files(opts: CompileOptions, out: Optional[TextIO] = None) -> CompileResult:
    """Run the pipeline. Nothing is written to disk here; see `write_outputs`."""
    out = out or sys.stdout
    sink = DiagnosticSink()
    loader = IncludeLoader()
    outputs: dict[Path, str] = {}
    for raw in opts.input_paths:
        path = with_suffix(raw)
        try:
            text = load_file(path)
        except SourceIOError as exc:
            sink.error(DiagnosticKind.IO_ERROR, _file_loc(path), str(exc))
            continue
        display = str(raw if Path(raw).suffix else path)
        if "tokens" in opts.dump or opts.stop_after == "lex":
            try:
                tokens = tokenize(text, display)
            except CompileError as exc:
                sink.emit(exc.diagnostic())
                continue
            if "tokens" in opts.dump:
                print(dump_tokens(tokens), file=out)
            if opts.stop_after == "lex":
                continue
        try:
            model = parse(text, display)
        except CompileError as exc:
            sink.emit(exc.diagnostic())
            continue
        loader.remember(path, model)
        if "ast" in opts.dump:
            print(dump_ast(model), file=out)
        if opts.stop_after == "parse":
            continue
        analyzer = Analyzer(loader, sink)
        errors_before = len(sink.errors)
        typed, _ = analyzer.analyze(model)
        if "typed-ast" in opts.dump:
            print(dump_typed(typed), file=out)
        if opts.stop_after == "semant" or len(sink.errors) > errors_before:
            continue
        target = opts.output_dir or path.parent
        for node in [*typed.concepts, *typed.apps]:
            dest = target / f"{node.name}.als"
            text_out = generate(node, opts.scope)
            if dest in outputs and outputs[dest] != text_out:
                sink.error(DiagnosticKind.OUTPUT_CONFLICT, node.loc,
                           f"'{dest}' would be written twice with different contents")
                continue
            outputs[dest] = text_out
    return CompileResult(exit_status(sink), sink, outputs)


def write_outputs(outputs: dict[Path, str]) -> Optional[str]:
    """Write every output; returns an error message on I/O failure."""
    for dest, text in outputs.items():
        try:
            dest.parent.mkdir(parents=True, exist_ok=True)
            with open(dest, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            return f"cannot write '{dest}': {exc}"
    return None


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conceptual", description="Compile concept specifications to Alloy 6.")
    ap.add_argument("files", nargs="+", type=Path, help="input files (.con is added when omitted)")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: next to each input)")
    ap.add_argument("--stop-after", choices=PHASES, default="full", help="last phase to run")
    ap.add_argument("--dump", choices=DUMPS, action="append", default=[], help="print an intermediate form")
    ap.add_argument("--scope", default=DEFAULT_SCOPE, help="scope text for generated check commands")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    opts = CompileOptions(args.files, args.out, args.stop_after, set(args.dump), args.scope)
    result = compile_files(opts)
    for d in result.sink:
        print(d.render(), file=sys.stderr)
    if result.status != EXIT_OK or opts.stop_after != "full":
        return result.status
    problem = write_outputs(result.outputs)
    if problem is not None:
        print(f"error: {problem} [{DiagnosticKind.IO_ERROR.value}]", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
