import subprocess
import sys

import pytest

from conceptual.cli import EXIT_IO, EXIT_OK, EXIT_SEMANTIC, EXIT_SYNTAX, main

from helpers import ALL_FILES, APP_FILES, CONCEPTS, CORPUS, wrap_concept

GOOD = wrap_concept("  s : set T", "  a(t : T)\n    s += t", "a(t) then t in s")


def write(path, text):
    path.write_text(text)
    return path


def run(*args):
    return main([str(a) for a in args])


def test_success_writes_output(tmp_path):
    src = write(tmp_path / "c.con", GOOD)
    assert run(src) == EXIT_OK
    assert (tmp_path / "c.als").read_text().startswith("// testing\nmodule c\n")


def test_suffix_is_optional(tmp_path):
    write(tmp_path / "c.con", GOOD)
    assert run(tmp_path / "c") == EXIT_OK
    assert (tmp_path / "c.als").exists()


@pytest.mark.parametrize("text,status,kind", [
    ("concept c\npurpose\n", EXIT_SYNTAX, "SyntaxError"),
    ("concept c @", EXIT_SYNTAX, "LexError"),
    (GOOD.replace("s += t", "s += zz"), EXIT_SEMANTIC, "UndeclaredName"),
])
def test_error_statuses(tmp_path, capsys, text, status, kind):
    src = write(tmp_path / "c.con", text)
    assert run(src) == status
    err = capsys.readouterr().err
    assert f"[{kind}]" in err and err.startswith(f"error: {src}:")
    assert not (tmp_path / "c.als").exists()


def test_missing_file(tmp_path, capsys):
    assert run(tmp_path / "nope.con") == EXIT_IO
    assert "[IOError]" in capsys.readouterr().err


def test_directory_argument(tmp_path):
    assert run(tmp_path) == EXIT_IO


def test_io_outranks_other_errors(tmp_path):
    bad = write(tmp_path / "bad.con", "concept")
    assert run(bad, tmp_path / "nope.con") == EXIT_IO


def test_syntax_outranks_semantic(tmp_path):
    sem = write(tmp_path / "sem.con", GOOD.replace("s += t", "s += zz"))
    syn = write(tmp_path / "syn.con", "concept x")
    assert run(sem, syn) == EXIT_SYNTAX


def test_one_bad_file_blocks_all_output(tmp_path):
    good = write(tmp_path / "good.con", GOOD)
    bad = write(tmp_path / "bad.con", GOOD.replace("s += t", "s += zz"))
    assert run(good, bad) == EXIT_SEMANTIC
    assert list(tmp_path.glob("*.als")) == []


def test_warnings_do_not_fail(tmp_path, capsys):
    src = write(tmp_path / "c.con", wrap_concept("  s : set T", "  a(t : T)"))
    assert run(src) == EXIT_OK
    assert "warning:" in capsys.readouterr().err


def test_app_writes_included_concepts(tmp_path):
    assert run(APP_FILES[0], "--out", tmp_path) == EXIT_OK
    assert sorted(p.name for p in tmp_path.iterdir()) == ["label.als", "todo.als", "todo_label.als"]


def test_whole_corpus_is_idempotent(tmp_path):
    assert run(*[p for p in ALL_FILES if p.parent == CONCEPTS], "--out", tmp_path) == EXIT_OK
    first = {p.name: p.read_text() for p in tmp_path.iterdir()}
    assert run(*[p for p in ALL_FILES if p.parent == CONCEPTS], "--out", tmp_path) == EXIT_OK
    assert {p.name: p.read_text() for p in tmp_path.iterdir()} == first
    assert len(first) == 7


def test_output_conflict(tmp_path, capsys):
    # two different concepts named label would land on the same file
    status = run(CONCEPTS / "label.con", CORPUS / "todo_label" / "label.con", "--out", tmp_path)
    assert status == EXIT_SEMANTIC
    assert "[OutputConflict]" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_identical_outputs_do_not_conflict(tmp_path):
    assert run(CONCEPTS / "todo.con", CONCEPTS / "todo.con", "--out", tmp_path) == EXIT_OK


def test_dump_tokens(tmp_path, capsys):
    src = write(tmp_path / "c.con", GOOD)
    assert run(src, "--dump", "tokens", "--stop-after", "lex") == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "CONCEPT @1:1"
    assert not (tmp_path / "c.als").exists()


def test_dump_ast_and_typed(tmp_path, capsys):
    src = write(tmp_path / "c.con", GOOD)
    assert run(src, "--dump", "ast", "--dump", "typed-ast", "--stop-after", "semant") == EXIT_OK
    out = capsys.readouterr().out
    assert "Model@1:1" in out and "Concept@1:1" in out
    assert "set T" in out
    assert not (tmp_path / "c.als").exists()


@pytest.mark.parametrize("phase,status", [("lex", EXIT_OK), ("parse", EXIT_OK), ("semant", EXIT_SEMANTIC)])
def test_stop_after_skips_later_phases(tmp_path, phase, status):
    src = write(tmp_path / "c.con", GOOD.replace("s += t", "s += zz"))
    assert run(src, "--stop-after", phase) == status


def test_stop_after_lex_still_reports_lex_errors(tmp_path):
    src = write(tmp_path / "c.con", '"open')
    assert run(src, "--stop-after", "lex") == EXIT_SYNTAX


def test_scope_option(tmp_path):
    src = write(tmp_path / "c.con", GOOD)
    assert run(src, "--scope", "for 2 but 5 steps") == EXIT_OK
    assert "check _principle_1 for 2 but 5 steps" in (tmp_path / "c.als").read_text()


def test_unwritable_output(tmp_path, capsys):
    src = write(tmp_path / "c.con", GOOD)
    blocker = write(tmp_path / "file", "")
    assert run(src, "--out", blocker / "sub") == EXIT_IO
    assert "[IOError]" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    src = write(tmp_path / "c.con", GOOD)
    proc = subprocess.run([sys.executable, "-m", "conceptual", str(src)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "c.als").exists()


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["--stop-after", "never", "x.con"])
    assert info.value.code == 2
