"""Acceptance criteria 1-9. Run with pytest, or directly as a script; either
way the terminal summary lists one PASS/FAIL/SKIP line per criterion."""

import io
import os
import re
import shutil
import subprocess
import sys
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings

from conceptual.alloy import generate
from conceptual.cli import EXIT_SEMANTIC, CompileOptions, compile_files, main
from conceptual.diagnostics import DiagnosticKind as DK, LexError
from conceptual.lexer import INT64_MAX, tokenize
from conceptual.loader import load_file
from conceptual.parser import parse, parse_expr
from conceptual.printer import pretty_print, pretty_print_expr

from helpers import ALL_FILES, APP_FILES, CONCEPT_FILES, CONCEPTS, CORPUS, analyze_text, error_kinds, wrap_concept
from strategies import exprs
from test_lexer import DOUBLES, PAYLOAD_TABLE, TOKEN_TABLE


def squash(text):
    return re.sub(r"\s+", " ", text).strip()


# 1. corpus validity

@pytest.mark.criterion(1)
def test_corpus_compiles_cleanly():
    assert len(CONCEPT_FILES) == 7 and len(APP_FILES) == 2
    start = time.perf_counter()
    result = compile_files(CompileOptions([*CONCEPT_FILES, *APP_FILES]), io.StringIO())
    elapsed = time.perf_counter() - start
    assert [d.render() for d in result.sink] == []
    assert result.status == 0
    assert elapsed < 1.0
    names = {p.name for p in result.outputs}
    assert {f"{p.stem}.als" for p in CONCEPT_FILES} <= names
    assert {"todo_label.als", "todo_label_mail.als"} <= names


# 2. golden translation

GOLDEN_STATE = """
one sig State {
  var available : set Resource,
  var reservations : User -> set Resource
}
"""

GOLDEN_PROVIDE = """
pred provide[r : Resource] {
  (State.available') = (State.available) + r
  (State.reservations') = (State.reservations)
}
"""


@pytest.mark.criterion(2)
def test_reservation_golden():
    typed, sink = analyze_text(load_file(CONCEPTS / "reservation.con"))
    assert not sink.has_errors
    als = squash(generate(typed.concepts[0]))
    assert squash(GOLDEN_STATE) in als
    assert squash(GOLDEN_PROVIDE) in als
    assert "(State.reservations') = (State.reservations)" in als


# 3. statement accumulation

@pytest.mark.criterion(3)
def test_provide2_accumulates():
    text = load_file(CONCEPTS / "reservation.con").replace(
        "  retract(r : Resource)", "  provide2(r1, r2 : Resource)\n    available += r1\n    available += r2\n"
                                   "  retract(r : Resource)")
    typed, sink = analyze_text(text)
    assert not sink.has_errors
    als = generate(typed.concepts[0])
    pred = re.search(r"^pred provide2\[.*?^\}", als, re.S | re.M).group(0)
    assert len(re.findall(r"\(State\.available'\) =", pred)) == 1
    assert "(State.available') = (State.available) + r1 + r2" in pred
    assert "''" not in als


@pytest.mark.criterion(3)
def test_corpus_has_no_double_primes():
    result = compile_files(CompileOptions(list(ALL_FILES)), io.StringIO())
    assert result.status == 0
    for path, text in result.outputs.items():
        assert "''" not in text, path


# 4. mixed assignment

@pytest.mark.criterion(4)
def test_mixed_assignment_rejected():
    text = wrap_concept("  x : set T", "  a(y : T)\n    x := {}\n    x += y")
    _, sink = analyze_text(text)
    assert error_kinds(sink).count(DK.MIXED_ASSIGNMENT) == 1


# 5. negative semantic suite

NEGATIVE = [
    ("undeclared", wrap_concept("  s : set T", "  a(t : T)\n    s += nope"), DK.UNDECLARED_NAME),
    ("duplicate", wrap_concept("  s : set T\n  s : set T", "  a(t : T)\n    s += t"), DK.DUPLICATE_NAME),
    ("shadowing", wrap_concept("  s : set T", "  a(s : T)\n    when s in s"), DK.SHADOWING),
    ("not-first-order", wrap_concept("  s : set T", "  a(t : set T)\n    s += t"), DK.NOT_FIRST_ORDER),
    ("call-outside", wrap_concept("  s : set T", "  a(t : T)\n    when a(t)\n    s += t"), DK.CONTEXT_VIOLATION),
    ("unknown-include", "app a\ninclude\n  no_such_concept\n", DK.FILE_NOT_FOUND),
]


@pytest.mark.criterion(5)
@pytest.mark.parametrize("name,text,kind", NEGATIVE, ids=[n[0] for n in NEGATIVE])
def test_negative_suite(tmp_path, capsys, name, text, kind):
    src = tmp_path / f"{name.replace('-', '_')}.con"
    src.write_text(text)
    assert main([str(src), "--out", str(tmp_path / "out")]) == EXIT_SEMANTIC
    assert f"[{kind.value}]" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


# 6. round trip

@pytest.mark.criterion(6)
@pytest.mark.parametrize("path", ALL_FILES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_corpus_round_trip(path):
    model = parse(load_file(path), str(path))
    assert parse(pretty_print(model)) == model


@pytest.mark.criterion(6)
@settings(max_examples=1000, suppress_health_check=[HealthCheck.too_slow], deadline=None)
@given(exprs)
def test_random_expression_round_trip(e):
    assert parse_expr(pretty_print_expr(e)) == e


# 7. counterexample reproduction (needs java and an Alloy 6 jar in ALLOY_JAR)

ALLOY_JAR = os.environ.get("ALLOY_JAR")
needs_alloy = pytest.mark.skipif(
    not (ALLOY_JAR and Path(ALLOY_JAR).is_file() and shutil.which("java")),
    reason="set ALLOY_JAR to an Alloy 6 jar and put java on PATH",
)


def alloy_verdicts(module: Path) -> dict[str, str]:
    """Run every command in `module`; map command name to SAT or UNSAT.
    For a check command SAT means a counterexample was found."""
    out_dir = module.parent / f"{module.stem}_solutions"
    proc = subprocess.run(
        ["java", "-jar", ALLOY_JAR, "exec", "-f", "-t", "text", "-o", str(out_dir), str(module)],
        capture_output=True, text=True, cwd=module.parent, timeout=600,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    verdicts = {}
    for line in proc.stdout.splitlines():
        m = re.search(r"\b(check|run)\s+(\S+).*\b(UNSAT|SAT)\b", line)
        if m:
            verdicts[m.group(2)] = m.group(3)
    return verdicts


def compile_to(tmp_path: Path, sources: dict[str, str]) -> dict[str, Path]:
    for name, text in sources.items():
        (tmp_path / f"{name}.con").write_text(text)
    result = compile_files(CompileOptions([tmp_path / f"{n}.con" for n in sources]), io.StringIO())
    assert result.status == 0, [d.render() for d in result.sink]
    for path, text in result.outputs.items():
        path.write_text(text)
    return {p.stem: p for p in result.outputs}


def add_check(path: Path, name: str, formula: str) -> None:
    with open(path, "a") as fh:
        fh.write(f"\nassert {name} {{\n  {formula}\n}}\ncheck {name} for 4 but 20 steps\n")


# Type parameters become ordinary sigs so each module can be checked on its own.
RESERVATION = load_file(CONCEPTS / "reservation.con").replace("concept reservation [User, Resource]",
                                                             "concept reservation")
DOUBLE_BOOKING = ("always (no r : Resource, u : User | "
                  "r in u.(State.reservations) and r in (State.available))")


@pytest.mark.criterion(7)
@needs_alloy
def test_reservation_double_booking(tmp_path):
    (tmp_path / "orig").mkdir()
    mod = compile_to(tmp_path / "orig", {"reservation": RESERVATION})["reservation"]
    add_check(mod, "_double_booking", DOUBLE_BOOKING)
    assert alloy_verdicts(mod)["_double_booking"] == "SAT"

    fixed = RESERVATION.replace(
        "  provide(r : Resource)\n    available += r",
        "  provide(r : Resource)\n    when r not in reservations\n      available += r",
    ).replace(
        "    when r in available and r not in reservations\n      available -= r",
        "    when r in available\n      available -= r",
    )
    assert fixed != RESERVATION
    (tmp_path / "fixed").mkdir()
    mod = compile_to(tmp_path / "fixed", {"reservation": fixed})["reservation"]
    add_check(mod, "_double_booking", DOUBLE_BOOKING)
    assert alloy_verdicts(mod)["_double_booking"] == "UNSAT"


LABEL = load_file(CONCEPTS / "label.con").replace("concept label [Item]", "concept label")


@pytest.mark.criterion(7)
@needs_alloy
def test_label_principle(tmp_path):
    (tmp_path / "orig").mkdir()
    mod = compile_to(tmp_path / "orig", {"label": LABEL})["label"]
    assert alloy_verdicts(mod)["_principle_1"] == "SAT"

    fixed = LABEL.replace("until detach(i,l),", "until detach(i,l) or clear(i),")
    assert fixed != LABEL
    (tmp_path / "fixed").mkdir()
    mod = compile_to(tmp_path / "fixed", {"label": fixed})["label"]
    assert alloy_verdicts(mod)["_principle_1"] == "UNSAT"


PENDING_AGREES = ("always (all t : todo/Task | "
                  "t in label/find[_str_pending] implies t in (todo/State.pending))")


@pytest.mark.criterion(7)
@needs_alloy
def test_todo_label_pending(tmp_path):
    sources = {p.stem: load_file(p) for p in (CORPUS / "todo_label").glob("*.con")}
    (tmp_path / "orig").mkdir()
    mod = compile_to(tmp_path / "orig", sources)["todo_label"]
    add_check(mod, "_pending_agrees", PENDING_AGREES)
    assert alloy_verdicts(mod)["_pending_agrees"] == "SAT"

    sources["todo_label"] += 'sync label.affix(t, "pending")\n  todo.add(t)\n'
    (tmp_path / "fixed").mkdir()
    mod = compile_to(tmp_path / "fixed", sources)["todo_label"]
    add_check(mod, "_pending_agrees", PENDING_AGREES)
    assert alloy_verdicts(mod)["_pending_agrees"] == "UNSAT"


# 8. determinism

@pytest.mark.criterion(8)
def test_two_compilations_are_byte_identical(tmp_path):
    runs = []
    for name in ("first", "second"):
        root = tmp_path / name
        shutil.copytree(CORPUS, root)
        files = sorted(root.rglob("*.con"))
        assert main([str(p) for p in files]) == 0
        runs.append({str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*.als"))})
    assert len(runs[0]) == len(ALL_FILES)
    assert runs[0] == runs[1]


# 9. lexer properties

@pytest.mark.criterion(9)
@pytest.mark.parametrize("op", DOUBLES)
def test_longest_match(op):
    toks = tokenize(f"a{op}b")
    assert [t.text for t in toks[:-1]] == ["a", op, "b"]


@pytest.mark.criterion(9)
def test_nested_comment_depth_five():
    text = "/*1 /*2 /*3 /*4 /*5 */ */ */ */ */ concept"
    assert [t.text for t in tokenize(text)[:-1]] == ["concept"]


@pytest.mark.criterion(9)
def test_int_overflow():
    assert tokenize(str(INT64_MAX))[0].value == INT64_MAX
    with pytest.raises(LexError):
        tokenize(str(2**63))


@pytest.mark.criterion(9)
def test_token_table_is_exhaustive():
    from conceptual.lexer import TokenKind

    for text, kind in TOKEN_TABLE:
        assert tokenize(text)[0].kind is kind, text
    for text, kind, value in PAYLOAD_TABLE:
        tok = tokenize(text)[0]
        assert (tok.kind, tok.value) == (kind, value)
    covered = {k for _, k in TOKEN_TABLE} | {k for _, k, _ in PAYLOAD_TABLE} | {TokenKind.EOF}
    assert covered == set(TokenKind)


if __name__ == "__main__":
    # a fresh interpreter, so pytest can rewrite asserts in modules imported above
    sys.exit(subprocess.call([sys.executable, "-m", "pytest", __file__, "-q"]))
