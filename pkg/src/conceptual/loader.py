"""File loading and include resolution, with a per-invocation parse cache."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional, Union

from .diagnostics import CompileError, DiagnosticKind
from .parser import parse
from .syntax import Concept, FilePath, Model

SOURCE_SUFFIX = ".con"
PATH_ENV = "CONCEPTUAL_PATH"


class SourceIOError(Exception):
    def __init__(self, path: Union[str, Path], reason: str) -> None:
        super().__init__(f"cannot read '{path}': {reason}")
        self.path = str(path)
        self.reason = reason


def with_suffix(path: Union[str, Path]) -> Path:
    p = Path(path)
    return p if p.suffix or p.is_dir() else p.with_name(p.name + SOURCE_SUFFIX)


def load_file(path: Union[str, Path]) -> str:
    """Read a source file as UTF-8 with newlines normalized to '\\n'."""
    p = with_suffix(path)
    if p.is_dir():
        raise SourceIOError(p, "is a directory")
    try:
        with open(p, encoding="utf-8") as fh:
            return fh.read()
    except FileNotFoundError:
        raise SourceIOError(p, "no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise SourceIOError(p, str(exc)) from None


class IncludeError(Exception):
    def __init__(self, kind: DiagnosticKind, detail: str) -> None:
        super().__init__(detail)
        self.kind = kind
        self.detail = detail


def env_search_paths() -> list[Path]:
    raw = os.environ.get(PATH_ENV, "")
    return [Path(p) for p in raw.split(os.pathsep) if p]


class IncludeLoader:
    """Resolves `include` paths relative to the including file, then the search paths."""

    def __init__(self, search_paths: Optional[list[Path]] = None) -> None:
        self.search_paths = env_search_paths() if search_paths is None else list(search_paths)
        self._cache: dict[Path, Union[Model, CompileError, SourceIOError]] = {}
        self.parse_count = 0

    def load_model(self, path: Path) -> Model:
        key = path.resolve()
        if key not in self._cache:
            try:
                text = load_file(key)
                self.parse_count += 1
                self._cache[key] = parse(text, str(path))
            except (CompileError, SourceIOError) as exc:
                self._cache[key] = exc
        cached = self._cache[key]
        if isinstance(cached, Exception):
            raise cached
        return cached

    def remember(self, path: Path, model: Model) -> None:
        """Seed the cache with a file the driver already parsed."""
        self._cache.setdefault(path.resolve(), model)

    def candidates(self, base_dir: Path, fp: FilePath) -> list[Path]:
        rel = Path(*fp.dirs, fp.name + (f".{fp.ext}" if fp.ext else SOURCE_SUFFIX))
        return [base_dir / rel] + [d / rel for d in self.search_paths]

    def resolve(self, base_dir: Path, fp: FilePath) -> tuple[Concept, Path]:
        for cand in self.candidates(base_dir, fp):
            if cand.is_file():
                try:
                    model = self.load_model(cand)
                except SourceIOError as exc:
                    raise IncludeError(DiagnosticKind.FILE_NOT_FOUND, str(exc)) from None
                except CompileError as exc:
                    raise IncludeError(
                        DiagnosticKind.PARSE_FAILURE_IN_INCLUDE,
                        f"included file '{cand}' does not parse: {exc.loc}: {exc.detail}",
                    ) from None
                for c in model.concepts:
                    if c.name == fp.name:
                        return c, cand
                raise IncludeError(
                    DiagnosticKind.CONCEPT_NOT_IN_FILE,
                    f"file '{cand}' does not define concept '{fp.name}'",
                )
        tried = ", ".join(str(c) for c in self.candidates(base_dir, fp))
        raise IncludeError(DiagnosticKind.FILE_NOT_FOUND, f"cannot find '{fp}' (tried {tried})")


def resolve_include(loader: IncludeLoader, path: FilePath, base_dir: Union[str, Path]) -> Concept:
    return loader.resolve(Path(base_dir), path)[0]
