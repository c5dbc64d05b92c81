"""Repository scanning and file-view preparation.

Scans a checked-out repository snapshot into an immutable manifest of source
files, strips boilerplate preambles (license headers, imports), and cuts
token-budgeted views used both for indexing demos and for agent file
inspection.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path, PurePosixPath

from .tokenization import word_spans

DEFAULT_EXTENSIONS = frozenset({"py", "java", "kt"})
DEFAULT_VIEW_TOKENS = 512

_EXT_LANGUAGE = {"py": "python", "java": "java", "kt": "kotlin"}

_LICENSE_MARKER_RE = re.compile(
    r"copyright|licen[cs]e|spdx|all rights reserved", re.IGNORECASE
)
_PY_IMPORT_RE = re.compile(r"^\s*(import\s+\S|from\s+\S+\s+import\b)")
_JVM_IMPORT_RE = re.compile(r"^\s*(import|package)\b")


class MissingRoot(FileNotFoundError):
    """Raised when the repository root does not exist or is not a directory."""


@dataclass(frozen=True)
class SourceFile:
    relative_path: str  # '/'-separated, no leading '/', no '..' segments
    language: str  # python | java | kotlin | other
    content: str


@dataclass(frozen=True)
class FileManifest:
    root: str
    files: tuple[SourceFile, ...]
    excluded_count: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_by_path", {f.relative_path: f for f in self.files}
        )

    def __len__(self) -> int:
        return len(self.files)

    def __contains__(self, relative_path: str) -> bool:
        return relative_path in self._by_path  # type: ignore[attr-defined]

    def get(self, relative_path: str) -> SourceFile | None:
        return self._by_path.get(relative_path)  # type: ignore[attr-defined]

    def paths(self) -> list[str]:
        return [f.relative_path for f in self.files]


@dataclass(frozen=True)
class ViewChunk:
    relative_path: str
    text: str
    token_count: int
    truncated: bool


def detect_language(relative_path: str) -> str:
    ext = PurePosixPath(relative_path).suffix.lstrip(".").lower()
    return _EXT_LANGUAGE.get(ext, "other")


def is_test_path(relative_path: str) -> bool:
    """Conventional test-file detection across python/java/kotlin layouts.

    A file is a test when any directory segment equals test/tests, or its
    basename starts with test_ or its stem ends with _test (case-insensitive).
    """
    segments = relative_path.split("/")
    if any(seg.lower() in ("test", "tests") for seg in segments[:-1]):
        return True
    name = segments[-1].lower()
    stem = name.rsplit(".", 1)[0]
    return name.startswith("test_") or stem.endswith("_test")


def scan_repository(
    root: str | os.PathLike,
    extensions: frozenset[str] | set[str] = DEFAULT_EXTENSIONS,
    exclude_tests: bool = True,
) -> FileManifest:
    """Collect indexable source files under `root` into a sorted manifest.

    Symlinks are never followed. Files excluded for any reason (extension,
    test-file rule, undecodable bytes, symlink) are tallied in
    `excluded_count`. Two scans of the same tree yield identical manifests.
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise MissingRoot(f"repository root does not exist: {root}")

    wanted = {e.lstrip(".").lower() for e in extensions}
    files: list[SourceFile] = []
    excluded = 0

    for dirpath, dirnames, filenames in os.walk(root_path, followlinks=False):
        dirnames.sort()
        for name in sorted(filenames):
            full = Path(dirpath) / name
            rel = full.relative_to(root_path).as_posix()
            if full.is_symlink():
                excluded += 1
                continue
            ext = full.suffix.lstrip(".").lower()
            if ext not in wanted:
                excluded += 1
                continue
            if exclude_tests and is_test_path(rel):
                excluded += 1
                continue
            try:
                content = full.read_bytes().decode("utf-8")
            except (UnicodeDecodeError, OSError):
                excluded += 1
                continue
            files.append(SourceFile(rel, detect_language(rel), content))

    files.sort(key=lambda f: f.relative_path)
    return FileManifest(str(root_path), tuple(files), excluded)


def _leading_comment_block(lines: list[str], language: str) -> int:
    """Number of leading lines forming the top comment block (plus blanks)."""
    i = 0
    n = len(lines)
    while i < n and not lines[i].strip():
        i += 1
    start = i
    if i >= n:
        return 0
    stripped = lines[i].lstrip()
    if language in ("java", "kotlin", "other") and stripped.startswith("/*"):
        while i < n and "*/" not in lines[i]:
            i += 1
        return min(i + 1, n)
    comment_prefixes = ("#",) if language == "python" else ("//",)
    if language == "other":
        comment_prefixes = ("#", "//", ";")
    if not stripped.startswith(comment_prefixes):
        return 0
    while i < n:
        s = lines[i].strip()
        if s and not s.startswith(comment_prefixes):
            break
        i += 1
    return i if i > start else 0


def strip_preamble(content: str, language: str = "other") -> str:
    """Drop license header blocks and import/package lines, keep the rest.

    Only whole lines are ever removed; blank runs created by a removal
    collapse to at most one blank line. Content with no preamble comes back
    unchanged. Unknown languages only lose a leading license comment block.
    """
    lines = content.split("\n")
    removed = [False] * len(lines)

    block_len = _leading_comment_block(lines, language)
    if block_len and _LICENSE_MARKER_RE.search("\n".join(lines[:block_len])):
        for i in range(block_len):
            removed[i] = True

    if language == "python":
        import_re = _PY_IMPORT_RE
    elif language in ("java", "kotlin"):
        import_re = _JVM_IMPORT_RE
    else:
        import_re = None
    if import_re is not None:
        for i, line in enumerate(lines):
            if not removed[i] and import_re.match(line):
                removed[i] = True

    out: list[str] = []
    pending_blanks: list[str] = []
    removal_adjacent = False
    for line, gone in zip(lines, removed):
        if gone:
            removal_adjacent = True
            continue
        if not line.strip():
            pending_blanks.append(line)
            continue
        if pending_blanks:
            if removal_adjacent:
                if out:  # collapse the run; drop it entirely at the top
                    out.append(pending_blanks[0])
            else:
                out.extend(pending_blanks)
            pending_blanks = []
        removal_adjacent = False
        out.append(line)
    if pending_blanks and not removal_adjacent:
        out.extend(pending_blanks)
    return "\n".join(out)


def chunk_head(
    content: str,
    token_budget: int = DEFAULT_VIEW_TOKENS,
    relative_path: str = "",
) -> ViewChunk:
    """Cut the first `token_budget` word tokens off the top of `content`.

    Counting uses the tokenizer's word-segmentation stage (not a model
    tokenizer), and the cut lands at the end of the last counted word, so
    everything between tokens survives verbatim.
    """
    if token_budget < 1:
        raise ValueError("token_budget must be >= 1")
    spans = word_spans(content)
    if len(spans) <= token_budget:
        return ViewChunk(relative_path, content, len(spans), False)
    end = spans[token_budget - 1][1]
    return ViewChunk(relative_path, content[:end], token_budget, True)


def find_readme(root: str | os.PathLike) -> Path | None:
    """Top-level readme file, if any (case-insensitive name match)."""
    root_path = Path(root)
    if not root_path.is_dir():
        return None
    for entry in sorted(root_path.iterdir(), key=lambda p: p.name.lower()):
        if entry.is_file() and entry.name.lower().startswith("readme"):
            return entry
    return None
