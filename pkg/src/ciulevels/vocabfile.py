"""Reader/writer for the ``NAME = [item, ...]`` config format.

One definition per line; ``#`` starts a comment.  Keys are bare words or
double-quoted strings, items are 1-based integers, concept names (bare or
quoted) or nested arrays::

    PRICE = [1, 2]
    TECH = [COMFORT, 6]
    "Embarkment port" = [7]
    B1 = [[1, 2], [3, 4], [5, 6]]
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Sequence

from .levels import LevelsStructure, validate_levels_structure
from .vocabulary import Vocabulary, VocabularyError

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<int>[+-]?\d+)
      | (?P<word>[A-Za-z_][\w.\-]*)
      | (?P<punct>[\[\],=])
      | (?P<bad>\S)
    )""",
    re.VERBOSE,
)


def _tokens(line: str, lineno: int):
    pos = 0
    text = _strip_comment(line)
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        kind = m.lastgroup
        value = m.group(kind)
        col = m.start(kind) + 1
        if kind == "bad":
            raise VocabularyError(f"unexpected character {value!r}", lineno, col)
        if kind == "str":
            value = value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        elif kind == "int":
            value = int(value)
        yield kind, value, col
        pos = m.end()


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"' and (i == 0 or line[i - 1] != "\\"):
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _parse_array(toks: list, i: int, lineno: int):
    kind, value, col = toks[i]
    if value != "[":
        raise VocabularyError("expected '['", lineno, col)
    items = []
    i += 1
    while True:
        if i >= len(toks):
            raise VocabularyError("unterminated array", lineno)
        kind, value, col = toks[i]
        if value == "]":
            return items, i + 1
        if value == "[":
            item, i = _parse_array(toks, i, lineno)
        elif kind in ("int", "str", "word"):
            item, i = value, i + 1
        else:
            raise VocabularyError(f"unexpected {value!r}", lineno, col)
        items.append(item)
        if i >= len(toks):
            raise VocabularyError("unterminated array", lineno)
        kind, value, col = toks[i]
        if value == ",":
            i += 1
        elif value != "]":
            raise VocabularyError(f"expected ',' or ']' but found {value!r}", lineno, col)


def parse_definitions(text: str) -> tuple[dict[str, list], dict[str, tuple[int, int]]]:
    """Ordered ``name -> items`` plus the ``(line, column)`` of each name."""
    defs: dict[str, list] = {}
    where: dict[str, tuple[int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = list(_tokens(line, lineno))
        if not toks:
            continue
        kind, name, col = toks[0]
        if kind not in ("word", "str"):
            raise VocabularyError("expected a concept name", lineno, col)
        if len(toks) < 2 or toks[1][1] != "=":
            raise VocabularyError("expected '=' after the name", lineno, col)
        if name in defs:
            raise VocabularyError(f"duplicate definition of {name!r}", lineno, col)
        if len(toks) < 3:
            raise VocabularyError("missing array after '='", lineno)
        items, end = _parse_array(toks, 2, lineno)
        if end != len(toks):
            raise VocabularyError("trailing tokens after the array", lineno, toks[end][2])
        defs[name] = items
        where[name] = (lineno, col)
    return defs, where


def parse_vocabulary_text(text: str, feature_names: Sequence[str]) -> Vocabulary:
    defs, where = parse_definitions(text)
    for name, items in defs.items():
        if any(isinstance(it, list) for it in items):
            raise VocabularyError(f"{name}: nested arrays are not allowed in a vocabulary", *where[name])
    return Vocabulary.from_definitions(defs, feature_names, positions=where)


def parse_vocabulary(path: str | Path, feature_names: Sequence[str]) -> Vocabulary:
    return parse_vocabulary_text(Path(path).read_text(encoding="utf-8"), feature_names)


def _quote(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][\w.\-]*", name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dump_vocabulary(vocab: Vocabulary) -> str:
    lines = []
    for name, items in vocab.parts:
        rendered = [str(i + 1) if isinstance(i, int) else _quote(i) for i in items]
        lines.append(f"{_quote(name)} = [{', '.join(rendered)}]")
    return "\n".join(lines) + "\n"


def dump_levels(ls: LevelsStructure) -> str:
    """Levels of an integer-player structure, written with 1-based players."""
    lines = []
    for k, level in enumerate(ls.levels):
        blocks = ", ".join("[" + ", ".join(str(p + 1) for p in sorted(b)) + "]" for b in level)
        lines.append(f"B{k} = [{blocks}]")
    return "\n".join(lines) + "\n"


def load_levels(text: str) -> LevelsStructure:
    defs, where = parse_definitions(text)
    partitions = []
    for name, blocks in defs.items():
        if not all(isinstance(b, list) and all(isinstance(p, int) for p in b) for b in blocks):
            raise VocabularyError(f"{name}: a level must be an array of integer arrays", *where[name])
        partitions.append([[p - 1 for p in b] for b in blocks])
    return validate_levels_structure(partitions)
