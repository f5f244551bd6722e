"""LIWC-style category dictionaries and weighted word lists.

File format (UTF-8, ``#`` starts a comment line)::

    name<TAB>Category|Weighted
    pattern[<TAB>weight]

A pattern ending in ``*`` matches any token starting with the stem. When a
token matches several patterns the longest one wins, and an exact literal
beats a prefix pattern of the same stem.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from types import MappingProxyType

from .errors import LexiconError

LEXICON_ENV = "TURNSIG_LEXICONS"
DEPID_FILE = "depid_relations.txt"


class LexiconKind(str, Enum):
    CATEGORY = "Category"
    WEIGHTED = "Weighted"


@dataclass(frozen=True, eq=False)
class Lexicon:
    name: str
    kind: LexiconKind
    entries: MappingProxyType
    _literals: dict = field(init=False, repr=False)
    _prefixes: list = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        literals, prefixes = {}, []
        for pattern, weight in self.entries.items():
            if not pattern or pattern != pattern.lower() or pattern == "*":
                raise LexiconError(f"bad pattern {pattern!r}", self.name)
            if not math.isfinite(weight):
                raise LexiconError(f"non-finite weight for {pattern!r}", self.name)
            if pattern.endswith("*"):
                prefixes.append((pattern[:-1], weight))
            else:
                literals[pattern] = weight
        prefixes.sort(key=lambda p: -len(p[0]))
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "_literals", literals)
        object.__setattr__(self, "_prefixes", prefixes)
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_words(cls, name, words, kind=LexiconKind.CATEGORY):
        """Build a lexicon from patterns (Category) or a pattern->weight mapping."""
        kind = LexiconKind(kind)
        if kind is LexiconKind.CATEGORY:
            entries = {}
            for w in words:
                if w in entries:
                    raise LexiconError(f"duplicate pattern {w!r}", name)
                entries[w] = 1.0
        else:
            entries = {k: float(v) for k, v in dict(words).items()}
        return cls(name, kind, entries)

    def lookup(self, word: str):
        """Weight of the best-matching pattern, or None when nothing matches."""
        try:
            return self._cache[word]
        except KeyError:
            pass
        hit = self._literals.get(word)
        if hit is None:
            for stem, weight in self._prefixes:
                if word.startswith(stem):
                    hit = weight
                    break
        self._cache[word] = hit
        return hit

    def __contains__(self, word):
        return self.lookup(word) is not None

    def __len__(self):
        return len(self.entries)


def _text(tok):
    return tok if isinstance(tok, str) else tok.text


def match_count(lexicon: Lexicon, tokens) -> int:
    """Number of tokens matching any pattern, each token counted once."""
    return sum(1 for t in tokens if lexicon.lookup(_text(t)) is not None)


def weighted_score(lexicon: Lexicon, tokens) -> float:
    """Sum of matched weights times relative frequency within ``tokens``."""
    tokens = list(tokens)
    if not tokens:
        return 0.0
    total = 0.0
    for t in tokens:
        w = lexicon.lookup(_text(t))
        if w is not None:
            total += w
    return total / len(tokens)


def load_lexicon(content, source: str = "<lexicon>") -> Lexicon:
    if isinstance(content, bytes):
        content = content.decode("utf-8")
    header = None
    entries = {}
    for lineno, raw in enumerate(content.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        where = f"{source}:{lineno}"
        parts = [p.strip() for p in line.split("\t")]
        if header is None:
            if len(parts) != 2:
                raise LexiconError("header must be 'name<TAB>kind'", where)
            try:
                header = (parts[0], LexiconKind(parts[1]))
            except ValueError:
                raise LexiconError(f"unknown lexicon kind {parts[1]!r}", where) from None
            continue
        pattern = parts[0]
        if pattern in entries:
            raise LexiconError(f"duplicate pattern {pattern!r}", where)
        if len(parts) > 2:
            raise LexiconError("expected 'pattern[<TAB>weight]'", where)
        if len(parts) == 2:
            try:
                weight = float(parts[1])
            except ValueError:
                raise LexiconError(f"weight {parts[1]!r} is not a number", where) from None
            if not math.isfinite(weight):
                raise LexiconError("weight must be finite", where)
        elif header[1] is LexiconKind.WEIGHTED:
            raise LexiconError(f"weighted entry {pattern!r} lacks a weight", where)
        else:
            weight = 1.0
        if header[1] is LexiconKind.CATEGORY and weight != 1.0:
            raise LexiconError("category entries cannot carry weights", where)
        entries[pattern] = weight
    if header is None:
        raise LexiconError("empty lexicon file", source)
    if not entries:
        raise LexiconError("lexicon has no entries", source)
    return Lexicon(header[0], header[1], entries)


def default_lexicon_dir() -> Path:
    override = os.environ.get(LEXICON_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("turnsig") / "lexicons"))


def load_lexicon_dir(directory=None) -> dict:
    """Load every ``*.lex`` file in ``directory`` keyed by lexicon name."""
    directory = Path(directory) if directory is not None else default_lexicon_dir()
    out = {}
    for path in sorted(directory.glob("*.lex")):
        lex = load_lexicon(path.read_bytes(), str(path))
        if lex.name in out:
            raise LexiconError(f"lexicon name {lex.name!r} defined twice", str(path))
        out[lex.name] = lex
    if not out:
        raise LexiconError(f"no .lex files in {directory}")
    return out


def load_depid_relations(directory=None) -> frozenset:
    directory = Path(directory) if directory is not None else default_lexicon_dir()
    path = directory / DEPID_FILE
    if not path.exists():
        path = Path(str(resources.files("turnsig") / "lexicons" / DEPID_FILE))
    labels = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            labels.append(line)
    return frozenset(labels)
