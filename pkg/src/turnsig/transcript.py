"""Annotated, time-aligned interviews and their on-disk format.

One interview per UTF-8 JSON document (``*.interview.json``)::

    {
      "id": "bd-001", "group": "BD", "ipde_score": 2.000, "bis11_score": null,
      "mode": "Room", "tagset": "ud",
      "turns": [
        {"speaker": "Participant", "start_s": 0.000, "end_s": 2.500,
         "tokens": [{"text": "yes", "pos": "INTJ", "dep": "discourse",
                     "is_sentence_final": true}],
         "intra_turn_pauses": [[1.000, 1.200]], "overlaps": []}
      ]
    }

Tokens arrive already split and lowercased; ``pos`` and ``dep`` are optional
but must come together and belong to the declared ``tagset``.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DataError, ParseError

INTERVIEW_SUFFIX = ".interview.json"
MANIFEST_NAME = "manifest.tsv"


class Speaker(str, Enum):
    PARTICIPANT = "Participant"
    INTERVIEWER = "Interviewer"


class Group(str, Enum):
    BD = "BD"
    BPD = "BPD"
    HC = "HC"


class Mode(str, Enum):
    ROOM = "Room"
    PHONE = "Phone"


class Subject(str, Enum):
    PARTICIPANT = "Participant"
    INTERVIEWER = "Interviewer"
    BOTH = "Both"


UD_POS = frozenset("""
ADJ ADP ADV AUX CCONJ DET INTJ NOUN NUM PART PRON PROPN PUNCT SCONJ SYM VERB X
""".split())

UD_DEP = frozenset("""
acl advcl advmod amod appos aux case cc ccomp clf compound conj cop csubj dep det
discourse dislocated expl fixed flat goeswith iobj list mark nmod nsubj nummod obj
obl orphan parataxis punct reparandum root vocative xcomp
""".split())

TAGSETS = {"ud": (UD_POS, UD_DEP)}


@dataclass(frozen=True)
class Token:
    text: str
    pos: str | None = None
    dep: str | None = None
    is_sentence_final: bool = False

    @property
    def annotated(self) -> bool:
        return self.pos is not None


@dataclass(frozen=True)
class SpeakerTurn:
    speaker: Speaker
    start_s: float
    end_s: float
    tokens: tuple = ()
    intra_turn_pauses: tuple = ()  # ((start_s, end_s), ...)
    overlaps: tuple = ()

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s

    @property
    def words(self) -> list:
        return [t.text for t in self.tokens]


@dataclass(frozen=True)
class Interview:
    id: str
    group: Group
    ipde_score: float
    mode: Mode
    turns: tuple
    bis11_score: float | None = None
    tagset: str | dict | None = "ud"  # a built-in name or {name, pos, dep}


def filter_turns(interview: Interview, subject) -> list:
    """Turns spoken by ``subject`` in order; ``Both`` keeps every turn."""
    subject = Subject(subject)
    if subject is Subject.BOTH:
        return list(interview.turns)
    return [t for t in interview.turns if t.speaker.value == subject.value]


# -- parsing ---------------------------------------------------------------

def _require(obj, key, path):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", path)
    if key not in obj:
        raise ParseError(f"missing field '{key}'", path)
    return obj[key]


def _number(value, path, *, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", path)
    value = float(value)
    if not math.isfinite(value):
        raise ParseError("number must be finite", path)
    if minimum is not None and value < minimum:
        raise ParseError(f"must be >= {minimum}, got {value}", path)
    return value


def _enum(cls, value, path):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise ParseError(f"unknown value {value!r} (allowed: {allowed})", path) from None


def _tagset(value, path):
    """Return (name, pos_tags, dep_labels); tag collections are None for no tagset."""
    if value is None:
        return None, None, None
    if isinstance(value, str):
        if value not in TAGSETS:
            raise ParseError(f"unknown tagset {value!r}", path)
        return (value, *TAGSETS[value])
    if isinstance(value, dict):
        name = _require(value, "name", path)
        pos = _require(value, "pos", path)
        dep = _require(value, "dep", path)
        if not all(isinstance(x, list) and all(isinstance(t, str) for t in x) for x in (pos, dep)):
            raise ParseError("pos and dep must be lists of strings", path)
        return name, frozenset(pos), frozenset(dep)
    raise ParseError("tagset must be a name or an object", path)


def _intervals(raw, start, end, path):
    if not isinstance(raw, list):
        raise ParseError("expected a list of [start, end] pairs", path)
    out = []
    prev_end = -math.inf
    for i, pair in enumerate(raw):
        p = f"{path}[{i}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError("expected a [start, end] pair", p)
        a, b = _number(pair[0], p + "[0]"), _number(pair[1], p + "[1]")
        if not a < b:
            raise ParseError("interval start must precede its end", p)
        if a < start or b > end:
            raise ParseError(f"interval [{a}, {b}] lies outside the turn [{start}, {end}]", p)
        if a < prev_end:
            raise ParseError("intervals must be sorted and non-overlapping", p)
        prev_end = b
        out.append((a, b))
    return tuple(out)


def _token(raw, tags, path):
    text = _require(raw, "text", path)
    if not isinstance(text, str) or not text:
        raise ParseError("token text must be a non-empty string", path + ".text")
    if text != text.lower():
        raise ParseError("token text must be lowercase", path + ".text")
    pos, dep = raw.get("pos"), raw.get("dep")
    if (pos is None) != (dep is None):
        raise ParseError("pos and dep must be given together", path)
    if pos is not None:
        _, pos_tags, dep_labels = tags
        if pos_tags is None:
            raise ParseError("annotated token but the file declares no tagset", path)
        if pos not in pos_tags:
            raise ParseError(f"POS tag {pos!r} not in tagset", path + ".pos")
        if dep.split(":")[0] not in dep_labels and dep not in dep_labels:
            raise ParseError(f"dependency label {dep!r} not in tagset", path + ".dep")
    final = raw.get("is_sentence_final", False)
    if not isinstance(final, bool):
        raise ParseError("is_sentence_final must be a boolean", path + ".is_sentence_final")
    return Token(text, pos, dep, final)


def _turn(raw, tags, path):
    speaker = _enum(Speaker, _require(raw, "speaker", path), path + ".speaker")
    start = _number(_require(raw, "start_s", path), path + ".start_s")
    end = _number(_require(raw, "end_s", path), path + ".end_s")
    if not start < end:
        raise ParseError(f"start_s ({start}) must be less than end_s ({end})", path + ".end_s")
    tokens_raw = raw.get("tokens", [])
    if not isinstance(tokens_raw, list):
        raise ParseError("tokens must be a list", path + ".tokens")
    tokens = tuple(_token(t, tags, f"{path}.tokens[{i}]") for i, t in enumerate(tokens_raw))
    pauses = _intervals(raw.get("intra_turn_pauses", []), start, end, path + ".intra_turn_pauses")
    overlaps = _intervals(raw.get("overlaps", []), start, end, path + ".overlaps")
    return SpeakerTurn(speaker, start, end, tokens, pauses, overlaps)


def parse_interview(doc: dict) -> Interview:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "$")
    ident = _require(doc, "id", "$")
    if not isinstance(ident, str) or not ident:
        raise ParseError("id must be a non-empty string", "$.id")
    group = _enum(Group, _require(doc, "group", "$"), "$.group")
    ipde = _number(_require(doc, "ipde_score", "$"), "$.ipde_score", minimum=0.0)
    bis = doc.get("bis11_score")
    bis = None if bis is None else _number(bis, "$.bis11_score")
    mode = _enum(Mode, _require(doc, "mode", "$"), "$.mode")
    tags = _tagset(doc.get("tagset"), "$.tagset")
    turns_raw = _require(doc, "turns", "$")
    if not isinstance(turns_raw, list):
        raise ParseError("turns must be a list", "$.turns")
    turns = tuple(_turn(t, tags, f"$.turns[{i}]") for i, t in enumerate(turns_raw))
    for i in range(1, len(turns)):
        if turns[i].start_s < turns[i - 1].start_s:
            raise ParseError("turns must be sorted by start_s", f"$.turns[{i}].start_s")
    if not any(t.speaker is Speaker.PARTICIPANT for t in turns):
        raise ParseError("interview needs at least one Participant turn", "$.turns")
    return Interview(ident, group, ipde, mode, turns, bis, doc.get("tagset"))


def load_interview(content) -> Interview:
    """Parse and validate one interview from bytes or text."""
    if isinstance(content, bytes):
        try:
            content = content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}", "$") from None
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}", "$") from None
    return parse_interview(doc)


# -- writing ---------------------------------------------------------------

def _fmt_float(x: float) -> str:
    """Shortest round-trip repr, padded to at least three fractional digits."""
    text = repr(float(x))
    if "e" in text or "E" in text:
        text = f"{x:.17f}".rstrip("0")
        if float(text) != x:
            return repr(float(x))
    whole, _, frac = text.partition(".")
    return f"{whole}.{frac.ljust(3, '0')}"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if level > 0 and all(not isinstance(v, (dict, list, tuple)) for v in obj.values()):
            return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v, indent, level + 1)}"
                                   for k, v in obj.items()) + "}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end_pad + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def interview_to_dict(interview: Interview) -> dict:
    turns = []
    for t in interview.turns:
        tokens = []
        for tok in t.tokens:
            entry = {"text": tok.text}
            if tok.pos is not None:
                entry["pos"] = tok.pos
                entry["dep"] = tok.dep
            entry["is_sentence_final"] = tok.is_sentence_final
            tokens.append(entry)
        turns.append({
            "speaker": t.speaker.value,
            "start_s": float(t.start_s),
            "end_s": float(t.end_s),
            "tokens": tokens,
            "intra_turn_pauses": [[float(a), float(b)] for a, b in t.intra_turn_pauses],
            "overlaps": [[float(a), float(b)] for a, b in t.overlaps],
        })
    return {
        "id": interview.id,
        "group": interview.group.value,
        "ipde_score": float(interview.ipde_score),
        "bis11_score": None if interview.bis11_score is None else float(interview.bis11_score),
        "mode": interview.mode.value,
        "tagset": interview.tagset,
        "turns": turns,
    }


def save_interview(interview: Interview) -> bytes:
    return (_encode(interview_to_dict(interview), 1, 0) + "\n").encode("utf-8")


# -- datasets --------------------------------------------------------------

def _read_manifest(path: Path) -> dict:
    rows = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        missing = {"id", "group", "ipde", "bis11", "mode"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"manifest lacks columns {sorted(missing)}", str(path))
        for line, row in enumerate(reader, start=2):
            if row["id"] in rows:
                raise DataError(f"{path}:{line}: duplicate id {row['id']!r} in manifest")
            rows[row["id"]] = row
    return rows


def _check_manifest_row(interview: Interview, row: dict, path: Path):
    def differs(field, expected, actual):
        raise DataError(f"{path}: manifest {field} for {interview.id!r} is {expected!r}, "
                        f"file says {actual!r}")

    if row["group"] != interview.group.value:
        differs("group", row["group"], interview.group.value)
    if row["mode"] != interview.mode.value:
        differs("mode", row["mode"], interview.mode.value)
    if float(row["ipde"]) != interview.ipde_score:
        differs("ipde", row["ipde"], interview.ipde_score)
    bis = row["bis11"].strip()
    file_bis = interview.bis11_score
    if (bis in ("", "NA")) != (file_bis is None) or (bis not in ("", "NA") and float(bis) != file_bis):
        differs("bis11", bis, file_bis)


def write_manifest(interviews, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("id\tgroup\tipde\tbis11\tmode\n")
        for iv in sorted(interviews, key=lambda i: i.id):
            bis = "" if iv.bis11_score is None else _fmt_float(iv.bis11_score)
            fh.write(f"{iv.id}\t{iv.group.value}\t{_fmt_float(iv.ipde_score)}\t{bis}\t{iv.mode.value}\n")


def write_dataset(interviews, directory):
    """Write one file per interview plus ``manifest.tsv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for iv in interviews:
        (directory / f"{iv.id}{INTERVIEW_SUFFIX}").write_bytes(save_interview(iv))
    write_manifest(interviews, directory / MANIFEST_NAME)


def load_dataset(directory) -> list:
    """Load every interview file under ``directory`` sorted by id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.name.endswith(INTERVIEW_SUFFIX))
    if not files:
        raise DataError(f"{directory}: no {INTERVIEW_SUFFIX} files found")
    by_id = {}
    for f in files:
        try:
            iv = load_interview(f.read_bytes())
        except ParseError as exc:
            raise ParseError(str(exc), os.fspath(f)) from None
        if iv.id in by_id:
            raise DataError(f"duplicate interview id {iv.id!r} ({by_id[iv.id][1].name}, {f.name})")
        by_id[iv.id] = (iv, f)
    manifest = directory / MANIFEST_NAME
    if manifest.exists():
        rows = _read_manifest(manifest)
        for ident, (iv, f) in by_id.items():
            if ident not in rows:
                raise DataError(f"{manifest}: no row for interview {ident!r}")
            _check_manifest_row(iv, rows[ident], manifest)
        extra = set(rows) - set(by_id)
        if extra:
            raise DataError(f"{manifest}: rows without interview files: {sorted(extra)}")
    return [by_id[k][0] for k in sorted(by_id)]
