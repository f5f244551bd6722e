"""Per-turn linguistic (LING), content (CNT) and dialogue (DIAL) features.

Every speaker turn yields three vectors of fixed length (28, 19 and 11).
Unavailable values are NaN; :func:`impute_path` fills them before the
vectors are strung together into feature paths.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import LexiconError
from .lexicon import LexiconKind, load_depid_relations, load_lexicon_dir, match_count, weighted_score
from .transcript import Interview, Speaker, SpeakerTurn, Subject, filter_turns

log = logging.getLogger(__name__)

LING, CNT, DIAL = "LING", "CNT", "DIAL"
GROUPS = (LING, CNT, DIAL)

SHORT_PAUSE_S = 0.5


class FeatureDef(NamedTuple):
    name: str
    abbrev: str  # label used in rendered feature words
    source: str  # "lexical", "lexicon:<name>", "pos:<TAG>|<TAG>", "weighted:<name>", "timing"


LING_FEATURES = (
    FeatureDef("mattr", "MATTR", "lexical"),
    FeatureDef("brunet", "BI", "lexical"),
    FeatureDef("honore", "HS", "lexical"),
    FeatureDef("mls", "MLS", "lexical"),
    FeatureDef("depid", "DEPID", "lexical"),
    FeatureDef("func_w", "FUNC/W", "lexicon:func"),
    FeatureDef("interj_w", "UH/W", "lexicon:interj"),
    FeatureDef("i_w", "I", "lexicon:i"),
    FeatureDef("we_w", "We", "lexicon:we"),
    FeatureDef("you_w", "You", "lexicon:you"),
    FeatureDef("ppro_w", "PPRO", "lexicon:ppro"),
    FeatureDef("swear_w", "Swear", "lexicon:swear"),
    FeatureDef("nonflu_w", "Nonflu.", "lexicon:nonflu"),
    FeatureDef("filler_w", "Filler", "lexicon:filler"),
    FeatureDef("abs_w", "ABS", "lexicon:absolutist"),
    FeatureDef("conj_w", "CONJ", "lexicon:conj"),
    FeatureDef("prep_w", "PREP", "lexicon:prep"),
    FeatureDef("adv_w", "ADV", "lexicon:adverb"),
    FeatureDef("auxv_w", "AUXV", "lexicon:auxverb"),
    FeatureDef("neg_w", "NEG", "lexicon:negate"),
    FeatureDef("article_w", "Articles", "lexicon:article"),
    FeatureDef("verb_w", "Verbs", "pos:VERB"),
    FeatureDef("noun_w", "Nouns", "pos:NOUN|PROPN"),
    FeatureDef("adj_w", "ADJ", "pos:ADJ"),
    FeatureDef("pron_w", "PRON", "pos:PRON"),
    FeatureDef("det_w", "DET", "pos:DET"),
    FeatureDef("num_w", "NUM", "pos:NUM"),
    FeatureDef("part_w", "PART", "pos:PART"),
)

CNT_FEATURES = (
    FeatureDef("anx", "ANX", "lexicon:anx"),
    FeatureDef("anger", "ANG", "lexicon:anger"),
    FeatureDef("sad", "SAD", "lexicon:sad"),
    FeatureDef("posemo", "POSEMO", "lexicon:posemo"),
    FeatureDef("negemo", "NEGEMO", "lexicon:negemo"),
    FeatureDef("social", "SOC", "lexicon:social"),
    FeatureDef("family", "FAM", "lexicon:family"),
    FeatureDef("friend", "FRIEND", "lexicon:friend"),
    FeatureDef("drives", "DRI", "lexicon:drives"),
    FeatureDef("affiliation", "AFFIL", "lexicon:affiliation"),
    FeatureDef("achieve", "ACH", "lexicon:achieve"),
    FeatureDef("power", "POW", "lexicon:power"),
    FeatureDef("reward", "REW", "lexicon:reward"),
    FeatureDef("risk", "RISK", "lexicon:risk"),
    FeatureDef("health", "HEALTH", "lexicon:health"),
    FeatureDef("work", "WORK", "lexicon:work"),
    FeatureDef("empathy", "EMP", "weighted:empathy"),
    FeatureDef("distress", "DIST", "weighted:distress"),
    FeatureDef("optimism", "OPT", "weighted:optimism"),
)

DIAL_FEATURES = (
    FeatureDef("turn_hold_offset", "SP_avg", "timing"),
    FeatureDef("consecutive_turns", "CONS", "timing"),
    FeatureDef("rfc_time", "RFC_t", "timing"),
    FeatureDef("rfc_words", "RFC_w", "timing"),
    FeatureDef("rel_turn_len_time", "RTL_t", "timing"),
    FeatureDef("rel_turn_len_words", "RTL_w", "timing"),
    FeatureDef("turn_switch_offset", "TSO", "timing"),
    FeatureDef("turn_length", "TL", "timing"),
    FeatureDef("overlap_count", "OV_n", "timing"),
    FeatureDef("overlap_dur", "OV_avg", "timing"),
    FeatureDef("wps", "WPS", "timing"),
)

FEATURE_DEFS = {LING: LING_FEATURES, CNT: CNT_FEATURES, DIAL: DIAL_FEATURES}
GROUP_DIMS = {g: len(defs) for g, defs in FEATURE_DEFS.items()}


def feature_names(group):
    return tuple(f.name for f in FEATURE_DEFS[group])


def feature_abbrevs(group):
    return tuple(f.abbrev for f in FEATURE_DEFS[group])


@dataclass(frozen=True, eq=False)
class TurnFeatures:
    group: str
    names: tuple
    values: np.ndarray  # NaN marks a missing value

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))


# -- lexical richness ------------------------------------------------------

def _words(tokens):
    return [t if isinstance(t, str) else t.text for t in tokens]


def mattr(tokens, window: int = 10) -> float:
    """Mean type-token ratio over every length-``window`` sliding window."""
    if window < 1:
        raise ValueError("window must be >= 1")
    words = _words(tokens)
    n = len(words)
    if n == 0:
        return math.nan
    if n < window:
        return len(set(words)) / n
    counts = Counter(words[:window])
    total = len(counts)
    for i in range(window, n):
        out, new = words[i - window], words[i]
        counts[out] -= 1
        if counts[out] == 0:
            del counts[out]
        counts[new] += 1
        total += len(counts)
    return total / ((n - window + 1) * window)


def brunet_index(tokens) -> float:
    words = _words(tokens)
    if not words:
        return math.nan
    n, v = len(words), len(set(words))
    return n ** (v ** -0.165)


def honore_statistic(tokens) -> float:
    """``100 ln N / (1 - V1/V)``; NaN when every type is a hapax."""
    words = _words(tokens)
    if not words:
        return math.nan
    counts = Counter(words)
    v = len(counts)
    v1 = sum(1 for c in counts.values() if c == 1)
    if v1 == v:
        return math.nan
    return 100.0 * math.log(len(words)) / (1.0 - v1 / v)


def depid(tokens, relations) -> float:
    """Share of tokens whose dependency relation expresses a proposition."""
    if not tokens:
        return 0.0
    if any(t.dep is None for t in tokens):
        return math.nan
    hits = sum(1 for t in tokens if t.dep in relations or t.dep.split(":")[0] in relations)
    return hits / len(tokens)


def mean_sentence_length(tokens) -> float:
    if not tokens:
        return math.nan
    lengths, run = [], 0
    for t in tokens:
        run += 1
        if t.is_sentence_final:
            lengths.append(run)
            run = 0
    if run:
        lengths.append(run)
    return sum(lengths) / len(lengths)


# -- dialogue context ------------------------------------------------------

def _speaker_key(speaker):
    return speaker.value if isinstance(speaker, Speaker) else str(speaker)


@dataclass(frozen=True)
class DialogueContext:
    """What has been said before the current turn, across both speakers."""

    time: dict = field(default_factory=dict)  # speaker -> cumulative seconds
    words: dict = field(default_factory=dict)  # speaker -> cumulative tokens
    turns: dict = field(default_factory=dict)  # speaker -> number of turns
    prev_end: float | None = None
    prev_speaker: str | None = None

    def advance(self, turn: SpeakerTurn) -> "DialogueContext":
        k = _speaker_key(turn.speaker)
        time, words, turns = dict(self.time), dict(self.words), dict(self.turns)
        time[k] = time.get(k, 0.0) + turn.duration
        words[k] = words.get(k, 0) + len(turn.tokens)
        turns[k] = turns.get(k, 0) + 1
        return DialogueContext(time, words, turns, turn.end_s, k)

    def floor_share(self, speaker, *, by_words=False) -> float:
        src = self.words if by_words else self.time
        total = sum(src.values())
        if total <= 0:
            return 0.5
        return src.get(_speaker_key(speaker), 0) / total


def _interval_durations(intervals):
    return [b - a for a, b in intervals]


def dial_vector(turn: SpeakerTurn, ctx: DialogueContext) -> TurnFeatures:
    """The 11 timing features of ``turn`` given everything spoken before it."""
    k = _speaker_key(turn.speaker)
    pauses = _interval_durations(turn.intra_turn_pauses)
    short = [p for p in pauses if p < SHORT_PAUSE_S]
    hold = sum(short) / len(short) if short else math.nan
    consecutive = 1 + sum(1 for p in pauses if p > SHORT_PAUSE_S)

    n_prior = ctx.turns.get(k, 0)
    length = turn.duration
    n_words = len(turn.tokens)
    if n_prior == 0:
        rel_time = rel_words = 1.0
    else:
        mean_time = ctx.time[k] / n_prior
        mean_words = ctx.words[k] / n_prior
        rel_time = length / mean_time
        rel_words = n_words / mean_words if mean_words > 0 else math.nan

    if ctx.prev_speaker is not None and ctx.prev_speaker != k:
        switch = turn.start_s - ctx.prev_end
    else:
        switch = math.nan

    overlaps = _interval_durations(turn.overlaps)
    overlap_dur = sum(overlaps) / len(overlaps) if overlaps else 0.0
    speaking = length - sum(pauses)
    wps = n_words / speaking if speaking > 0 else math.nan

    values = np.array([
        hold, consecutive,
        ctx.floor_share(k), ctx.floor_share(k, by_words=True),
        rel_time, rel_words, switch, length,
        len(overlaps), overlap_dur, wps,
    ], dtype=float)
    return TurnFeatures(DIAL, feature_names(DIAL), values)


# -- extractor -------------------------------------------------------------

class FeatureExtractor:
    """Compute LING/CNT/DIAL vectors with a fixed set of lexicons.

    ``lexicons`` maps lexicon names to :class:`~turnsig.lexicon.Lexicon`;
    the shipped defaults are used when omitted.
    """

    def __init__(self, lexicons=None, mattr_window=10, depid_relations=None):
        self.lexicons = load_lexicon_dir() if lexicons is None else dict(lexicons)
        self.mattr_window = int(mattr_window)
        self.depid_relations = (load_depid_relations() if depid_relations is None
                                else frozenset(depid_relations))
        needed = {f.source.split(":", 1)[1] for defs in (LING_FEATURES, CNT_FEATURES)
                  for f in defs if f.source.startswith(("lexicon:", "weighted:"))}
        missing = sorted(needed - set(self.lexicons))
        if missing:
            raise LexiconError(f"missing lexicons: {', '.join(missing)}")
        for f in CNT_FEATURES:
            if f.source.startswith("weighted:"):
                name = f.source.split(":", 1)[1]
                if self.lexicons[name].kind is not LexiconKind.WEIGHTED:
                    raise LexiconError(f"lexicon {name!r} must be Weighted")

    def ling_vector(self, tokens) -> TurnFeatures:
        tokens = list(tokens)
        n = len(tokens)
        annotated = all(t.pos is not None for t in tokens)
        values = []
        for f in LING_FEATURES:
            kind, _, arg = f.source.partition(":")
            if f.name == "mattr":
                v = mattr(tokens, self.mattr_window)
            elif f.name == "brunet":
                v = brunet_index(tokens)
            elif f.name == "honore":
                v = honore_statistic(tokens)
            elif f.name == "mls":
                v = mean_sentence_length(tokens)
            elif f.name == "depid":
                v = depid(tokens, self.depid_relations)
            elif n == 0:
                v = 0.0
            elif kind == "lexicon":
                v = match_count(self.lexicons[arg], tokens) / n
            elif kind == "pos":
                tags = set(arg.split("|"))
                v = sum(1 for t in tokens if t.pos in tags) / n if annotated else math.nan
            else:  # pragma: no cover - table is static
                raise AssertionError(f.source)
            values.append(v)
        return TurnFeatures(LING, feature_names(LING), np.array(values, dtype=float))

    def cnt_vector(self, tokens) -> TurnFeatures:
        tokens = list(tokens)
        n = len(tokens)
        values = []
        for f in CNT_FEATURES:
            kind, _, arg = f.source.partition(":")
            lex = self.lexicons[arg]
            if kind == "weighted":
                values.append(weighted_score(lex, tokens))
            else:
                values.append(match_count(lex, tokens) / n if n else 0.0)
        return TurnFeatures(CNT, feature_names(CNT), np.array(values, dtype=float))

    def turn_vectors(self, interview: Interview) -> list:
        """Per turn of the whole interview: ``{group: TurnFeatures}``."""
        out, ctx = [], DialogueContext()
        for turn in interview.turns:
            out.append({
                LING: self.ling_vector(turn.tokens),
                CNT: self.cnt_vector(turn.tokens),
                DIAL: dial_vector(turn, ctx),
            })
            ctx = ctx.advance(turn)
        unannotated = sum(1 for t in interview.turns if any(tok.pos is None for tok in t.tokens))
        if unannotated:
            log.warning("interview %s: %d turn(s) lack POS/dependency annotations; "
                        "POS rates and DEPID are missing there", interview.id, unannotated)
        return out

    def turn_matrices(self, interview: Interview, subject=Subject.PARTICIPANT, groups=GROUPS) -> dict:
        """``{group: (T, d) array}`` for the turns of ``subject``, NaN where missing.

        The dialogue context runs over all turns so floor control and switch
        offsets see both speakers even when only one is emitted.
        """
        keep = {id(t) for t in filter_turns(interview, subject)}
        vectors = self.turn_vectors(interview)
        out = {}
        for g in groups:
            rows = [v[g].values for t, v in zip(interview.turns, vectors) if id(t) in keep]
            out[g] = np.vstack(rows) if rows else np.zeros((0, GROUP_DIMS[g]))
        return out

    def feature_paths(self, interview, subject=Subject.PARTICIPANT, groups=GROUPS, fill=None) -> dict:
        """Imputed per-group paths; see :func:`impute_path` for ``fill``."""
        mats = self.turn_matrices(interview, subject, groups)
        return {g: impute_path(m, None if fill is None else fill[g]) for g, m in mats.items()}


def impute_path(matrix, fill=None) -> np.ndarray:
    """Carry each column's last observed value forward; fill leading gaps.

    ``fill`` holds per-column replacement values (the training population
    median in experiments). Without it the column's own median is used, or 0
    when the column is never observed.
    """
    m = np.array(matrix, dtype=float, copy=True)
    if m.size == 0:
        return m
    if fill is None:
        with np.errstate(all="ignore"):
            observed = ~np.isnan(m)
            fill = np.array([np.median(m[observed[:, j], j]) if observed[:, j].any() else 0.0
                             for j in range(m.shape[1])])
    fill = np.asarray(fill, dtype=float)
    observed = ~np.isnan(m)
    rows = np.arange(m.shape[0])[:, None]
    last_seen = np.maximum.accumulate(np.where(observed, rows, -1), axis=0)
    carried = np.take_along_axis(m, np.maximum(last_seen, 0), axis=0)
    m = np.where(last_seen >= 0, carried, fill[None, :])
    return m


def extract_csv(interviews, extractor: FeatureExtractor, subject=Subject.BOTH) -> str:
    """Wide per-turn table: one row per (interview, turn), ``group:feature`` columns."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["interview", "turn", "speaker", "start_s"]
    for g in GROUPS:
        header.extend(f"{g}:{n}" for n in feature_names(g))
    writer.writerow(header)
    for iv in interviews:
        keep = {id(t) for t in filter_turns(iv, subject)}
        for idx, (turn, vecs) in enumerate(zip(iv.turns, extractor.turn_vectors(iv))):
            if id(turn) not in keep:
                continue
            row = [iv.id, idx, turn.speaker.value, repr(turn.start_s)]
            for g in GROUPS:
                row.extend("" if math.isnan(v) else repr(v) for v in vecs[g].values.tolist())
            writer.writerow(row)
    return buf.getvalue()
