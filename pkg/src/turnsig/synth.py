"""Deterministic synthetic interviews with planted group differences.

Tokens come from a closed, fully annotated vocabulary that overlaps every
shipped lexicon. Group effects act on the generative rates (word-category
probabilities, repetition drift, speaking rate), never on extracted
features, so the whole pipeline is exercised end to end.

Each interview draws from its own seeded stream keyed by (group, index),
so adding interviews leaves earlier ones unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .transcript import Group, Interview, Mode, Speaker, SpeakerTurn, Token

# category -> [(text, pos, dep)]
VOCAB = {
    "pron": [("i", "PRON", "nsubj"), ("me", "PRON", "obj"), ("my", "PRON", "nmod"),
             ("we", "PRON", "nsubj"), ("us", "PRON", "obj"), ("our", "PRON", "nmod"),
             ("you", "PRON", "nsubj"), ("your", "PRON", "nmod"), ("it", "PRON", "nsubj"),
             ("they", "PRON", "nsubj"), ("them", "PRON", "obj"), ("she", "PRON", "nsubj"),
             ("he", "PRON", "nsubj")],
    "article": [("the", "DET", "det"), ("a", "DET", "det"), ("an", "DET", "det")],
    "det": [("this", "DET", "det"), ("that", "DET", "det"), ("some", "DET", "det"),
            ("these", "DET", "det")],
    "aux": [("is", "AUX", "aux"), ("was", "AUX", "aux"), ("have", "AUX", "aux"),
            ("had", "AUX", "aux"), ("do", "AUX", "aux"), ("did", "AUX", "aux"),
            ("will", "AUX", "aux"), ("can", "AUX", "aux"), ("would", "AUX", "aux"),
            ("could", "AUX", "aux"), ("am", "AUX", "aux"), ("are", "AUX", "aux"),
            ("been", "AUX", "aux")],
    "conj": [("and", "CCONJ", "cc"), ("but", "CCONJ", "cc"), ("or", "CCONJ", "cc"),
             ("because", "SCONJ", "mark"), ("although", "SCONJ", "mark"),
             ("while", "SCONJ", "mark"), ("whether", "SCONJ", "mark"), ("unless", "SCONJ", "mark")],
    "prep": [("in", "ADP", "case"), ("on", "ADP", "case"), ("at", "ADP", "case"),
             ("to", "ADP", "case"), ("for", "ADP", "case"), ("with", "ADP", "case"),
             ("about", "ADP", "case"), ("from", "ADP", "case"), ("of", "ADP", "case"),
             ("through", "ADP", "case"), ("during", "ADP", "case"), ("after", "ADP", "case"),
             ("before", "ADP", "case"), ("without", "ADP", "case")],
    "adverb": [("very", "ADV", "advmod"), ("really", "ADV", "advmod"), ("quite", "ADV", "advmod"),
               ("just", "ADV", "advmod"), ("often", "ADV", "advmod"), ("usually", "ADV", "advmod"),
               ("sometimes", "ADV", "advmod"), ("maybe", "ADV", "advmod"),
               ("probably", "ADV", "advmod"), ("again", "ADV", "advmod"),
               ("already", "ADV", "advmod"), ("still", "ADV", "advmod"), ("too", "ADV", "advmod")],
    "neg": [("not", "PART", "advmod"), ("no", "DET", "det"), ("don't", "AUX", "aux"),
            ("didn't", "AUX", "aux"), ("can't", "AUX", "aux"), ("nobody", "PRON", "nsubj")],
    "absolutist": [("all", "DET", "det"), ("always", "ADV", "advmod"),
                   ("completely", "ADV", "advmod"), ("constantly", "ADV", "advmod"),
                   ("definitely", "ADV", "advmod"), ("entire", "ADJ", "amod"),
                   ("every", "DET", "det"), ("everything", "PRON", "obj"),
                   ("everyone", "PRON", "nsubj"), ("must", "AUX", "aux"),
                   ("never", "ADV", "advmod"), ("nothing", "PRON", "obj"),
                   ("totally", "ADV", "advmod"), ("whole", "ADJ", "amod"),
                   ("absolutely", "ADV", "advmod"), ("full", "ADJ", "amod")],
    "nonflu": [("um", "INTJ", "discourse"), ("uh", "INTJ", "discourse"), ("er", "INTJ", "discourse"),
               ("erm", "INTJ", "discourse"), ("hmm", "INTJ", "discourse"), ("umm", "INTJ", "discourse")],
    "filler": [("like", "INTJ", "discourse"), ("okay", "INTJ", "discourse"),
               ("basically", "ADV", "advmod"), ("actually", "ADV", "advmod"),
               ("anyway", "ADV", "advmod"), ("literally", "ADV", "advmod")],
    "interj": [("oh", "INTJ", "discourse"), ("yeah", "INTJ", "discourse"), ("yes", "INTJ", "discourse"),
               ("wow", "INTJ", "discourse"), ("alright", "INTJ", "discourse")],
    "swear": [("damn", "INTJ", "discourse"), ("bloody", "ADJ", "amod"), ("crap", "NOUN", "obj")],
    "noun": [("app", "NOUN", "obj"), ("phone", "NOUN", "obj"), ("watch", "NOUN", "obj"),
             ("questionnaire", "NOUN", "obj"), ("questionnaires", "NOUN", "obj"),
             ("data", "NOUN", "obj"), ("study", "NOUN", "nmod"), ("mood", "NOUN", "obj"),
             ("sleep", "NOUN", "obj"), ("day", "NOUN", "obl"), ("week", "NOUN", "obl"),
             ("time", "NOUN", "obl"), ("thing", "NOUN", "obj"), ("people", "NOUN", "nsubj"),
             ("family", "NOUN", "nmod"), ("friend", "NOUN", "nmod"), ("friends", "NOUN", "nmod"),
             ("doctor", "NOUN", "nmod"), ("work", "NOUN", "obl"), ("job", "NOUN", "obj"),
             ("question", "NOUN", "obj"), ("device", "NOUN", "obj"), ("battery", "NOUN", "nsubj"),
             ("screen", "NOUN", "obj"), ("morning", "NOUN", "obl"), ("night", "NOUN", "obl"),
             ("life", "NOUN", "obj"), ("problem", "NOUN", "obj"), ("goal", "NOUN", "obj"),
             ("routine", "NOUN", "obj"), ("energy", "NOUN", "obj"), ("mum", "NOUN", "nmod"),
             ("dad", "NOUN", "nmod"), ("health", "NOUN", "obj"), ("reward", "NOUN", "obj"),
             ("risk", "NOUN", "obj"), ("future", "NOUN", "obl"), ("plan", "NOUN", "obj"),
             ("support", "NOUN", "obj"), ("team", "NOUN", "nmod"), ("progress", "NOUN", "obj"),
             ("control", "NOUN", "obj"), ("stress", "NOUN", "obj"), ("pain", "NOUN", "obj"),
             ("benefit", "NOUN", "obj"), ("oxford", "PROPN", "obl"), ("monday", "PROPN", "obl"),
             ("email", "NOUN", "obj"), ("bed", "NOUN", "obl"), ("house", "NOUN", "obl")],
    "verb": [("use", "VERB", "root"), ("used", "VERB", "root"), ("think", "VERB", "root"),
             ("know", "VERB", "root"), ("feel", "VERB", "root"), ("found", "VERB", "root"),
             ("go", "VERB", "root"), ("went", "VERB", "root"), ("make", "VERB", "root"),
             ("made", "VERB", "root"), ("help", "VERB", "root"), ("take", "VERB", "root"),
             ("try", "VERB", "root"), ("want", "VERB", "root"), ("need", "VERB", "root"),
             ("said", "VERB", "root"), ("remember", "VERB", "root"), ("wear", "VERB", "root"),
             ("wore", "VERB", "root"), ("fill", "VERB", "root"), ("answer", "VERB", "root"),
             ("share", "VERB", "root"), ("talk", "VERB", "root"), ("told", "VERB", "root"),
             ("care", "VERB", "root"), ("improve", "VERB", "root"), ("hope", "VERB", "root"),
             ("plan", "VERB", "root"), ("understand", "VERB", "root"), ("worry", "VERB", "root"),
             ("enjoy", "VERB", "root"), ("finish", "VERB", "root"), ("avoid", "VERB", "root"),
             ("sleep", "VERB", "root"), ("work", "VERB", "root"), ("look", "VERB", "root"),
             ("looking", "VERB", "root"), ("get", "VERB", "root"), ("got", "VERB", "root")],
    "adj": [("good", "ADJ", "amod"), ("great", "ADJ", "amod"), ("nice", "ADJ", "amod"),
            ("useful", "ADJ", "amod"), ("helpful", "ADJ", "amod"), ("easy", "ADJ", "amod"),
            ("hard", "ADJ", "amod"), ("difficult", "ADJ", "amod"), ("bad", "ADJ", "amod"),
            ("awful", "ADJ", "amod"), ("interesting", "ADJ", "amod"), ("happy", "ADJ", "amod"),
            ("sad", "ADJ", "amod"), ("tired", "ADJ", "amod"), ("worried", "ADJ", "amod"),
            ("better", "ADJ", "amod"), ("different", "ADJ", "amod"), ("simple", "ADJ", "amod"),
            ("nervous", "ADJ", "amod"), ("upset", "ADJ", "amod"), ("angry", "ADJ", "amod"),
            ("safe", "ADJ", "amod"), ("important", "ADJ", "amod"), ("kind", "ADJ", "amod"),
            ("lonely", "ADJ", "amod"), ("stressed", "ADJ", "amod"), ("overwhelmed", "ADJ", "amod"),
            ("scared", "ADJ", "amod"), ("sorry", "ADJ", "amod"), ("strong", "ADJ", "amod")],
    "num": [("one", "NUM", "nummod"), ("two", "NUM", "nummod"), ("three", "NUM", "nummod"),
            ("ten", "NUM", "nummod")],
}

BASE_RATES = {
    "pron": 0.10, "article": 0.07, "det": 0.03, "aux": 0.06, "conj": 0.05, "prep": 0.09,
    "adverb": 0.06, "neg": 0.02, "absolutist": 0.02, "nonflu": 0.02, "filler": 0.03,
    "interj": 0.015, "swear": 0.005, "noun": 0.19, "verb": 0.13, "adj": 0.08, "num": 0.01,
}

# per-group multipliers; keys are categories from BASE_RATES or the
# generators "drift" (repetition trend), "wps" (speaking rate) and "switch"
# (mean gap before a participant turn)
DEFAULT_EFFECTS = {
    "HC": {},
    "BD": {"drift": 12.0, "wps": 1.4, "filler": 2.0},
    "BPD": {"nonflu": 6.0, "absolutist": 5.0, "conj": 2.0, "switch": 2.5},
}

BASE_DRIFT = 0.04  # increase of repetition probability across an interview
BASE_REPEAT = 0.08
BASE_WPS = 2.6
BASE_GAP = 0.6  # seconds between turns
GENERATOR_EFFECTS = ("drift", "wps", "switch")


@dataclass(frozen=True)
class SynthSpec:
    n_per_group: int = 15
    seed: int = 42
    min_turns: int = 12  # participant turns per interview
    max_turns: int = 20
    effect_scale: float = 1.0  # 0 removes every planted effect
    effects: dict = field(default_factory=lambda: {g: dict(e) for g, e in DEFAULT_EFFECTS.items()})

    def validate(self):
        if self.n_per_group < 2:
            raise ConfigError("n_per_group must be at least 2")
        if not 1 <= self.min_turns <= self.max_turns:
            raise ConfigError("need 1 <= min_turns <= max_turns")
        if not math.isfinite(self.effect_scale) or self.effect_scale < 0:
            raise ConfigError("effect_scale must be finite and non-negative")
        for g, eff in self.effects.items():
            if g not in Group.__members__:
                raise ConfigError(f"unknown group {g!r} in effects")
            for k, v in eff.items():
                if k not in BASE_RATES and k not in GENERATOR_EFFECTS:
                    raise ConfigError(f"unknown effect {k!r}")
                if not (math.isfinite(v) and v > 0):
                    raise ConfigError(f"effect {g}.{k} must be a positive finite multiplier")

    def multiplier(self, group: str, key: str) -> float:
        m = self.effects.get(group, {}).get(key, 1.0)
        return 1.0 + self.effect_scale * (m - 1.0)


GROUP_ORDER = (Group.HC, Group.BD, Group.BPD)


def _ipde(group, rng):
    """IPDE with group medians near 0 (HC), 2 (BD) and 16 (BPD)."""
    if group is Group.HC:
        return float(rng.choice([0, 0, 0, 0, 0, 0, 1]))
    if group is Group.BD:
        return float(rng.choice([1, 2, 2, 3, 4]))
    return float(max(8, round(rng.normal(16, 2.2))))


def _bis11(group, rng):
    centre = {Group.HC: 48.5, Group.BD: 67.0, Group.BPD: 76.0}[group]
    return float(round(rng.normal(centre, 8.0)))


class _Speech:
    """Token stream for one speaker across an interview."""

    def __init__(self, rng, rates, repeat0, drift):
        self.rng = rng
        cats = sorted(rates)
        probs = np.array([rates[c] for c in cats])
        self.cats, self.probs = cats, probs / probs.sum()
        self.repeat0, self.drift = repeat0, drift
        self.history = []

    def turn(self, n_tokens, progress):
        rng = self.rng
        repeat = min(0.9, self.repeat0 + self.drift * progress)
        tokens, sent_len, verb_seen = [], 0, False
        target = int(rng.integers(4, 12))
        for i in range(n_tokens):
            if self.history and rng.random() < repeat:
                text, pos, dep = self.history[int(rng.integers(max(0, len(self.history) - 30),
                                                               len(self.history)))]
            else:
                cat = self.cats[int(rng.choice(len(self.cats), p=self.probs))]
                pool = VOCAB[cat]
                text, pos, dep = pool[int(rng.integers(len(pool)))]
            if pos == "VERB":
                dep = "ccomp" if verb_seen else "root"
                verb_seen = True
            self.history.append((text, pos, dep))
            sent_len += 1
            final = sent_len >= target or i == n_tokens - 1
            tokens.append(Token(text, pos, dep, final))
            if final:
                sent_len, verb_seen = 0, False
                target = int(rng.integers(4, 12))
        return tuple(tokens)


def _timing(rng, n_tokens, wps, start_ms):
    """Turn end, pauses and an optional opening overlap, all in milliseconds."""
    speech_ms = max(200, int(round(1000 * n_tokens / (wps * rng.lognormal(0.0, 0.15)))))
    n_pauses = int(rng.poisson(n_tokens / 12.0))
    chunks = rng.dirichlet(np.ones(n_pauses + 1)) * speech_ms
    chunks = np.maximum(np.round(chunks).astype(int), 50)
    pauses, t = [], start_ms + int(chunks[0])
    for k in range(n_pauses):
        dur = int(rng.integers(100, 450)) if rng.random() < 0.7 else int(rng.integers(600, 1500))
        pauses.append((t, t + dur))
        t += dur + int(chunks[k + 1])
    end_ms = t
    overlaps = []
    if rng.random() < 0.25:
        dur = int(rng.integers(50, max(51, min(600, int(chunks[0] * 0.9)))))
        overlaps.append((start_ms, start_ms + dur))
    return end_ms, pauses, overlaps


def generate_interview(spec: SynthSpec, group: Group, index: int) -> Interview:
    g_idx = GROUP_ORDER.index(group)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=(g_idx, index)))
    gname = group.value

    p_rates = {c: r * spec.multiplier(gname, c) for c, r in BASE_RATES.items()}
    participant = _Speech(rng, p_rates, BASE_REPEAT, BASE_DRIFT * spec.multiplier(gname, "drift"))
    interviewer = _Speech(rng, dict(BASE_RATES), BASE_REPEAT, BASE_DRIFT)
    p_wps = BASE_WPS * spec.multiplier(gname, "wps")
    p_gap = BASE_GAP * spec.multiplier(gname, "switch")

    n_pairs = int(rng.integers(spec.min_turns, spec.max_turns + 1))
    turns, now, prev_start = [], 0, -1
    for k in range(n_pairs):
        progress = k / max(1, n_pairs - 1)
        for speaker, speech, mean_tokens, wps, gap_mean in (
                (Speaker.INTERVIEWER, interviewer, 10.0, BASE_WPS, BASE_GAP),
                (Speaker.PARTICIPANT, participant, 22.0, p_wps, p_gap)):
            n_tok = max(1, int(round(rng.lognormal(math.log(mean_tokens), 0.45))))
            if turns:
                gap = int(round(1000 * rng.normal(gap_mean, 0.35)))
                start = max(prev_start + 50, now + gap)
            else:
                start = int(rng.integers(200, 1500))
            end, pauses, overlaps = _timing(rng, n_tok, wps, start)
            turns.append(SpeakerTurn(
                speaker, start / 1000, end / 1000, speech.turn(n_tok, progress),
                tuple((a / 1000, b / 1000) for a, b in pauses),
                tuple((a / 1000, b / 1000) for a, b in overlaps)))
            prev_start, now = start, end

    return Interview(
        id=f"{gname.lower()}-{index:03d}",
        group=group,
        ipde_score=_ipde(group, rng),
        mode=Mode.ROOM if rng.random() < 0.65 else Mode.PHONE,
        turns=tuple(turns),
        bis11_score=_bis11(group, rng),
        tagset="ud",
    )


def generate(spec: SynthSpec) -> list:
    """``n_per_group`` interviews for each of HC, BD and BPD, sorted by id."""
    spec.validate()
    out = [generate_interview(spec, g, i) for g in GROUP_ORDER for i in range(spec.n_per_group)]
    return sorted(out, key=lambda iv: iv.id)
