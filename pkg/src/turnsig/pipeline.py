"""Leave-one-interview-out experiments on signature features.

Per fold, everything learned from data (imputation medians, z-normalization,
Pearson screening and the classifier) sees the training interviews only.
Per-turn features do not depend on the fold and are extracted once.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DataError
from .estimators import L2LogisticRegression, PearsonSelector, SignatureFeaturizer
from .features import CNT, DIAL, FEATURE_DEFS, GROUP_DIMS, GROUPS, LING, FeatureExtractor
from .sigcore import MAX_LEVEL, signature_size, signature_words
from .stats import auroc
from .transcript import Group, Subject

log = logging.getLogger(__name__)

FALLBACK_THRESHOLD = 0.005


class Task(str, Enum):
    H_VS_BD = "H_vs_BD"
    H_VS_BPD = "H_vs_BPD"
    BD_VS_BPD = "BD_vs_BPD"

    @property
    def classes(self):
        """(negative, positive) groups."""
        return {
            Task.H_VS_BD: (Group.HC, Group.BD),
            Task.H_VS_BPD: (Group.HC, Group.BPD),
            Task.BD_VS_BPD: (Group.BD, Group.BPD),
        }[self]

    @classmethod
    def parse(cls, text):
        key = str(text).replace("-", "_").lower()
        for t in cls:
            if t.value.lower() == key:
                return t
        raise ConfigError(f"unknown task {text!r} (use h-vs-bd, h-vs-bpd or bd-vs-bpd)")


def parse_subject(text):
    for s in Subject:
        if s.value.lower() == str(text).lower():
            return s
    raise ConfigError(f"unknown subject {text!r} (use participant, interviewer or both)")


@dataclass(frozen=True)
class ExperimentConfig:
    task: Task = Task.H_VS_BD
    subject: Subject = Subject.PARTICIPANT
    sig_level: int = 3
    p_threshold: float | None = None  # None: 0.001 for Participant, 0.002 otherwise
    fallback_threshold: float = FALLBACK_THRESHOLD
    groups: tuple = GROUPS
    l2: float = 1.0
    basepoint: bool = True
    normalize: bool = True
    mattr_window: int = 10
    selection_target: str = "ipde"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "task", self.task if isinstance(self.task, Task) else Task.parse(self.task))
        if not isinstance(self.subject, Subject):
            object.__setattr__(self, "subject", parse_subject(self.subject))
        groups = tuple(g.upper() for g in self.groups)
        object.__setattr__(self, "groups", tuple(g for g in GROUPS if g in groups))
        self.validate(groups)

    def validate(self, raw_groups=None):
        unknown = set(raw_groups or ()) - set(GROUPS)
        if unknown:
            raise ConfigError(f"unknown feature groups {sorted(unknown)}")
        if not self.groups:
            raise ConfigError("at least one feature group is required")
        if not isinstance(self.sig_level, int) or not 1 <= self.sig_level <= MAX_LEVEL:
            raise ConfigError(f"sig_level must be in 1..{MAX_LEVEL}")
        for name in ("p_threshold", "fallback_threshold"):
            v = getattr(self, name)
            if v is not None and not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if not self.l2 > 0:
            raise ConfigError("l2 must be positive")
        if self.mattr_window < 1:
            raise ConfigError("mattr_window must be >= 1")
        if self.selection_target not in ("ipde", "label"):
            raise ConfigError("selection_target must be 'ipde' or 'label'")

    @property
    def threshold(self) -> float:
        if self.p_threshold is not None:
            return self.p_threshold
        return 0.001 if self.subject is Subject.PARTICIPANT else 0.002

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "task": self.task.value, "subject": self.subject.value, "sig_level": self.sig_level,
            "p_threshold": self.p_threshold, "fallback_threshold": self.fallback_threshold,
            "groups": list(self.groups), "l2": self.l2, "basepoint": self.basepoint,
            "normalize": self.normalize, "mattr_window": self.mattr_window,
            "selection_target": self.selection_target, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
        data = dict(data)
        if "groups" in data:
            data["groups"] = tuple(data["groups"])
        return cls(**data)


ColumnKey = tuple  # (group, word)


def column_keys(groups, level) -> list:
    """Labels for the concatenated signature columns of ``groups``."""
    keys = []
    for g in groups:
        keys.extend((g, w) for w in signature_words(GROUP_DIMS[g], level))
    return keys


def word_label(group, word) -> str:
    abbrevs = [f.abbrev for f in FEATURE_DEFS[group]]
    return "(" + ", ".join(abbrevs[i] for i in word) + ")"


@dataclass(frozen=True, eq=False)
class FoldResult:
    interview_id: str
    probability: float
    label: int
    selected: tuple  # ((column key, r), ...) in column order
    threshold: float
    escalated: bool
    coef: np.ndarray = field(repr=False, default=None)
    intercept: float = 0.0


@dataclass(frozen=True)
class ReportRow:
    group: str
    word: tuple
    count: int
    mean_abs_r: float

    @property
    def label(self):
        return word_label(self.group, self.word)


@dataclass(frozen=True)
class FeatureReport:
    rows: tuple
    n_folds: int
    task: Task | None = None


@dataclass(frozen=True)
class LoocvResult:
    auroc: float
    folds: tuple
    report: FeatureReport


def feature_report(folds, task=None) -> FeatureReport:
    """Rank selected columns by selection count, then mean |r|."""
    tally = {}
    for f in folds:
        for key, r in f.selected:
            c, s = tally.get(key, (0, 0.0))
            tally[key] = (c + 1, s + abs(r))
    order = {g: i for i, g in enumerate(GROUPS)}
    rows = [ReportRow(k[0], k[1], c, s / c) for k, (c, s) in tally.items()]
    rows.sort(key=lambda r: (-r.count, -round(r.mean_abs_r, 12), order[r.group], len(r.word), r.word))
    return FeatureReport(tuple(rows), len(folds), task)


def render_report(report: FeatureReport, top_k: int = 5) -> str:
    """Plain-text table of the ``top_k`` best-ranked signature features."""
    rows = report.rows[:max(0, top_k)]
    if not rows:
        return ""
    kinds = {1: "single", 2: "double", 3: "triple"}
    lines = []
    if report.task is not None:
        lines.append(f"# task {report.task.value}, {report.n_folds} folds")
    table = [("rank", "group", "feature", "integral", "folds", "mean|r|")]
    for i, r in enumerate(rows, start=1):
        table.append((str(i), r.group, r.label, kinds.get(len(r.word), f"order-{len(r.word)}"),
                      f"{r.count}/{report.n_folds}", f"{r.mean_abs_r:.4f}"))
    widths = [max(len(row[c]) for row in table) for c in range(len(table[0]))]
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


# -- experiment core -------------------------------------------------------

def task_dataset(dataset, task: Task) -> list:
    neg, pos = task.classes
    chosen = sorted((iv for iv in dataset if iv.group in (neg, pos)), key=lambda iv: iv.id)
    n_pos = sum(iv.group is pos for iv in chosen)
    if n_pos == 0 or n_pos == len(chosen):
        raise DataError(f"task {task.value} needs interviews of both {neg.value} and {pos.value}")
    if len(chosen) < 4:
        raise DataError(f"task {task.value} needs at least 4 interviews, got {len(chosen)}")
    return chosen


def _extractor(config, lexicons):
    if isinstance(lexicons, FeatureExtractor):
        return lexicons
    return FeatureExtractor(lexicons, mattr_window=config.mattr_window)


class TurnTable:
    """Per-interview turn matrices for one subject, computed once."""

    def __init__(self, interviews, subject, extractor):
        self.ids = [iv.id for iv in interviews]
        self.mats = [extractor.turn_matrices(iv, subject, GROUPS) for iv in interviews]

    def group(self, g, rows=None):
        idx = range(len(self.mats)) if rows is None else rows
        return [self.mats[i][g] for i in idx]


def fit_featurizers(table: TurnTable, rows, config) -> dict:
    return {g: SignatureFeaturizer(config.sig_level, config.basepoint, config.normalize)
            .fit(table.group(g, rows)) for g in config.groups}


def summarize_interview(interview, config: ExperimentConfig, lexicons=None, featurizers=None):
    """Interview-level vector: concatenated per-group signatures.

    ``featurizers`` carries training statistics (see :func:`fit_featurizers`);
    without them the interview is normalized against its own turns.
    Returns ``(vector, column_keys)``.
    """
    ex = _extractor(config, lexicons)
    mats = ex.turn_matrices(interview, config.subject, config.groups)
    parts = []
    for g in config.groups:
        feat = featurizers[g] if featurizers is not None else \
            SignatureFeaturizer(config.sig_level, config.basepoint, config.normalize).fit([mats[g]])
        parts.append(feat.transform([mats[g]])[0])
    return np.concatenate(parts), column_keys(config.groups, config.sig_level)


@dataclass(frozen=True)
class _Variant:
    """One evaluation sharing the fold loop: feature groups, threshold, labels."""
    groups: tuple
    threshold: float
    labels: np.ndarray
    targets: np.ndarray


def _labels_and_targets(interviews, config):
    pos = config.task.classes[1]
    labels = np.array([int(iv.group is pos) for iv in interviews])
    if config.selection_target == "label":
        targets = labels.astype(float)
    else:
        targets = np.array([iv.ipde_score for iv in interviews], dtype=float)
    return labels, targets


def _run_folds(interviews, table: TurnTable, config, variants):
    """LOOCV for every variant, sharing the per-fold signature matrices."""
    n = len(interviews)
    needed = [g for g in GROUPS if any(g in v.groups for v in variants)]
    level = config.sig_level
    offsets, start = {}, 0
    for g in needed:
        size = signature_size(GROUP_DIMS[g], level)
        offsets[g] = (start, start + size)
        start += size
    all_keys = column_keys(needed, level)
    variant_cols = [np.concatenate([np.arange(*offsets[g]) for g in v.groups]) for v in variants]
    results = [[] for _ in variants]

    for held in range(n):
        train = [i for i in range(n) if i != held]
        feats = fit_featurizers(table, train, config.replace(groups=tuple(needed)))
        blocks = [feats[g].transform(table.group(g)) for g in needed]
        X = np.hstack(blocks)
        for vi, (v, cols) in enumerate(zip(variants, variant_cols)):
            Xv = X[:, cols]
            X_tr, y_tr, t_tr = Xv[train], v.labels[train], v.targets[train]
            if np.unique(y_tr).size < 2:
                raise DataError("a training fold holds a single class; need >= 2 interviews per class")
            sel = PearsonSelector(v.threshold, config.fallback_threshold).fit(X_tr, t_tr)
            mask = sel.get_support()
            clf = L2LogisticRegression(l2=config.l2).fit(X_tr[:, mask], y_tr)
            prob = float(clf.predict_proba(Xv[held:held + 1, mask])[0, 1])
            chosen = np.flatnonzero(mask)
            selected = tuple((all_keys[cols[j]], float(sel.r_[j])) for j in chosen)
            if sel.escalated_:
                log.info("fold %s: no feature at p<%g, escalated to %g (%d selected)",
                         interviews[held].id, v.threshold, sel.threshold_used_, chosen.size)
            results[vi].append(FoldResult(
                interviews[held].id, prob, int(v.labels[held]), selected,
                sel.threshold_used_, bool(sel.escalated_), clf.fit_.coef.copy(), clf.fit_.intercept))
    return results


def _summarize(folds, task):
    probs = np.array([f.probability for f in folds])
    labels = np.array([f.label for f in folds])
    return LoocvResult(auroc(probs, labels), tuple(folds), feature_report(folds, task))


def run_loocv(dataset, config: ExperimentConfig, lexicons=None, *, table=None) -> LoocvResult:
    """Leave-one-interview-out evaluation of ``config.task``."""
    interviews = task_dataset(dataset, config.task)
    table = table or TurnTable(interviews, config.subject, _extractor(config, lexicons))
    labels, targets = _labels_and_targets(interviews, config)
    variant = _Variant(config.groups, config.threshold, labels, targets)
    (folds,) = _run_folds(interviews, table, config, [variant])
    return _summarize(folds, config.task)


def permutation_null(dataset, config: ExperimentConfig, lexicons=None, n_permutations=20) -> list:
    """AUROCs with (label, IPDE) pairs shuffled across interviews, seeded by ``config.seed``."""
    interviews = task_dataset(dataset, config.task)
    table = TurnTable(interviews, config.subject, _extractor(config, lexicons))
    labels, targets = _labels_and_targets(interviews, config)
    rng = np.random.default_rng(config.seed)
    variants = []
    for _ in range(n_permutations):
        perm = rng.permutation(len(interviews))
        variants.append(_Variant(config.groups, config.threshold, labels[perm], targets[perm]))
    return [_summarize(f, config.task).auroc for f in _run_folds(interviews, table, config, variants)]


ABLATIONS = ((), (CNT,), (DIAL,), (LING,), (LING, CNT), (LING, DIAL), (CNT, DIAL))


def ablation_label(removed) -> str:
    return "All" + "".join(f"-{g}" for g in removed)


def ablate_groups(groups, removed) -> tuple:
    kept = tuple(g for g in groups if g not in removed)
    if not kept:
        raise ConfigError(f"removing {', '.join(removed)} leaves no feature group")
    return kept


@dataclass(frozen=True)
class AblationRow:
    removed: tuple
    auroc: float
    threshold: float  # largest threshold any fold used
    escalated_folds: int
    n_folds: int

    @property
    def label(self):
        return ablation_label(self.removed)


def run_ablation(dataset, config: ExperimentConfig, lexicons=None, removals=ABLATIONS) -> list:
    """One LOOCV per row of feature groups removed, sharing fold matrices."""
    interviews = task_dataset(dataset, config.task)
    kept = [ablate_groups(config.groups, r) for r in removals]
    table = TurnTable(interviews, config.subject, _extractor(config, lexicons))
    labels, targets = _labels_and_targets(interviews, config)
    variants = [_Variant(k, config.threshold, labels, targets) for k in kept]
    rows = []
    for removed, folds in zip(removals, _run_folds(interviews, table, config, variants)):
        res = _summarize(folds, config.task)
        rows.append(AblationRow(tuple(removed), res.auroc, max(f.threshold for f in folds),
                                sum(f.escalated for f in folds), len(folds)))
    return rows


# -- output files ----------------------------------------------------------

def results_tsv(result: LoocvResult) -> str:
    lines = ["interview\tlabel\tprobability\tthreshold\tescalated\tn_selected"]
    for f in sorted(result.folds, key=lambda f: f.interview_id):
        lines.append(f"{f.interview_id}\t{f.label}\t{f.probability:.10f}\t{f.threshold:g}\t"
                     f"{int(f.escalated)}\t{len(f.selected)}")
    return "\n".join(lines) + "\n"


def ablation_tsv(rows, task=None) -> str:
    lines = ["task\tfeatures\tauroc\tthreshold\tescalated_folds\tfolds"]
    name = task.value if task is not None else ""
    for r in rows:
        lines.append(f"{name}\t{r.label}\t{r.auroc:.6f}\t{r.threshold:g}\t{r.escalated_folds}\t{r.n_folds}")
    return "\n".join(lines) + "\n"
