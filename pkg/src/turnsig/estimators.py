"""scikit-learn compatible wrappers around the signature and statistics code.

These compose with ``sklearn.pipeline`` and model-selection tools. The
experiment runner uses them directly so that every fold-level statistic is
learned in ``fit`` on training interviews only.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .features import impute_path
from .sigcore import augment_basepoint, path_signature, signature_size
from .stats import fit_logistic, pearson_columns, predict_proba


class SignatureFeaturizer(TransformerMixin, BaseEstimator):
    """Map variable-length turn sequences to truncated path signatures.

    ``X`` is a sequence of ``(n_turns, d)`` arrays with NaN for missing
    values. ``fit`` learns per-dimension medians (for leading gaps) and the
    z-normalization statistics from the training turns; ``transform``
    imputes, normalizes, optionally prepends the origin, and returns one
    flattened signature per sequence.
    """

    def __init__(self, level=3, basepoint=True, normalize=True):
        self.level = level
        self.basepoint = basepoint
        self.normalize = normalize

    def _check_paths(self, X, reset):
        paths = []
        for p in X:
            a = np.asarray(p, dtype=float)
            if a.ndim == 1:
                a = a[None, :] if a.size else np.zeros((0, 0))
            paths.append(a)
        if not paths:
            raise ValueError("no sequences given")
        dims = {p.shape[1] for p in paths if p.shape[1] > 0}
        if len(dims) != 1:
            raise ValueError(f"sequences disagree on dimension: {sorted(dims)}")
        d = dims.pop()
        if reset:
            self.n_features_in_ = d
        elif d != self.n_features_in_:
            raise ValueError(f"expected dimension {self.n_features_in_}, got {d}")
        return paths

    def fit(self, X, y=None):
        paths = self._check_paths(X, reset=True)
        d = self.n_features_in_
        nonempty = [p for p in paths if len(p)]
        stacked = np.vstack(nonempty) if nonempty else np.full((0, d), np.nan)
        fill = np.zeros(d)
        for j in range(d):
            col = stacked[:, j]
            col = col[~np.isnan(col)]
            if col.size:
                fill[j] = np.median(col)
        self.fill_ = fill
        imputed = [impute_path(p, fill) for p in nonempty]
        if imputed and self.normalize:
            allrows = np.vstack(imputed)
            self.mean_ = allrows.mean(axis=0)
            std = allrows.std(axis=0)
            self.scale_ = np.where(std > 0, std, 1.0)
        else:
            self.mean_ = np.zeros(d)
            self.scale_ = np.ones(d)
        return self

    def transform_path(self, path):
        """The imputed, normalized, basepointed path fed to the signature."""
        check_is_fitted(self, "fill_")
        p = np.asarray(path, dtype=float)
        if p.size == 0:
            p = np.zeros((0, self.n_features_in_))
        p = (impute_path(p, self.fill_) - self.mean_) / self.scale_
        if self.basepoint:
            p = augment_basepoint(p, self.n_features_in_)
        return p

    def transform(self, X):
        check_is_fitted(self, "fill_")
        paths = self._check_paths(X, reset=False)
        out = np.empty((len(paths), signature_size(self.n_features_in_, self.level)))
        for i, p in enumerate(paths):
            out[i] = path_signature(self.transform_path(p), self.level, d=self.n_features_in_).flatten()
        return out


class PearsonSelector(SelectorMixin, BaseEstimator):
    """Keep columns whose Pearson correlation with ``y`` has ``p < p_threshold``.

    When nothing passes, the threshold escalates once to
    ``fallback_threshold`` (set it to None to disable); ``threshold_used_``
    and ``escalated_`` record what happened. ``pvalues_`` is NaN for columns
    whose p-value certainly exceeds both thresholds.
    """

    def __init__(self, p_threshold=0.001, fallback_threshold=0.005):
        self.p_threshold = p_threshold
        self.fallback_threshold = fallback_threshold

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        p_max = max(t for t in (self.p_threshold, self.fallback_threshold) if t is not None)
        self.r_, self.pvalues_ = pearson_columns(X, y, p_max=p_max)
        threshold = self.p_threshold
        mask = self.pvalues_ < threshold
        self.escalated_ = False
        if not mask.any() and self.fallback_threshold is not None \
                and self.fallback_threshold > self.p_threshold:
            threshold = self.fallback_threshold
            mask = self.pvalues_ < threshold
            self.escalated_ = True
        self.threshold_used_ = float(threshold)
        self.support_ = mask
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class L2LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression with an L2 penalty, fit by damped Newton.

    With ``standardize=True`` columns are scaled by the training mean and
    standard deviation, and zero-variance columns are dropped. With no usable
    columns the model reduces to the training base rate.
    """

    def __init__(self, l2=1.0, max_iter=100, tol=1e-10, standardize=True):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_features=0)
        self.classes_ = np.unique(y)
        if self.classes_.size != 2:
            raise ValueError(f"need exactly two classes, got {self.classes_.tolist()}")
        self.n_features_in_ = X.shape[1]
        target = (y == self.classes_[1]).astype(float)
        if self.standardize and X.shape[1]:
            mean, std = X.mean(axis=0), X.std(axis=0)
            # round-off leaves tiny spurious spread on constant columns
            keep = std > 1e-12 * np.maximum(np.abs(mean), 1.0)
        else:
            mean, std = np.zeros(X.shape[1]), np.ones(X.shape[1])
            keep = np.ones(X.shape[1], dtype=bool)
        self.mean_, self.std_, self.keep_ = mean, std, keep
        self.fit_ = fit_logistic(self._prepare(X), target, self.l2, self.max_iter, self.tol)
        self.coef_ = self.fit_.coef[None, :]
        self.intercept_ = np.array([self.fit_.intercept])
        return self

    def _prepare(self, X):
        return (X[:, self.keep_] - self.mean_[self.keep_]) / self.std_[self.keep_]

    def decision_function(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X, ensure_min_features=0)
        return self._prepare(X) @ self.fit_.coef + self.fit_.intercept

    def predict_proba(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X, ensure_min_features=0)
        p1 = predict_proba(self.fit_, self._prepare(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return self.classes_[(self.predict_proba(X)[:, 1] > 0.5).astype(int)]
