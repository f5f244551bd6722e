"""Pearson screening, L2 logistic regression and AUROC, from first principles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, ShapeError

_EPS = 1e-15
_TINY = 1e-300


def _betacf(a, b, x, max_iter=1000):
    """Continued fraction for the incomplete beta (modified Lentz), vectorized in x.

    Only entries that have not yet converged are updated on each pass.
    """
    x = np.asarray(x, dtype=float)
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d[np.abs(d) < _TINY] = _TINY
    d = 1.0 / d
    h = d.copy()
    active = np.arange(x.size)
    for m in range(1, max_iter + 1):
        xa, ca, da = x[active], c[active], d[active]
        m2 = 2 * m
        aa = m * (b - m) * xa / ((qam + m2) * (a + m2))
        da = 1.0 + aa * da
        da[np.abs(da) < _TINY] = _TINY
        ca = 1.0 + aa / ca
        ca[np.abs(ca) < _TINY] = _TINY
        da = 1.0 / da
        step = da * ca
        aa = -(a + m) * (qab + m) * xa / ((a + m2) * (qap + m2))
        da = 1.0 + aa * da
        da[np.abs(da) < _TINY] = _TINY
        ca = 1.0 + aa / ca
        ca[np.abs(ca) < _TINY] = _TINY
        da = 1.0 / da
        delta = da * ca
        h[active] *= step * delta
        c[active], d[active] = ca, da
        active = active[np.abs(delta - 1.0) >= _EPS]
        if active.size == 0:
            break
    return h


def betainc(a: float, b: float, x, x_complement=None):
    """Regularized incomplete beta ``I_x(a, b)``.

    ``x_complement`` may carry an accurately computed ``1 - x`` for arguments
    close to 1.
    """
    x = np.asarray(x, dtype=float)
    xc = 1.0 - x if x_complement is None else np.asarray(x_complement, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise InvalidInputError("betainc argument outside [0, 1]")
    out = np.empty(np.broadcast(x, xc).shape)
    x, xc = np.broadcast_to(x, out.shape), np.broadcast_to(xc, out.shape)
    zero, one = x <= 0, xc <= 0
    inner = ~(zero | one)
    out[zero] = 0.0
    out[one] = 1.0
    if inner.any():
        xi, xci = x[inner], xc[inner]
        log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                     + a * np.log(xi) + b * np.log(xci))
        front = np.exp(log_front)
        direct = xi < (a + 1.0) / (a + b + 2.0)
        res = np.empty_like(xi)
        if direct.any():
            res[direct] = front[direct] * _betacf(a, b, xi[direct]) / a
        if (~direct).any():
            res[~direct] = 1.0 - front[~direct] * _betacf(b, a, xci[~direct]) / b
        out[inner] = res
    return out if out.ndim else float(out)


def _r_to_p(r, n):
    """Two-sided p of correlation ``r`` via Student-t with ``n - 2`` dof."""
    r = np.clip(np.asarray(r, dtype=float), -1.0, 1.0)
    df = n - 2
    r2 = r * r
    # t^2 = df r^2 / (1 - r^2), so df / (df + t^2) = 1 - r^2
    return betainc(df / 2.0, 0.5, 1.0 - r2, x_complement=r2)


@lru_cache(maxsize=256)
def _critical_r(n, p_max):
    """Smallest ``|r|`` with p <= ``p_max`` at sample size ``n``, by bisection."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if float(_r_to_p(mid, n)) > p_max:
            lo = mid
        else:
            hi = mid
    return lo


def pearson(x, y):
    """Sample correlation and its two-sided p-value. Constant input gives (0, 1)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise InvalidInputError("pearson needs at least 3 observations")
    r, p = pearson_columns(x[:, None], y)
    return float(r[0]), float(p[0])


def pearson_columns(X, y, p_max=None):
    """Column-wise :func:`pearson` of ``X`` against ``y``.

    With ``p_max`` the p-value is only evaluated where it can fall at or
    below ``p_max``; the others (p certainly larger) are returned as NaN.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ShapeError(f"matrix rows ({X.shape[0] if X.ndim else 0}) != target length ({y.size})")
    n = y.size
    if n < 3:
        raise InvalidInputError("pearson needs at least 3 observations")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite values in correlation input")
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sxx = np.einsum("ij,ij->j", xc, xc)
    syy = float(yc @ yc)
    sxy = yc @ xc
    ok = (sxx > 0) & (syy > 0)
    # relative tolerance guards against round-off "variance" of constant columns
    scale = np.einsum("ij,ij->j", X, X)
    ok &= sxx > 1e-24 * np.maximum(scale, _TINY)
    r = np.zeros(X.shape[1])
    r[ok] = sxy[ok] / np.sqrt(sxx[ok] * syy)
    r = np.clip(r, -1.0, 1.0)
    p = np.ones(X.shape[1])
    if p_max is not None and 0 < p_max < 1:
        # p is monotone in |r|; the margin dwarfs the p-value round-off
        skip = ok & (np.abs(r) < _critical_r(n, float(p_max)) * (1 - 1e-6))
        p[skip] = np.nan
        ok &= ~skip
    if ok.any():
        p[ok] = _r_to_p(r[ok], n)
    return r, p


@dataclass(frozen=True, eq=False)
class SelectionResult:
    selected: np.ndarray  # sorted column indices
    r: np.ndarray
    p: np.ndarray
    threshold: float


def select_features(matrix, target, p_threshold: float) -> SelectionResult:
    """Columns whose correlation with ``target`` has p below ``p_threshold``."""
    r, p = pearson_columns(matrix, target, p_max=p_threshold)
    selected = np.flatnonzero(p < p_threshold)
    return SelectionResult(selected, r, p, float(p_threshold))


# -- logistic regression ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class FitResult:
    coef: np.ndarray
    intercept: float
    converged: bool
    iterations: int
    grad_norm: float
    loss_history: tuple = field(default=())

    @property
    def weights(self) -> np.ndarray:
        """Intercept followed by the coefficients."""
        return np.concatenate([[self.intercept], self.coef])


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(X, y, coef, intercept, l2):
    z = X @ coef + intercept
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * coef @ coef)


def logistic_gradient(X, y, coef, intercept, l2):
    n = len(y)
    resid = _sigmoid(X @ coef + intercept) - y
    return np.concatenate([X.T @ resid / n + l2 * coef, [resid.sum() / n]])


def _newton_direction(X, prob, grad, l2):
    """Solve H d = grad for the penalized Hessian (intercept last, unpenalized)."""
    n, k = X.shape
    dvec = prob * (1.0 - prob) / n
    g_w, g_b = grad[:-1], grad[-1]
    c = X.T @ dvec
    s = dvec.sum()
    if k <= n:
        H = np.empty((k + 1, k + 1))
        H[:k, :k] = (X.T * dvec) @ X + l2 * np.eye(k)
        H[:k, k] = H[k, :k] = c
        H[k, k] = s
        try:
            return np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(H, grad, rcond=None)[0]
    # Woodbury on the coefficient block, Schur complement for the intercept
    sq = np.sqrt(dvec)
    Xs = X * sq[:, None]
    inner = l2 * np.eye(n) + Xs @ Xs.T

    def a_inv(v):
        return (v - Xs.T @ np.linalg.solve(inner, Xs @ v)) / l2

    ainv_g, ainv_c = a_inv(g_w), a_inv(c)
    schur = s - c @ ainv_c
    d_b = (g_b - c @ ainv_g) / schur if schur > 1e-300 else 0.0
    d_w = ainv_g - ainv_c * d_b
    return np.concatenate([d_w, [d_b]])


def fit_logistic(X, y, l2: float = 1.0, max_iter: int = 100, tol: float = 1e-10) -> FitResult:
    """Minimize mean log-loss + ``l2/2 * ||coef||^2`` by damped Newton steps.

    Starts from zero weights; the intercept is not penalized. Returns
    ``converged=False`` rather than raising when ``max_iter`` is exhausted.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ShapeError(f"X has shape {X.shape}, y has {y.size} labels")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite values in logistic-regression input")
    if not np.all((y == 0) | (y == 1)):
        raise InvalidInputError("labels must be 0 or 1")
    if not l2 > 0:
        raise InvalidInputError("l2 must be positive")

    k = X.shape[1]
    coef, intercept = np.zeros(k), 0.0
    loss = logistic_loss(X, y, coef, intercept, l2)
    history = [loss]
    converged = False
    it = 0
    grad = logistic_gradient(X, y, coef, intercept, l2)
    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            converged = True
            it -= 1
            break
        prob = _sigmoid(X @ coef + intercept)
        step = _newton_direction(X, prob, grad, l2)
        slope = float(grad @ step)
        if not slope > 0:  # numerically singular system; fall back to steepest descent
            step, slope = grad, gnorm**2
        t = 1.0
        while True:
            new_coef = coef - t * step[:-1]
            new_int = intercept - t * step[-1]
            new_loss = logistic_loss(X, y, new_coef, new_int, l2)
            if new_loss <= loss - 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if new_loss > loss:  # no representable descent left
            break
        coef, intercept, loss = new_coef, new_int, new_loss
        history.append(loss)
        grad = logistic_gradient(X, y, coef, intercept, l2)
    gnorm = float(np.linalg.norm(grad))
    converged = converged or gnorm <= tol
    return FitResult(coef, float(intercept), converged, it, gnorm, tuple(history))


def predict_proba(fit: FitResult, x) -> np.ndarray:
    """``sigmoid(x @ coef + intercept)`` for one row or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != fit.coef.size:
        raise ShapeError(f"expected {fit.coef.size} features, got {X.shape[1]}")
    p = _sigmoid(X @ fit.coef + fit.intercept)
    return p[0] if single else p


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC with half credit for ties, via average ranks."""
    s = np.asarray(scores, dtype=float).ravel()
    lab = np.asarray(labels).ravel()
    if s.shape != lab.shape:
        raise ShapeError("scores and labels differ in length")
    pos = lab == 1
    n_pos, n_neg = int(pos.sum()), int((lab == 0).sum())
    if n_pos + n_neg != lab.size:
        raise InvalidInputError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise InvalidInputError("AUROC is undefined with a single class")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size)
    sorted_s = s[order]
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    # ranks are half-integers, so these sums are exact in binary floating point
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
