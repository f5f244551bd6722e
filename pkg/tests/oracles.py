"""Independent reference computations used to freeze expected values.

Nothing here imports turnsig; each oracle is a slow, direct evaluation of the
quantity the library computes by other means.
"""
import itertools
import math

import numpy as np


def discretize(points, steps):
    """Sample the piecewise-linear path through ``points`` at ``steps`` equal
    parameter increments per unit of segment index."""
    pts = np.asarray(points, dtype=float)
    n_seg = len(pts) - 1
    per_seg = max(1, steps // n_seg)
    samples = [pts[0:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        t = np.arange(1, per_seg + 1)[:, None] / per_seg
        samples.append(a + t * (b - a))
    return np.vstack(samples)


def iterated_integral(samples, word):
    """Iterated trapezoidal Riemann sum of dx_{w1} ... dx_{wk} over ordered times."""
    dx = np.diff(samples, axis=0)
    running = np.zeros(len(samples))
    running_prev = np.ones(len(samples))  # level-0 integrand is the constant 1
    for letter in word:
        mid = 0.5 * (running_prev[:-1] + running_prev[1:])
        running = np.concatenate([[0.0], np.cumsum(mid * dx[:, letter])])
        running_prev = running
    return running[-1]


def riemann_signature(points, level, steps=100_000):
    samples = discretize(points, steps)
    d = samples.shape[1]
    out = {}
    for k in range(1, level + 1):
        for word in itertools.product(range(d), repeat=k):
            out[word] = iterated_integral(samples, word)
    return out


def brute_auroc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1.0
            elif p == q:
                credit += 0.5
    return credit / (len(pos) * len(neg))


def t_two_sided_p(t, df):
    """Two-sided Student-t tail by adaptive-free quadrature of the density."""
    from scipy import integrate

    c = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))

    def density(u):
        return c * (1 + u * u / df) ** (-(df + 1) / 2)

    tail, _ = integrate.quad(density, abs(t), np.inf, epsabs=1e-14, epsrel=1e-12)
    return 2 * tail


def brute_mattr(words, window):
    if len(words) < window:
        return len(set(words)) / len(words)
    ratios = [len(set(words[i:i + window])) / window for i in range(len(words) - window + 1)]
    return sum(ratios) / len(ratios)
