import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats as sps
from sklearn.linear_model import LogisticRegression

from oracles import brute_auroc, t_two_sided_p
from turnsig.errors import InvalidInputError, ShapeError
from turnsig.stats import (_newton_direction, auroc, betainc, fit_logistic, logistic_gradient,
                           logistic_loss, pearson, pearson_columns, predict_proba, select_features)


class TestBetainc:
    @pytest.mark.parametrize("a, b", [(0.5, 0.5), (4.0, 0.5), (13.5, 0.5), (3.0, 7.0), (50.0, 0.5)])
    def test_against_scipy(self, a, b):
        x = np.linspace(0.001, 0.999, 301)
        np.testing.assert_allclose(betainc(a, b, x), special.betainc(a, b, x), rtol=1e-11, atol=1e-300)

    def test_endpoints(self):
        assert betainc(2.0, 3.0, 0.0) == 0.0 and betainc(2.0, 3.0, 1.0) == 1.0

    def test_domain(self):
        with pytest.raises(InvalidInputError):
            betainc(1.0, 1.0, 1.5)


class TestPearson:
    def p_of_r(self, r, n):
        """Data with sample correlation exactly ``r``."""
        rng = np.random.default_rng(0)
        e = rng.normal(size=n)
        e -= e.mean()
        x = rng.normal(size=n)
        x -= x.mean()
        e -= (e @ x) / (x @ x) * x
        y = r * x / np.linalg.norm(x) + math.sqrt(1 - r * r) * e / np.linalg.norm(e)
        return x, y

    def test_n10_r08_against_t_density(self):
        x, y = self.p_of_r(0.8, 10)
        r, p = pearson(x, y)
        assert r == pytest.approx(0.8, abs=1e-12)
        t = 0.8 * math.sqrt(8 / (1 - 0.64))
        assert abs(p - t_two_sided_p(t, 8)) <= 5e-4
        assert p == pytest.approx(t_two_sided_p(t, 8), rel=1e-8)

    def test_against_scipy(self):
        rng = np.random.default_rng(1)
        for n in (3, 5, 12, 40):
            x = rng.normal(size=n)
            y = 0.5 * x + rng.normal(size=n)
            r, p = pearson(x, y)
            ref = sps.pearsonr(x, y)
            assert r == pytest.approx(ref[0], abs=1e-12)
            assert p == pytest.approx(ref[1], rel=1e-9)

    def test_perfect(self):
        r, p = pearson([1, 2, 3, 4], [2, 4, 6, 8])
        assert r == pytest.approx(1.0) and p < 1e-12

    def test_constant(self):
        assert pearson([1, 1, 1, 1], [1, 2, 3, 4]) == (0.0, 1.0)

    def test_errors(self):
        with pytest.raises(ShapeError):
            pearson([1, 2, 3], [1, 2])
        with pytest.raises(InvalidInputError):
            pearson([1, 2], [1, 2])
        with pytest.raises(InvalidInputError):
            pearson([1, np.nan, 3], [1, 2, 3])

    def test_columns_with_cutoff_agree(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(29, 3000))
        y = X[:, :20].sum(axis=1) + rng.normal(size=29)
        r, p = pearson_columns(X, y)
        r2, p2 = pearson_columns(X, y, p_max=0.005)
        np.testing.assert_array_equal(r, r2)
        for t in (0.001, 0.002, 0.005):
            np.testing.assert_array_equal(p < t, p2 < t)
        resolved = ~np.isnan(p2)
        np.testing.assert_array_equal(p[resolved], p2[resolved])
        assert np.all(p[~resolved] > 0.005)

    def test_select_features(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 5))
        y = X[:, 2] + 0.01 * rng.normal(size=30)
        sel = select_features(X, y, 0.001)
        assert sel.selected.tolist() == [2]

    def test_monotone_escalation(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(25, 400))
        y = X[:, :5].sum(axis=1) + rng.normal(size=25)
        strict = set(select_features(X, y, 0.001).selected)
        loose = set(select_features(X, y, 0.005).selected)
        assert strict <= loose


def problem(n=40, k=5, seed=0, separable=False):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, k))
    w = rng.normal(size=k)
    z = X @ w
    y = (z > 0).astype(float) if separable else (rng.random(n) < 1 / (1 + np.exp(-z))).astype(float)
    return X, y


class TestLogistic:
    @pytest.mark.parametrize("n, k, seed", [(40, 5, 0), (30, 80, 1), (29, 500, 2), (10, 1, 3)])
    def test_gradient_vanishes(self, n, k, seed):
        X, y = problem(n, k, seed)
        fit = fit_logistic(X, y, l2=1.0)
        assert fit.converged
        assert np.linalg.norm(logistic_gradient(X, y, fit.coef, fit.intercept, 1.0)) <= 1e-8

    @pytest.mark.parametrize("n, k, seed", [(40, 5, 0), (29, 200, 5)])
    def test_perturbations_do_not_improve(self, n, k, seed):
        X, y = problem(n, k, seed)
        fit = fit_logistic(X, y, l2=0.5)
        best = logistic_loss(X, y, fit.coef, fit.intercept, 0.5)
        rng = np.random.default_rng(seed)
        for _ in range(100):
            delta = rng.normal(size=k + 1) * 1e-3
            assert logistic_loss(X, y, fit.coef + delta[:-1], fit.intercept + delta[-1], 0.5) >= best

    def test_loss_monotone(self):
        X, y = problem(30, 60, 6, separable=True)
        hist = fit_logistic(X, y, l2=0.01).loss_history
        assert all(b <= a for a, b in zip(hist, hist[1:]))

    def test_matches_sklearn(self):
        X, y = problem(60, 4, 7)
        l2 = 0.3
        fit = fit_logistic(X, y, l2=l2)
        ref = LogisticRegression(C=1 / (l2 * len(y)), tol=1e-12, max_iter=10_000).fit(X, y)
        np.testing.assert_allclose(fit.coef, ref.coef_[0], atol=1e-6)
        assert fit.intercept == pytest.approx(ref.intercept_[0], abs=1e-6)

    def test_woodbury_matches_direct(self):
        rng = np.random.default_rng(8)
        n, k = 12, 40
        X = rng.normal(size=(n, k))
        prob = rng.uniform(0.1, 0.9, size=n)
        grad = rng.normal(size=k + 1)
        d = prob * (1 - prob) / n
        H = np.zeros((k + 1, k + 1))
        H[:k, :k] = (X.T * d) @ X + 0.7 * np.eye(k)
        H[:k, k] = H[k, :k] = X.T @ d
        H[k, k] = d.sum()
        np.testing.assert_allclose(_newton_direction(X, prob, grad, 0.7), np.linalg.solve(H, grad),
                                   rtol=1e-9, atol=1e-10)

    def test_independent_labels_large_penalty(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(200, 3))
        y = (rng.random(200) < 0.3).astype(float)
        fit = fit_logistic(X, y, l2=1e6)
        assert np.all(np.abs(fit.coef) < 1e-5)
        assert fit.intercept == pytest.approx(math.log(y.mean() / (1 - y.mean())), abs=1e-6)

    def test_no_features(self):
        y = np.array([0, 0, 1, 1, 1.0])
        fit = fit_logistic(np.zeros((5, 0)), y)
        assert predict_proba(fit, np.zeros(0)) == pytest.approx(0.6)

    def test_separable_stays_finite(self):
        X, y = problem(20, 2, 10, separable=True)
        fit = fit_logistic(X, y, l2=1e-3)
        assert np.all(np.isfinite(fit.coef)) and fit.converged

    def test_errors(self):
        with pytest.raises(InvalidInputError):
            fit_logistic(np.ones((3, 1)), [0, 1, 2])
        with pytest.raises(InvalidInputError):
            fit_logistic(np.ones((3, 1)), [0, 1, 1], l2=0)
        with pytest.raises(ShapeError):
            fit_logistic(np.ones((3, 1)), [0, 1])
        with pytest.raises(InvalidInputError):
            fit_logistic(np.array([[np.inf], [0], [1]]), [0, 1, 1])

    def test_predict_shapes(self):
        X, y = problem(20, 3, 11)
        fit = fit_logistic(X, y)
        assert predict_proba(fit, X).shape == (20,)
        assert 0 < predict_proba(fit, X[0]) < 1
        with pytest.raises(ShapeError):
            predict_proba(fit, np.ones(4))


class TestAuroc:
    def test_brute_force_1000(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            n = int(rng.integers(2, 30))
            labels = rng.integers(0, 2, size=n)
            labels[0], labels[1] = 0, 1
            scores = rng.integers(0, 6, size=n) / 4.0  # coarse grid forces ties
            assert auroc(scores, labels) == brute_auroc(scores, labels)

    def test_perfect_and_reversed(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert auroc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_all_tied(self):
        assert auroc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_single_class(self):
        with pytest.raises(InvalidInputError):
            auroc([0.1, 0.2], [1, 1])

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1)), min_size=2, max_size=25))
    def test_complement(self, pairs):
        scores = np.array([p[0] for p in pairs], dtype=float)
        labels = np.array([p[1] for p in pairs])
        if labels.min() == labels.max():
            return
        assert auroc(scores, labels) + auroc(-scores, labels) == pytest.approx(1.0, abs=1e-15)
