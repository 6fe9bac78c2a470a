import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.naive_bayes import GaussianNB, MultinomialNB

from uabayes.classify import (
    GaussianNBModel,
    LabeledDataset,
    MultinomialNBModel,
    UAGaussianNB,
    UAMultinomialNB,
    misclassification_rate,
    model_from_json,
    model_to_json,
    predict_ab,
    predict_lambda,
    train_gaussian,
    train_multinomial,
)
from uabayes.core import TemperPair
from uabayes.exceptions import (
    EmptyDatasetError,
    InsufficientDataError,
    InvalidTemperError,
    MissingClassError,
    ShapeError,
)


def count_corpus(seed, n=200, d=20, r=3):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, r, size=n)
    y[:r] = np.arange(r)
    rates = rng.dirichlet(np.ones(d), size=r)
    X = np.stack([rng.multinomial(30, rates[c]) for c in y]).astype(float)
    return X, y


def gauss_corpus(seed, n=200, d=4, r=3):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, r, size=n)
    y[: 2 * r] = np.tile(np.arange(r), 2)
    centers = rng.normal(scale=2.0, size=(r, d))
    X = centers[y] + rng.normal(size=(n, d))
    return X, y


class TestTrainMultinomial:
    def test_laplace_example(self):
        data = LabeledDataset([[2.0, 0.0], [0.0, 0.0]], [0, 1])
        model = train_multinomial(data)
        np.testing.assert_allclose(np.exp(model.feature_log_prob[0]), [0.75, 0.25], rtol=1e-14)

    def test_balanced_priors(self):
        data = LabeledDataset([[1.0], [2.0], [3.0], [4.0]], [0, 1, 0, 1])
        np.testing.assert_allclose(np.exp(train_multinomial(data).class_log_prior), [0.5, 0.5])

    def test_empty_vocabulary(self):
        with pytest.raises((MissingClassError, ShapeError)):
            train_multinomial(LabeledDataset(np.zeros((2, 0)), [0, 1]))

    def test_missing_class(self):
        with pytest.raises(MissingClassError):
            train_multinomial(LabeledDataset([[1.0], [2.0]], [0, 0], n_classes=2))

    def test_rows_normalized(self):
        X, y = count_corpus(0)
        m = train_multinomial(LabeledDataset(X, y))
        np.testing.assert_allclose(np.exp(m.feature_log_prob).sum(axis=1), 1.0, atol=1e-10)
        assert abs(np.exp(m.class_log_prior).sum() - 1.0) < 1e-10

    def test_matches_sklearn(self):
        X, y = count_corpus(1)
        m = train_multinomial(LabeledDataset(X, y))
        ref = MultinomialNB(alpha=1.0).fit(X, y)
        np.testing.assert_allclose(m.feature_log_prob, ref.feature_log_prob_, rtol=1e-12)
        np.testing.assert_allclose(m.class_log_prior, ref.class_log_prior_, rtol=1e-12)


class TestTrainGaussian:
    def test_two_point_moments(self):
        data = LabeledDataset([[0.0], [2.0], [5.0], [7.0]], [0, 0, 1, 1])
        m = train_gaussian(data)
        assert m.means[0, 0] == 1.0 and m.variances[0, 0] == 1.0

    def test_identical_samples_hit_floor(self):
        data = LabeledDataset(np.ones((4, 2)), [0, 0, 1, 1])
        m = train_gaussian(data)
        np.testing.assert_array_equal(m.variances, 1e-9)

    def test_floor_is_relative(self):
        data = LabeledDataset([[0.0, 3.0], [10.0, 3.0], [0.0, 3.0], [10.0, 3.0]], [0, 0, 1, 1])
        m = train_gaussian(data)
        assert m.variances[0, 1] == pytest.approx(1e-9 * 25.0)

    def test_balanced_priors(self):
        X, _ = gauss_corpus(0, n=10)
        m = train_gaussian(LabeledDataset(X, [0, 1] * 5))
        np.testing.assert_allclose(np.exp(m.class_log_prior), [0.5, 0.5])

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            train_gaussian(LabeledDataset([[0.0], [1.0], [2.0]], [0, 0, 1]))


class TestPredict:
    def setup_method(self):
        # prior favours class 1; features favour class 0
        self.model = MultinomialNBModel(
            np.log([0.1, 0.9]), np.log([[0.9, 0.1], [0.1, 0.9]])
        )
        self.x = np.array([3.0, 0.0])

    def test_lambda_zero_is_prior(self):
        assert predict_lambda(self.model, self.x, 0.0) == 1
        assert predict_lambda(self.model, [0.0, 50.0], 0.0) == 1

    def test_lambda_one_is_likelihood(self):
        assert predict_lambda(self.model, self.x, 1.0) == 0

    def test_half_is_conventional(self):
        # log 0.1 + 3 log 0.9 vs log 0.9 + 3 log 0.1
        expected = int(np.argmax([np.log(0.1) + 3 * np.log(0.9), np.log(0.9) + 3 * np.log(0.1)]))
        assert predict_lambda(self.model, self.x, 0.5) == expected

    def test_ties_lowest_index(self):
        m = MultinomialNBModel(np.log([0.5, 0.5]), np.log([[0.5, 0.5], [0.5, 0.5]]))
        assert predict_lambda(m, [1.0, 1.0], 0.5) == 0

    def test_lambda_range(self):
        with pytest.raises(InvalidTemperError):
            predict_lambda(self.model, self.x, 1.5)

    def test_ab_examples(self):
        assert predict_ab(self.model, self.x, TemperPair(2, 2)) == predict_ab(self.model, self.x, TemperPair(1, 1))
        assert predict_ab(self.model, self.x, TemperPair(1, 0)) == 0

    def test_ab_degenerate(self):
        with pytest.raises(InvalidTemperError):
            predict_ab(self.model, self.x, TemperPair(0, 0))

    def test_ratio_invariance_random(self):
        X, y = gauss_corpus(4)
        m = train_gaussian(LabeledDataset(X, y))
        rng = np.random.default_rng(9)
        for a, b in rng.uniform(0, 3, size=(100, 2)):
            np.testing.assert_array_equal(
                predict_ab(m, X, TemperPair(a, b)), predict_lambda(m, X, a / (a + b))
            )

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0.01, 100))
    def test_scaling_invariance(self, a, b, c):
        X, y = count_corpus(5, n=50)
        m = train_multinomial(LabeledDataset(X, y))
        np.testing.assert_array_equal(
            predict_ab(m, X, TemperPair(a, b)), predict_ab(m, X, TemperPair(c * a, c * b))
        )

    def test_half_matches_sklearn(self):
        for seed in range(5):
            X, y = count_corpus(seed)
            ref = MultinomialNB(alpha=1.0).fit(X, y)
            m = train_multinomial(LabeledDataset(X, y))
            np.testing.assert_array_equal(predict_lambda(m, X, 0.5), ref.predict(X))
            Xg, yg = gauss_corpus(seed)
            refg = GaussianNB().fit(Xg, yg)
            mg = train_gaussian(LabeledDataset(Xg, yg))
            np.testing.assert_array_equal(predict_lambda(mg, Xg, 0.5), refg.predict(Xg))


class TestMisclassification:
    def test_separable_training_set(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        data = LabeledDataset(X, [0, 0, 1, 1])
        assert misclassification_rate(train_gaussian(data), data, 0.5) == 0.0

    def test_constant_predictor(self):
        m = MultinomialNBModel(np.log([0.9, 0.1]), np.log([[0.5, 0.5], [0.5, 0.5]]))
        data = LabeledDataset(np.ones((4, 2)), [0, 1, 0, 1])
        assert misclassification_rate(m, data, 0.5) == 0.5

    def test_hand_enumerated(self):
        m = MultinomialNBModel(np.log([0.5, 0.5]), np.log([[0.8, 0.2], [0.2, 0.8]]))
        X = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, 3.0]])
        # predictions 0, 1, 0, 1
        data = LabeledDataset(X, [0, 0, 1, 1])
        assert misclassification_rate(m, data, 0.5) == 0.5
        data = LabeledDataset(X, [0, 1, 0, 0])
        assert misclassification_rate(m, data, 0.5) == 0.25

    def test_empty(self):
        m = MultinomialNBModel(np.log([0.5, 0.5]), np.log([[0.5, 0.5], [0.5, 0.5]]))
        with pytest.raises(EmptyDatasetError):
            misclassification_rate(m, LabeledDataset(np.zeros((0, 2)), np.zeros(0, int)), 0.5)

    def test_label_permutation(self):
        X, y = gauss_corpus(2)
        data = LabeledDataset(X, y)
        m = train_gaussian(data)
        perm = np.array([2, 0, 1])
        permuted = LabeledDataset(X, perm[y])
        inv = np.argsort(perm)
        pm = GaussianNBModel(m.class_log_prior[inv], m.means[inv], m.variances[inv])
        for lam in (0.0, 0.3, 0.5, 1.0):
            assert misclassification_rate(m, data, lam) == misclassification_rate(pm, permuted, lam)


class TestEstimators:
    def test_multinomial_matches_sklearn(self):
        X, y = count_corpus(3)
        labels = np.array(["neg", "neu", "pos"])[y]
        est = UAMultinomialNB().fit(X, labels)
        np.testing.assert_array_equal(est.predict(X), MultinomialNB().fit(X, labels).predict(X))
        assert est.get_params() == {"lam": 0.5}

    def test_gaussian_score(self):
        X, y = gauss_corpus(3)
        est = UAGaussianNB(lam=0.5).fit(X, y)
        assert est.score(X, y) == pytest.approx(GaussianNB().fit(X, y).score(X, y))

    def test_set_params_changes_decision(self):
        X, y = gauss_corpus(3)
        est = UAGaussianNB().fit(X, y)
        est.set_params(lam=0.0)
        assert len(set(est.predict(X))) == 1

    def test_dataset_rejects_bad_labels(self):
        with pytest.raises(ShapeError):
            LabeledDataset([[1.0], [2.0]], [0, 3], n_classes=2)
        with pytest.raises(ShapeError):
            LabeledDataset([[1.0], [2.0]], [0])


def test_model_json_round_trip():
    X, y = gauss_corpus(0)
    m = train_gaussian(LabeledDataset(X, y))
    back = model_from_json(model_to_json(m))
    np.testing.assert_array_equal(back.means, m.means)
    np.testing.assert_array_equal(predict_lambda(back, X, 0.3), predict_lambda(m, X, 0.3))
    X, y = count_corpus(0)
    mm = train_multinomial(LabeledDataset(X, y))
    np.testing.assert_array_equal(model_from_json(model_to_json(mm)).feature_log_prob, mm.feature_log_prob)
