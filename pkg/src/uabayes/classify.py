"""Naive Bayes training and the tempered (lambda-weighted) decision rule.

A class is chosen by maximizing ``(1 - lam) * log prior + lam * log likelihood``.
``lam = 0.5`` gives the ordinary naive Bayes decision, ``lam = 0`` ignores the
features and ``lam = 1`` ignores the class prior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from .core.distributions import TemperPair
from .exceptions import (
    EmptyDatasetError,
    InsufficientDataError,
    InvalidTemperError,
    MissingClassError,
    ShapeError,
)

VAR_FLOOR_RATIO = 1e-9


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with integer class labels in ``[0, n_classes)``.

    Parameters
    ----------
    features : array-like of shape (n_samples, n_features)
    labels : array-like of shape (n_samples,)
    n_classes : int, optional
        Defaults to ``max(labels) + 1`` (and at least 2).
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ShapeError("features must be a 2-D matrix")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ShapeError("need one label per feature row")
        if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
            raise ShapeError("labels must be integers")
        y = y.astype(int)
        if y.size and y.min() < 0:
            raise ShapeError("labels must be non-negative")
        r = self.n_classes
        if r is None:
            r = max(int(y.max()) + 1 if y.size else 2, 2)
        r = int(r)
        if r < 2:
            raise ShapeError("need at least two classes")
        if y.size and y.max() >= r:
            raise ShapeError(f"label {int(y.max())} out of range for {r} classes")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", r)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _class_counts(data: LabeledDataset) -> np.ndarray:
    counts = np.bincount(data.labels, minlength=data.n_classes)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise MissingClassError(f"no training instances for classes {missing.tolist()}")
    return counts


@dataclass(frozen=True, eq=False)
class MultinomialNBModel:
    """Log class priors and per-class log word probabilities."""

    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray

    kind = "multinomial"

    @property
    def n_classes(self) -> int:
        return self.class_log_prior.shape[0]

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        """Per-class log likelihood of each row of counts, up to a class-independent constant."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X @ self.feature_log_prob.T

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "class_log_prior": self.class_log_prior.tolist(),
            "feature_log_prob": self.feature_log_prob.tolist(),
        }


@dataclass(frozen=True, eq=False)
class GaussianNBModel:
    """Log class priors with per-class feature means and variances."""

    class_log_prior: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    kind = "gaussian"

    @property
    def n_classes(self) -> int:
        return self.class_log_prior.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        """Per-class log density of each row under independent Gaussian features."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {X.shape[1]}")
        log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.variances), axis=1)
        sq = (X[:, None, :] - self.means[None, :, :]) ** 2 / self.variances[None, :, :]
        return log_norm[None, :] - 0.5 * sq.sum(axis=2)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "class_log_prior": self.class_log_prior.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }


NBModel = Union[MultinomialNBModel, GaussianNBModel]


def model_to_json(model: NBModel) -> str:
    return json.dumps(model.to_dict())


def model_from_json(text: str) -> NBModel:
    d = json.loads(text)
    kind = d.get("kind")
    if kind == "multinomial":
        return MultinomialNBModel(
            np.asarray(d["class_log_prior"], float), np.asarray(d["feature_log_prob"], float)
        )
    if kind == "gaussian":
        return GaussianNBModel(
            np.asarray(d["class_log_prior"], float),
            np.asarray(d["means"], float),
            np.asarray(d["variances"], float),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def train_multinomial(data: LabeledDataset) -> MultinomialNBModel:
    """Multinomial naive Bayes with add-one (Laplace) smoothing.

    Word probabilities are ``(count + 1) / (class total + n_features)``.
    """
    if data.n_features == 0:
        raise ShapeError("need at least one feature")
    X = data.features
    if np.any(X < 0):
        raise ValueError("multinomial features must be non-negative counts")
    counts = _class_counts(data)
    sums = np.zeros((data.n_classes, data.n_features))
    np.add.at(sums, data.labels, X)
    smoothed = sums + 1.0
    feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    class_log_prior = np.log(counts) - math.log(counts.sum())
    return MultinomialNBModel(class_log_prior, feature_log_prob)


def train_gaussian(data: LabeledDataset, var_floor_ratio: float = VAR_FLOOR_RATIO) -> GaussianNBModel:
    """Gaussian naive Bayes with maximum-likelihood moments.

    Variances are floored at ``var_floor_ratio`` times the largest overall
    feature variance (or at ``var_floor_ratio`` itself when every feature is
    constant), so constant features stay usable.
    """
    if data.n_features == 0:
        raise ShapeError("need at least one feature")
    counts = _class_counts(data)
    few = np.flatnonzero(counts < 2)
    if few.size:
        raise InsufficientDataError(f"classes {few.tolist()} have fewer than 2 instances")
    X = data.features
    r, d = data.n_classes, data.n_features
    means = np.empty((r, d))
    variances = np.empty((r, d))
    for c in range(r):
        rows = X[data.labels == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0)
    scale = float(np.max(X.var(axis=0)))
    floor = var_floor_ratio * scale if scale > 0 else var_floor_ratio
    variances = np.maximum(variances, floor)
    class_log_prior = np.log(counts) - math.log(counts.sum())
    return GaussianNBModel(class_log_prior, means, variances)


def _weighted_scores(model: NBModel, X, prior_weight: float, lik_weight: float) -> np.ndarray:
    # zero weights drop their term outright
    ll = model.joint_log_likelihood(X)
    scores = np.zeros_like(ll)
    if prior_weight:
        scores += prior_weight * model.class_log_prior[None, :]
    if lik_weight:
        scores += lik_weight * ll
    return scores


def _decide(scores: np.ndarray, single: bool):
    # np.argmax returns the first maximum, i.e. the lowest class index on ties
    labels = np.argmax(scores, axis=1)
    return int(labels[0]) if single else labels


def predict_lambda(model: NBModel, x, lam: float):
    """Class maximizing ``(1 - lam) log prior + lam log likelihood``.

    ``x`` may be a single feature vector (returns an ``int``) or a matrix of
    rows (returns an array). Ties go to the lowest class index.
    """
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InvalidTemperError(f"lam must lie in [0, 1], got {lam!r}")
    x = np.asarray(x, dtype=float)
    return _decide(_weighted_scores(model, x, 1.0 - lam, lam), x.ndim == 1)


def predict_ab(model: NBModel, x, t: TemperPair):
    """Class maximizing ``beta log prior + alpha log likelihood``."""
    if t.alpha + t.beta <= 0:
        raise InvalidTemperError("alpha and beta cannot both be zero")
    x = np.asarray(x, dtype=float)
    return _decide(_weighted_scores(model, x, t.beta, t.alpha), x.ndim == 1)


def misclassification_rate(model: NBModel, data: LabeledDataset, lam: float) -> float:
    """Fraction of instances whose ``predict_lambda`` label differs from the truth."""
    if len(data) == 0:
        raise EmptyDatasetError("cannot score an empty dataset")
    pred = predict_lambda(model, data.features, lam)
    return float(np.mean(pred != data.labels))


class _UANaiveBayes(ClassifierMixin, BaseEstimator):
    def fit(self, X, y):
        X, y = validate_data(self, X, y)
        check_classification_targets(y)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise MissingClassError("need at least two distinct classes")
        self.model_ = self._train(LabeledDataset(X, encoded, self.classes_.size))
        return self

    def decision_function(self, X):
        """Tempered class scores ``(1 - lam) log prior + lam log likelihood``."""
        check_is_fitted(self, "model_")
        X = validate_data(self, X, reset=False)
        return _weighted_scores(self.model_, X, 1.0 - self.lam, self.lam)

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, reset=False)
        return self.classes_[predict_lambda(self.model_, X, self.lam)]


class UAMultinomialNB(_UANaiveBayes):
    """Multinomial naive Bayes with add-one smoothing and a tempered decision rule.

    Parameters
    ----------
    lam : float, default=0.5
        Weight on the log likelihood; ``1 - lam`` goes on the log class prior.
        ``0.5`` reproduces ordinary naive Bayes.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    model_ : MultinomialNBModel
    """

    def __init__(self, lam=0.5):
        self.lam = lam

    def _train(self, data):
        return train_multinomial(data)


class UAGaussianNB(_UANaiveBayes):
    """Gaussian naive Bayes with a tempered decision rule.

    Parameters
    ----------
    lam : float, default=0.5
        Weight on the log likelihood; ``0.5`` reproduces ordinary naive Bayes.
    var_floor_ratio : float, default=1e-9
        Variance floor relative to the largest feature variance.
    """

    def __init__(self, lam=0.5, var_floor_ratio=VAR_FLOOR_RATIO):
        self.lam = lam
        self.var_floor_ratio = var_floor_ratio

    def _train(self, data):
        return train_gaussian(data, self.var_floor_ratio)
