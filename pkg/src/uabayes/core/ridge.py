"""Tempered MAP for a linear-Gaussian regression: ridge with ``lambda = beta / alpha``."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import InvalidTemperError, SingularSystemError
from .distributions import TemperPair


def map_ridge(design, targets, t: TemperPair) -> np.ndarray:
    """Solve ``(X^T X + (beta/alpha) I) w = X^T y``.

    Only the ratio ``beta / alpha`` enters, so ``(1, 1)`` and ``(2, 2)`` agree.
    """
    if t.alpha <= 0:
        raise InvalidTemperError("alpha must be positive for the MAP estimate")
    X = np.atleast_2d(np.asarray(design, dtype=float))
    y = np.asarray(targets, dtype=float)
    lam = t.beta / t.alpha
    gram = X.T @ X
    if lam == 0 and np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularSystemError("design is rank deficient and lambda = 0")
    gram[np.diag_indices_from(gram)] += lam
    try:
        return np.linalg.solve(gram, X.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None


class UARidge(RegressorMixin, BaseEstimator):
    """Linear regression fit as the tempered MAP under a unit Gaussian prior.

    Parameters
    ----------
    alpha : float, default=1.0
        Likelihood exponent.
    beta : float, default=1.0
        Prior exponent.
    """

    def __init__(self, alpha=1.0, beta=1.0):
        self.alpha = alpha
        self.beta = beta

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.coef_ = map_ridge(X, y, TemperPair(self.alpha, self.beta))
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_
