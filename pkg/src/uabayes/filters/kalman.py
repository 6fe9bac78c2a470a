"""Kalman filtering with tempered prediction and measurement covariances.

Dividing the predicted covariance by ``beta`` and the measurement covariance
by ``alpha`` before the update raises the prior's Gaussian factor to ``beta``
and the likelihood's to ``alpha``; ``(1, 1)`` is the ordinary filter.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..core.distributions import GaussianBelief, TemperPair
from ..exceptions import InvalidTemperError, NumericalSingularityError
from .models import LinearSSM


def _check_temper(t: TemperPair):
    if t.alpha <= 0 or t.beta <= 0:
        raise InvalidTemperError("Kalman tempering needs alpha > 0 and beta > 0")


def kalman_predict(mean, cov, F, G, Q, u=None):
    """Time update ``x = F x (+ G u)``, ``P = F P F^T + G Q G^T``."""
    x = F @ mean
    if u is not None:
        x = x + G @ np.atleast_1d(u)
    P = F @ cov @ F.T + G @ Q @ G.T
    return x, P


def joseph_update(mean, cov, y, H, R):
    """Measurement update in Joseph form.

    Returns
    -------
    mean, cov : updated moments
    innovation, S : residual ``y - H x`` and its covariance
    """
    innovation = np.atleast_1d(y) - H @ mean
    S = H @ cov @ H.T + R
    S = 0.5 * (S + S.T)
    try:
        K = np.linalg.solve(S, H @ cov).T
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularityError(f"innovation covariance is singular: {exc}") from None
    if not np.all(np.isfinite(K)):
        raise NumericalSingularityError("innovation covariance is singular")
    A = np.eye(mean.shape[0]) - K @ H
    P = A @ cov @ A.T + K @ R @ K.T
    return mean + K @ innovation, 0.5 * (P + P.T), innovation, S


def ua_kalman_step(belief: GaussianBelief, model: LinearSSM, y, t: TemperPair, k: int = 1) -> GaussianBelief:
    """One predict/update cycle with the predicted covariance divided by
    ``beta`` and the measurement covariance divided by ``alpha``."""
    _check_temper(t)
    m = model.at(k)
    x, P = kalman_predict(belief.mean, belief.covariance, m["F"], m["G"], m["Q"])
    x, P, _, _ = joseph_update(x, P / t.beta, y, m["H"], m["R"] / t.alpha)
    return GaussianBelief(x, P)


def ua_kalman_filter(initial: GaussianBelief, model: LinearSSM, ys, t: TemperPair = TemperPair()):
    """Run :func:`ua_kalman_step` over measurements ``ys`` (steps ``1..K``).

    Returns
    -------
    means : ndarray of shape (K, d)
    covs : ndarray of shape (K, d, d)
    """
    _check_temper(t)
    ys = np.asarray(ys, dtype=float)
    ys = ys.reshape(ys.shape[0], -1)
    d = model.state_dim
    means = np.empty((ys.shape[0], d))
    covs = np.empty((ys.shape[0], d, d))
    x, P = initial.mean, initial.covariance
    for i, y in enumerate(ys):
        m = model.at(i + 1)
        x, P = kalman_predict(x, P, m["F"], m["G"], m["Q"])
        x, P, _, _ = joseph_update(x, P / t.beta, y, m["H"], m["R"] / t.alpha)
        means[i], covs[i] = x, P
    return means, covs


class UAKalmanFilter(TransformerMixin, BaseEstimator):
    """Tempered Kalman filter as a transformer from measurement sequences to
    filtered state means.

    Parameters
    ----------
    model : LinearSSM
    initial : GaussianBelief
        Belief about the state at step 0.
    alpha : float, default=1.0
        Measurement exponent; smaller values trust the measurements less.
    beta : float, default=1.0
        Prediction exponent; smaller values trust the dynamics less.
    """

    def __init__(self, model=None, initial=None, alpha=1.0, beta=1.0):
        self.model = model
        self.initial = initial
        self.alpha = alpha
        self.beta = beta

    def fit(self, X=None, y=None):
        _check_temper(TemperPair(self.alpha, self.beta))
        if self.model is None or self.initial is None:
            raise ValueError("model and initial belief are required")
        self.n_state_ = self.model.state_dim
        return self

    def transform(self, X):
        """Filter a ``(K,)`` or ``(K, p)`` measurement sequence; returns ``(K, d)`` means."""
        means, self.covariances_ = ua_kalman_filter(
            self.initial, self.model, X, TemperPair(self.alpha, self.beta)
        )
        return means
