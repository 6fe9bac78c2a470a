"""Interacting multiple model filtering with a tempered mode-probability update.

After the mode-matched Kalman updates, mode probabilities are set to
``mu_j ∝ c_j**beta * L_j**alpha``, where ``c_j`` is the transition-predicted
probability and ``L_j`` the Gaussian innovation likelihood. ``(1, 1)`` is the
ordinary IMM.

The cycle is written once over arbitrary leading batch axes, so a grid of
exponents times a set of episodes runs as a single vectorized filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.distributions import DiscreteDistribution, GaussianBelief, TemperPair
from ..exceptions import InvalidTemperError, ModelCollapseError, NumericalSingularityError, ShapeError
from .models import LinearSSM

TPM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ImmBank:
    """Mode-conditioned Gaussian beliefs with their mode probabilities.

    Parameters
    ----------
    means : array-like of shape (M, d)
    covs : array-like of shape (M, d, d)
    model_probs : DiscreteDistribution over the M modes
    tpm : array-like of shape (M, M)
        Row-stochastic; ``tpm[i, j]`` is the probability of switching from mode i to j.
    inputs : array-like of shape (M,) or (M, q)
        Known input per mode, entering the dynamics through ``G``.
    """

    means: np.ndarray
    covs: np.ndarray
    model_probs: DiscreteDistribution
    tpm: np.ndarray
    inputs: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covs, dtype=float)
        tpm = np.array(self.tpm, dtype=float)
        inputs = np.array(self.inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs[:, None]
        m = means.shape[0]
        if m < 2:
            raise ShapeError("an IMM bank needs at least two modes")
        if means.ndim != 2 or covs.shape != (m, means.shape[1], means.shape[1]):
            raise ShapeError("means must be (M, d) and covs (M, d, d)")
        if tpm.shape != (m, m) or inputs.shape[0] != m or len(self.model_probs) != m:
            raise ShapeError("tpm, inputs and model_probs must match the mode count")
        if np.any(tpm < 0) or np.max(np.abs(tpm.sum(axis=1) - 1.0)) > TPM_TOL:
            raise ValueError("tpm must be row-stochastic")
        for name, a in (("means", means), ("covs", covs), ("tpm", tpm), ("inputs", inputs)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_belief(cls, belief: GaussianBelief, tpm, inputs, model_probs=None) -> "ImmBank":
        """Every mode starts from the same belief; probabilities default to uniform."""
        m = np.asarray(tpm).shape[0]
        probs = model_probs if model_probs is not None else DiscreteDistribution.uniform(m)
        return cls(
            np.repeat(belief.mean[None, :], m, axis=0),
            np.repeat(belief.covariance[None, :, :], m, axis=0),
            probs,
            tpm,
            inputs,
        )

    @property
    def n_modes(self) -> int:
        return self.means.shape[0]

    def combined(self) -> GaussianBelief:
        """Moment-matched single Gaussian of the mixture."""
        x, P = combine_moments(self.means, self.covs, self.model_probs.weights)
        return GaussianBelief(x, P)


def combine_moments(means, covs, probs):
    """Mean and covariance of a Gaussian mixture, over leading batch axes."""
    x = np.einsum("...j,...jd->...d", probs, means)
    diff = means - x[..., None, :]
    spread = covs + diff[..., :, None] * diff[..., None, :]
    return x, np.einsum("...j,...jde->...de", probs, spread)


def _lmul(A, X):
    # A @ X for a constant A and batched X, as one BLAS call
    return np.moveaxis(np.tensordot(A, X, axes=([1], [-2])), 0, -2)


def _rmul(X, B):
    # X @ B for batched X and a constant B
    return np.tensordot(X, B, axes=([-1], [0]))


def _bmm(X, Y):
    # batched X @ Y; broadcasting beats matmul/einsum for the tiny inner sizes here
    return (X[..., :, :, None] * Y[..., None, :, :]).sum(axis=-2)


def _tempered_log_probs(c, log_lik, alpha, beta):
    # zero exponents drop their factor, zeros included
    with np.errstate(divide="ignore"):
        log_c = np.log(c)
    prior_part = np.where(beta[..., None] > 0, beta[..., None] * log_c, 0.0)
    lik_part = np.where(alpha[..., None] > 0, alpha[..., None] * log_lik, 0.0)
    logmu = prior_part + lik_part
    top = np.max(logmu, axis=-1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise ModelCollapseError("every tempered mode weight is zero")
    mu = np.exp(logmu - top)
    return mu / mu.sum(axis=-1, keepdims=True)


def imm_cycle(means, covs, probs, tpm, F, G, H, Q, R, inputs, y, alpha, beta, ua_kf=False):
    """One tempered IMM cycle over leading batch axes.

    Parameters
    ----------
    means : (..., M, d)
    covs : (..., M, d, d)
    probs : (..., M)
    tpm : (M, M)
    F, G, H, Q, R : model matrices
    inputs : (M, q)
    y : (..., p)
    alpha, beta : (...) exponents, broadcastable against the batch
    ua_kf : bool
        Also temper each mode filter (predicted covariance over ``beta``,
        measurement covariance over ``alpha``).

    Returns
    -------
    means, covs, probs : updated bank arrays
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = F.shape[0]
    p = H.shape[0]

    # mixing
    c = probs @ tpm
    safe_c = np.where(c > 0, c, 1.0)
    mix = probs[..., :, None] * tpm / safe_c[..., None, :]
    mix = np.where(c[..., None, :] > 0, mix, 1.0 / tpm.shape[0])
    x0 = _bmm(np.swapaxes(mix, -1, -2), means)
    diff = means[..., :, None, :] - x0[..., None, :, :]
    spread = covs[..., :, None, :, :] + diff[..., :, None] * diff[..., None, :]
    P0 = (mix[..., None, None] * spread).sum(axis=-4)

    # mode-matched predict
    xp = _rmul(x0, F.T) + inputs @ G.T
    Pp = _rmul(_lmul(F, P0), F.T) + G @ Q @ G.T
    Rm = np.broadcast_to(R, Pp.shape[:-2] + (p, p))
    if ua_kf:
        Pp = Pp / beta[..., None, None, None]
        Rm = Rm / alpha[..., None, None, None]

    # Joseph-form update
    PHt = _rmul(Pp, H.T)
    S = _lmul(H, PHt) + Rm
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    if p == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            S_inv = 1.0 / S
            logdet = np.log(S[..., 0, 0])
        sign = np.where(S[..., 0, 0] > 0, 1.0, 0.0)
    else:
        try:
            S_inv = np.linalg.inv(S)
        except np.linalg.LinAlgError as exc:
            raise NumericalSingularityError(f"innovation covariance is singular: {exc}") from None
        sign, logdet = np.linalg.slogdet(S)
    if np.any(sign <= 0) or not np.all(np.isfinite(S_inv)):
        raise NumericalSingularityError("innovation covariance is not positive definite")
    nu = y[..., None, :] - _rmul(xp, H.T)
    K = _bmm(PHt, S_inv)
    A = np.eye(d) - _rmul(K, H)
    Pu = _bmm(_bmm(A, Pp), np.swapaxes(A, -1, -2)) + _bmm(_bmm(K, Rm), np.swapaxes(K, -1, -2))
    Pu = 0.5 * (Pu + np.swapaxes(Pu, -1, -2))
    xu = xp + (K * nu[..., None, :]).sum(axis=-1)

    maha = (nu * (S_inv * nu[..., None, :]).sum(axis=-1)).sum(axis=-1)
    log_lik = -0.5 * (maha + logdet + p * math.log(2.0 * math.pi))
    mu = _tempered_log_probs(c, log_lik, alpha, beta)
    return xu, Pu, mu


def _check_temper(t: TemperPair, ua_kf: bool):
    if ua_kf and (t.alpha <= 0 or t.beta <= 0):
        raise InvalidTemperError("tempered mode filters need alpha > 0 and beta > 0")


def ua_imm_step(bank: ImmBank, model: LinearSSM, y, t: TemperPair, k: int = 1, ua_kf: bool = False) -> ImmBank:
    """One IMM cycle with the tempered mode-probability update."""
    _check_temper(t, ua_kf)
    m = model.at(k)
    xu, Pu, mu = imm_cycle(
        bank.means, bank.covs, bank.model_probs.weights, bank.tpm,
        m["F"], m["G"], m["H"], m["Q"], m["R"], bank.inputs,
        np.atleast_1d(np.asarray(y, dtype=float)), t.alpha, t.beta, ua_kf,
    )
    return ImmBank(xu, Pu, DiscreteDistribution(mu / math.fsum(mu)), bank.tpm, bank.inputs)


def run_ua_imm(bank: ImmBank, model: LinearSSM, ys, t: TemperPair, ua_kf: bool = False):
    """Filter a measurement sequence; returns combined means ``(K, d)`` and
    mode probabilities ``(K, M)``."""
    ys = np.asarray(ys, dtype=float).reshape(len(ys), -1)
    est = np.empty((ys.shape[0], bank.means.shape[1]))
    probs = np.empty((ys.shape[0], bank.n_modes))
    for i, y in enumerate(ys):
        bank = ua_imm_step(bank, model, y, t, i + 1, ua_kf)
        est[i] = bank.combined().mean
        probs[i] = bank.model_probs.weights
    return est, probs


def run_imm_batch(bank: ImmBank, model: LinearSSM, ys, alphas, betas, ua_kf: bool = False) -> np.ndarray:
    """Run many filters at once.

    Parameters
    ----------
    ys : array of shape (E, K) or (E, K, p)
        Measurement sequences of E episodes.
    alphas, betas : arrays of shape (C,)
        Exponent pairs; every pair filters every episode.

    Returns
    -------
    ndarray of shape (C, E, K, d)
        Combined state means.
    """
    ys = np.asarray(ys, dtype=float)
    if ys.ndim == 2:
        ys = ys[..., None]
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if ua_kf and (np.any(alphas <= 0) or np.any(betas <= 0)):
        raise InvalidTemperError("tempered mode filters need alpha > 0 and beta > 0")
    if np.any(alphas < 0) or np.any(betas < 0):
        raise InvalidTemperError("exponents must be non-negative")
    n_cells, (n_ep, horizon, _) = alphas.shape[0], ys.shape
    batch = (n_cells, n_ep)
    a = np.broadcast_to(alphas[:, None], batch)
    b = np.broadcast_to(betas[:, None], batch)
    means = np.broadcast_to(bank.means, batch + bank.means.shape)
    covs = np.broadcast_to(bank.covs, batch + bank.covs.shape)
    probs = np.broadcast_to(bank.model_probs.weights, batch + (bank.n_modes,))
    out = np.empty(batch + (horizon, bank.means.shape[1]))
    for i in range(horizon):
        m = model.at(i + 1)
        means, covs, probs = imm_cycle(
            means, covs, probs, bank.tpm, m["F"], m["G"], m["H"], m["Q"], m["R"],
            bank.inputs, ys[None, :, i, :], a, b, ua_kf,
        )
        out[:, :, i, :] = np.einsum("...j,...jd->...d", probs, means)
    return out
