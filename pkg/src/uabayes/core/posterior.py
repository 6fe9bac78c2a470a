"""Tempered Bayes rule ``posterior ∝ prior**beta * likelihood**alpha``.

Discrete distributions are fused in the log domain; Gaussians in information
(precision) form. Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np

from ..exceptions import (
    DegenerateMAPError,
    DegeneratePosteriorError,
    DegenerateScaleError,
    EmptyPosteriorError,
    InvalidLikelihoodError,
    InvalidTemperError,
    InvalidWeightsError,
    ShapeError,
)
from .distributions import DiscreteDistribution, FusionWeights, GaussianBelief, TemperPair


def likelihood_distribution(likelihood_values, atoms=None) -> DiscreteDistribution:
    """Normalize likelihood values ``p(y | theta_i)`` over the parameter grid.

    >>> likelihood_distribution([1.0, 3.0]).weights
    array([0.25, 0.75])
    """
    v = np.asarray(likelihood_values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidLikelihoodError("likelihood values must be a non-empty vector")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise InvalidLikelihoodError("likelihood values must be finite and non-negative")
    total = v.sum()
    if total <= 0:
        raise InvalidLikelihoodError("likelihood is identically zero")
    return DiscreteDistribution(v / total, atoms)


def _tempered_log(weights: np.ndarray, power: float) -> np.ndarray:
    # 0**0 := 1 on atoms outside the support would resurrect them; keep them at -inf
    out = np.full(weights.shape, -np.inf)
    pos = weights > 0
    out[pos] = power * np.log(weights[pos])
    return out


def alpha_scale_discrete(h: DiscreteDistribution, alpha: float) -> DiscreteDistribution:
    """Return ``h**alpha`` renormalized.

    ``alpha == 1`` returns ``h`` itself; ``alpha == 0`` gives the uniform
    distribution over the support of ``h``.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidTemperError(f"alpha must be finite and >= 0, got {alpha!r}")
    if alpha == 1.0:
        return h
    return DiscreteDistribution.from_log_weights(_tempered_log(h.weights, alpha), h.atoms)


def alpha_scale_gaussian(g: GaussianBelief, alpha: float) -> GaussianBelief:
    """``N(mu, Sigma)**alpha`` renormalized is ``N(mu, Sigma / alpha)``."""
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidTemperError(f"alpha must be finite and >= 0, got {alpha!r}")
    if alpha == 0:
        raise DegenerateScaleError("alpha = 0 flattens a Gaussian to an improper uniform")
    if alpha == 1.0:
        return g
    return GaussianBelief(g.mean, g.covariance / alpha)


def alpha_scale(h, alpha: float):
    if isinstance(h, GaussianBelief):
        return alpha_scale_gaussian(h, alpha)
    return alpha_scale_discrete(h, alpha)


def weights_to_temper(w: FusionWeights) -> TemperPair:
    """Map objective weights ``(a1, a2, a3)`` to the exponents they induce.

    ``beta = a1 / (a1 + a2 - a3)`` and ``alpha = a2 / (a1 + a2 - a3)``.
    """
    c = w.curvature
    if c <= 0:
        raise DegenerateMAPError(
            "a3 == a1 + a2: the minimizer is any distribution on the weighted MAP set"
        )
    return TemperPair(alpha=w.a2 / c, beta=w.a1 / c)


def weighted_map_set(prior: DiscreteDistribution, lik: DiscreteDistribution, w: FusionWeights):
    """Indices maximizing ``a1 ln p + a2 ln l`` (ties within 1e-12)."""
    score = _weighted_log(prior.weights, w.a1) + _weighted_log(lik.weights, w.a2)
    top = np.max(score)
    return np.flatnonzero(score >= top - 1e-12)


def _weighted_log(weights, coef):
    if coef == 0:
        return np.zeros_like(weights)
    return _tempered_log(weights, coef)


def _check_same_length(*dists):
    n = len(dists[0])
    if any(len(d) != n for d in dists):
        raise ShapeError("distributions must share the same atoms")


def fuse_discrete(
    prior: DiscreteDistribution, lik: DiscreteDistribution, t: TemperPair
) -> DiscreteDistribution:
    """Normalized ``prior**beta * lik**alpha`` on a common grid.

    A zero exponent ignores its factor completely, including zeros in it.
    """
    _check_same_length(prior, lik)
    logw = _weighted_log(prior.weights, t.beta) + _weighted_log(lik.weights, t.alpha)
    if not np.any(np.isfinite(logw)):
        raise EmptyPosteriorError("prior**beta * lik**alpha vanishes everywhere")
    return DiscreteDistribution.from_log_weights(logw, prior.atoms)


def generalized_posterior(
    prior: DiscreteDistribution, lik: DiscreteDistribution, w: FusionWeights
) -> DiscreteDistribution:
    """Minimizer of ``a1 KL(q||p) + a2 KL(q||l) + a3 H(q)`` in closed form.

    In the degenerate case ``a3 == a1 + a2`` the raised
    :class:`~uabayes.exceptions.DegenerateMAPError` carries the MAP indices.
    """
    try:
        t = weights_to_temper(w)
    except DegenerateMAPError as exc:
        raise DegenerateMAPError(str(exc), weighted_map_set(prior, lik, w)) from None
    return fuse_discrete(prior, lik, t)


def fuse_gaussian(prior: GaussianBelief, lik: GaussianBelief, t: TemperPair) -> GaussianBelief:
    """Tempered product of two Gaussians over the same parameter.

    Precision ``beta*Lp + alpha*Ll``; mean solves
    ``Lpost m = beta*Lp mp + alpha*Ll ml``.
    """
    if prior.dim != lik.dim:
        raise ShapeError("prior and likelihood dimensions differ")
    if t.alpha + t.beta <= 0:
        raise DegeneratePosteriorError("alpha = beta = 0 leaves no information")
    lp, ll = prior.precision, lik.precision
    info = t.beta * lp + t.alpha * ll
    vec = t.beta * lp @ prior.mean + t.alpha * ll @ lik.mean
    cov = np.linalg.inv(info)
    cov = 0.5 * (cov + cov.T)
    return GaussianBelief(cov @ vec, cov)


def fuse_multi_sample(
    prior: DiscreteDistribution, liks: Sequence[DiscreteDistribution], t: TemperPair
) -> DiscreteDistribution:
    """``prior**beta * prod_i lik_i**(alpha/n)`` for ``n`` i.i.d. samples."""
    liks = list(liks)
    if not liks:
        raise ShapeError("at least one likelihood is required")
    _check_same_length(prior, *liks)
    n = len(liks)
    logw = _weighted_log(prior.weights, t.beta)
    for lik in liks:
        logw = logw + _weighted_log(lik.weights, t.alpha / n)
    if not np.any(np.isfinite(logw)):
        raise EmptyPosteriorError("tempered product vanishes everywhere")
    return DiscreteDistribution.from_log_weights(logw, prior.atoms)


def fuse_multi_prior(
    priors: Sequence[Tuple[DiscreteDistribution, float]],
    liks: Sequence[DiscreteDistribution],
    t: TemperPair,
) -> DiscreteDistribution:
    """Log-linear pool of weighted priors fused with several samples.

    Parameters
    ----------
    priors : sequence of (DiscreteDistribution, float)
        Each prior with its pooling weight; weights lie in [0, 1] and sum to 1.
    liks : sequence of DiscreteDistribution
    t : TemperPair
    """
    priors = list(priors)
    liks = list(liks)
    if not priors or not liks:
        raise ShapeError("at least one prior and one likelihood are required")
    pool = np.array([float(b) for _, b in priors])
    if np.any(pool < 0) or np.any(pool > 1) or abs(math.fsum(pool) - 1.0) > 1e-12:
        raise InvalidWeightsError("prior weights must lie in [0, 1] and sum to 1")
    dists = [p for p, _ in priors]
    _check_same_length(*dists, *liks)
    n = len(liks)
    logw = np.zeros(len(dists[0]))
    for p, b in zip(dists, pool):
        logw = logw + _weighted_log(p.weights, t.beta * b)
    for lik in liks:
        logw = logw + _weighted_log(lik.weights, t.alpha / n)
    if not np.any(np.isfinite(logw)):
        raise EmptyPosteriorError("tempered product vanishes everywhere")
    return DiscreteDistribution.from_log_weights(logw, dists[0].atoms)


def mmse_estimate(prior: DiscreteDistribution, lik: DiscreteDistribution, t: TemperPair):
    """Posterior-mean estimate under the tempered posterior (atoms required)."""
    return fuse_discrete(prior, lik, t).mean()


# Named special cases of the tempered rule.

def alpha_posterior(prior, lik, alpha):
    return fuse_discrete(prior, lik, TemperPair(alpha, 1.0))


def beta_posterior(prior, lik, beta):
    return fuse_discrete(prior, lik, TemperPair(1.0, beta))


def gamma_posterior(prior, lik, gamma):
    return fuse_discrete(prior, lik, TemperPair(gamma, gamma))


def pooled_posterior(prior, lik, alpha):
    """Geometric pool ``prior**alpha * lik**(1 - alpha)`` with ``alpha`` in [0, 1]."""
    if not 0 <= alpha <= 1:
        raise InvalidTemperError("pooling weight must lie in [0, 1]")
    return fuse_discrete(prior, lik, TemperPair(1.0 - alpha, alpha))


def alpha_prior(prior, lik, alpha):
    return fuse_discrete(prior, lik, TemperPair(0.0, alpha))


def alpha_likelihood(prior, lik, alpha):
    return fuse_discrete(prior, lik, TemperPair(alpha, 0.0))
