"""Tempered Bayesian fusion: posteriors proportional to ``prior**beta * likelihood**alpha``,
with classifiers, state estimators and tuning built on them."""

from .classify import UAGaussianNB, UAMultinomialNB
from .core import (
    DiscreteDistribution,
    FusionWeights,
    GaussianBelief,
    TemperPair,
    UARidge,
    alpha_scale,
    best_scale,
    entropy,
    fuse_discrete,
    fuse_gaussian,
    generalized_posterior,
    kl_divergence,
    weights_to_temper,
)
from .filters import UAKalmanFilter, UAParticleFilter
from .tuning import SearchDomain, TuningResult, grid_search, rbf_surrogate_optimize

__all__ = [
    "DiscreteDistribution",
    "FusionWeights",
    "GaussianBelief",
    "SearchDomain",
    "TemperPair",
    "TuningResult",
    "UAGaussianNB",
    "UAKalmanFilter",
    "UAMultinomialNB",
    "UAParticleFilter",
    "UARidge",
    "alpha_scale",
    "best_scale",
    "entropy",
    "fuse_discrete",
    "fuse_gaussian",
    "generalized_posterior",
    "grid_search",
    "kl_divergence",
    "rbf_surrogate_optimize",
    "weights_to_temper",
]
