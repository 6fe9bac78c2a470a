from .distributions import DiscreteDistribution, FusionWeights, GaussianBelief, TemperPair
from .information import (
    best_scale,
    bh_bound,
    entropy,
    golden_section,
    kl_divergence,
    scaling_gain_condition,
)
from .objective import brute_force_posterior, objective_value
from .posterior import (
    alpha_likelihood,
    alpha_posterior,
    alpha_prior,
    alpha_scale,
    alpha_scale_discrete,
    alpha_scale_gaussian,
    beta_posterior,
    fuse_discrete,
    fuse_gaussian,
    fuse_multi_prior,
    fuse_multi_sample,
    gamma_posterior,
    generalized_posterior,
    likelihood_distribution,
    mmse_estimate,
    pooled_posterior,
    weighted_map_set,
    weights_to_temper,
)
from .ridge import UARidge, map_ridge
