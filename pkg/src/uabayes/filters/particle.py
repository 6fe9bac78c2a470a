"""Bootstrap particle filtering with tempered reweighting.

Each update sets ``w_i <- w_i**beta * p(y | x_i)**alpha`` (in the log domain)
and renormalizes. Randomness enters only through explicit arrays (process
noise and resampling uniforms), so runs with different exponents can share
the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ..core.distributions import DiscreteDistribution, TemperPair
from ..exceptions import ParticleDepletionError, ShapeError
from .models import NonlinearSSM


@dataclass(frozen=True, eq=False)
class ParticleSet:
    """Particle states with normalized weights.

    Parameters
    ----------
    states : array-like of shape (N,) or (N, d)
    weights : DiscreteDistribution, optional
        Defaults to uniform.
    ess_threshold : float, optional
        Resample when the effective sample size drops below this; defaults to ``N / 2``.
    """

    states: np.ndarray
    weights: Optional[DiscreteDistribution] = None
    ess_threshold: Optional[float] = None

    def __post_init__(self):
        x = np.array(self.states, dtype=float)
        x.setflags(write=False)
        n = x.shape[0] if x.ndim else 0
        if n < 2:
            raise ShapeError("need at least two particles")
        w = self.weights if self.weights is not None else DiscreteDistribution.uniform(n)
        if len(w) != n:
            raise ShapeError("states and weights differ in length")
        thr = n / 2.0 if self.ess_threshold is None else float(self.ess_threshold)
        if not 0 < thr <= n:
            raise ValueError(f"ess_threshold must lie in (0, {n}]")
        object.__setattr__(self, "states", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ess_threshold", thr)

    def __len__(self):
        return self.states.shape[0]

    def mean(self) -> np.ndarray:
        """Weighted mean of the states."""
        return self.weights.weights @ self.states


def effective_sample_size(weights: DiscreteDistribution) -> float:
    """``1 / sum(w**2)``, between 1 and N."""
    w = weights.weights
    return float(1.0 / np.dot(w, w))


def systematic_indices(weights, u: float, n: Optional[int] = None) -> np.ndarray:
    """Parent indices picked by positions ``(u + i) / n`` against the cumulative weights."""
    w = np.asarray(weights, dtype=float)
    n = w.size if n is None else int(n)
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    # compare in units of 1/n; cumsum round-off (five 0.2s sum past 0.6) would
    # otherwise move boundary positions, so snap near-integers
    scaled = n * np.cumsum(w)
    snapped = np.rint(scaled)
    near = np.abs(scaled - snapped) <= 8 * np.finfo(float).eps * n
    scaled[near] = snapped[near]
    scaled[-1] = n
    idx = np.searchsorted(scaled, u + np.arange(n), side="right")
    return np.minimum(idx, w.size - 1)


def systematic_resample(particles: ParticleSet, u: float, n: Optional[int] = None) -> ParticleSet:
    """Resample with a single uniform draw; the offspring get uniform weights."""
    idx = systematic_indices(particles.weights.weights, u, n)
    thr = particles.ess_threshold if n is None else None
    return ParticleSet(particles.states[idx], None, thr)


def temper_weights(weights: DiscreteDistribution, log_lik, t: TemperPair) -> DiscreteDistribution:
    """Normalize ``weights**beta * exp(log_lik)**alpha``.

    A zero exponent drops its factor entirely, zeros included.

    Raises
    ------
    ParticleDepletionError
        If every particle ends with zero weight.
    """
    log_lik = np.asarray(log_lik, dtype=float)
    logw = np.zeros(len(weights))
    if t.beta:
        w = weights.weights
        logw = np.where(w > 0, t.beta * np.log(np.where(w > 0, w, 1.0)), -np.inf)
    if t.alpha:
        logw = logw + t.alpha * log_lik
    top = np.max(logw)
    if not np.isfinite(top):
        raise ParticleDepletionError("all particle weights vanished")
    return DiscreteDistribution.from_unnormalized(np.exp(logw - top))


def ua_pf_reweight(particles: ParticleSet, model: NonlinearSSM, y: float, t: TemperPair, noise, k: int) -> ParticleSet:
    """Propagate through the transition with the given standard-normal ``noise``
    and apply the tempered reweighting, without resampling."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape != particles.states.shape:
        raise ShapeError("need one noise draw per particle")
    x = model.transition(particles.states, k) + np.sqrt(model.process_var) * noise
    w = temper_weights(particles.weights, model.log_likelihood(y, x), t)
    return ParticleSet(x, w, particles.ess_threshold)


def ua_pf_step(
    particles: ParticleSet, model: NonlinearSSM, y: float, t: TemperPair, noise, u: float, k: int
) -> ParticleSet:
    """Propagate, temper-reweight, then resample if the ESS fell below threshold."""
    out = ua_pf_reweight(particles, model, y, t, noise, k)
    if effective_sample_size(out.weights) < out.ess_threshold:
        out = systematic_resample(out, u)
    return out


@dataclass(frozen=True)
class ParticleDraws:
    """Every random number a particle-filter run consumes.

    ``initial`` has shape (N,), ``process`` (K, N) and ``resample`` (K,).
    """

    initial: np.ndarray
    process: np.ndarray
    resample: np.ndarray

    @classmethod
    def generate(cls, rng: np.random.Generator, n_particles: int, horizon: int) -> "ParticleDraws":
        return cls(
            rng.standard_normal(n_particles),
            rng.standard_normal((horizon, n_particles)),
            rng.random(horizon),
        )


def run_ua_pf(
    model: NonlinearSSM,
    ys,
    t: TemperPair,
    draws: ParticleDraws,
    initial_mean: float = 0.0,
    initial_std: float = 1.0,
    ess_fraction: float = 0.5,
) -> np.ndarray:
    """Filter ``ys`` (steps ``1..K``) and return the weighted-mean estimate after
    each reweighting, taken before any resampling."""
    ys = np.asarray(ys, dtype=float)
    n = draws.initial.shape[0]
    ps = ParticleSet(initial_mean + initial_std * draws.initial, None, ess_fraction * n)
    est = np.empty(ys.shape[0])
    for i, y in enumerate(ys):
        ps = ua_pf_reweight(ps, model, y, t, draws.process[i], i + 1)
        est[i] = ps.mean()
        if effective_sample_size(ps.weights) < ps.ess_threshold:
            ps = systematic_resample(ps, draws.resample[i])
    return est


class UAParticleFilter(BaseEstimator):
    """Tempered bootstrap particle filter for scalar nonlinear models.

    Parameters
    ----------
    model : NonlinearSSM
    n_particles : int, default=100
    alpha, beta : float, default=1.0
        Likelihood and weight exponents.
    initial_mean, initial_std : float
        Gaussian spread of the initial particles.
    ess_fraction : float, default=0.5
        Resampling threshold as a fraction of ``n_particles``.
    random_state : int, optional
    """

    def __init__(self, model=None, n_particles=100, alpha=1.0, beta=1.0,
                 initial_mean=0.0, initial_std=1.0, ess_fraction=0.5, random_state=None):
        self.model = model
        self.n_particles = n_particles
        self.alpha = alpha
        self.beta = beta
        self.initial_mean = initial_mean
        self.initial_std = initial_std
        self.ess_fraction = ess_fraction
        self.random_state = random_state

    def filter(self, ys) -> np.ndarray:
        """Return the filtered mean at each step of ``ys``."""
        ys = np.asarray(ys, dtype=float)
        draws = ParticleDraws.generate(
            np.random.default_rng(self.random_state), self.n_particles, ys.shape[0]
        )
        return run_ua_pf(self.model, ys, TemperPair(self.alpha, self.beta), draws,
                         self.initial_mean, self.initial_std, self.ess_fraction)
