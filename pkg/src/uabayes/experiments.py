"""Batch experiments behind the command-line interface.

Each runner is a deterministic function of a :class:`ScenarioConfig` and a
few experiment settings, returning plain arrays and rows so the CLI only
handles files. Episode-level work is a module-level function of the config
and the episode index, so it can be mapped over a process pool and reduced by
episode index.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .classify import (
    LabeledDataset,
    misclassification_rate,
    train_gaussian,
    train_multinomial,
)
from .core.distributions import DiscreteDistribution, GaussianBelief, TemperPair
from .core.information import entropy, kl_divergence
from .core.posterior import alpha_scale_gaussian, fuse_discrete, fuse_gaussian
from .exceptions import ParticleDepletionError, UABayesError
from .filters.kalman import ua_kalman_filter
from .filters.metrics import rtamse
from .filters.particle import ParticleDraws, run_ua_pf
from .filters.imm import run_imm_batch
from .properties import random_distribution, run_property_suite, scaling_curves
from .simulate import (
    BENCHMARK_DEFAULTS,
    BENCHMARK_MISSPEC,
    JUMP_DEFAULTS,
    JUMP_MISSPEC,
    ScenarioConfig,
    benchmark_models,
    constant_velocity_model,
    generate_classification_corpus,
    jump_linear_filter_setup,
    simulate_benchmark_nonlinear,
    simulate_jump_linear,
    simulate_linear_ssm,
)
from .tuning import SearchDomain, TuningResult, grid_search, rbf_surrogate_optimize

PF_ALPHAS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.25, 1.5, 1.75, 2.0)
PF_PARTICLES = (50, 100, 200)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """``map`` that may fan out over processes; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _filter_rng(cfg: ScenarioConfig, episode: int, *tag: int) -> np.random.Generator:
    # filter randomness sits on its own branch of the episode's seed tree
    return np.random.default_rng(np.random.SeedSequence(int(cfg.seed), spawn_key=(int(episode), 1) + tag))


# properties

def run_properties(seed: int = 0, n_distributions: int = 200, n_atoms: int = 50, n_pairs: int = 100):
    """Property report plus scaling curves for population member 0."""
    report = run_property_suite(seed, n_distributions, n_atoms, n_pairs)
    curves = scaling_curves(random_distribution(seed, 0, n_atoms))
    return report, curves


# fusion tables

def gaussian_family_rows(grid: Sequence[float]) -> List[list]:
    """Posterior of prior N(1, 1) and likelihood N(0.1, 1) with one exponent
    varied and the other held at 1, plus the scaled standard normal's
    entropy and KL from the unscaled one."""
    prior, lik = GaussianBelief(1.0, 1.0), GaussianBelief(0.1, 1.0)
    base = GaussianBelief(0.0, 1.0)
    rows = []
    for a in grid:
        by_beta = fuse_gaussian(prior, lik, TemperPair(1.0, a))
        by_alpha = fuse_gaussian(prior, lik, TemperPair(a, 1.0))
        row = [a, by_beta.mean[0], by_beta.covariance[0, 0], by_alpha.mean[0], by_alpha.covariance[0, 0]]
        if a > 0:
            scaled = alpha_scale_gaussian(base, a)
            row += [scaled.covariance[0, 0], entropy(scaled), kl_divergence(base, scaled)]
        else:
            row += [math.inf, math.inf, math.inf]
        rows.append(row)
    return rows


GAUSSIAN_FAMILY_HEADER = [
    "exponent", "beta_family_mean", "beta_family_var", "alpha_family_mean", "alpha_family_var",
    "scaled_var", "scaled_entropy", "kl_base_to_scaled",
]


def discrete_fusion_rows(prior, likelihood, pairs: Sequence[Tuple[float, float]]) -> List[list]:
    """Tempered posterior weights for each ``(alpha, beta)`` pair."""
    p = DiscreteDistribution.from_unnormalized(prior)
    l = DiscreteDistribution.from_unnormalized(likelihood)
    return [[a, b] + fuse_discrete(p, l, TemperPair(a, b)).weights.tolist() for a, b in pairs]


# particle filter on the scalar benchmark

def pf_episode(cfg: ScenarioConfig, particle_counts: Sequence[int], alphas: Sequence[float],
               beta: float, episode: int) -> np.ndarray:
    """RTAMSE for every ``(N, alpha)`` on one episode; ``nan`` marks a depleted run.

    All exponents at a given ``N`` share the same random draws.
    """
    rec = simulate_benchmark_nonlinear(cfg, episode)
    _, nominal = benchmark_models(cfg)
    sys, _ = cfg.settings(BENCHMARK_DEFAULTS, BENCHMARK_MISSPEC)
    out = np.full((len(particle_counts), len(alphas)), np.nan)
    for i, n in enumerate(particle_counts):
        draws = ParticleDraws.generate(_filter_rng(cfg, episode, int(n)), int(n), len(rec))
        for j, a in enumerate(alphas):
            try:
                est = run_ua_pf(nominal, rec.measurements, TemperPair(a, beta), draws,
                                float(sys["prior_mean"]), float(sys["prior_std"]))
            except ParticleDepletionError:
                continue
            if np.all(np.isfinite(est)):
                out[i, j] = rtamse(est, rec.truth)
    return out


@dataclass
class PFResult:
    particle_counts: Tuple[int, ...]
    alphas: Tuple[float, ...]
    beta: float
    rtamse: np.ndarray  # (n_counts, n_alphas, episodes)

    def rows(self) -> List[list]:
        rows = []
        for i, n in enumerate(self.particle_counts):
            for j, a in enumerate(self.alphas):
                vals = self.rtamse[i, j]
                ok = vals[np.isfinite(vals)]
                mean = float(ok.mean()) if ok.size else math.nan
                std = float(ok.std()) if ok.size else math.nan
                rows.append([n, a, self.beta, mean, std, int(ok.size), int(vals.size - ok.size)])
        return rows

    header = ["n_particles", "alpha", "beta", "mean_rtamse", "std_rtamse", "episodes", "excluded"]


def run_pf_experiment(cfg: ScenarioConfig, particle_counts=PF_PARTICLES, alphas=PF_ALPHAS,
                      beta: float = 1.0, workers: int = 1) -> PFResult:
    fn = functools.partial(pf_episode, cfg, tuple(particle_counts), tuple(alphas), float(beta))
    per_episode = parallel_map(fn, range(int(cfg.episodes)), workers)
    return PFResult(tuple(particle_counts), tuple(alphas), float(beta), np.stack(per_episode, axis=-1))


# IMM on the switching-acceleration target

def jump_linear_episodes(cfg: ScenarioConfig, workers: int = 1):
    recs = parallel_map(functools.partial(simulate_jump_linear, cfg), range(int(cfg.episodes)), workers)
    return np.stack([r.truth for r in recs]), np.stack([r.measurements for r in recs])


def imm_rtamse(cfg: ScenarioConfig, points, truth, ys, ua_kf: bool = False) -> np.ndarray:
    """Per-episode RTAMSE for each ``(alpha, beta)`` row of ``points``; shape ``(n_points, E)``."""
    bank, model = jump_linear_filter_setup(cfg)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    est = run_imm_batch(bank, model, ys, pts[:, 0], pts[:, 1], ua_kf)
    return np.sqrt(np.mean(np.sum((est - truth[None]) ** 2, axis=-1), axis=-1))


def imm_loss(cfg: ScenarioConfig, truth, ys, ua_kf: bool = False):
    """Vectorized loss: mean RTAMSE over episodes for each point."""
    return lambda pts: imm_rtamse(cfg, pts, truth, ys, ua_kf).mean(axis=1)


@dataclass
class IMMResult:
    grid: TuningResult
    baseline: float
    baseline_episodes: np.ndarray
    best_episodes: np.ndarray

    def surface_rows(self) -> List[list]:
        return [list(p) + [v] for p, v in self.grid.evaluations]


def run_imm_experiment(cfg: ScenarioConfig, step: float = 0.1, tau: float = 3.0,
                       ua_kf: bool = False, workers: int = 1, chunk: int = 64) -> IMMResult:
    truth, ys = jump_linear_episodes(cfg, workers)
    domain = SearchDomain.square(tau)
    if ua_kf:
        # tempered mode filters need positive exponents
        domain = SearchDomain([step, step], [tau, tau])
    result = grid_search(imm_loss(cfg, truth, ys, ua_kf), domain, step, vectorized=True, chunk=chunk)
    both = imm_rtamse(cfg, [(1.0, 1.0), result.best_point], truth, ys, ua_kf)
    return IMMResult(result, float(both[0].mean()), both[0], both[1])


# Kalman filter under a misspecified process noise

KALMAN_DEFAULTS = {"T": 1.0, "process_std": 1.0, "measurement_std": 2.0, "initial_cov": 10.0}
KALMAN_MISSPEC = {"process_scale": 3.0}


def kalman_episodes(cfg: ScenarioConfig):
    sys, mis = cfg.settings(KALMAN_DEFAULTS, KALMAN_MISSPEC)
    true_model = constant_velocity_model(float(sys["T"]), float(sys["process_std"]) * float(mis["process_scale"]),
                                         float(sys["measurement_std"]))
    recs = [simulate_linear_ssm(cfg, true_model, e) for e in range(int(cfg.episodes))]
    return np.stack([r.truth for r in recs]), np.stack([r.measurements for r in recs])


def kalman_loss(cfg: ScenarioConfig, truth, ys):
    """Mean RTAMSE of the tempered Kalman filter run with the nominal model."""
    sys, _ = cfg.settings(KALMAN_DEFAULTS, KALMAN_MISSPEC)
    model = constant_velocity_model(float(sys["T"]), float(sys["process_std"]), float(sys["measurement_std"]))
    init = GaussianBelief(np.zeros(2), np.eye(2) * float(sys["initial_cov"]))

    def loss(point) -> float:
        a, b = float(point[0]), float(point[1])
        if a <= 0 or b <= 0:
            return math.inf
        t = TemperPair(a, b)
        return float(np.mean([rtamse(ua_kalman_filter(init, model, y, t)[0], x) for x, y in zip(truth, ys)]))

    return loss


def run_kalman_experiment(cfg: ScenarioConfig, step: float = 0.1, tau: float = 3.0) -> TuningResult:
    truth, ys = kalman_episodes(cfg)
    return grid_search(kalman_loss(cfg, truth, ys), SearchDomain.square(tau), step)


# naive Bayes with a tempered decision rule

def train_for(data: LabeledDataset, kind: str):
    return train_multinomial(data) if kind == "multinomial" else train_gaussian(data)


@dataclass
class ClassifierResult:
    lambdas: np.ndarray
    accuracy: np.ndarray
    tuned: TuningResult
    baseline_accuracy: float

    @property
    def tuned_lambda(self) -> float:
        return float(self.tuned.best_point[0])

    @property
    def tuned_accuracy(self) -> float:
        return 1.0 - self.tuned.best_value


def run_classifier_experiment(train: LabeledDataset, test: LabeledDataset, kind: str = "gaussian",
                              lam_step: float = 0.001, budget: int = 60, seed: int = 0) -> ClassifierResult:
    """Accuracy over a lambda grid and a surrogate-tuned lambda starting from 0.5.

    The tuning loss is the misclassification rate on ``test``, so the tuned
    accuracy on ``test`` is never below the accuracy at 0.5.
    """
    model = train_for(train, kind)
    lambdas = np.round(np.arange(0, 1 + lam_step / 2, lam_step), 12)
    accuracy = np.array([1.0 - misclassification_rate(model, test, lam) for lam in lambdas])

    def loss(point):
        return misclassification_rate(model, test, float(np.clip(point[0], 0.0, 1.0)))

    tuned = rbf_surrogate_optimize(loss, SearchDomain.unit(), budget, seed, start=(0.5,))
    return ClassifierResult(lambdas, accuracy, tuned, 1.0 - misclassification_rate(model, test, 0.5))


# generic tuning targets

def smooth_test_loss(seed: int):
    """Seeded smooth bumpy quadratic on ``[0, 3]^2``."""
    rng = np.random.default_rng(seed)
    center = rng.uniform(0.0, 3.0, 2)
    scale = rng.uniform(0.5, 2.0, 2)

    def loss(point) -> float:
        x, y = float(point[0]), float(point[1])
        return float(scale[0] * (x - center[0]) ** 2 + scale[1] * (y - center[1]) ** 2
                     + 0.3 * math.sin(3.0 * x) * math.cos(2.0 * y))

    return loss


def pf_loss(cfg: ScenarioConfig, n_particles: int = 100):
    """Mean RTAMSE of the tempered particle filter at ``(alpha, beta)``."""
    recs = [simulate_benchmark_nonlinear(cfg, e) for e in range(int(cfg.episodes))]
    draws = [ParticleDraws.generate(_filter_rng(cfg, e, n_particles), n_particles, len(r)) for e, r in enumerate(recs)]
    _, nominal = benchmark_models(cfg)
    sys, _ = cfg.settings(BENCHMARK_DEFAULTS, BENCHMARK_MISSPEC)

    def loss(point) -> float:
        t = TemperPair(float(point[0]), float(point[1]))
        vals = []
        for r, d in zip(recs, draws):
            try:
                vals.append(rtamse(run_ua_pf(nominal, r.measurements, t, d,
                                             float(sys["prior_mean"]), float(sys["prior_std"])), r.truth))
            except (ParticleDepletionError, UABayesError):
                return math.inf
        return float(np.mean(vals))

    return loss


TUNE_TARGETS = ("smooth", "pf", "imm", "kalman", "classify")


def tuning_problem(target: str, cfg: ScenarioConfig, tau: float = 3.0, kind: str = "gaussian"):
    """``(loss, domain, vectorized)`` for a named tuning target."""
    if target == "smooth":
        return smooth_test_loss(cfg.seed), SearchDomain.square(tau), False
    if target == "pf":
        return pf_loss(cfg), SearchDomain.square(tau), False
    if target == "imm":
        truth, ys = jump_linear_episodes(cfg)
        return imm_loss(cfg, truth, ys), SearchDomain.square(tau), True
    if target == "kalman":
        truth, ys = kalman_episodes(cfg)
        return kalman_loss(cfg, truth, ys), SearchDomain.square(tau), False
    if target == "classify":
        cfg = dataclasses.replace(cfg, system={**cfg.system, "kind": cfg.system.get("kind", kind)})
        train, test = generate_classification_corpus(cfg)
        model = train_for(train, cfg.system["kind"])
        return (lambda p: misclassification_rate(model, test, float(np.clip(p[0], 0, 1)))), SearchDomain.unit(), False
    raise ValueError(f"unknown tuning target {target!r}; choose from {TUNE_TARGETS}")


def run_tune(target: str, cfg: ScenarioConfig, method: str = "surrogate", step: float = 0.1,
             budget: int = 60, tau: float = 3.0, kind: str = "gaussian") -> TuningResult:
    loss, domain, vectorized = tuning_problem(target, cfg, tau, kind)
    if method == "grid":
        res = grid_search(loss, domain, step, vectorized=vectorized)
        return TuningResult(res.best_point, res.best_value, res.evaluations, int(cfg.seed))
    if method == "surrogate":
        if vectorized:
            scalar = loss
            loss = lambda p: float(scalar(np.atleast_2d(p))[0])  # noqa: E731
        return rbf_surrogate_optimize(loss, domain, budget, int(cfg.seed))
    raise ValueError(f"unknown method {method!r}; choose grid or surrogate")


def experiment_defaults() -> Dict[str, dict]:
    """Scenario defaults per generator, echoed into run manifests."""
    return {
        "benchmark": {**BENCHMARK_DEFAULTS, **BENCHMARK_MISSPEC},
        "jump_linear": {**JUMP_DEFAULTS, **JUMP_MISSPEC},
        "kalman": {**KALMAN_DEFAULTS, **KALMAN_MISSPEC},
    }
