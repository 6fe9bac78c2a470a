"""Seeded synthetic scenarios: the scalar nonlinear benchmark, a maneuvering
target with Markov-switching acceleration, generic linear-Gaussian rollouts and
labeled corpora with train/test mismatch.

Every generator is a pure function of a :class:`ScenarioConfig` and an episode
index. Episode ``i`` draws from numpy's PCG64 generator seeded with
``SeedSequence(seed, spawn_key=(i,))``, so episodes are independent and can be
produced in any order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .classify import LabeledDataset
from .core.distributions import GaussianBelief
from .filters.imm import ImmBank
from .filters.models import LinearSSM, NonlinearSSM

BENCHMARK_DEFAULTS = {
    "process_var": 10.0,
    "measurement_var": 1.0,
    "x0": 0.0,
    "prior_mean": 0.0,
    "prior_std": 1.0,
}
BENCHMARK_MISSPEC = {"sin_amplitude": 0.5}

JUMP_DEFAULTS = {
    "T": 1.0,
    "process_std": 1.0,
    "measurement_std": 2.0,
    "tpm_diag": 0.8,
    "accelerations": [0.0, 10.0, -10.0],
    "x0": [0.0, 0.0],
    "initial_cov": 10.0,
}
JUMP_MISSPEC = {"incomplete_model_set": True}
RICH_ACCELERATIONS = [0.0, 2.5, -2.5, 5.0, -5.0, 7.5, -7.5, 10.0, -10.0]

CORPUS_DEFAULTS = {
    "kind": "gaussian",
    "n_samples": 1000,
    "n_classes": 2,
    "n_features": 5,
    "class_sep": 1.0,
    "doc_length": 50,
    "train_fraction": 0.8,
    "class_probs": None,
}
CORPUS_MISSPEC = {"train_class_probs": None, "likelihood_shift": 0.0}


@dataclass(frozen=True)
class ScenarioConfig:
    """Seed, sizes and generator settings for one experiment.

    ``system`` and ``misspecification`` override the per-generator defaults
    (see the ``*_DEFAULTS`` and ``*_MISSPEC`` tables in this module).
    """

    seed: int = 0
    horizon: int = 100
    episodes: int = 100
    system: dict = field(default_factory=dict)
    misspecification: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.horizon) < 1 or int(self.episodes) < 1:
            raise ValueError("horizon and episodes must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def rng(self, episode: int = 0) -> np.random.Generator:
        """Independent generator for one episode."""
        return np.random.default_rng(np.random.SeedSequence(int(self.seed), spawn_key=(int(episode),)))

    def settings(self, defaults: dict, misspec_defaults: dict) -> Tuple[dict, dict]:
        sys = {**defaults, **self.system}
        mis = {**misspec_defaults, **self.misspecification}
        return sys, mis

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "horizon": int(self.horizon),
            "episodes": int(self.episodes),
            "system": dict(self.system),
            "misspecification": dict(self.misspecification),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        return cls(
            int(d.get("seed", 0)),
            int(d.get("horizon", 100)),
            int(d.get("episodes", 100)),
            dict(d.get("system", {})),
            dict(d.get("misspecification", {})),
        )


@dataclass(frozen=True, eq=False)
class EpisodeRecord:
    """Truth states ``(K,)`` or ``(K, d)``, measurements ``(K,)`` or ``(K, p)``
    and, for switching models, the active mode index per step."""

    truth: np.ndarray
    measurements: np.ndarray
    modes: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.truth) != len(self.measurements):
            raise ValueError("truth and measurements differ in length")
        if self.modes is not None and len(self.modes) != len(self.truth):
            raise ValueError("modes and truth differ in length")

    def __len__(self):
        return len(self.truth)


# scalar nonlinear benchmark

def benchmark_transition(x, k):
    """``x/2 + 25 x / (1 + x^2) + 8 cos(1.2 k)``."""
    return 0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * np.cos(1.2 * k)


def nominal_measurement(x):
    return x * x / 20.0


def true_measurement(x, sin_amplitude: float = 0.5):
    """Nominal map plus the unmodeled ``sin_amplitude * sin(x)`` term."""
    return nominal_measurement(x) + sin_amplitude * np.sin(x)


def benchmark_models(cfg: ScenarioConfig) -> Tuple[NonlinearSSM, NonlinearSSM]:
    """``(true model, nominal model)``; filters should be given the nominal one."""
    sys, mis = cfg.settings(BENCHMARK_DEFAULTS, BENCHMARK_MISSPEC)
    amp = float(mis["sin_amplitude"])
    q, r = float(sys["process_var"]), float(sys["measurement_var"])
    true = NonlinearSSM(benchmark_transition, lambda x: true_measurement(x, amp), q, r)
    return true, NonlinearSSM(benchmark_transition, nominal_measurement, q, r)


def simulate_benchmark_nonlinear(cfg: ScenarioConfig, episode: int = 0) -> EpisodeRecord:
    """Roll out the scalar benchmark; measurements come from the true map."""
    sys, mis = cfg.settings(BENCHMARK_DEFAULTS, BENCHMARK_MISSPEC)
    rng = cfg.rng(episode)
    K = int(cfg.horizon)
    w = rng.standard_normal(K) * np.sqrt(float(sys["process_var"]))
    v = rng.standard_normal(K) * np.sqrt(float(sys["measurement_var"]))
    amp = float(mis["sin_amplitude"])
    x = float(sys["x0"])
    truth = np.empty(K)
    for k in range(1, K + 1):
        x = benchmark_transition(x, k) + w[k - 1]
        truth[k - 1] = x
    return EpisodeRecord(truth, true_measurement(truth, amp) + v)


# maneuvering target with switching acceleration

def uniform_switching_tpm(n_modes: int, stay: float) -> np.ndarray:
    """Transition matrix with ``stay`` on the diagonal and the rest spread evenly."""
    if n_modes == 1:
        return np.ones((1, 1))
    tpm = np.full((n_modes, n_modes), (1.0 - stay) / (n_modes - 1))
    np.fill_diagonal(tpm, stay)
    return tpm


def constant_velocity_model(T: float, process_std: float, measurement_std: float) -> LinearSSM:
    """Position/velocity state, acceleration input through ``G = [T^2/2, T]``,
    position measured."""
    if T <= 0:
        raise ValueError("sampling time must be positive")
    return LinearSSM(
        F=np.array([[1.0, T], [0.0, 1.0]]),
        G=np.array([[T * T / 2.0], [T]]),
        H=np.array([[1.0, 0.0]]),
        Q=np.array([[process_std**2]]),
        R=np.array([[measurement_std**2]]),
    )


def jump_linear_truth_modes(cfg: ScenarioConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Accelerations and transition matrix that generate the data."""
    sys, mis = cfg.settings(JUMP_DEFAULTS, JUMP_MISSPEC)
    acc = RICH_ACCELERATIONS if mis["incomplete_model_set"] else sys["accelerations"]
    acc = np.asarray(acc, dtype=float)
    return acc, uniform_switching_tpm(acc.size, float(sys["tpm_diag"]))


def jump_linear_filter_setup(cfg: ScenarioConfig) -> Tuple[ImmBank, LinearSSM]:
    """IMM bank and model that a filter assumes (the nominal mode set)."""
    sys, _ = cfg.settings(JUMP_DEFAULTS, JUMP_MISSPEC)
    model = constant_velocity_model(float(sys["T"]), float(sys["process_std"]), float(sys["measurement_std"]))
    acc = np.asarray(sys["accelerations"], dtype=float)
    belief = GaussianBelief(np.asarray(sys["x0"], dtype=float), np.eye(2) * float(sys["initial_cov"]))
    bank = ImmBank.from_belief(belief, uniform_switching_tpm(acc.size, float(sys["tpm_diag"])), acc)
    return bank, model


def simulate_jump_linear(cfg: ScenarioConfig, episode: int = 0) -> EpisodeRecord:
    """Maneuvering target whose acceleration follows a Markov chain.

    The first mode is drawn uniformly (the stationary law of the symmetric
    transition matrix). With ``incomplete_model_set`` on, the data use the
    nine accelerations ``{0, ±2.5, ±5, ±7.5, ±10}``.
    """
    sys, _ = cfg.settings(JUMP_DEFAULTS, JUMP_MISSPEC)
    acc, tpm = jump_linear_truth_modes(cfg)
    T = float(sys["T"])
    F = np.array([[1.0, T], [0.0, 1.0]])
    G = np.array([T * T / 2.0, T])
    rng = cfg.rng(episode)
    K = int(cfg.horizon)
    cum = np.cumsum(tpm, axis=1)
    u = rng.random(K)
    w = rng.standard_normal(K) * float(sys["process_std"])
    v = rng.standard_normal(K) * float(sys["measurement_std"])
    x = np.asarray(sys["x0"], dtype=float)
    mode = int(rng.integers(acc.size))
    truth = np.empty((K, 2))
    modes = np.empty(K, dtype=int)
    for k in range(K):
        if k > 0:
            mode = min(int(np.searchsorted(cum[mode], u[k], side="right")), acc.size - 1)
        x = F @ x + G * (acc[mode] + w[k])
        truth[k], modes[k] = x, mode
    return EpisodeRecord(truth, truth[:, 0] + v, modes)


# generic linear-Gaussian rollout

def _psd_factor(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate_linear_ssm(cfg: ScenarioConfig, model: LinearSSM, episode: int = 0) -> EpisodeRecord:
    """Roll ``x_k = F x_{k-1} + G w``, ``y_k = H x_k + v`` from ``system['x0']`` (zeros by default)."""
    rng = cfg.rng(episode)
    K = int(cfg.horizon)
    x = np.asarray(cfg.system.get("x0", np.zeros(model.state_dim)), dtype=float)
    truth = np.empty((K, model.state_dim))
    ys = np.empty((K, model.obs_dim))
    factors = {}

    def factor(cov):
        # constant models hand back the same array every step
        if id(cov) not in factors:
            factors[id(cov)] = (cov, _psd_factor(cov))
        return factors[id(cov)][1]

    for k in range(1, K + 1):
        m = model.at(k)
        w = factor(m["Q"]) @ rng.standard_normal(m["Q"].shape[0])
        v = factor(m["R"]) @ rng.standard_normal(m["R"].shape[0])
        x = m["F"] @ x + m["G"] @ w
        truth[k - 1] = x
        ys[k - 1] = m["H"] @ x + v
    return EpisodeRecord(truth, ys)


# labeled corpora

def _draw_labels(rng, n, probs):
    return rng.choice(len(probs), size=n, p=probs)


def generate_classification_corpus(cfg: ScenarioConfig, episode: int = 0) -> Tuple[LabeledDataset, LabeledDataset]:
    """Train/test corpora with optional train/test mismatch.

    Both splits draw classes from ``class_probs`` (uniform by default).
    ``train_class_probs`` replaces it for the training split only;
    ``likelihood_shift`` moves the test feature distribution.
    Gaussian corpora shift every class mean by that amount; multinomial corpora
    mix each class's word rates with a random rate vector by that fraction.
    """
    sys, mis = cfg.settings(CORPUS_DEFAULTS, CORPUS_MISSPEC)
    rng = cfg.rng(episode)
    r, d, n = int(sys["n_classes"]), int(sys["n_features"]), int(sys["n_samples"])
    if r < 2:
        raise ValueError("need at least two classes")
    n_train = int(round(float(sys["train_fraction"]) * n))
    n_test = n - n_train
    test_probs = np.full(r, 1.0 / r) if sys["class_probs"] is None else np.asarray(sys["class_probs"], float)
    train_probs = test_probs if mis["train_class_probs"] is None else np.asarray(mis["train_class_probs"], float)
    y_train = _draw_labels(rng, n_train, train_probs)
    y_test = _draw_labels(rng, n_test, test_probs)
    # every class must be trainable
    y_train[: 2 * r] = np.tile(np.arange(r), 2)
    shift = float(mis["likelihood_shift"])

    if sys["kind"] == "gaussian":
        centers = rng.normal(scale=float(sys["class_sep"]), size=(r, d))
        X_train = centers[y_train] + rng.standard_normal((n_train, d))
        X_test = centers[y_test] + shift + rng.standard_normal((n_test, d))
    elif sys["kind"] == "multinomial":
        rates = rng.dirichlet(np.full(d, 1.0 / float(sys["class_sep"])), size=r)
        drift = rng.dirichlet(np.ones(d), size=r)
        test_rates = (1.0 - shift) * rates + shift * drift
        length = int(sys["doc_length"])
        X_train = np.stack([rng.multinomial(length, rates[c]) for c in y_train]).astype(float)
        X_test = np.stack([rng.multinomial(length, test_rates[c]) for c in y_test]).astype(float)
    else:
        raise ValueError(f"unknown corpus kind {sys['kind']!r}")
    return LabeledDataset(X_train, y_train, r), LabeledDataset(X_test, y_test, r)
