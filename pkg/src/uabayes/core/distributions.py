"""Value types shared by every module: discrete and Gaussian beliefs plus the
exponent pairs that temper them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import InvalidDistributionError, InvalidTemperError, InvalidWeightsError

SUM_TOL = 1e-12
SYMMETRY_RTOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Normalized non-negative weights over a finite set of atoms.

    Parameters
    ----------
    weights : array-like of shape (n,)
        Probabilities. Must be non-negative and sum to one within ``1e-12``
        (relative to ``n`` for long vectors, where round-off accumulates).
    atoms : array-like of shape (n,) or (n, d), optional
        Parameter value attached to each weight.
    """

    weights: np.ndarray
    atoms: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise InvalidDistributionError("weights must be a non-empty 1-D vector")
        if not np.all(np.isfinite(w)):
            raise InvalidDistributionError("weights must be finite")
        if np.any(w < 0):
            raise InvalidDistributionError("weights must be non-negative")
        tol = SUM_TOL * max(1.0, w.size / 100.0)
        if abs(math.fsum(w) - 1.0) > tol:
            raise InvalidDistributionError(f"weights sum to {math.fsum(w)!r}, not 1")
        object.__setattr__(self, "weights", _frozen(w))
        if self.atoms is not None:
            atoms = _frozen(self.atoms)
            if atoms.shape[0] != w.size:
                raise InvalidDistributionError("atoms and weights differ in length")
            object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_unnormalized(cls, values, atoms=None) -> "DiscreteDistribution":
        v = np.asarray(values, dtype=float)
        return cls(v / v.sum(), atoms)

    @classmethod
    def from_log_weights(cls, log_values, atoms=None) -> "DiscreteDistribution":
        """Normalize ``exp(log_values)`` without overflow; ``-inf`` entries map to 0."""
        lv = np.asarray(log_values, dtype=float)
        top = np.max(lv)
        if not np.isfinite(top):
            raise InvalidDistributionError("no finite log-weight to normalize")
        w = np.exp(lv - top)
        return cls(w / w.sum(), atoms)

    @classmethod
    def uniform(cls, n: int, atoms=None) -> "DiscreteDistribution":
        return cls(np.full(n, 1.0 / n), atoms)

    def __len__(self):
        return self.weights.size

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def is_uniform(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.weights - self.weights[0]) <= atol))

    def mean(self):
        """Posterior-mean (MMSE) point estimate over the atoms."""
        if self.atoms is None:
            raise InvalidDistributionError("mean requires atoms")
        return np.tensordot(self.weights, self.atoms, axes=1)

    def to_json(self):
        out = {"weights": self.weights.tolist()}
        if self.atoms is not None:
            out["atoms"] = self.atoms.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> "DiscreteDistribution":
        if isinstance(obj, dict):
            return cls(obj["weights"], obj.get("atoms"))
        return cls(obj)

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        same_atoms = (self.atoms is None and other.atoms is None) or (
            self.atoms is not None
            and other.atoms is not None
            and np.array_equal(self.atoms, other.atoms)
        )
        return same_atoms and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Multivariate normal ``N(mean, covariance)``; scalars are promoted to 1-D."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise InvalidDistributionError(
                f"covariance shape {cov.shape} does not match mean of length {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidDistributionError("mean and covariance must be finite")
        scale = max(np.max(np.abs(cov)), np.finfo(float).tiny)
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
            raise InvalidDistributionError("covariance is not symmetric")
        if np.min(np.linalg.eigvalsh(cov)) <= 0:
            raise InvalidDistributionError("covariance is not positive definite")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "covariance", _frozen(cov))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def precision(self) -> np.ndarray:
        return np.linalg.inv(self.covariance)

    def pdf(self, x):
        """Density at points ``x`` of shape (..., d) (or (...) when ``d == 1``)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        diff = x - self.mean
        sol = np.linalg.solve(self.covariance, diff[..., None])[..., 0]
        quad = np.sum(diff * sol, axis=-1)
        _, logdet = np.linalg.slogdet(2 * np.pi * self.covariance)
        return np.exp(-0.5 * quad - 0.5 * logdet)

    def to_json(self):
        return {"mean": self.mean.tolist(), "covariance": self.covariance.tolist()}

    @classmethod
    def from_json(cls, obj) -> "GaussianBelief":
        return cls(obj["mean"], obj["covariance"])

    def __eq__(self, other):
        if not isinstance(other, GaussianBelief):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(
            self.covariance, other.covariance
        )

    __hash__ = None


@dataclass(frozen=True)
class TemperPair:
    """Exponents of the tempered rule: ``alpha`` on the likelihood, ``beta`` on the prior."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise InvalidTemperError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def lam(self) -> float:
        """Equivalent mixing weight ``alpha / (alpha + beta)`` for argmax decisions."""
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class FusionWeights:
    """Weights ``a1`` (prior KL), ``a2`` (likelihood KL) and ``a3`` (entropy)."""

    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0

    def __post_init__(self):
        vals = [float(self.a1), float(self.a2), float(self.a3)]
        if not all(math.isfinite(v) for v in vals):
            raise InvalidWeightsError("fusion weights must be finite")
        if vals[0] < 0 or vals[1] < 0:
            raise InvalidWeightsError("a1 and a2 must be non-negative")
        if vals[2] > vals[0] + vals[1]:
            raise InvalidWeightsError("a3 must not exceed a1 + a2")
        object.__setattr__(self, "a1", vals[0])
        object.__setattr__(self, "a2", vals[1])
        object.__setattr__(self, "a3", vals[2])

    @property
    def curvature(self) -> float:
        """``a1 + a2 - a3``, the net weight on ``sum q ln q``."""
        return self.a1 + self.a2 - self.a3
