"""State-space model descriptions shared by the filters and the simulators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..exceptions import ShapeError

_NAMES = ("F", "G", "H", "Q", "R")


def _as_sequence_or_matrix(value, name):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a bare vector is a column (e.g. a noise-input G)
        a = a.reshape(-1, 1)
    if a.ndim not in (2, 3):
        raise ShapeError(f"{name} must be a matrix or a sequence of matrices")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LinearSSM:
    """Linear-Gaussian model ``x_k = F x_{k-1} + G w``, ``y_k = H x_k + v``.

    Each matrix may be constant (2-D) or a per-step sequence (3-D, indexed by
    ``k - 1`` for step ``k`` and clamped at the last entry). Vectors are read
    as columns and scalars as ``1 x 1`` matrices.

    ``R`` must be positive definite for filtering. ``noiseless_ok=True``
    relaxes that to semi-definite for data generation only.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    noiseless_ok: bool = field(default=False, kw_only=True)

    def __post_init__(self):
        for name in _NAMES:
            object.__setattr__(self, name, _as_sequence_or_matrix(getattr(self, name), name))
        lengths = [getattr(self, n).shape[0] for n in _NAMES if getattr(self, n).ndim == 3]
        for k in range(1, max(lengths, default=1) + 1):
            self._check(self.at(k), self.noiseless_ok)

    @staticmethod
    def _check(m, noiseless_ok=False):
        F, G, H, Q, R = (m[n] for n in _NAMES)
        d = F.shape[0]
        if F.shape != (d, d):
            raise ShapeError("F must be square")
        if G.shape[0] != d or Q.shape != (G.shape[1], G.shape[1]):
            raise ShapeError("G and Q are not conformable with F")
        if H.shape[1] != d or R.shape != (H.shape[0], H.shape[0]):
            raise ShapeError("H and R are not conformable with F")
        if not np.allclose(Q, Q.T) or np.min(np.linalg.eigvalsh(Q)) < -1e-12:
            raise ShapeError("Q must be symmetric positive semi-definite")
        r_min = np.min(np.linalg.eigvalsh(R))
        if not np.allclose(R, R.T) or r_min < -1e-12 or (r_min <= 0 and not noiseless_ok):
            raise ShapeError("R must be symmetric positive definite")

    @property
    def state_dim(self) -> int:
        return self.at(1)["F"].shape[0]

    @property
    def obs_dim(self) -> int:
        return self.at(1)["H"].shape[0]

    def at(self, k: int) -> dict:
        """Matrices in force at step ``k`` (1-based)."""
        out = {}
        for name in _NAMES:
            a = getattr(self, name)
            out[name] = a if a.ndim == 2 else a[min(max(k - 1, 0), a.shape[0] - 1)]
        return out


@dataclass(frozen=True)
class NonlinearSSM:
    """Scalar model ``x_k = f(x_{k-1}, k) + w``, ``y_k = g(x_k) + v``.

    ``transition`` and ``measurement`` must accept numpy arrays elementwise.
    """

    transition: Callable
    measurement: Callable
    process_var: float
    measurement_var: float

    def __post_init__(self):
        if not (self.process_var > 0 and self.measurement_var > 0):
            raise ValueError("noise variances must be positive")

    def log_likelihood(self, y: float, x) -> np.ndarray:
        """Gaussian ``log p(y | x)`` without the constant term."""
        r = y - self.measurement(np.asarray(x, dtype=float))
        return -0.5 * r * r / self.measurement_var
