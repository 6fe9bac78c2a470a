"""Tracking error metrics."""

from __future__ import annotations

import numpy as np

from ..exceptions import ShapeError


def rtamse(estimates, truth) -> float:
    """Root of the time-averaged squared error.

    Inputs are ``(K,)`` for a scalar state or ``(K, d)`` for a vector state;
    the squared error is summed over state components before averaging over
    the ``K`` steps.
    """
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape:
        raise ShapeError(f"shape mismatch: {est.shape} vs {tru.shape}")
    if est.ndim not in (1, 2) or est.shape[0] < 1:
        raise ShapeError("expected (K,) or (K, d) with K >= 1")
    err = (est - tru) ** 2
    if err.ndim == 2:
        err = err.sum(axis=1)
    return float(np.sqrt(np.mean(err)))
