"""Entropy, KL divergence and the scaling search built on them (natural log)."""

from __future__ import annotations

import math
from typing import Tuple, Union

import numpy as np

from ..exceptions import InvalidDistributionError, NoGainError, ShapeError
from .distributions import DiscreteDistribution, GaussianBelief
from .posterior import alpha_scale

Belief = Union[DiscreteDistribution, GaussianBelief]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def entropy(h: Belief) -> float:
    """Shannon entropy of a discrete distribution or differential entropy of a Gaussian."""
    if isinstance(h, GaussianBelief):
        d = h.dim
        _, logdet = np.linalg.slogdet(h.covariance)
        return 0.5 * (d * math.log(2 * math.pi) + logdet) + 0.5 * d
    w = h.weights[h.weights > 0]
    return float(-np.sum(w * np.log(w)))


def kl_divergence(a: Belief, b: Belief) -> float:
    """``KL(a || b)``; returns ``math.inf`` when ``a`` puts mass outside ``b``'s support."""
    if isinstance(a, GaussianBelief) and isinstance(b, GaussianBelief):
        if a.dim != b.dim:
            raise ShapeError("Gaussians of different dimension")
        d = a.dim
        diff = b.mean - a.mean
        sol = np.linalg.solve(b.covariance, np.column_stack([a.covariance, diff]))
        trace = np.trace(sol[:, :d])
        quad = float(diff @ sol[:, d])
        _, ld_a = np.linalg.slogdet(a.covariance)
        _, ld_b = np.linalg.slogdet(b.covariance)
        return float(max(0.5 * (trace + quad - d + ld_b - ld_a), 0.0))
    if isinstance(a, DiscreteDistribution) and isinstance(b, DiscreteDistribution):
        if len(a) != len(b):
            raise ShapeError("distributions of different length")
        pa, pb = a.weights, b.weights
        on = pa > 0
        if np.any(pb[on] == 0):
            return math.inf
        return float(max(np.sum(pa[on] * (np.log(pa[on]) - np.log(pb[on]))), 0.0))
    raise InvalidDistributionError("KL needs two beliefs of the same kind")


def scaling_gain_condition(h0: DiscreteDistribution, h: DiscreteDistribution) -> float:
    """``sum_i (h0_i - h_i) ln h_i``.

    A nonzero value, with ``h`` not uniform, certifies that some exponent
    ``alpha`` brings ``h**alpha`` strictly closer to ``h0`` in KL. The value is
    minus the slope of ``alpha -> KL(h0 || h^(alpha))`` at ``alpha = 1``.
    """
    if len(h0) != len(h):
        raise ShapeError("distributions of different length")
    on = (h0.weights > 0) | (h.weights > 0)
    if np.any(h.weights[h0.weights > 0] == 0):
        return math.inf
    diff = h0.weights[on] - h.weights[on]
    return float(np.sum(diff * np.log(h.weights[on])))


def golden_section(fun, lo: float, hi: float, tol: float = 1e-8, max_iter: int = 500):
    """Minimize a unimodal scalar function on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def best_scale(h0: Belief, h: Belief, alpha_max: float = 10.0) -> Tuple[float, float]:
    """Exponent ``alpha`` in ``[0, alpha_max]`` minimizing ``KL(h0 || h^(alpha))``.

    The map is strictly convex in ``alpha`` for non-uniform ``h``, so a
    golden-section search to ``1e-8`` finds the unique minimizer. ``alpha = 1``
    is kept as a fallback whenever the search does not beat it.

    Returns
    -------
    alpha_star : float
    kl_star : float
    """
    if alpha_max <= 1:
        raise ValueError("alpha_max must exceed 1")
    if isinstance(h, DiscreteDistribution) and h.is_uniform():
        raise NoGainError("h is uniform; every exponent leaves it unchanged")

    def objective(alpha):
        if alpha <= 0 and isinstance(h, GaussianBelief):
            return math.inf
        return kl_divergence(h0, alpha_scale(h, alpha))

    alpha_star, kl_star = golden_section(objective, 0.0, float(alpha_max))
    kl_one = kl_divergence(h0, h)
    if kl_one <= kl_star:
        return 1.0, kl_one
    return float(alpha_star), float(kl_star)


def bh_bound(m: float, kl: float) -> float:
    """Bretagnolle-Huber bound ``2 m sqrt(1 - exp(-kl))`` on an expected-cost gap
    for costs bounded by ``m`` in absolute value."""
    if m < 0 or kl < 0:
        raise ValueError("m and kl must be non-negative")
    if math.isinf(kl):
        return 2.0 * m
    return 2.0 * m * math.sqrt(-math.expm1(-kl))
