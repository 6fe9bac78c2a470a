"""The weighted KL/entropy objective and an iterative simplex minimizer for it.

The minimizer never looks at the closed-form tempered posterior; it exists to
check that formula from the outside.
"""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import OracleFailureError
from .distributions import DiscreteDistribution, FusionWeights
from .information import entropy, kl_divergence

_FLOOR = 1e-300


def objective_value(
    q: DiscreteDistribution,
    prior: DiscreteDistribution,
    lik: DiscreteDistribution,
    w: FusionWeights,
) -> float:
    """``a1 KL(q||prior) + a2 KL(q||lik) + a3 H(q)``; ``inf`` on a support violation.

    Terms with a zero weight are dropped, so their support does not matter.
    """
    total = 0.0
    if w.a1:
        total += w.a1 * kl_divergence(q, prior)
    if w.a2:
        total += w.a2 * kl_divergence(q, lik)
    if w.a3:
        total += w.a3 * entropy(q)
    return total


def _objective_array(q, logp, logl, w):
    # same quantity as objective_value, on raw arrays for the inner loop
    on = q > 0
    qo = q[on]
    lq = np.log(qo)
    val = 0.0
    if w.a1:
        val += w.a1 * np.sum(qo * (lq - logp[on]))
    if w.a2:
        val += w.a2 * np.sum(qo * (lq - logl[on]))
    if w.a3:
        val -= w.a3 * np.sum(qo * lq)
    return float(val)


def _gradient(q, logp, logl, w):
    lq = np.log(np.maximum(q, _FLOOR))
    return w.curvature * (lq + 1.0) - w.a1 * logp - w.a2 * logl


def brute_force_posterior(
    prior: DiscreteDistribution,
    lik: DiscreteDistribution,
    w: FusionWeights,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> DiscreteDistribution:
    """Minimize the weighted objective over the probability simplex.

    Gradient descent in the metric ``diag(1/q)``: the search direction
    ``-q * (grad - q.grad)`` is the gradient projected onto the simplex's
    tangent space under that metric, so iterates keep summing to one. Steps
    are chosen by backtracking (Armijo) and may shrink a coordinate by at most
    a factor of ten, which keeps iterates strictly inside the simplex. The
    metric cancels the ``1/q`` curvature of the entropy term, so the step is
    capped at ``1 / (a1 + a2 - a3)``; plain Euclidean projected gradient stalls
    on instances with a tiny coordinate.

    Stops once the stationarity residual ``max|q * (grad - q.grad)|`` drops
    below ``tol``; near the optimum it bounds the error in ``q`` by roughly
    ``tol / (a1 + a2 - a3)``.

    Raises
    ------
    OracleFailureError
        If ``max_iter`` iterations pass without meeting the stopping rule.
    """
    if w.curvature <= 0:
        raise ValueError("brute force needs a3 < a1 + a2")
    n = len(prior)
    if w.a1 and w.a2:
        allowed = prior.support & lik.support
    elif w.a1:
        allowed = prior.support
    elif w.a2:
        allowed = lik.support
    else:
        allowed = np.ones(n, dtype=bool)
    idx = np.flatnonzero(allowed)
    if idx.size == 0:
        raise OracleFailureError("prior and likelihood supports are disjoint")
    logp = np.log(np.maximum(prior.weights[idx], _FLOOR))
    logl = np.log(np.maximum(lik.weights[idx], _FLOOR))

    q = np.full(idx.size, 1.0 / idx.size)
    f = _objective_array(q, logp, logl, w)
    # in this metric the entropy term has Hessian curvature * I
    max_step = step = 1.0 / w.curvature
    for _ in range(max_iter):
        g = _gradient(q, logp, logl, w)
        direction = -q * (g - q @ g)
        residual = np.max(np.abs(direction))
        if residual < tol:
            break
        slope = g @ direction
        # past ~1e-8 residual the decrease hides under rounding of f, whose
        # size follows the magnitude of its log terms rather than f itself
        slack = 16 * np.finfo(float).eps * (abs(f) + q @ np.abs(g) + 1.0)
        while True:
            q_new = q + step * direction
            if np.all(q_new >= 0.1 * q):
                f_new = _objective_array(q_new, logp, logl, w)
                if f_new <= f + 1e-4 * step * slope or f_new - f <= slack:
                    break
            step *= 0.5
            if step < 1e-300:
                raise OracleFailureError("line search failed; objective not decreasing")
        q, f = q_new / math.fsum(q_new), f_new
        step = min(step * 2.0, max_step)
    else:
        raise OracleFailureError(f"no convergence within {max_iter} iterations")
    full = np.zeros(n)
    full[idx] = q
    return DiscreteDistribution(full / math.fsum(full), prior.atoms)
