"""Seeded property checks for exponent scaling of discrete distributions.

Each suite runs over a reproducible random population and reports, per
property, how many cases were checked and which population indices failed.

* ``entropy_monotone``: entropy of ``h**alpha`` strictly decreases in ``alpha``.
* ``entropy_sign``: the entropy change ``E(alpha) = H(h**alpha) - H(h)`` is
  positive below ``alpha = 1``, negative above, and exactly zero at 1.
* ``kl_shape``: ``KL(h || h**alpha)`` decreases up to ``alpha = 1``, increases
  after, and is midpoint-convex along the grid.
* ``scale_gain``: whenever the scaling-gain statistic exceeds 0.01 in size,
  the best exponent strictly lowers ``KL(h0 || h**alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .core.distributions import DiscreteDistribution
from .core.information import best_scale, entropy, kl_divergence, scaling_gain_condition
from .core.posterior import alpha_scale_discrete

ALPHA_GRID = np.round(0.1 * np.arange(1, 51), 10)
CURVE_GRID = np.round(0.05 * np.arange(1, 101), 10)
MONOTONE_TOL = 1e-12
CONVEX_TOL = 1e-10
GAIN_THRESHOLD = 0.01
GAIN_MARGIN = 1e-9


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def random_distribution(seed: int, index: int, n_atoms: int) -> DiscreteDistribution:
    """Dirichlet(1) draw; member ``index`` of the population for ``seed``."""
    h = DiscreteDistribution.from_unnormalized(_rng(seed, index).dirichlet(np.ones(n_atoms)))
    if h.is_uniform():
        raise ValueError("drew a uniform distribution")
    return h


def entropy_difference(h: DiscreteDistribution, alpha: float) -> float:
    """``H(h**alpha) - H(h)``; exactly zero at ``alpha = 1``."""
    return entropy(alpha_scale_discrete(h, alpha)) - entropy(h)


def _scaled(h, alphas):
    return [alpha_scale_discrete(h, a) for a in alphas]


def entropy_monotone(h: DiscreteDistribution, alphas=ALPHA_GRID, scaled=None) -> bool:
    scaled = _scaled(h, alphas) if scaled is None else scaled
    values = np.array([entropy(s) for s in scaled])
    return bool(np.all(np.diff(values) < -MONOTONE_TOL))


def entropy_sign(h: DiscreteDistribution, alphas=ALPHA_GRID, scaled=None) -> bool:
    scaled = _scaled(h, alphas) if scaled is None else scaled
    base = entropy(h)
    for a, s in zip(alphas, scaled):
        e = entropy(s) - base
        if (a < 1 and not e > 0) or (a > 1 and not e < 0) or (a == 1 and e != 0.0):
            return False
    return True


def kl_shape(h: DiscreteDistribution, alphas=ALPHA_GRID, scaled=None) -> bool:
    alphas = np.asarray(alphas, dtype=float)
    scaled = _scaled(h, alphas) if scaled is None else scaled
    kl = np.array([kl_divergence(h, s) for s in scaled])
    below = kl[alphas <= 1]
    above = kl[alphas >= 1]
    if not (np.all(np.diff(below) < 0) and np.all(np.diff(above) > 0)):
        return False
    steps = np.diff(alphas)
    if np.allclose(steps, steps[0]):
        midpoint_gap = kl[1:-1] - 0.5 * (kl[:-2] + kl[2:])
        if np.any(midpoint_gap > CONVEX_TOL):
            return False
    return True


def scale_gain_holds(h0: DiscreteDistribution, h: DiscreteDistribution) -> bool:
    _, kl_star = best_scale(h0, h)
    return kl_star < kl_divergence(h0, h) - GAIN_MARGIN


@dataclass
class PropertyReport:
    """Per-property counts and failing population indices."""

    seed: int
    checked: Dict[str, int] = field(default_factory=dict)
    failures: Dict[str, List[int]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def record(self, name: str, index: int, ok: bool):
        self.checked[name] = self.checked.get(name, 0) + 1
        self.failures.setdefault(name, [])
        if not ok:
            self.failures[name].append(int(index))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "properties": {
                name: {
                    "checked": self.checked[name],
                    "failed": len(self.failures[name]),
                    "failing_indices": self.failures[name],
                }
                for name in self.checked
            },
        }


def run_property_suite(
    seed: int = 0,
    n_distributions: int = 200,
    n_atoms: int = 50,
    n_pairs: int = 100,
    pair_atoms: int = 10,
) -> PropertyReport:
    """Run all four properties.

    The first three use ``n_distributions`` draws of ``n_atoms`` atoms. The
    gain property draws ``(h0, h)`` pairs of ``pair_atoms`` atoms until
    ``n_pairs`` of them clear the 0.01 threshold.
    """
    report = PropertyReport(int(seed))
    for i in range(n_distributions):
        h = random_distribution(seed, i, n_atoms)
        scaled = _scaled(h, ALPHA_GRID)
        report.record("entropy_monotone", i, entropy_monotone(h, ALPHA_GRID, scaled))
        report.record("entropy_sign", i, entropy_sign(h, ALPHA_GRID, scaled))
        report.record("kl_shape", i, kl_shape(h, ALPHA_GRID, scaled))
    report.checked.setdefault("scale_gain", 0)
    report.failures.setdefault("scale_gain", [])
    i = 0
    while report.checked["scale_gain"] < n_pairs:
        rng = _rng(seed, n_distributions + i)
        h0 = DiscreteDistribution.from_unnormalized(rng.dirichlet(np.ones(pair_atoms)))
        h = DiscreteDistribution.from_unnormalized(rng.dirichlet(np.ones(pair_atoms)))
        if abs(scaling_gain_condition(h0, h)) > GAIN_THRESHOLD and not h.is_uniform():
            report.record("scale_gain", n_distributions + i, scale_gain_holds(h0, h))
        i += 1
    return report


def scaling_curves(h: DiscreteDistribution, alphas=CURVE_GRID) -> np.ndarray:
    """Rows ``(alpha, E(alpha), KL(h || h**alpha))``."""
    return np.array(
        [(a, entropy_difference(h, a), kl_divergence(h, alpha_scale_discrete(h, a))) for a in alphas]
    )
