"""Box-constrained search for the tempering exponents.

Two searchers share one result type: an exhaustive grid scan and a
cubic radial-basis-function surrogate loop. Both always evaluate the
conventional setting (``(1, 1)`` for exponent pairs, ``0.5`` for a mixing
weight), so the returned loss never exceeds the loss there.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import EmptyDatasetError, ShapeError

EXPLORATION_CYCLE = (0.3, 0.5, 0.8, 0.95)
N_UNIFORM_CANDIDATES = 500
N_LOCAL_CANDIDATES = 100
LOCAL_SCALE = 0.05
RIDGE = 1e-10


@dataclass(frozen=True, eq=False)
class SearchDomain:
    """Axis-aligned box in one or two dimensions."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size not in (1, 2):
            raise ShapeError("domain must be 1-D or 2-D with matching bounds")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("bounds must be finite")
        if np.any(lo >= hi):
            raise ValueError("need lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def square(cls, tau: float = 3.0) -> "SearchDomain":
        """``[0, tau]^2``, the exponent-pair box."""
        return cls([0.0, 0.0], [tau, tau])

    @classmethod
    def unit(cls) -> "SearchDomain":
        """``[0, 1]``, the mixing-weight interval."""
        return cls([0.0], [1.0])

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, point) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return p.shape == self.lower.shape and bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def default_anchor(self) -> Tuple[float, ...]:
        return (1.0, 1.0) if self.dim == 2 else (0.5,)


@dataclass(frozen=True)
class TuningResult:
    """Best point and the full evaluation trace, in evaluation order."""

    best_point: Tuple[float, ...]
    best_value: float
    evaluations: List[Tuple[Tuple[float, ...], float]] = field(default_factory=list)
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "best_point": list(self.best_point),
            "best_value": _json_float(self.best_value),
            "evaluations": [{"point": list(p), "value": _json_float(v)} for p, v in self.evaluations],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TuningResult":
        d = json.loads(text)
        evals = [(tuple(e["point"]), float(e["value"])) for e in d["evaluations"]]
        return cls(tuple(d["best_point"]), float(d["best_value"]), evals, d.get("seed"))

    def to_csv(self) -> str:
        """Evaluation trace with columns ``index, x0[, x1], value``."""
        buf = io.StringIO()
        dim = len(self.best_point)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index"] + [f"x{i}" for i in range(dim)] + ["value"])
        for i, (p, v) in enumerate(self.evaluations):
            writer.writerow([i] + [repr(float(c)) for c in p] + [repr(float(v))])
        return buf.getvalue()


def _json_float(v: float):
    # JSON has no infinity; unreadable points are stored as null
    return float(v) if math.isfinite(v) else None


def _clean(value) -> float:
    v = float(value)
    return v if math.isfinite(v) else math.inf


def _axis_nodes(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # round away the drift of repeated float steps (0.1 * 3 != 0.3)
    return np.round(lo + step * np.arange(count), 12)


def grid_nodes(domain: SearchDomain, step: float) -> np.ndarray:
    """Grid nodes in scan order, first coordinate outermost; shape ``(n, dim)``."""
    if not step > 0:
        raise ValueError("step must be positive")
    axes = [_axis_nodes(lo, hi, step) for lo, hi in zip(domain.lower, domain.upper)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def _best(evaluations):
    best_p, best_v = evaluations[0]
    for p, v in evaluations[1:]:
        if v < best_v:
            best_p, best_v = p, v
    return best_p, best_v


def grid_search(
    loss: Callable,
    domain: SearchDomain,
    step: float,
    anchors: Optional[Sequence] = None,
    vectorized: bool = False,
    chunk: int = 256,
) -> TuningResult:
    """Evaluate every grid node plus the anchors and keep the smallest loss.

    Ties keep the earliest evaluation, so a constant loss returns the first
    node in scan order. Non-finite losses are recorded as ``+inf``.

    Parameters
    ----------
    loss : callable
        ``loss(point) -> float``, or with ``vectorized=True``,
        ``loss(points of shape (n, dim)) -> (n,)`` evaluated ``chunk`` points at a time.
    anchors : sequence of points, optional
        Defaults to ``(1, 1)`` in 2-D and ``0.5`` in 1-D. Anchors that are
        already grid nodes are not evaluated twice.
    """
    anchors = [domain.default_anchor()] if anchors is None else anchors
    anchor_pts = [tuple(np.atleast_1d(np.asarray(a, dtype=float)).tolist()) for a in anchors]
    for a in anchor_pts:
        if not domain.contains(a):
            raise ValueError(f"anchor {a} lies outside the domain")
    nodes = [tuple(p) for p in grid_nodes(domain, step).tolist()]
    seen = set(nodes)
    points = nodes + [a for a in dict.fromkeys(anchor_pts) if a not in seen]
    if vectorized:
        values = []
        arr = np.asarray(points, dtype=float)
        for s in range(0, len(points), chunk):
            values.extend(np.asarray(loss(arr[s:s + chunk]), dtype=float).tolist())
    else:
        values = [loss(np.asarray(p)) for p in points]
    evaluations = [(p, _clean(v)) for p, v in zip(points, values)]
    best_p, best_v = _best(evaluations)
    return TuningResult(best_p, best_v, evaluations, None)


class CubicRBF:
    """Cubic radial-basis interpolant ``sum_i w_i |x - x_i|^3 + c0 + c.x``.

    The linear tail needs ``dim + 1`` points; with fewer, a constant tail is
    used. Singular systems get a ``1e-10`` ridge on the kernel block and a
    least-squares solve.
    """

    def __init__(self, points, values):
        self.points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        n, dim = self.points.shape
        self.linear = n >= dim + 1
        kernel = self._kernel(self.points)
        tail = self._tail(self.points)
        m = tail.shape[1]
        system = np.zeros((n + m, n + m))
        system[:n, :n] = kernel
        system[:n, n:] = tail
        system[n:, :n] = tail.T
        rhs = np.concatenate([values, np.zeros(m)])
        try:
            coef = np.linalg.solve(system, rhs)
            ok = np.all(np.isfinite(coef)) and np.allclose(system @ coef, rhs, atol=1e-8 * (1 + np.abs(rhs).max()))
        except np.linalg.LinAlgError:
            ok = False
        if not ok:
            system[:n, :n] += RIDGE * np.eye(n)
            coef = np.linalg.lstsq(system, rhs, rcond=None)[0]
        self.weights, self.tail_coef = coef[:n], coef[n:]

    def _kernel(self, x):
        r = np.linalg.norm(x[:, None, :] - self.points[None, :, :], axis=-1)
        return r**3

    def _tail(self, x):
        ones = np.ones((x.shape[0], 1))
        return np.hstack([ones, x]) if self.linear else ones

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._kernel(x) @ self.weights + self._tail(x) @ self.tail_coef


def _min_distance(cands, points):
    return np.min(np.linalg.norm(cands[:, None, :] - points[None, :, :], axis=-1), axis=1)


def _unit_scale(v):
    lo, hi = v.min(), v.max()
    return np.zeros_like(v) if hi - lo <= 0 else (v - lo) / (hi - lo)


def rbf_surrogate_optimize(
    loss: Callable,
    domain: SearchDomain,
    budget: int = 60,
    seed: int = 0,
    start=None,
) -> TuningResult:
    """Derivative-free minimization with a cubic RBF surrogate.

    The start point (default: the conventional anchor) is evaluated first.
    Each further evaluation picks, among 500 uniform candidates and 100
    Gaussian perturbations of the incumbent (5% of the box width), the one
    minimizing ``w * surrogate + (1 - w) * (-distance to evaluated points)``
    with both terms scaled to ``[0, 1]`` and ``w`` cycling through
    0.3, 0.5, 0.8 and 0.95. Work happens in box-normalized coordinates.
    """
    if int(budget) < 1:
        raise ValueError("budget must be at least 1")
    start = domain.default_anchor() if start is None else start
    start = np.atleast_1d(np.asarray(start, dtype=float))
    if not domain.contains(start):
        raise ValueError("start lies outside the domain")
    rng = np.random.default_rng(seed)
    lo, width = domain.lower, domain.width

    def to_box(u):
        return np.clip(lo + u * width, domain.lower, domain.upper)

    unit = [(start - lo) / width]
    values = [_clean(loss(start))]
    evaluations = [(tuple(start.tolist()), values[0])]
    for it in range(int(budget) - 1):
        pts = np.array(unit)
        f = np.array(values)
        finite = np.isfinite(f)
        fill = f[finite].max() if finite.any() else 0.0
        f = np.where(finite, f, fill)
        spread = f.max() - f.min()
        f_scaled = (f - f.min()) / spread if spread > 0 else np.zeros_like(f)
        surrogate = CubicRBF(pts, f_scaled)

        incumbent = pts[int(np.argmin(f))]
        uniform = rng.random((N_UNIFORM_CANDIDATES, domain.dim))
        local = incumbent + LOCAL_SCALE * rng.standard_normal((N_LOCAL_CANDIDATES, domain.dim))
        cands = np.clip(np.vstack([uniform, local]), 0.0, 1.0)
        dist = _min_distance(cands, pts)
        fresh = dist > 1e-12
        if fresh.any():
            cands, dist = cands[fresh], dist[fresh]
        w = EXPLORATION_CYCLE[it % len(EXPLORATION_CYCLE)]
        score = w * _unit_scale(surrogate(cands)) + (1.0 - w) * _unit_scale(-dist)
        pick = cands[int(np.argmin(score))]

        point = to_box(pick)
        value = _clean(loss(point))
        unit.append(pick)
        values.append(value)
        evaluations.append((tuple(point.tolist()), value))
    best_p, best_v = _best(evaluations)
    return TuningResult(best_p, best_v, evaluations, int(seed))


def empirical_estimation_loss(estimator: Callable, episodes: Sequence) -> Callable:
    """Average squared estimation error as a function of the tuning point.

    Parameters
    ----------
    estimator : callable
        ``estimator(point, measurements) -> estimates`` with the shape of the truth.
    episodes : sequence of ``(truth, measurements)`` pairs
        Truth is ``(K,)`` or ``(K, d)``.

    Returns
    -------
    callable
        ``point -> mean over episodes and steps of the squared Euclidean error``.
        For a single episode this is the squared RTAMSE.
    """
    episodes = list(episodes)
    if not episodes:
        raise EmptyDatasetError("need at least one episode")

    def loss(point) -> float:
        total = 0.0
        for truth, ys in episodes:
            truth = np.asarray(truth, dtype=float)
            err = (np.asarray(estimator(point, ys), dtype=float).reshape(truth.shape) - truth) ** 2
            if err.ndim == 2:
                err = err.sum(axis=1)
            total += float(np.mean(err))
        return total / len(episodes)

    return loss
