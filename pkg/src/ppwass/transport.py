"""Wasserstein distances between point process laws with ``d1p`` ground cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .ground import GroundSpace
from .matching import min_sum_assignment
from .metrics import d1p

SUPPORT_PRODUCT_CAP = 10**6


@dataclass
class SampleSet:
    """Equal-weight empirical law of ``len(patterns)`` point patterns."""

    space: GroundSpace
    patterns: list

    def __post_init__(self):
        if len(self.patterns) < 1:
            raise ValueError("a sample set needs at least one pattern")
        self.patterns = [self.space.validate(x) for x in self.patterns]

    def __len__(self):
        return len(self.patterns)


@dataclass
class FiniteSupportDistribution:
    space: GroundSpace
    patterns: list
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.patterns = [self.space.validate(x) for x in self.patterns]
        k = len(self.patterns)
        if k < 1:
            raise ValueError("empty support")
        w = np.full(k, 1.0 / k) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (k,) or np.any(w <= 0):
            raise ValueError("weights must be positive, one per support pattern")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        self.weights = w


def cost_matrix(space: GroundSpace, xs: Sequence, ys: Sequence, p: float) -> np.ndarray:
    c = np.ones((len(xs), len(ys)))
    sizes_y = np.array([len(y) for y in ys])
    for i, x in enumerate(xs):
        # only equal sizes need an assignment; everything else costs exactly 1
        for j in np.flatnonzero(sizes_y == len(x)):
            c[i, j] = d1p(space, x, ys[j], p)
    return c


def empirical_d2p(a: SampleSet, b: SampleSet, p: float = 1.0) -> float:
    """Exact d2 between two equal-size empirical laws (optimal assignment / N)."""
    return empirical_d2p_detail(a, b, p)[0]


def empirical_d2p_detail(a: SampleSet, b: SampleSet, p: float = 1.0):
    """Value, matched pair costs and the cost matrix."""
    if len(a) != len(b):
        raise ValueError("sample sets must have equal size; use finite_support_d2p for weighted laws")
    if a.space != b.space:
        raise ValueError("sample sets live on different spaces")
    c = cost_matrix(a.space, a.patterns, b.patterns, p)
    perm, _ = min_sum_assignment(c)
    matched = c[np.arange(len(a)), perm]
    return min(float(matched.sum()) / len(a), 1.0), matched, c


def solve_transport(cost: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, float]:
    """Optimal plan and cost of the balanced transportation problem."""
    k, m = cost.shape
    if k * m > SUPPORT_PRODUCT_CAP:
        raise ValueError(f"support product {k * m} exceeds cap {SUPPORT_PRODUCT_CAP}")
    rows = np.zeros((k, k * m))
    for i in range(k):
        rows[i, i * m : (i + 1) * m] = 1.0
    cols = np.zeros((m, k * m))
    for j in range(m):
        cols[j, j::m] = 1.0
    res = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([mu, nu]),
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9},
    )
    if res.status != 0:
        raise RuntimeError(f"transport solver failed: {res.message}")
    plan = res.x.reshape(k, m)
    return plan, float((plan * cost).sum())


def finite_support_d2p(P: FiniteSupportDistribution, Q: FiniteSupportDistribution, p: float = 1.0) -> float:
    if P.space != Q.space:
        raise ValueError("distributions live on different spaces")
    if len(P.patterns) * len(Q.patterns) > SUPPORT_PRODUCT_CAP:
        raise ValueError("support count product exceeds cap")
    c = cost_matrix(P.space, P.patterns, Q.patterns, p)
    _, total = solve_transport(c, P.weights, Q.weights)
    return float(np.clip(total, 0.0, 1.0))


def dual_lower_bound(a: SampleSet, b: SampleSet, stats: Sequence) -> float:
    """max over statistics of |mean_A f - mean_B f| / L.

    Each statistic must be Lipschitz for the same order p as the metric it is
    compared against.
    """
    if not stats:
        raise ValueError("need at least one statistic")
    best = 0.0
    for stat in stats:
        fa = np.mean([stat(x) for x in a.patterns])
        fb = np.mean([stat(y) for y in b.patterns])
        best = max(best, abs(fa - fb) / stat.lipschitz)
    return float(best)
