"""Sampled checks of |f(xi) - f(eta)| <= L d1p(xi, eta) for pattern statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ground import GroundSpace
from ..metrics import d1p

SLACK = 1e-9


@dataclass
class LipschitzReport:
    name: str
    lipschitz: float
    n_pairs: int
    worst_ratio: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


class PairGenerator:
    """Random pattern pairs of mixed kinds.

    Half the pairs are small perturbations of one another (where Lipschitz
    ratios are largest), a quarter are independent with equal size and a
    quarter have independent sizes. Points are drawn in ``[lo, hi]^D``.
    """

    def __init__(self, space: GroundSpace, max_size: int = 6, min_size: int = 0, lo: float = 0.0, hi: float = 1.0):
        self.space = space
        self.max_size = max_size
        self.min_size = min_size
        self.lo, self.hi = lo, hi

    def points(self, n, rng):
        if self.space.kind == "discrete":
            return rng.integers(0, self.space.n_atoms, n)
        pts = self.lo + (self.hi - self.lo) * rng.random((n, self.space.dim))
        return np.minimum(pts, np.nextafter(1.0, 0.0)) if self.space.kind == "torus" else pts

    def perturb(self, xi, rng):
        if self.space.kind == "discrete":
            out = xi.copy()
            if len(out):
                out[rng.integers(len(out))] = rng.integers(self.space.n_atoms)
            return out
        scale = 10.0 ** rng.uniform(-4, -1)
        pts = xi + scale * rng.standard_normal(xi.shape)
        pts = np.clip(pts, self.lo, self.hi)
        return np.minimum(pts, np.nextafter(1.0, 0.0)) if self.space.kind == "torus" else pts

    def __call__(self, rng):
        kind = rng.random()
        n = int(rng.integers(self.min_size, self.max_size + 1))
        xi = self.points(n, rng)
        if kind < 0.5:
            return xi, self.perturb(xi, rng)
        if kind < 0.75:
            return xi, self.points(n, rng)
        return xi, self.points(int(rng.integers(self.min_size, self.max_size + 1)), rng)


def lipschitz_suite(stat, space: GroundSpace, pattern_generator, n_pairs: int = 10_000, seed=None) -> LipschitzReport:
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    L = stat.lipschitz
    for _ in range(n_pairs):
        xi, eta = pattern_generator(rng)
        diff = abs(stat(xi) - stat(eta))
        dist = d1p(space, xi, eta, stat.p)
        if diff > L * dist + SLACK:
            bad += 1
        if dist > 0:
            worst = max(worst, diff / dist)
    return LipschitzReport(stat.name, L, n_pairs, worst, bad)
