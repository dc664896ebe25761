"""Optimal-assignment metrics between point patterns.

``d1p`` is the Lp-average of matched distances for equal sizes (bottleneck for
``p = INF``), equal to 1 when the sizes differ. ``d1_prime`` is the unbounded
variant: size difference plus the cheapest partial matching.
"""

from __future__ import annotations

import math

import numpy as np

from .ground import GroundSpace
from .matching import min_bottleneck_assignment, min_sum_assignment, min_sum_injection

INF = math.inf


def check_order(p: float) -> float:
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"order p must be >= 1 (or INF), got {p}")
    return p


def _power_mean(d: np.ndarray, p: float) -> float:
    # scaled by the largest entry: equal entries give that entry back exactly,
    # which keeps the value monotone in p under rounding
    top = float(d.max())
    if top == 0.0:
        return 0.0
    r = d / top
    if p == 1.0:
        return top * float(r.mean())
    return top * float(np.mean(r**p)) ** (1.0 / p)


def _sorted(pts: np.ndarray) -> np.ndarray:
    if pts.ndim == 1:
        return np.sort(pts)
    return pts[np.lexsort(pts.T[::-1])]


def _canonical_pair(space: GroundSpace, xi, eta):
    # sorted points and a fixed argument order make the value exactly
    # symmetric and independent of the input point order
    xi = _sorted(space.validate(xi))
    eta = _sorted(space.validate(eta))
    if len(xi) > len(eta) or (len(xi) == len(eta) and xi.tobytes() > eta.tobytes()):
        xi, eta = eta, xi
    return xi, eta


def d1p(space: GroundSpace, xi, eta, p: float = 1.0) -> float:
    p = check_order(p)
    xi, eta = _canonical_pair(space, xi, eta)
    n, m = len(xi), len(eta)
    if n != m:
        return 1.0
    if n == 0:
        return 0.0
    dist = space.pairwise(xi, eta)
    if p == INF:
        return min_bottleneck_assignment(dist)[1]
    cost = dist if p == 1.0 else dist**p
    perm, _ = min_sum_assignment(cost)
    return min(_power_mean(dist[np.arange(n), perm], p), 1.0)


def d1_prime(space: GroundSpace, xi, eta) -> float:
    xi, eta = _canonical_pair(space, xi, eta)
    n, m = len(xi), len(eta)
    if n == 0:
        return float(m)
    _, total = min_sum_injection(space.pairwise(xi, eta))
    return (m - n) + total
