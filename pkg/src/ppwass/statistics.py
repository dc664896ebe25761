"""Lipschitz statistics of point patterns.

U-statistic averages of symmetric kernels (plain and centered), the p-th order
average of nearest neighbour distances, and the four kernels K0..K3. All
statistics take values in [0, 1] and are Lipschitz with respect to ``d1p`` of
the same order, with the constants returned by ``lipschitz_constant``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ground import GroundSpace, UnitCube
from .metrics import INF, check_order

SUBSET_WORK_CAP = 10**7

KISSING_NUMBERS = {1: 2, 2: 6, 3: 12, 4: 24, 8: 240, 24: 196560}


# ---------------------------------------------------------------- enclosing ball


def _circumball(support: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball with all support points on its boundary.

    The center lies in the affine hull of the support, so it solves a small
    Gram system in the hull coordinates.
    """
    k = len(support)
    if k == 0:
        return np.zeros(0), -1.0
    base = support[0]
    if k == 1:
        return base.copy(), 0.0
    vecs = support[1:] - base
    gram = vecs @ vecs.T
    rhs = 0.5 * np.einsum("ij,ij->i", vecs, vecs)
    coef = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + coef @ vecs
    radius = max(float(np.linalg.norm(support - center, axis=1).max()), 0.0)
    return center, radius


def _inside(center, radius, point, tol) -> bool:
    return radius >= 0 and float(np.linalg.norm(point - center)) <= radius + tol


def minimal_enclosing_ball(points, seed: int = 0, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Exact minimal enclosing ball by the recursive move-to-front algorithm.

    The input order is shuffled with a fixed seed first, so the result is
    deterministic.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if len(pts) == 0:
        raise ValueError("no points")
    dim = pts.shape[1]
    order = list(np.random.default_rng(seed).permutation(len(pts)))

    def mtf(end: int, support: list[int]) -> tuple[np.ndarray, float]:
        center, radius = _circumball(pts[support]) if support else (pts[order[0]], -1.0)
        if len(support) == dim + 1:
            return center, radius
        i = 0
        while i < end:
            idx = order[i]
            if not _inside(center, radius, pts[idx], tol):
                center, radius = mtf(i, support + [idx])
                # move to front
                order.pop(i)
                order.insert(0, idx)
            i += 1
        return center, radius

    center, radius = mtf(len(pts), [])
    return center, max(radius, 0.0)


def brute_force_enclosing_radius(points, tol: float = 1e-10) -> float:
    """Test oracle: min over all supports of size <= D+1 whose circumball covers."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n, dim = pts.shape
    best = math.inf
    for k in range(1, min(n, dim + 1) + 1):
        for sub in itertools.combinations(range(n), k):
            center, radius = _circumball(pts[list(sub)])
            if np.all(np.linalg.norm(pts - center, axis=1) <= radius + tol):
                best = min(best, radius)
    return best


# ---------------------------------------------------------------- kernels


def _require_euclidean_unit_diameter(space: GroundSpace, pts: np.ndarray):
    if not isinstance(space, UnitCube):
        raise ValueError("kernel needs a Euclidean carrier (UnitCube)")
    if space.dim > 1 and len(pts) > 1:
        spread = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)).max()
        if spread > 1.0 + 1e-12:
            raise ValueError("points must lie in a region of diameter <= 1")


def kernel_K0(space: GroundSpace, u1, u2) -> float:
    pts = space.validate(np.stack([np.atleast_1d(u1), np.atleast_1d(u2)]) if space.kind != "discrete" else [u1, u2])
    return 0.5 * float(space.pairwise(pts[:1], pts[1:])[0, 0])


def kernel_K1(space: GroundSpace, points) -> float:
    pts = space.validate(points)
    l = len(pts)
    if l < 2:
        raise ValueError("K1 needs l >= 2")
    dist = space.pairwise(pts, pts)
    return 0.5 * float(np.triu(dist, 1).sum()) / math.comb(l, 2)


def kernel_K2(space: GroundSpace, points) -> float:
    pts = space.validate(points)
    l = len(pts)
    if l < 2:
        raise ValueError("K2 needs l >= 2")
    _require_euclidean_unit_diameter(space, pts)
    return 2.0 / l * minimal_enclosing_ball(pts)[1]


def kernel_K3(space: GroundSpace, points) -> float:
    pts = space.validate(points)
    l = len(pts)
    if l < 2:
        raise ValueError("K3 needs l >= 2")
    _require_euclidean_unit_diameter(space, pts)
    centroid = pts.mean(axis=0)
    return l / (2.0 * (l - 1)) * float(np.linalg.norm(pts - centroid, axis=1).mean())


@dataclass(frozen=True)
class Kernel:
    """Symmetric kernel of order ``l`` evaluated on a whole batch of subsets.

    ``batch(space, pts, subsets)`` returns one value per row of the int array
    ``subsets`` (shape ``(s, l)``); the pattern size argument of a general
    kernel is unused by the four built-ins.
    """

    name: str
    order: int
    batch: Callable[[GroundSpace, np.ndarray, np.ndarray], np.ndarray]
    euclidean_only: bool = False

    def __call__(self, space, points) -> float:
        pts = space.validate(points)
        if len(pts) != self.order:
            raise ValueError(f"kernel {self.name} takes {self.order} points")
        if self.euclidean_only:
            _require_euclidean_unit_diameter(space, pts)
        return float(self.batch(space, pts, np.arange(self.order)[None, :])[0])


def _k1_batch(space, pts, subsets):
    dist = space.pairwise(pts, pts)
    l = subsets.shape[1]
    tot = np.zeros(len(subsets))
    for a, b in itertools.combinations(range(l), 2):
        tot += dist[subsets[:, a], subsets[:, b]]
    return 0.5 * tot / math.comb(l, 2)


def _k2_batch(space, pts, subsets):
    l = subsets.shape[1]
    if l == 2:
        return _k1_batch(space, pts, subsets)
    return np.array([2.0 / l * minimal_enclosing_ball(pts[s])[1] for s in subsets])


def _k3_batch(space, pts, subsets):
    l = subsets.shape[1]
    grp = pts[subsets]  # (s, l, D)
    cen = grp.mean(axis=1, keepdims=True)
    dev = np.sqrt(((grp - cen) ** 2).sum(-1)).mean(axis=1)
    return l / (2.0 * (l - 1)) * dev


def make_kernel(name: str, order: int = 2) -> Kernel:
    if order < 2:
        raise ValueError("kernel order must be >= 2")
    if name == "K0":
        if order != 2:
            raise ValueError("K0 has order 2")
        return Kernel("K0", 2, _k1_batch)
    if name == "K1":
        return Kernel("K1", order, _k1_batch)
    if name == "K2":
        return Kernel("K2", order, _k2_batch, euclidean_only=True)
    if name == "K3":
        return Kernel("K3", order, _k3_batch, euclidean_only=True)
    raise ValueError(f"unknown kernel {name!r}")


# ---------------------------------------------------------------- statistics


def _subsets(n: int, l: int) -> np.ndarray:
    work = math.comb(n, l) * l
    if work > SUBSET_WORK_CAP:
        raise ValueError(f"subset enumeration of C({n},{l}) exceeds the work cap")
    return np.array(list(itertools.combinations(range(n), l)), dtype=int).reshape(-1, l)


def _power_mean(vals: np.ndarray, p: float) -> float:
    if p == 1.0:
        return float(vals.mean())
    return float(np.mean(vals**p) ** (1.0 / p))


def _kernel_values(kernel: Kernel, space: GroundSpace, xi) -> np.ndarray | None:
    pts = space.validate(xi)
    if len(pts) < kernel.order:
        return None
    if kernel.euclidean_only:
        _require_euclidean_unit_diameter(space, pts)
    return kernel.batch(space, pts, _subsets(len(pts), kernel.order))


def ustat_avg(kernel: Kernel, space: GroundSpace, xi, p: float = 1.0) -> float:
    p = check_order(p)
    if p == INF:
        raise ValueError("U-statistic averages need p < INF")
    vals = _kernel_values(kernel, space, xi)
    if vals is None:
        return 0.0
    return min(_power_mean(vals, p), 1.0)


def ustat_centered(kernel: Kernel, space: GroundSpace, xi, p: float = 1.0) -> float:
    p = check_order(p)
    if p == INF:
        raise ValueError("U-statistic averages need p < INF")
    vals = _kernel_values(kernel, space, xi)
    if vals is None:
        return 0.0
    return min(_power_mean(np.abs(vals - vals.mean()), p), 1.0)


def nn_avg(space: GroundSpace, xi, p: float = 1.0) -> float:
    """p-th order average of nearest neighbour distances under |x - y| ^ 1."""
    p = check_order(p)
    if p == INF:
        raise ValueError("nearest neighbour average needs p < INF")
    if not space.euclidean:
        raise ValueError("nearest neighbour average needs the capped Euclidean metric")
    pts = space.validate(xi)
    n = len(pts)
    if n < 2:
        return 0.0
    dist = space.pairwise(pts, pts)
    np.fill_diagonal(dist, np.inf)
    return min(_power_mean(dist.min(axis=1), p), 1.0)


def kissing_number(dim: int) -> int:
    try:
        return KISSING_NUMBERS[int(dim)]
    except KeyError:
        raise ValueError(f"kissing number not tabulated for D={dim}") from None


def lipschitz_constant(kind: str, dim: int | None = None, p: float = 1.0) -> float:
    if kind == "ustat_avg":
        return 1.0
    if kind == "ustat_centered":
        return 2.0
    if kind == "nn_avg":
        tau = kissing_number(dim)
        if p == 1.0:
            return float(tau + 1)
        return 2.0 * (2 * tau + 1) ** (1.0 / p)
    raise ValueError(f"unknown statistic kind {kind!r}")


@dataclass(frozen=True)
class Statistic:
    """A pattern statistic with its declared Lipschitz constant for ``d1p``."""

    name: str
    evaluator: Callable[[np.ndarray], float]
    p: float
    lipschitz: float

    def __call__(self, xi) -> float:
        return self.evaluator(xi)


def make_statistic(kind: str, space: GroundSpace, p: float = 1.0, kernel: Kernel | None = None) -> Statistic:
    if kind == "ustat_avg":
        return Statistic(f"ustat_avg[{kernel.name},l={kernel.order}]", lambda xi: ustat_avg(kernel, space, xi, p), p, 1.0)
    if kind == "ustat_centered":
        return Statistic(
            f"ustat_centered[{kernel.name},l={kernel.order}]", lambda xi: ustat_centered(kernel, space, xi, p), p, 2.0
        )
    if kind == "nn_avg":
        return Statistic("nn_avg", lambda xi: nn_avg(space, xi, p), p, lipschitz_constant("nn_avg", space.dim, p))
    raise ValueError(f"unknown statistic kind {kind!r}")
