"""Ground spaces with a metric bounded by one, and validated point patterns.

Three carriers are supported: the unit cube ``[0, 1]^D`` with the capped
Euclidean metric, the flat torus ``[0, 1)^D`` with coordinate-wise wraparound,
and a finite set of labelled atoms with an explicit distance table.

Patterns are plain numpy arrays. For the cube and torus a pattern of ``n``
points is a float array of shape ``(n, D)``; for discrete atoms it is an int
array of shape ``(n,)`` holding atom indices. Row order carries no meaning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PointPattern = np.ndarray


class GroundSpace:
    """Common interface. Subclasses implement ``pairwise`` and ``validate``."""

    kind: str = ""

    def pairwise(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate(self, points) -> PointPattern:
        raise NotImplementedError

    def empty(self) -> PointPattern:
        return self.validate([])

    def check_diameter(self) -> float:
        raise NotImplementedError

    @property
    def euclidean(self) -> bool:
        """True when d0(x, y) = min(|x - y|, 1) for the Euclidean norm."""
        return False


def _as_points(points, dim: int) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim))
    if dim == 1 and arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of shape (n, {dim}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coordinate")
    return arr


@dataclass(frozen=True)
class UnitCube(GroundSpace):
    dim: int = 1
    kind = "cube"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    def pairwise(self, xs, ys):
        diff = xs[:, None, :] - ys[None, :, :]
        return np.minimum(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)), 1.0)

    def validate(self, points):
        arr = _as_points(points, self.dim)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("point outside the unit cube")
        return arr

    def check_diameter(self):
        return math.sqrt(self.dim)

    @property
    def euclidean(self):
        return True


@dataclass(frozen=True)
class Torus(GroundSpace):
    dim: int = 1
    kind = "torus"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    def pairwise(self, xs, ys):
        diff = np.abs(xs[:, None, :] - ys[None, :, :])
        diff = np.minimum(diff, 1.0 - diff)
        return np.minimum(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)), 1.0)

    def validate(self, points):
        arr = _as_points(points, self.dim)
        if arr.size and (arr.min() < 0.0 or arr.max() >= 1.0):
            raise ValueError("point outside [0, 1)^D")
        return arr

    def check_diameter(self):
        return math.sqrt(self.dim)


@dataclass(frozen=True, eq=False)
class DiscreteAtoms(GroundSpace):
    """Finite carrier. ``table[i, j]`` is the distance between atoms i and j."""

    locations: np.ndarray
    table: np.ndarray = field(default=None)
    kind = "discrete"

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        if locs.ndim == 1:
            locs = locs.reshape(-1, 1)
        object.__setattr__(self, "locations", locs)
        if self.table is None:
            diff = locs[:, None, :] - locs[None, :, :]
            tab = np.minimum(np.sqrt((diff**2).sum(-1)), 1.0)
        else:
            tab = np.asarray(self.table, dtype=float)
        k = locs.shape[0]
        if tab.shape != (k, k):
            raise ValueError("distance table must be k x k for k atoms")
        if np.any(tab < 0) or np.any(tab > 1):
            raise ValueError("distance table entries must lie in [0, 1]")
        if not np.array_equal(tab, tab.T) or np.any(np.diag(tab) != 0):
            raise ValueError("distance table must be symmetric with zero diagonal")
        object.__setattr__(self, "table", tab)

    @property
    def n_atoms(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    def pairwise(self, xs, ys):
        return self.table[np.ix_(xs, ys)]

    def validate(self, points):
        arr = np.asarray(points)
        if arr.size == 0:
            return np.zeros(0, dtype=int)
        if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
            if arr.ndim == 1 and np.all(np.mod(arr, 1) == 0):
                arr = arr.astype(int)
            else:
                raise ValueError("discrete patterns are 1-d arrays of atom indices")
        if arr.min() < 0 or arr.max() >= self.n_atoms:
            raise ValueError("atom index out of range")
        return arr.astype(int)

    def check_diameter(self):
        return float(self.table.max()) if self.table.size else 0.0

    def __eq__(self, other):
        if not isinstance(other, DiscreteAtoms):
            return NotImplemented
        return np.array_equal(self.locations, other.locations) and np.array_equal(self.table, other.table)

    __hash__ = object.__hash__

    @property
    def euclidean(self):
        locs = self.locations
        diff = locs[:, None, :] - locs[None, :, :]
        capped = np.minimum(np.sqrt((diff**2).sum(-1)), 1.0)
        return bool(np.allclose(capped, self.table, rtol=0, atol=1e-12))

    def from_counts(self, counts) -> PointPattern:
        return np.repeat(np.arange(self.n_atoms), np.asarray(counts, dtype=int))

    def to_counts(self, pattern) -> np.ndarray:
        return np.bincount(np.asarray(pattern, dtype=int), minlength=self.n_atoms)


def d0(space: GroundSpace, x, y) -> float:
    """Distance between two single locations."""
    xs = space.validate([x] if space.kind == "discrete" else np.atleast_1d(x)[None, :])
    ys = space.validate([y] if space.kind == "discrete" else np.atleast_1d(y)[None, :])
    return float(space.pairwise(xs, ys)[0, 0])


def check_diameter(space: GroundSpace) -> float:
    return space.check_diameter()
