"""Samplers: Poisson, 2-runs (with its Palm coupling), hard-core Gibbs via
birth-death Metropolis-Hastings, and the spatial immigration-death process at a
fixed time.

Every sampler takes ``seed`` as an int or a ``numpy.random.Generator``; equal
seeds give equal outputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ground import DiscreteAtoms, GroundSpace, Torus, UnitCube


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------- intensities


@dataclass(eq=False)
class DiscreteIntensity:
    """Expectation measure with mass ``masses[i]`` at atom i."""

    space: DiscreteAtoms
    masses: np.ndarray

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.shape != (self.space.n_atoms,):
            raise ValueError("one mass per atom")
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses < 0):
            raise ValueError("masses must be finite and >= 0")

    @property
    def lambda_total(self) -> float:
        return float(self.masses.sum())

    def scaled(self, factor: float) -> "DiscreteIntensity":
        return DiscreteIntensity(self.space, self.masses * factor)


@dataclass(eq=False)
class ContinuousIntensity:
    """Constant intensity ``rate`` per unit volume on the unit cube or torus."""

    space: GroundSpace
    rate: float

    def __post_init__(self):
        if not isinstance(self.space, (UnitCube, Torus)):
            raise ValueError("continuous intensity lives on UnitCube or Torus")
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValueError("rate must be finite and >= 0")

    @property
    def lambda_total(self) -> float:
        return float(self.rate)

    def scaled(self, factor: float) -> "ContinuousIntensity":
        return ContinuousIntensity(self.space, self.rate * factor)


def _uniform_points(space, n, rng):
    pts = rng.random((n, space.dim))
    if isinstance(space, UnitCube):
        return pts
    return np.minimum(pts, np.nextafter(1.0, 0.0))


def sample_poisson(spec, seed=None) -> np.ndarray:
    rng = _rng(seed)
    if isinstance(spec, DiscreteIntensity):
        counts = rng.poisson(spec.masses)
        return spec.space.from_counts(counts)
    n = rng.poisson(spec.lambda_total)
    return _uniform_points(spec.space, n, rng)


# ---------------------------------------------------------------- 2-runs


@dataclass(eq=False)
class TwoRunsModel:
    """Indicators on Z_n; a point at z_i whenever I_i = I_{i+1} = 1.

    Patterns are atom indices on ``space``, whose atoms are the z_i with the
    capped Euclidean metric. Default atoms are z_i = i/n.
    """

    n: int
    q: float
    atoms: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (0.0 <= self.q <= 1.0):
            raise ValueError("q must lie in [0, 1]")
        z = np.arange(1, self.n + 1) / self.n if self.atoms is None else np.asarray(self.atoms, float)
        if z.shape != (self.n,) or np.any(np.diff(z) <= 0) or z[0] <= 0 or z[-1] > 1:
            raise ValueError("atoms must be strictly increasing in (0, 1]")
        self.atoms = z
        self.space = DiscreteAtoms(z)

    @property
    def target(self) -> DiscreteIntensity:
        return DiscreteIntensity(self.space, np.full(self.n, self.q**2))


def sample_two_runs(model: TwoRunsModel, seed=None) -> tuple[np.ndarray, np.ndarray]:
    rng = _rng(seed)
    ind = (rng.random(model.n) < model.q).astype(int)
    runs = ind * np.roll(ind, -1)
    return np.flatnonzero(runs), ind


def sample_two_runs_palm(model: TwoRunsModel, i: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Coupled (process, Palm process at z_i) built from one indicator vector.

    The Palm version carries z_i itself, z_{i-1} iff I_{i-1} = 1, z_{i+1} iff
    I_{i+2} = 1, and agrees with the process at every other index.
    """
    n = model.n
    if not 0 <= i < n:
        raise ValueError("index out of range")
    rng = _rng(seed)
    ind = (rng.random(n) < model.q).astype(int)
    runs = ind * np.roll(ind, -1)
    palm = runs.copy()
    if n >= 3:
        palm[(i - 1) % n] = ind[(i - 1) % n]
        palm[(i + 1) % n] = ind[(i + 2) % n]
    palm[i] = 1
    return np.flatnonzero(runs), np.flatnonzero(palm)


# ---------------------------------------------------------------- hard core


@dataclass
class HardCoreModel:
    dim: int
    beta: float
    r: float
    burn_in: int = 10**5
    thin: int = 10**3

    def __post_init__(self):
        if self.dim < 1 or self.beta <= 0 or self.r <= 0:
            raise ValueError("need dim >= 1, beta > 0, r > 0")
        if self.burn_in < 0 or self.thin < 1:
            raise ValueError("need burn_in >= 0 and thin >= 1")

    @property
    def space(self) -> Torus:
        return Torus(self.dim)


class _Grid:
    """Torus cell grid with cell side >= r for O(1) conflict queries."""

    def __init__(self, dim: int, r: float):
        self.dim = dim
        self.r2 = r * r
        self.m = max(1, int(math.floor(1.0 / r))) if r < 1 else 1
        offs = set()
        for off in itertools.product((-1, 0, 1), repeat=dim):
            offs.add(tuple(o % self.m for o in off))
        self.offsets = sorted(offs)
        self.cells: dict[tuple, list] = {}

    def cell(self, x) -> tuple:
        m = self.m
        return tuple(min(int(c * m), m - 1) for c in x)

    def conflicts(self, x) -> bool:
        m = self.m
        cx = self.cell(x)
        r2 = self.r2
        for off in self.offsets:
            key = tuple((a + b) % m for a, b in zip(cx, off))
            for y in self.cells.get(key, ()):
                s = 0.0
                for a, b in zip(x, y):
                    d = abs(a - b)
                    if d > 0.5:
                        d = 1.0 - d
                    s += d * d
                if s <= r2:
                    return True
        return False

    def add(self, x):
        self.cells.setdefault(self.cell(x), []).append(x)

    def remove(self, x):
        self.cells[self.cell(x)].remove(x)


class BirthDeathChain:
    """Discrete-time birth-death Metropolis-Hastings chain.

    Target: density proportional to ``beta ** n`` times the admissibility
    indicator, relative to a unit-rate Poisson process on a carrier of total
    reference mass one. Births are proposed at ``propose()`` locations with
    probability 1/2 and accepted with min(1, beta/(n+1)) when admissible;
    otherwise a uniformly chosen point is deleted with probability min(1, n/beta).
    """

    def __init__(self, beta: float, propose, conflicts, add, remove, rng: np.random.Generator):
        self.beta = beta
        self.propose = propose
        self.conflicts = conflicts
        self.add = add
        self.remove = remove
        self.rng = rng
        self.points: list = []
        self.accepted = 0
        self.steps = 0

    def run(self, n_steps: int, block: int = 65536):
        beta = self.beta
        pts = self.points
        done = 0
        while done < n_steps:
            k = min(block, n_steps - done)
            u_kind = self.rng.random(k)
            u_acc = self.rng.random(k)
            u_pick = self.rng.random(k)
            for s in range(k):
                n = len(pts)
                if u_kind[s] < 0.5:
                    if u_acc[s] * (n + 1) < beta:
                        x = self.propose()
                        if not self.conflicts(x):
                            pts.append(x)
                            self.add(x)
                            self.accepted += 1
                elif n > 0 and u_acc[s] * beta < n:
                    j = int(u_pick[s] * n)
                    x = pts[j]
                    pts[j] = pts[-1]
                    pts.pop()
                    self.remove(x)
                    self.accepted += 1
            done += k
        self.steps += n_steps


def _hard_core_chain(model: HardCoreModel, rng: np.random.Generator) -> BirthDeathChain:
    grid = _Grid(model.dim, model.r)
    dim = model.dim
    buf = {"u": rng.random((0, dim)), "i": 0}

    def propose():
        if buf["i"] >= len(buf["u"]):
            buf["u"] = rng.random((4096, dim))
            buf["i"] = 0
        x = tuple(buf["u"][buf["i"]].tolist())
        buf["i"] += 1
        return x

    return BirthDeathChain(model.beta, propose, grid.conflicts, grid.add, grid.remove, rng)


def hard_core_samples(model: HardCoreModel, n_samples: int, seed=None) -> list[np.ndarray]:
    """``n_samples`` states: the first after burn-in, then one every ``thin`` steps."""
    rng = _rng(seed)
    chain = _hard_core_chain(model, rng)
    out = []
    if n_samples <= 0:
        return out
    chain.run(model.burn_in)
    for k in range(n_samples):
        if k:
            chain.run(model.thin)
        out.append(np.array(chain.points, dtype=float).reshape(-1, model.dim))
    return out


def sample_hard_core(model: HardCoreModel, seed=None) -> np.ndarray:
    return hard_core_samples(model, 1, seed)[0]


def batch_means_stderr(values, n_batches: int = 20) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n < 2:
        return math.inf
    b = min(n_batches, n)
    size = n // b
    means = v[: size * b].reshape(b, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(b))


def estimate_hc_intensity(model: HardCoreModel, n_samples: int, seed=None, samples=None) -> tuple[float, float]:
    """Mean count over thinned states (unit volume) and its batch-means stderr."""
    if samples is None:
        if n_samples < 2:
            raise ValueError("need n_samples >= 2")
        samples = hard_core_samples(model, n_samples, seed)
    counts = np.array([len(x) for x in samples], dtype=float)
    return float(counts.mean()), batch_means_stderr(counts)


def empty_ball_indicators(patterns, r: float, probes: np.ndarray) -> np.ndarray:
    """Per pattern, fraction of probe locations x with no point within distance r (torus)."""
    probes = np.atleast_2d(probes)
    out = np.empty(len(patterns))
    for k, pts in enumerate(patterns):
        if len(pts) == 0:
            out[k] = 1.0
            continue
        diff = np.abs(probes[:, None, :] - pts[None, :, :])
        diff = np.minimum(diff, 1.0 - diff)
        d = np.sqrt((diff**2).sum(-1)).min(axis=1)
        out[k] = float(np.mean(d > r))
    return out


# ---------------------------------------------------------------- immigration-death


def sample_immigration_death(spec, xi0, t: float, seed=None) -> np.ndarray:
    """One draw of the immigration-death process at time t started from xi0.

    Each initial point survives with probability exp(-t) independently; an
    independent Poisson pattern of intensity (1 - exp(-t)) * spec is added.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rng = _rng(seed)
    xi0 = spec.space.validate(xi0)
    keep = rng.random(len(xi0)) < math.exp(-t)
    fresh = sample_poisson(spec.scaled(-math.expm1(-t)), rng)
    if t == 0:
        return xi0.copy()
    return np.concatenate([xi0[keep], fresh])
