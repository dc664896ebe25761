"""Solutions of the Stein equation for Poisson process approximation.

The generator of the immigration-death process with immigration measure
lambda and unit per-capita death rate is

    (A h)(xi) = sum over atoms a of lambda_a [h(xi + a) - h(xi)]
              + sum over points x of xi of [h(xi - x) - h(xi)],

and h_f = -int_0^inf (E f(Z_xi(t)) - Po(lambda)(f)) dt solves
A h = f - Po(lambda)(f).

Two routes are provided: an exact sparse solve on a truncated lattice of count
vectors (discrete intensities, up to three atoms), and a Monte-Carlo estimate
of the time integral from coupled immigration-death paths (any intensity).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.stats import poisson

from ..ground import DiscreteAtoms
from ..metrics import d1_prime
from ..processes import ContinuousIntensity, DiscreteIntensity, _rng, _uniform_points, sample_poisson

TAIL_MASS = 1e-10
MAX_EXACT_ATOMS = 3


def tail_rule_cap(mass: float) -> int:
    """Per-atom count cap lambda_i + 10 sqrt(lambda_i) + 10, rounded up."""
    return int(math.ceil(mass + 10 * math.sqrt(mass) + 10))


def _check_exact_spec(spec):
    if not isinstance(spec, DiscreteIntensity):
        raise ValueError("exact mode needs a discrete intensity")
    if spec.space.n_atoms > MAX_EXACT_ATOMS:
        raise ValueError(f"exact mode supports at most {MAX_EXACT_ATOMS} atoms")


# ---------------------------------------------------------------- Po(lambda)(f)


def _lattice(caps) -> np.ndarray:
    return np.array(list(itertools.product(*[range(c + 1) for c in caps])), dtype=int).reshape(-1, len(caps))


def _product_poisson(masses, states) -> np.ndarray:
    w = np.ones(len(states))
    for a, m in enumerate(masses):
        w *= poisson.pmf(states[:, a], m) if m > 0 else (states[:, a] == 0)
    return w


def estimate_po_f(f, spec, n_mc: int = 1000, seed=None, exact: bool = False) -> tuple[float, float]:
    """Po(lambda)(f) as (value, stderr). Exact mode enumerates a truncated product-Poisson."""
    if spec.lambda_total == 0:
        return float(f(spec.space.empty())), 0.0
    if exact:
        _check_exact_spec(spec)
        if spec.lambda_total > 4:
            raise ValueError("exact enumeration supports lambda_total <= 4")
        k = spec.space.n_atoms
        caps = [int(poisson.isf(TAIL_MASS / k, m)) + 1 if m > 0 else 0 for m in spec.masses]
        states = _lattice(caps)
        w = _product_poisson(spec.masses, states)
        return float(np.dot(w, f.on_counts(states))), 0.0
    if n_mc < 2:
        raise ValueError("need n_mc >= 2")
    rng = _rng(seed)
    vals = np.array([f(sample_poisson(spec, rng)) for _ in range(n_mc)])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc))


# ---------------------------------------------------------------- exact solve


class StateLattice:
    """Truncated lattice of count vectors with births blocked at the caps.

    The truncated chain is reversible with respect to the truncated product
    Poisson law, so the Stein equation stays consistent on the lattice. The LU
    factorisation is computed once and reused for every test function.
    """

    def __init__(self, spec: DiscreteIntensity, caps=None):
        _check_exact_spec(spec)
        self.spec = spec
        masses = spec.masses
        self.caps = tuple(tail_rule_cap(m) for m in masses) if caps is None else tuple(int(c) for c in caps)
        if len(self.caps) != len(masses):
            raise ValueError("one cap per atom")
        self.shape = tuple(c + 1 for c in self.caps)
        self.states = _lattice(self.caps)
        w = _product_poisson(masses, self.states)
        self.pi = w / w.sum()
        self.generator = self._build_generator()
        pinned = self.generator.tolil()
        pinned[0, :] = 0
        pinned[0, 0] = 1.0
        self._lu = splu(pinned.tocsc())

    def index(self, counts) -> int:
        return int(np.ravel_multi_index(tuple(np.asarray(counts, dtype=int)), self.shape))

    def contains(self, counts) -> bool:
        c = np.asarray(counts)
        return bool(np.all(c >= 0) and np.all(c <= np.array(self.caps)))

    @property
    def interior(self) -> np.ndarray:
        return np.all(self.states < np.array(self.caps), axis=1)

    def _build_generator(self):
        S = len(self.states)
        rows, cols, vals = [], [], []
        idx = np.arange(S)
        strides = np.array([int(np.prod(self.shape[a + 1 :])) for a in range(len(self.shape))])
        diag = np.zeros(S)
        for a, m in enumerate(self.spec.masses):
            up = self.states[:, a] < self.caps[a]
            if m > 0:
                rows.append(idx[up])
                cols.append(idx[up] + strides[a])
                vals.append(np.full(up.sum(), m))
                diag[up] -= m
            down = self.states[:, a] > 0
            rows.append(idx[down])
            cols.append(idx[down] - strides[a])
            vals.append(self.states[down, a].astype(float))
            diag[down] -= self.states[down, a]
        rows.append(idx)
        cols.append(idx)
        vals.append(diag)
        return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(S, S))

    def solve(self, fvals: np.ndarray) -> np.ndarray:
        rhs = fvals - np.dot(self.pi, fvals)
        rhs = rhs.copy()
        rhs[0] = 0.0
        h = self._lu.solve(rhs)
        # A annihilates constants: shift to the side condition pi(h) = 0
        return h - np.dot(self.pi, h)


@dataclass
class HTable:
    """Exact Stein solution over a truncated lattice; call with a pattern or counts."""

    lattice: StateLattice
    f_values: np.ndarray
    h: np.ndarray
    po_f: float

    def counts_of(self, xi) -> np.ndarray:
        return self.lattice.spec.space.to_counts(xi)

    def at_counts(self, counts) -> float:
        if not self.lattice.contains(counts):
            raise ValueError(f"state {tuple(counts)} outside the truncated lattice")
        return float(self.h[self.lattice.index(counts)])

    def __call__(self, xi) -> float:
        return self.at_counts(self.counts_of(xi))

    def residuals(self, po_f: float | None = None) -> np.ndarray:
        """|A h - (f - Po f)| on interior states, with the generator of the untruncated chain."""
        po = self.po_f if po_f is None else po_f
        r = self.lattice.generator @ self.h - (self.f_values - po)
        return np.abs(r[self.lattice.interior])


def exact_h_discrete(f, spec: DiscreteIntensity, caps=None, lattice: StateLattice | None = None) -> HTable:
    if lattice is None:
        lattice = StateLattice(spec, caps)
    fvals = np.asarray(f.on_counts(lattice.states), dtype=float)
    h = lattice.solve(fvals)
    return HTable(lattice, fvals, h, float(np.dot(lattice.pi, fvals)))


# ---------------------------------------------------------------- Monte-Carlo


@dataclass
class HEstimate:
    value: float
    stderr: float
    meta: dict = field(default_factory=dict)


def _draw_locations(spec, n, rng):
    if isinstance(spec, DiscreteIntensity):
        probs = spec.masses / spec.masses.sum()
        return rng.choice(len(probs), size=n, p=probs)
    return _uniform_points(spec.space, n, rng)


def _pattern_key(space, pts) -> bytes:
    if isinstance(space, DiscreteAtoms):
        return space.to_counts(pts).tobytes()
    return np.ascontiguousarray(pts[np.lexsort(pts.T[::-1])]).tobytes() if len(pts) else b""


class _PathReplicate:
    """One coupled set of immigration-death paths on [0, T].

    Immigrants (arrival time, lifetime, location) are shared by every starting
    configuration; initial points get Exp(1) lifetimes keyed by
    (location, multiplicity index) so shared points die at the same time. A
    stationary copy started from a Po(lambda) draw shares the immigrants too.
    """

    def __init__(self, spec, T, rng):
        lam = spec.lambda_total
        n_imm = rng.poisson(lam * T) if lam > 0 else 0
        self.arrive = rng.random(n_imm) * T
        self.life = rng.exponential(1.0, n_imm)
        self.imm_loc = _draw_locations(spec, n_imm, rng) if n_imm else spec.space.empty()
        self.stat_init = sample_poisson(spec, rng)
        self.stat_life = rng.exponential(1.0, len(self.stat_init))
        self.rng = rng
        self.space = spec.space
        self._lifetimes: dict = {}

    def initial_lifetimes(self, xi) -> np.ndarray:
        out = np.empty(len(xi))
        seen: dict = {}
        for k, x in enumerate(xi):
            loc = x.item() if np.ndim(x) == 0 else tuple(np.asarray(x).tolist())
            mult = seen.get(loc, 0)
            seen[loc] = mult + 1
            key = (loc, mult)
            if key not in self._lifetimes:
                self._lifetimes[key] = self.rng.exponential(1.0)
            out[k] = self._lifetimes[key]
        return out

    def path_values(self, xi, life, grid, fval) -> np.ndarray:
        """f along the path started from xi, at every grid node."""
        if len(xi) and len(self.imm_loc):
            pts = np.concatenate([xi, self.imm_loc])
        else:
            pts = xi if len(xi) else self.imm_loc
        born = np.concatenate([np.zeros(len(xi)), self.arrive])
        dies = np.concatenate([life, self.arrive + self.life])
        alive = (born[None, :] <= grid[:, None]) & (dies[None, :] > grid[:, None])
        # f is only re-evaluated where the alive set changes
        starts = np.concatenate([[0], np.flatnonzero(np.any(alive[1:] != alive[:-1], axis=1)) + 1])
        out = np.empty(len(grid))
        bounds = np.append(starts, len(grid))
        for a, b in zip(bounds[:-1], bounds[1:]):
            out[a:b] = fval(pts[alive[a]])
        return out


def estimate_h_batch(f, spec, xis, n_mc: int = 400, T: float = 20.0, n_nodes: int = 256, seed=None, replicates=False):
    """Monte-Carlo h_f at several starting patterns with common random numbers.

    Each replicate integrates f(Z_xi(t)) - f(Z_stat(t)) over the t-grid with
    the trapezoid rule, where Z_stat is a stationary path sharing the
    immigrants. Returns one HEstimate per pattern (and the replicate matrix
    when ``replicates`` is set).
    """
    if n_mc < 2:
        raise ValueError("need n_mc >= 2")
    rng = _rng(seed)
    space = spec.space
    xis = [space.validate(x) for x in xis]
    grid = np.linspace(0.0, T, n_nodes)
    weights = np.full(n_nodes, grid[1] - grid[0])
    weights[0] = weights[-1] = 0.5 * (grid[1] - grid[0])
    cache: dict = {}

    def fval(pts):
        key = _pattern_key(space, pts)
        v = cache.get(key)
        if v is None:
            v = cache[key] = float(f(pts))
        return v

    H = np.empty((n_mc, len(xis)))
    for k in range(n_mc):
        rep = _PathReplicate(spec, T, rng)
        ref = rep.path_values(rep.stat_init, rep.stat_life, grid, fval)
        for j, xi in enumerate(xis):
            vals = rep.path_values(xi, rep.initial_lifetimes(xi), grid, fval)
            H[k, j] = -np.dot(weights, vals - ref)
    est = []
    for j, xi in enumerate(xis):
        est.append(
            HEstimate(
                float(H[:, j].mean()),
                float(H[:, j].std(ddof=1) / math.sqrt(n_mc)),
                {
                    "T": T,
                    "n_nodes": n_nodes,
                    "n_mc": n_mc,
                    "truncation_scale": spec.lambda_total * math.exp(-T),
                    "truncation_bound": (len(xi) + spec.lambda_total) * math.exp(-T),
                },
            )
        )
    return (est, H) if replicates else est


def estimate_h(f, spec, xi, n_mc: int = 400, T: float = 20.0, n_nodes: int = 256, seed=None) -> HEstimate:
    return estimate_h_batch(f, spec, [xi], n_mc, T, n_nodes, seed)[0]


# ---------------------------------------------------------------- residuals and scans


def _neighbours(space: DiscreteAtoms, xi):
    counts = space.to_counts(xi)
    ups = [space.from_counts(counts + np.eye(len(counts), dtype=int)[a]) for a in range(len(counts))]
    downs = [
        space.from_counts(counts - np.eye(len(counts), dtype=int)[a]) if counts[a] > 0 else None
        for a in range(len(counts))
    ]
    return counts, ups, downs


def stein_residual(f, spec, xi, h_source: str = "exact", table: HTable | None = None, n_mc: int = 400, seed=None):
    """|A h(xi) - (f(xi) - Po f)|. Exact mode returns a float; MC mode returns (residual, stderr)."""
    if not isinstance(spec, DiscreteIntensity):
        raise ValueError("the generator sum is evaluated for discrete intensities only")
    space = spec.space
    xi = space.validate(xi)
    counts, ups, downs = _neighbours(space, xi)
    if h_source == "exact":
        if table is None:
            table = exact_h_discrete(f, spec)
        h0 = table(xi)
        gen = sum(m * (table(u) - h0) for m, u in zip(spec.masses, ups))
        gen += sum(c * (table(d) - h0) for c, d in zip(counts, downs) if d is not None)
        return abs(gen - (f(xi) - table.po_f))
    if h_source != "mc":
        raise ValueError("h_source is 'exact' or 'mc'")
    args = [xi] + ups + [d for d in downs if d is not None]
    _, H = estimate_h_batch(f, spec, args, n_mc=n_mc, seed=seed, replicates=True)
    nz = [c for c, d in zip(counts, downs) if d is not None]
    k = len(ups)
    gen = (H[:, 1 : 1 + k] - H[:, [0]]) @ spec.masses + (H[:, 1 + k :] - H[:, [0]]) @ np.array(nz, dtype=float)
    po, _ = estimate_po_f(f, spec, exact=True) if spec.space.n_atoms <= MAX_EXACT_ATOMS and spec.lambda_total <= 4 else estimate_po_f(f, spec, 4000, seed)
    resid = abs(gen.mean() - (f(xi) - po))
    return float(resid), float(gen.std(ddof=1) / math.sqrt(len(gen)))


@dataclass
class DeltaScan:
    max_abs_dh: float
    max_abs_d2h: float
    max_lip3_ratio: float
    n_states: int
    n_pairs: int


def delta_bounds_scan(h, space, states, pairs=()) -> DeltaScan:
    """Largest first and second differences of h over ``states`` = [(xi, x, y)],
    and largest |Delta_x h(xi) - Delta_x h(eta)| / d1'(xi, eta) over ``pairs`` = [(xi, eta, x)].

    ``h`` is any callable on patterns; locations x, y are given in the
    space's own representation.
    """

    def add(xi, *locs):
        if isinstance(space, DiscreteAtoms):
            return np.concatenate([xi, np.array(locs, dtype=int)])
        return np.vstack([xi] + [np.atleast_2d(l) for l in locs])

    dh = d2h = lip = 0.0
    for xi, x, y in states:
        xi = space.validate(xi)
        h0, hx, hy, hxy = h(xi), h(add(xi, x)), h(add(xi, y)), h(add(xi, x, y))
        dh = max(dh, abs(hx - h0), abs(hy - h0))
        d2h = max(d2h, abs(hxy - hx - hy + h0))
    for xi, eta, x in pairs:
        xi, eta = space.validate(xi), space.validate(eta)
        dist = d1_prime(space, xi, eta)
        if dist == 0:
            continue
        diff = abs((h(add(xi, x)) - h(xi)) - (h(add(eta, x)) - h(eta)))
        lip = max(lip, diff / dist)
    return DeltaScan(dh, d2h, lip, len(states), len(pairs))


def lattice_scan_states(lattice: StateLattice, limits) -> list:
    """All (xi, x, y) with per-atom counts <= limits and x, y atoms."""
    space = lattice.spec.space
    k = space.n_atoms
    out = []
    for counts in _lattice(limits):
        xi = space.from_counts(counts)
        for x in range(k):
            for y in range(x, k):
                out.append((xi, x, y))
    return out


def scan_limits(lattice: StateLattice) -> tuple:
    """Per-atom count limits for scans, kept well inside the truncation caps."""
    out = []
    for m, cap in zip(lattice.spec.masses, lattice.caps):
        out.append(int(min(cap - 2, math.ceil(m + 5 * math.sqrt(m) + 5))))
    return tuple(out)


def lattice_delta_scan(table: HTable, limits, pairs=()) -> DeltaScan:
    """Array form of ``delta_bounds_scan`` for an exact table.

    Covers every state with counts <= ``limits`` and every pair of atoms;
    ``pairs`` holds (counts_xi, counts_eta) for the third bound, each checked
    against every atom x.
    """
    lat = table.lattice
    limits = tuple(int(l) for l in limits)
    if any(l + 2 > c for l, c in zip(limits, lat.caps)):
        raise ValueError("scan limits must stay two below the caps")
    H = table.h.reshape(lat.shape)
    k = len(limits)
    region = tuple(slice(0, l + 1) for l in limits)

    def shifted(*atoms):
        sl = list(region)
        for a in atoms:
            s = sl[a]
            sl[a] = slice(s.start + 1, s.stop + 1)
        return H[tuple(sl)]

    base = H[region]
    dh = max(float(np.abs(shifted(a) - base).max()) for a in range(k))
    d2h = 0.0
    for a in range(k):
        for b in range(a, k):
            d2 = shifted(a, b) - shifted(a) - shifted(b) + base
            d2h = max(d2h, float(np.abs(d2).max()))
    space = lat.spec.space
    lip = 0.0
    eye = np.eye(k, dtype=int)
    for cx, ce in pairs:
        cx, ce = np.asarray(cx), np.asarray(ce)
        dist = d1_prime(space, space.from_counts(cx), space.from_counts(ce))
        if dist == 0:
            continue
        for a in range(k):
            dx = table.at_counts(cx + eye[a]) - table.at_counts(cx)
            de = table.at_counts(ce + eye[a]) - table.at_counts(ce)
            lip = max(lip, abs(dx - de) / dist)
    n_states = int(np.prod([l + 1 for l in limits])) * k * (k + 1) // 2
    return DeltaScan(dh, d2h, lip, n_states, len(pairs))


def lattice_pairs(limits, n_pairs: int | None = None, seed=None) -> list:
    """All ordered pairs of count vectors within ``limits`` (``n_pairs`` None), or a random sample."""
    states = _lattice(limits)
    if n_pairs is None:
        return [(a, b) for a in states for b in states]
    rng = _rng(seed)
    i = rng.integers(0, len(states), n_pairs)
    j = rng.integers(0, len(states), n_pairs)
    return [(states[a], states[b]) for a, b in zip(i, j)]
