"""Exact assignment solvers on nonnegative cost matrices.

Only the optimal cost is contractual; among several optimal permutations any
one may be returned.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

BRUTE_FORCE_MAX_N = 8


def _as_cost(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return c.reshape(c.shape if c.ndim == 2 else (0, 0))
    if c.ndim != 2:
        raise ValueError("cost matrix must be 2-d")
    if not np.all(np.isfinite(c)) or c.min() < 0:
        raise ValueError("cost entries must be finite and nonnegative")
    return c


def _square(c) -> np.ndarray:
    c = _as_cost(c)
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got {c.shape}")
    return c


def min_sum_assignment(c) -> tuple[np.ndarray, float]:
    """Permutation ``perm`` minimising ``sum_i c[i, perm[i]]`` and its cost."""
    c = _square(c)
    n = c.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int), 0.0
    rows, cols = linear_sum_assignment(c)
    perm = np.empty(n, dtype=int)
    perm[rows] = cols
    return perm, float(c[rows, cols].sum())


def min_sum_injection(c) -> tuple[np.ndarray, float]:
    """Injection rows -> cols minimising the summed cost, for n rows <= m cols."""
    c = _as_cost(c)
    n, m = c.shape
    if n > m:
        raise ValueError(f"need rows <= cols, got {c.shape}")
    if n == 0:
        return np.zeros(0, dtype=int), 0.0
    rows, cols = linear_sum_assignment(c)
    sigma = np.empty(n, dtype=int)
    sigma[rows] = cols
    return sigma, float(c[rows, cols].sum())


def _max_matching(allowed: np.ndarray) -> tuple[int, np.ndarray]:
    """Kuhn's augmenting-path maximum matching on a boolean biadjacency matrix."""
    n, m = allowed.shape
    adj = [np.flatnonzero(allowed[i]).tolist() for i in range(n)]
    match_col = [-1] * m
    match_row = [-1] * n

    def augment(root):
        # iterative DFS over alternating paths; stack frames are [row, next position]
        seen = [False] * m
        via = {}
        stack = [[root, 0]]
        while stack:
            frame = stack[-1]
            i, k = frame
            if k >= len(adj[i]):
                stack.pop()
                continue
            frame[1] += 1
            j = adj[i][k]
            if seen[j]:
                continue
            seen[j] = True
            via[j] = i
            if match_col[j] < 0:
                while j >= 0:
                    row = via[j]
                    nxt = match_row[row]
                    match_row[row] = j
                    match_col[j] = row
                    j = nxt
                return True
            stack.append([match_col[j], 0])
        return False

    size = sum(augment(i) for i in range(n))
    return size, np.array(match_row, dtype=int)


def min_bottleneck_assignment(c) -> tuple[np.ndarray, float]:
    """Permutation minimising ``max_i c[i, perm[i]]``.

    Binary search over the sorted distinct entries; a threshold is feasible
    when the entries not above it admit a perfect matching.
    """
    c = _square(c)
    n = c.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int), 0.0
    values = np.unique(c)
    # the bottleneck is at least the largest row/column minimum
    floor = max(c.min(axis=1).max(), c.min(axis=0).max())
    lo = int(np.searchsorted(values, floor))
    hi = len(values) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        size, perm = _max_matching(c <= values[mid])
        if size == n:
            best = (perm, float(values[mid]))
            hi = mid - 1
        else:
            lo = mid + 1
    assert best is not None
    return best


def brute_force_assignment(c, mode: str = "sum") -> float:
    """Exhaustive enumeration over all n! permutations (test oracle, n <= 8)."""
    c = _square(c)
    n = c.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force refused for n={n} > {BRUTE_FORCE_MAX_N}")
    if n == 0:
        return 0.0
    if mode not in ("sum", "bottleneck"):
        raise ValueError(f"unknown mode {mode!r}")
    best = math.inf
    idx = np.arange(n)
    for perm in itertools.permutations(range(n)):
        vals = c[idx, perm]
        v = vals.sum() if mode == "sum" else vals.max()
        best = min(best, float(v))
    return best


def brute_force_injection(c) -> float:
    """Exhaustive minimum over injections rows -> cols (test oracle)."""
    c = _as_cost(c)
    n, m = c.shape
    if n > m:
        raise ValueError("need rows <= cols")
    if n == 0:
        return 0.0
    idx = np.arange(n)
    return min(float(c[idx, list(s)].sum()) for s in itertools.permutations(range(m), n))
