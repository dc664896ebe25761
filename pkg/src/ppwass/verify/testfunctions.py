"""Test functions f: patterns -> [0, 1] that are 1-Lipschitz for ``d1p``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..ground import DiscreteAtoms, GroundSpace
from ..metrics import d1p
from ..statistics import Statistic


@dataclass
class TestFunction:
    """``evaluator`` maps a pattern to [0, 1]; membership is declared for order ``p``.

    ``counts_eval``, when set, evaluates f on an array of count vectors of a
    discrete space in one call (used to tabulate f over a whole lattice).
    """

    __test__ = False

    name: str
    evaluator: Callable[[np.ndarray], float]
    p: float
    space: GroundSpace
    counts_eval: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    constant: float | None = None

    def __call__(self, xi) -> float:
        return self.evaluator(xi)

    def on_counts(self, counts: np.ndarray) -> np.ndarray:
        if self.counts_eval is not None:
            return self.counts_eval(counts)
        return np.array([self.evaluator(self.space.from_counts(c)) for c in counts])


def make_distance_test_function(space: GroundSpace, xi0, p: float, complement: bool = False) -> TestFunction:
    """f(xi) = d1p(xi, xi0) (or 1 minus it); 1-Lipschitz by the triangle inequality."""
    xi0 = space.validate(xi0)
    n0 = len(xi0)

    def f(xi):
        v = d1p(space, xi, xi0, p)
        return 1.0 - v if complement else v

    counts_eval = None
    if isinstance(space, DiscreteAtoms):

        def counts_eval(counts):
            counts = np.asarray(counts)
            out = np.ones(len(counts))
            for k in np.flatnonzero(counts.sum(axis=1) == n0):
                out[k] = d1p(space, space.from_counts(counts[k]), xi0, p)
            return 1.0 - out if complement else out

    name = ("1-" if complement else "") + f"d1p(.,{xi0.tolist()})"
    return TestFunction(name, f, p, space, counts_eval)


def constant_test_function(space: GroundSpace, c: float, p: float = 1.0) -> TestFunction:
    if not 0 <= c <= 1:
        raise ValueError("constant must lie in [0, 1]")
    return TestFunction(
        f"const({c})", lambda xi: c, p, space, lambda counts: np.full(len(counts), c), constant=c
    )


def from_statistic(stat: Statistic, space: GroundSpace, p: float | None = None) -> TestFunction:
    """f = stat / L, a member for the statistic's order and every larger order."""
    L = stat.lipschitz
    return TestFunction(f"{stat.name}/{L:g}", lambda xi: stat(xi) / L, stat.p if p is None else p, space)


def membership_ratio(f: TestFunction, pairs) -> float:
    """Worst observed |f(xi) - f(eta)| / d1p(xi, eta) over the given pairs."""
    worst = 0.0
    for xi, eta in pairs:
        d = d1p(f.space, xi, eta, f.p)
        diff = abs(f(xi) - f(eta))
        if d == 0:
            if diff > 1e-12:
                return np.inf
            continue
        worst = max(worst, diff / d)
    return worst
