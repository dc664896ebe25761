import itertools

import numpy as np
import pytest

from ppwass.ground import UnitCube
from ppwass.metrics import INF, d1p
from ppwass.statistics import Statistic, make_kernel, make_statistic
from ppwass.transport import (
    FiniteSupportDistribution,
    SampleSet,
    cost_matrix,
    dual_lower_bound,
    empirical_d2p,
    finite_support_d2p,
    solve_transport,
)

C1 = UnitCube(1)


def _pats(rng, n, max_size=3, same=None):
    out = []
    for _ in range(n):
        k = same if same is not None else int(rng.integers(0, max_size + 1))
        out.append(rng.random((k, 1)))
    return out


def vertex_enumeration(cost, mu, nu):
    """Minimum over all basic feasible plans: every set of m+n-1 cells whose
    balance equations have a unique nonnegative solution."""
    m, n = cost.shape
    cells = list(itertools.product(range(m), range(n)))
    A = np.zeros((m + n, m * n))
    for i, j in cells:
        A[i, i * n + j] = 1
        A[m + j, i * n + j] = 1
    b = np.concatenate([mu, nu])
    best = np.inf
    k = m + n - 1
    for basis in itertools.combinations(range(m * n), k):
        sub = A[:, basis]
        if np.linalg.matrix_rank(sub) < k:
            continue
        x, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if np.abs(sub @ x - b).max() > 1e-10 or x.min() < -1e-12:
            continue
        best = min(best, float(cost.ravel()[list(basis)] @ x))
    return best


def test_empirical_examples():
    rng = np.random.default_rng(0)
    a = _pats(rng, 5)
    assert empirical_d2p(SampleSet(C1, a), SampleSet(C1, a[::-1]), 2.0) == 0.0
    x, y = rng.random((3, 1)), rng.random((3, 1))
    assert empirical_d2p(SampleSet(C1, [x]), SampleSet(C1, [y]), 1.0) == pytest.approx(d1p(C1, x, y, 1.0))
    A = SampleSet(C1, [np.array([[0.0]]), np.array([[0.6]])])
    B = SampleSet(C1, [np.array([[0.2]]), np.array([[0.5]])])
    assert np.allclose(cost_matrix(C1, A.patterns, B.patterns, 1.0), [[0.2, 0.5], [0.4, 0.1]])
    assert empirical_d2p(A, B, 1.0) == pytest.approx(0.15, abs=1e-15)


def test_unequal_sizes_refused():
    with pytest.raises(ValueError):
        empirical_d2p(SampleSet(C1, [C1.empty()]), SampleSet(C1, [C1.empty(), C1.empty()]))


def test_finite_support_examples():
    rng = np.random.default_rng(1)
    pats = _pats(rng, 3, same=2)
    P = FiniteSupportDistribution(C1, pats, [0.2, 0.3, 0.5])
    assert finite_support_d2p(P, P, 1.0) == pytest.approx(0.0, abs=1e-9)
    x, y = pats[0], pats[1]
    pm = lambda z: FiniteSupportDistribution(C1, [z], [1.0])
    assert finite_support_d2p(pm(x), pm(y), 2.0) == pytest.approx(d1p(C1, x, y, 2.0), abs=1e-9)
    U = FiniteSupportDistribution(C1, [x, y], [0.5, 0.5])
    eta = pats[2]
    expect = (d1p(C1, x, eta, 1.0) + d1p(C1, y, eta, 1.0)) / 2
    assert finite_support_d2p(U, pm(eta), 1.0) == pytest.approx(expect, abs=1e-9)


def test_finite_support_weight_validation():
    with pytest.raises(ValueError):
        FiniteSupportDistribution(C1, [C1.empty()], [0.5])


def test_finite_support_matches_vertex_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(40):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        P = FiniteSupportDistribution(C1, _pats(rng, m, 2), rng.dirichlet(np.ones(m)))
        Q = FiniteSupportDistribution(C1, _pats(rng, n, 2), rng.dirichlet(np.ones(n)))
        p = [1.0, 2.0, INF][int(rng.integers(3))]
        c = cost_matrix(C1, P.patterns, Q.patterns, p)
        assert finite_support_d2p(P, Q, p) == pytest.approx(vertex_enumeration(c, P.weights, Q.weights), abs=1e-9)


def test_finite_support_agrees_with_empirical():
    rng = np.random.default_rng(3)
    a, b = _pats(rng, 6, 2), _pats(rng, 6, 2)
    w = np.full(6, 1 / 6)
    for p in (1.0, 3.0, INF):
        assert finite_support_d2p(
            FiniteSupportDistribution(C1, a, w), FiniteSupportDistribution(C1, b, w), p
        ) == pytest.approx(empirical_d2p(SampleSet(C1, a), SampleSet(C1, b), p), abs=1e-9)


def test_solve_transport_plan_is_feasible():
    rng = np.random.default_rng(4)
    mu, nu = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(4))
    plan, total = solve_transport(rng.random((3, 4)), mu, nu)
    assert np.allclose(plan.sum(1), mu, atol=1e-9) and np.allclose(plan.sum(0), nu, atol=1e-9)
    assert plan.min() >= -1e-12


def test_support_cap():
    big = FiniteSupportDistribution(C1, [C1.empty()] * 1001, np.full(1001, 1 / 1001))
    with pytest.raises(ValueError):
        finite_support_d2p(big, big)


def test_symmetry_bounds_and_monotonicity():
    rng = np.random.default_rng(5)
    for _ in range(30):
        N = int(rng.integers(1, 8))
        A, B = SampleSet(C1, _pats(rng, N, 3)), SampleSet(C1, _pats(rng, N, 3))
        vals = [empirical_d2p(A, B, p) for p in (1.0, 1.5, 2.0, 3.0, INF)]
        assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
        assert all(0 <= v <= 1 for v in vals)
        assert empirical_d2p(B, A, 2.0) == pytest.approx(vals[2], abs=1e-12)


def test_dual_lower_bound():
    rng = np.random.default_rng(6)
    stats = [
        make_statistic("ustat_avg", C1, 1.0, make_kernel("K0")),
        make_statistic("ustat_centered", C1, 1.0, make_kernel("K1", 3)),
        make_statistic("nn_avg", C1, 1.0),
    ]
    const = Statistic("const", lambda xi: 0.5, 1.0, 1.0)
    A = SampleSet(C1, _pats(rng, 10, 4))
    assert dual_lower_bound(A, A, stats) == 0.0
    B = SampleSet(C1, _pats(rng, 10, 4))
    assert dual_lower_bound(A, B, [const]) == 0.0
    assert dual_lower_bound(A, B, stats) <= empirical_d2p(A, B, 1.0) + 1e-9
    with pytest.raises(ValueError):
        dual_lower_bound(A, B, [])
