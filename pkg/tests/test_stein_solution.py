import math

import numpy as np
import pytest
from scipy.linalg import solve_banded
from scipy.stats import poisson

from ppwass.ground import DiscreteAtoms, UnitCube
from ppwass.metrics import INF
from ppwass.processes import ContinuousIntensity, DiscreteIntensity
from ppwass.stein import c1, c2
from ppwass.verify.lipschitz import PairGenerator
from ppwass.verify.stein_solution import (
    StateLattice,
    delta_bounds_scan,
    estimate_h,
    estimate_h_batch,
    estimate_po_f,
    exact_h_discrete,
    lattice_delta_scan,
    lattice_pairs,
    lattice_scan_states,
    scan_limits,
    stein_residual,
    tail_rule_cap,
)
from ppwass.verify.testfunctions import (
    constant_test_function,
    make_distance_test_function,
    membership_ratio,
)

SP2 = DiscreteAtoms(np.array([[0.2], [0.7]]))
SPEC2 = DiscreteIntensity(SP2, [0.6, 0.9])
SP3 = DiscreteAtoms(np.array([[0.1, 0.2], [0.5, 0.9], [0.8, 0.3]]))


def test_tail_rule():
    assert tail_rule_cap(1.5) == math.ceil(1.5 + 10 * math.sqrt(1.5) + 10)
    for m in (0.2, 1.5, 4.0):
        assert poisson.sf(tail_rule_cap(m), m) < 1e-10


def test_distance_test_function():
    xi0 = np.array([0, 1])
    f = make_distance_test_function(SP2, xi0, 1.0)
    assert f(xi0) == 0.0
    assert f(np.array([0])) == 1.0 and f(np.array([0, 1, 1])) == 1.0
    pairs = [PairGenerator(SP3, max_size=4)(np.random.default_rng(k)) for k in range(10_000)]
    for p in (1.0, 2.0, INF):
        g = make_distance_test_function(SP3, np.array([0, 2, 2]), p)
        assert membership_ratio(g, pairs) <= 1 + 1e-12
    g = make_distance_test_function(SP3, np.array([1]), 2.0, complement=True)
    states = np.array([[0, 1, 0], [1, 1, 0], [0, 0, 0]])
    assert np.allclose(g.on_counts(states), [g(SP3.from_counts(c)) for c in states])


def test_po_f():
    f = constant_test_function(SP2, 0.37)
    # exact mode sums over the truncated lattice, so mass is short by the tail
    val, se = estimate_po_f(f, SPEC2, exact=True)
    assert se == 0.0 and abs(val - 0.37) < 1e-10
    g = make_distance_test_function(SP2, np.array([1]), 1.0)
    assert estimate_po_f(g, DiscreteIntensity(SP2, [0, 0]), 10)[0] == g(SP2.empty())
    exact, _ = estimate_po_f(g, SPEC2, exact=True)
    mc, se = estimate_po_f(g, SPEC2, 20_000, seed=1)
    assert abs(mc - exact) <= 3 * se
    with pytest.raises(ValueError):
        estimate_po_f(g, DiscreteIntensity(SP2, [3.0, 3.0]), exact=True)


def test_constant_f_gives_zero_h():
    f = constant_test_function(SP3, 0.8)
    spec = DiscreteIntensity(SP3, [0.5, 0.5, 0.5])
    t = exact_h_discrete(f, spec)
    assert np.abs(t.h).max() < 1e-12
    xi = np.array([0, 2])
    assert stein_residual(f, spec, xi, table=t) < 1e-12
    est = estimate_h(f, SPEC2, np.array([1, 1]), n_mc=50, seed=0)
    assert est.value == 0.0 and est.stderr == 0.0
    # common random numbers: the batch differences are exactly zero
    est = estimate_h_batch(f, SPEC2, [SP2.empty(), np.array([0]), np.array([0, 1])], n_mc=30, seed=1)
    assert [e.value for e in est] == [0.0, 0.0, 0.0]


def one_atom_oracle(fvals, lam, cap):
    """Tridiagonal solve of the birth-death Stein equation on {0..cap}, then pi(h) = 0."""
    k = np.arange(cap + 1)
    pi = poisson.pmf(k, lam)
    pi /= pi.sum()
    rhs = fvals - pi @ fvals
    birth = np.where(k < cap, lam, 0.0)
    death = k.astype(float)
    diag = -(birth + death)
    ab = np.zeros((3, cap + 1))
    ab[0, 1:] = birth[:-1]
    ab[1] = diag
    ab[2, :-1] = death[1:]
    # pin h(0) = 0 by replacing the first equation
    ab[1, 0], ab[0, 1] = 1.0, 0.0
    rhs = rhs.copy()
    rhs[0] = 0.0
    h = solve_banded((1, 1), ab, rhs)
    return h - pi @ h


@pytest.mark.parametrize("lam", [0.5, 1.5, 4.0])
def test_single_atom_matches_tridiagonal_oracle(lam):
    sp = DiscreteAtoms(np.array([[0.4]]))
    spec = DiscreteIntensity(sp, [lam])
    f = make_distance_test_function(sp, np.array([0, 0]), 1.0, complement=True)
    t = exact_h_discrete(f, spec)
    ref = one_atom_oracle(t.f_values, lam, t.lattice.caps[0])
    assert np.allclose(t.h, ref, atol=1e-10)
    # summation identity: lam pi_k (h(k+1) - h(k)) = sum_{j<=k} pi_j (f(j) - pi f)
    k = np.arange(t.lattice.caps[0])
    pi = t.lattice.pi
    lhs = lam * pi[k] * np.diff(t.h)
    rhs = np.cumsum(pi * (t.f_values - t.po_f))[k]
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("lam", [0.5, 1.5, 4.0])
def test_exact_residuals_three_atoms(lam):
    spec = DiscreteIntensity(SP3, np.array([0.2, 0.3, 0.5]) * lam)
    lat = StateLattice(spec)
    assert lat.caps == tuple(tail_rule_cap(m) for m in spec.masses)
    rng = np.random.default_rng(0)
    for _ in range(3):
        f = make_distance_test_function(SP3, rng.integers(0, 3, 3), 2.0)
        t = exact_h_discrete(f, spec, lattice=lat)
        assert t.residuals().max() < 1e-8
        assert abs(lat.pi @ t.h) < 1e-12
        for xi in (SP3.empty(), np.array([0, 1, 1, 2])):
            assert stein_residual(f, spec, xi, table=t) < 1e-8


def test_lattice_refusals():
    with pytest.raises(ValueError):
        StateLattice(DiscreteIntensity(DiscreteAtoms(np.random.default_rng(0).random((4, 1))), [1, 1, 1, 1]))
    with pytest.raises(ValueError):
        stein_residual(None, ContinuousIntensity(UnitCube(1), 1.0), np.zeros((0, 1)))
    t = exact_h_discrete(constant_test_function(SP2, 0.5), SPEC2)
    with pytest.raises(ValueError):
        t.at_counts([100, 0])


def test_mc_h_agrees_with_exact():
    spec = DiscreteIntensity(SP2, [0.6, 0.9])  # lambda = 1.5
    f = make_distance_test_function(SP2, np.array([0, 1]), 1.0)
    t = exact_h_discrete(f, spec)
    xs = [SP2.empty(), np.array([0]), np.array([0, 1]), np.array([1, 1, 1])]
    est = estimate_h_batch(f, spec, xs, n_mc=3000, seed=21)
    for e, xi in zip(est, xs):
        assert abs(e.value - t(xi)) <= 3 * e.stderr
        assert e.stderr >= 0
        assert e.meta["truncation_scale"] == pytest.approx(1.5 * math.exp(-20))
        assert e.meta["n_nodes"] == 256 and e.meta["T"] == 20


def test_mc_residual():
    f = make_distance_test_function(SP2, np.array([0, 1]), 1.0)
    resid, se = stein_residual(f, SPEC2, np.array([0, 1]), h_source="mc", n_mc=2000, seed=3)
    assert resid <= 4 * se


def test_scan_constant_function_is_zero():
    f = constant_test_function(SP3, 0.4)
    spec = DiscreteIntensity(SP3, [0.5, 0.5, 0.5])
    t = exact_h_discrete(f, spec)
    lim = scan_limits(t.lattice)
    s = lattice_delta_scan(t, lim, lattice_pairs(lim, 50, 0))
    assert s.max_abs_dh < 1e-12 and s.max_abs_d2h < 1e-12 and s.max_lip3_ratio < 1e-12


def test_lattice_scan_matches_generic_scan():
    spec = DiscreteIntensity(SP3, [0.5, 0.4, 0.6])
    f = make_distance_test_function(SP3, np.array([0, 1, 1]), 2.0)
    t = exact_h_discrete(f, spec)
    lim = (3, 3, 3)
    pairs = lattice_pairs(lim, 80, 4)
    a = lattice_delta_scan(t, lim, pairs)
    states = lattice_scan_states(t.lattice, lim)
    b = delta_bounds_scan(t, SP3, states, [(SP3.from_counts(x), SP3.from_counts(y), z) for x, y in pairs for z in range(3)])
    assert a.max_abs_dh == pytest.approx(b.max_abs_dh, abs=1e-14)
    assert a.max_abs_d2h == pytest.approx(b.max_abs_d2h, abs=1e-14)
    assert a.max_lip3_ratio == pytest.approx(b.max_lip3_ratio, abs=1e-14)


def test_scan_three_atoms_p2():
    spec = DiscreteIntensity(SP3, [0.5, 0.5, 0.5])  # lambda = 1.5
    lat = StateLattice(spec)
    lim = scan_limits(lat)
    pairs = lattice_pairs(lim, 300, 5)
    rng = np.random.default_rng(6)
    for p in (2.0, INF):
        for _ in range(4):
            f = make_distance_test_function(SP3, rng.integers(0, 3, int(rng.integers(0, 5))), p)
            s = lattice_delta_scan(exact_h_discrete(f, spec, lattice=lat), lim, pairs)
            assert s.max_abs_dh <= c1(p, 1.5) + 1e-8
            assert s.max_abs_d2h <= c2(p, 1.5) + 1e-8
            assert s.max_lip3_ratio <= c2(p, 1.5) + 1e-8


def test_scan_limits_stay_inside_caps():
    lat = StateLattice(DiscreteIntensity(SP3, [4.0, 0.1, 1.0]))
    with pytest.raises(ValueError):
        lattice_delta_scan(exact_h_discrete(constant_test_function(SP3, 0.1), lat.spec, lattice=lat), lat.caps, [])
    assert all(l + 2 <= c for l, c in zip(scan_limits(lat), lat.caps))
