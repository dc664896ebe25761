import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppwass.ground import DiscreteAtoms, Torus, UnitCube, check_diameter, d0

coord = st.floats(0.0, 1.0, allow_nan=False)
tcoord = st.floats(0.0, 0.9999999, allow_nan=False)


def test_d0_examples():
    assert d0(UnitCube(1), [0.3], [0.3]) == 0.0
    assert d0(UnitCube(1), [0.0], [0.3]) == pytest.approx(0.3, abs=1e-15)
    assert d0(Torus(1), [0.1], [0.9]) == pytest.approx(0.2, abs=1e-15)


def test_cube_distance_is_capped():
    assert d0(UnitCube(2), [0, 0], [1, 1]) == 1.0


def test_check_diameter_examples():
    assert check_diameter(UnitCube(1)) == 1.0
    assert check_diameter(UnitCube(4)) == pytest.approx(2.0)
    table = np.array([[0, 0.7, 0.3], [0.7, 0, 0.5], [0.3, 0.5, 0]])
    assert check_diameter(DiscreteAtoms(np.zeros((3, 1)), table)) == pytest.approx(0.7)


def test_invalid_points_refused():
    with pytest.raises(ValueError):
        UnitCube(1).validate([[1.5]])
    with pytest.raises(ValueError):
        Torus(1).validate([[1.0]])
    with pytest.raises(ValueError):
        DiscreteAtoms(np.zeros((2, 1))).validate([2])


def test_discrete_table_validation():
    with pytest.raises(ValueError):
        DiscreteAtoms(np.zeros((2, 1)), np.array([[0, 0.5], [0.4, 0]]))
    with pytest.raises(ValueError):
        DiscreteAtoms(np.zeros((2, 1)), np.array([[0, 1.5], [1.5, 0]]))


def test_counts_round_trip():
    sp = DiscreteAtoms(np.random.default_rng(0).random((4, 2)))
    xi = np.array([3, 0, 3, 1])
    c = sp.to_counts(xi)
    assert c.tolist() == [1, 1, 0, 2]
    assert sorted(sp.from_counts(c).tolist()) == sorted(xi.tolist())


@pytest.mark.parametrize("space", [UnitCube(1), UnitCube(3), Torus(2), Torus(3)], ids=repr)
def test_metric_axioms_sampled(space):
    rng = np.random.default_rng(1)
    pts = rng.random((10_000, 3, space.dim))
    if space.kind == "torus":
        pts = np.minimum(pts, 0.999999)
    for x, y, z in pts[:2000]:
        dxy, dyx = d0(space, x, y), d0(space, y, x)
        assert dxy == dyx
        assert 0.0 <= dxy <= 1.0
        assert d0(space, x, z) <= dxy + d0(space, y, z) + 1e-12
    # vectorised over the full 10^4 triples
    X, Y, Z = pts[:, 0], pts[:, 1], pts[:, 2]
    dxy = np.array([space.pairwise(X[i : i + 1], Y[i : i + 1])[0, 0] for i in range(len(X))])
    dyz = np.array([space.pairwise(Y[i : i + 1], Z[i : i + 1])[0, 0] for i in range(len(X))])
    dxz = np.array([space.pairwise(X[i : i + 1], Z[i : i + 1])[0, 0] for i in range(len(X))])
    assert np.all(dxz <= dxy + dyz + 1e-12)


@given(st.lists(tcoord, min_size=2, max_size=2), st.lists(tcoord, min_size=2, max_size=2))
def test_torus_matches_brute_force_over_images(x, y):
    # oracle: minimum Euclidean distance over all integer translates
    best = min(
        math.dist(x, [y[0] + a, y[1] + b]) for a in (-1, 0, 1) for b in (-1, 0, 1)
    )
    assert d0(Torus(2), x, y) == pytest.approx(min(best, 1.0), abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 1))
def test_cube_identity_and_symmetry(a, b):
    sp = UnitCube(1)
    assert d0(sp, [a], [a]) == 0.0
    assert d0(sp, [a], [b]) == d0(sp, [b], [a])
