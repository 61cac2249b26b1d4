import numpy as np
import pytest

from invclust.lp import OPTIMAL, solve_lp
from invclust.model import Dataset, Dmp, distance
from invclust.oracle import (
    SizeGuard, bf_instability, bf_sc, enum_vertices, nearest_vertex_distance,
)
from tests.conftest import box_dmp, random_dataset


def test_unit_square_vertices():
    vs = enum_vertices(box_dmp(1.0, 1.0))
    assert len(vs) == 4
    got = sorted(tuple(np.round(v, 9)) for v in vs.vertices)
    assert got == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]


def test_dm3_box_vertices(example1):
    vs = enum_vertices(example1.dmps[2])
    got = sorted(tuple(np.round(v, 9)) for v in vs.vertices)
    assert got == [(0.0, 0.0), (0.0, 2.5), (2.5, 0.0), (2.5, 2.5)]


def test_triangle_vertices():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [-0.5, -0.5]])
    dmp = Dmp(A=A, b=[0.0, 0.0, -0.5])
    vs = enum_vertices(dmp)
    assert len(vs) == 3


def test_degenerate_vertex_multiple_active_sets():
    # square plus the diagonal through (1,1): the corner has three tight rows
    A = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0],
                  [-0.5, -0.5]])
    dmp = Dmp(A=A, b=[-1.0, -1.0, 0.0, 0.0, -1.0])
    vs = enum_vertices(dmp)
    corner = [sets for v, sets in zip(vs.vertices, vs.active_sets)
              if np.allclose(v, [1.0, 1.0])]
    assert corner and len(corner[0]) == 3  # rows {0,1},{0,4},{1,4}


def test_size_guard():
    dmp = Dmp(A=np.eye(7), b=np.zeros(7))
    with pytest.raises(SizeGuard):
        enum_vertices(dmp)


def test_bf_instability_dm1_far_face(example1):
    # min-form c=(0,-1): argmin face is the edge x2=1, worst point (0,1)
    val = bf_instability(example1.dmps[0], example1.x_hats[0],
                         np.array([0.0, -1.0]), "linf")
    assert val == pytest.approx(1.2, abs=1e-9)


def test_bf_instability_strict_vertex(example1):
    val = bf_instability(example1.dmps[1], example1.x_hats[1],
                         np.array([-0.5, -0.5]), "linf")
    assert val == pytest.approx(0.4, abs=1e-9)


def test_bf_instability_dm3(example1):
    val = bf_instability(example1.dmps[2], example1.x_hats[2],
                         np.array([-1.0, 0.0]), "linf")
    assert val == pytest.approx(2.2, abs=1e-9)


def test_nearest_vertex_distances_example1(example1):
    dists = [nearest_vertex_distance(dmp, x_hat, "linf")
             for dmp, x_hat in example1.items()]
    np.testing.assert_allclose(dists, [0.3, 0.4, 0.3], atol=1e-9)


def test_bf_sc_example1_both_semantics(example1):
    # the optimal value is 0.4 under both semantics; the grouping {1,2},{3}
    # is unique only once the strict-cone floor rules out facet cost vectors
    lb = bf_sc(example1, L=2, norm="linf", alpha=None)
    assert lb.feasible
    assert lb.objective == pytest.approx(0.4, abs=1e-9)
    ub = bf_sc(example1, L=2, norm="linf", alpha=0.05)
    assert ub.feasible
    assert ub.objective == pytest.approx(0.4, abs=1e-9)
    assert ub.assignment.tolist() == [0, 0, 1]


def test_bf_sc_singletons_equal_nearest_vertices(example1):
    res = bf_sc(example1, L=3, norm="linf", alpha=0.05)
    assert res.objective == pytest.approx(0.4, abs=1e-9)  # max of {0.3,0.4,0.3}


def test_bf_sc_alpha_restricts():
    ds = random_dataset(seed=2, n=2, m=5, K=3)
    lb = bf_sc(ds, L=2, norm="linf", alpha=None)
    ub = bf_sc(ds, L=2, norm="linf", alpha=0.05)
    assert lb.feasible
    assert ub.objective >= lb.objective - 1e-9


def test_bf_sc_large_alpha_infeasible():
    square = Dataset(dmps=[box_dmp(1.0, 1.0)], x_hats=np.array([[0.5, 0.5]]))
    res = bf_sc(square, L=1, norm="linf", alpha=0.99)
    # every corner cone needs lam >= 0.99 twice, so the L1 norm exceeds 1
    assert not res.feasible


def test_bf_sc_guards(example1):
    with pytest.raises(SizeGuard):
        bf_sc(random_dataset(seed=1, n=2, m=5, K=9), L=2, norm="linf")
    with pytest.raises(SizeGuard):
        bf_sc(example1, L=4, norm="linf")


def test_simplex_matches_vertex_enumeration_random():
    rng = np.random.default_rng(1234)
    checked = 0
    for trial in range(60):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(n + 1, 9))
        A = np.vstack([rng.normal(size=(m, n)), np.eye(n), -np.eye(n)])
        x0 = rng.uniform(-2, 2, size=n)
        b = np.concatenate([A[:m] @ x0 - rng.uniform(0.1, 2.0, size=m),
                            np.full(2 * n, -6.0)])
        dmp = Dmp(A=A, b=b)
        c = rng.normal(size=n)
        sol = solve_lp(dmp.lp(c))
        assert sol.status == OPTIMAL
        vs = enum_vertices(dmp)
        best = min(float(c @ v) for v in vs.vertices)
        assert sol.objective == pytest.approx(best, abs=1e-6)
        checked += 1
    assert checked == 60
