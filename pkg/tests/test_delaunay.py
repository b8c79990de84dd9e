import itertools
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from niltile.complex import TilingError, TilingInstance, _Builder, square_tiling, strip_tiling
from niltile.delaunay import (
    DegenerateInputError,
    MeshError,
    MeshParams,
    NotDelaunayError,
    PointSet,
    ResourceCapError,
    check_net,
    delaunay_complex,
    find_stable_rho,
    flip_perturbation,
    interior_points,
    is_protected,
    perturb_until_generic,
    protection,
    random_perturbation,
    star_stability_check,
    theta_schedule,
    triangulate_collared_prototiles,
    unprotected_simplices,
)
from niltile.nilgroup import Group

SQUARE = [(0, 0), (1, 0), (0, 1), (1, 1)]


def numpy_empty_simplices(points, tol=1e-9):
    """Independent float oracle: every (d+1)-subset with an empty open circumball."""
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    combos = np.array(list(itertools.combinations(range(n), d + 1)))
    out = []
    for chunk in np.array_split(combos, max(1, len(combos) // 20000)):
        V = P[chunk]  # (m, d+1, d)
        A = 2 * (V[:, 1:, :] - V[:, :1, :])
        b = (V[:, 1:, :] ** 2).sum(-1) - (V[:, :1, :] ** 2).sum(-1)
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-12
        C = np.full((len(chunk), d), np.nan)
        C[ok] = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
        r2 = ((V[:, 0, :] - C) ** 2).sum(-1)
        D2 = ((P[None, :, :] - C[:, None, :]) ** 2).sum(-1)
        mask = np.ones_like(D2, dtype=bool)
        mask[np.arange(len(chunk))[:, None], chunk] = False
        inside = (D2 < r2[:, None] * (1 - tol)) & mask
        good = ok & ~inside.any(axis=1)
        out += [tuple(c) for c in chunk[good]]
    return set(out)


def oracle_protection(points, simplex):
    P = np.asarray(points, dtype=float)
    V = P[list(simplex)]
    A = 2 * (V[1:] - V[0])
    b = (V[1:] ** 2).sum(-1) - (V[0] ** 2).sum()
    c = np.linalg.solve(A, b)
    r = np.linalg.norm(V[0] - c)
    others = [i for i in range(len(P)) if i not in simplex]
    if not others:
        return math.inf
    return float(min(np.linalg.norm(P[others] - c, axis=1)) - r)


# --- Delaunay complexes ---------------------------------------------------

def test_single_triangle():
    res = delaunay_complex(PointSet([(0, 0), (1, 0), (0, 1)]))
    assert res.simplices == [(0, 1, 2)]
    assert not res.degenerate
    assert protection(res.points, (0, 1, 2)) == math.inf


def test_cocircular_square_flagged():
    ps = PointSet(SQUARE)
    res = delaunay_complex(ps)
    assert res.degenerate
    assert res.cospherical_groups == [frozenset(range(4))]
    # both diagonal choices are empty-circumball triangulations with zero protection
    assert len(res.empty_simplices) == 4
    for s in res.empty_simplices:
        assert protection(ps, s) == 0
    assert res.records[res.simplices[0]].circumradius == pytest.approx(math.sqrt(2) / 2)


def test_kite_two_triangles_share_base():
    res = delaunay_complex(PointSet([(0, 0), (2, 0), (1, 2), (1, -2)]))
    assert sorted(res.simplices) == [(0, 1, 2), (0, 1, 3)]
    brute = delaunay_complex(PointSet([(0, 0), (2, 0), (1, 2), (1, -2)]), brute_force=True)
    assert brute.simplices == res.simplices


def test_collinear_input_rejected():
    with pytest.raises(DegenerateInputError):
        delaunay_complex(PointSet([(0, 0), (1, 1), (2, 2), (3, 3)]))


def test_perturbed_lattice_protection_matches_oracle():
    pts = [(i, j) for i in range(3) for j in range(3)]
    pts[pts.index((1, 1))] = (1, F(11, 10))
    ps = PointSet(pts)
    res = delaunay_complex(ps)
    for s in res.simplices:
        if res.records[s].cospherical:
            continue
        assert protection(ps, s) == pytest.approx(oracle_protection(pts, s), abs=1e-9)


def test_protection_rejects_non_delaunay():
    ps = PointSet([(0, 0), (4, 0), (0, 4), (1, 1)])
    with pytest.raises(NotDelaunayError):
        protection(ps, (0, 1, 2))


@pytest.mark.parametrize("dim,count,seed", [(2, 50, s) for s in range(5)] + [(3, 40, s) for s in range(3)])
def test_delaunay_matches_numpy_oracle(dim, count, seed):
    rng = random.Random(seed)
    pts = [tuple(F(rng.randint(0, 10 ** 6), 10 ** 5) for _ in range(dim)) for _ in range(count)]
    res = delaunay_complex(PointSet(pts))
    assert not res.degenerate
    assert set(res.simplices) == numpy_empty_simplices(pts)
    assert res.complex.boundary_squares_vanish()


def test_exact_brute_force_agrees_on_small_set():
    rng = random.Random(7)
    pts = [(F(rng.randint(0, 999), 100), F(rng.randint(0, 999), 100)) for _ in range(14)]
    a = delaunay_complex(PointSet(pts))
    b = delaunay_complex(PointSet(pts), brute_force=True)
    assert a.simplices == b.simplices


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-40, 40), st.integers(-40, 40)), min_size=4, max_size=18, unique=True))
def test_every_simplex_has_empty_circumball(pts):
    ps = PointSet(pts)
    try:
        res = delaunay_complex(ps)
    except DegenerateInputError:
        return
    oracle = numpy_empty_simplices(pts)
    assert set(res.simplices) <= set(res.empty_simplices)
    if not res.degenerate:
        assert set(res.simplices) == oracle


# --- nets -----------------------------------------------------------------

def _lattice(n):
    return PointSet([(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1)])


def test_integer_lattice_is_a_net_at_three_quarters():
    rep = check_net(_lattice(4), F(4, 3), F(3, 4), [(-4, 4), (-4, 4)])
    assert rep.is_discrete and rep.is_dense
    assert rep.covering_estimate <= math.sqrt(2) / 2 + 1e-12


def test_integer_lattice_not_dense_at_half():
    rep = check_net(_lattice(4), 2, F(1, 2), [(-4, 4), (-4, 4)])
    assert rep.is_discrete
    assert not rep.is_dense
    wx, wy = rep.witnesses["density"]
    # witness sits at a cell centre
    assert (wx - 0.5) % 1 == pytest.approx(0) and (wy - 0.5) % 1 == pytest.approx(0)


def test_single_point_not_dense():
    rep = check_net(PointSet([(0, 0)]), 1, F(1, 2), [(-3, 3), (-3, 3)])
    assert not rep.is_dense


def test_discreteness_witness():
    rep = check_net(PointSet([(0, 0), (F(1, 10), 0), (3, 0)]), 1, F(1, 2), [(0, 3), (0, 0)])
    assert not rep.is_discrete
    assert set(rep.witnesses["discreteness"]) == {0, 1}


# --- perturbation -----------------------------------------------------------

def test_generic_set_left_alone():
    ps = PointSet([(0, 0), (3, 0), (1, 2), (F(7, 2), F(5, 2))])
    res = perturb_until_generic(ps, MeshParams(1, 1, F(1, 100), F(1, 10)))
    assert res.moved == set()
    assert res.points.points == ps.points


def test_cocircular_square_becomes_generic():
    mesh = MeshParams(1, F(1, 2), F(1, 100), F(1, 10))
    ps = PointSet(SQUARE)
    res = perturb_until_generic(ps, mesh, seed=3)
    out = res.points
    for p, q in zip(ps.points, out.points):
        assert math.dist([float(x) for x in p], [float(x) for x in q]) < 0.1
    final = delaunay_complex(out)
    assert not final.degenerate
    for s in final.simplices:
        assert is_protected(out, s, F(1, 100))
        assert oracle_protection(out.floats, s) >= 0.01


def test_lattice_patch_perturbation_moves_only_bad_points():
    ps = PointSet([(i, j) for i in range(5) for j in range(5)])
    mesh = MeshParams(1, 1, F(1, 200), F(1, 8))
    before = delaunay_complex(ps)
    bad0 = {v for s in unprotected_simplices(ps, before, mesh.delta) for v in s}
    res = perturb_until_generic(ps, mesh, seed=1)
    assert res.moved == res.visited_bad
    assert res.moved <= bad0
    for i, (p, q) in enumerate(zip(ps.points, res.points.points)):
        if i not in res.moved:
            assert p == q
        assert math.dist([float(x) for x in p], [float(x) for x in q]) < 1 / 8
    final = delaunay_complex(res.points)
    assert not unprotected_simplices(res.points, final, mesh.delta)


def test_rho_bound_enforced():
    with pytest.raises(MeshError):
        perturb_until_generic(PointSet(SQUARE), MeshParams(1, F(1, 10), 0, F(1, 2)))


# --- star stability -----------------------------------------------------------

def test_identity_is_star_stable():
    rng = random.Random(0)
    ps = PointSet([(F(rng.randint(0, 100), 10), F(rng.randint(0, 100), 10)) for _ in range(10)])
    assert star_stability_check(ps, ps, interior_points(ps), F(1, 10))


@pytest.mark.parametrize("seed", range(10))
def test_generic_sets_have_a_stable_rho(seed):
    rng = random.Random(seed)
    ps = PointSet([(F(rng.randint(0, 1000), 100), F(rng.randint(0, 1000), 100)) for _ in range(10)])
    E = interior_points(ps)
    rho, steps = find_stable_rho(ps, E, trials=100, seed=seed)
    assert rho > 0
    check = random.Random(seed + 100)
    for _ in range(20):
        assert star_stability_check(ps, random_perturbation(ps, rho, check), E, rho)


@pytest.mark.parametrize("rho", [F(1, 10), F(1, 1000), F(1, 10 ** 6)])
def test_diagonal_flip_breaks_square_star(rho):
    ps = PointSet(SQUARE)
    res = delaunay_complex(ps)
    flipped = flip_perturbation(ps, res, rho)
    assert not star_stability_check(ps, flipped, range(4), rho)


# --- collared prototiles -------------------------------------------------------

def test_theta_schedule_unit_square():
    th = theta_schedule([[(0, 0), (1, 0), (1, 1), (0, 1)]])
    assert th[0] == F(1, 4)
    assert float(th[1]) == pytest.approx(math.sqrt(2) / 16, rel=1e-6)
    assert float(th[1]) <= math.sqrt(2) / 16
    assert th[2] == th[1] / 2


def _u_shape_tiling():
    b = _Builder(2)
    u = [(0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2), (0, 2)]
    cap = [(0, 2), (1, 2), (2, 2), (3, 2), (3, 3), (0, 3)]
    for keys, label in ((u, "U"), (cap, "cap")):
        bd = [b.edge(keys[m], keys[(m + 1) % len(keys)]) for m in range(len(keys))]
        b.top(2, [b.vertex(k) for k in keys], bd, label)
    g = Group.euclidean(2)
    return b.build(g, lambda key: g.element(list(key)), "u-shape")


def test_disconnected_meeting_rejected():
    t = _u_shape_tiling()
    with pytest.raises(TilingError, match="disconnected"):
        triangulate_collared_prototiles(t, enforce_epsilon=False)


def test_epsilon_precondition():
    t = square_tiling(4, 4, triangulated=False)
    with pytest.raises(MeshError):
        triangulate_collared_prototiles(t, MeshParams(1, F(1, 100), F(1, 10 ** 5), F(1, 800)))


def test_strict_mesh_hits_resource_cap():
    with pytest.raises(ResourceCapError):
        triangulate_collared_prototiles(square_tiling(5, 5, triangulated=False))


def test_relaxed_square_triangulation_glues():
    eps = F(1, 100)
    t = square_tiling(4, 4, triangulated=False)
    res = triangulate_collared_prototiles(t, MeshParams(1, eps, eps / 1000, eps / 8),
                                          enforce_epsilon=False, r_factor=2)
    assert res.patch
    assert res.checks["safe_insides"]
    assert res.checks["collar_agreement"]
    assert res.checks["local_equals_global"]
    assert res.checks["union_generic"]


def test_two_rectangles_agree_on_shared_edge_collar():
    eps = F(1, 100)
    t = strip_tiling(6, 4, widths=(1, F(3, 2)))
    res = triangulate_collared_prototiles(t, MeshParams(1, eps, eps / 1000, eps / 8),
                                          enforce_epsilon=False, r_factor=2)
    assert len({t.labels[c] for c in res.patch}) == 2
    assert res.checks["collar_agreement"]
    assert res.checks["local_equals_global"]
