from fractions import Fraction

import pytest

from newton_forge.models.cpwl_fn import CpwlFn
from newton_forge.models.polytope import Polytope
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules.synthesis import pyramid_fixture
from newton_forge.utils.errors import (
    DimensionMismatchError,
    EmptyInputError,
    FaceDataUnavailableError,
    ZeroDirectionError,
)
from newton_forge.utils.fixtures import random_points


def V(*coords):
    return RatVec.of(*coords)


def square():
    return gk.convex_hull([V(0, 0), V(1, 0), V(0, 1), V(1, 1)], 2)


def test_hull_drops_interior_point():
    hull = gk.convex_hull([V(0, 0), V(1, 0), V(0, 1), V(1, 1), V("1/2", "1/2")], 2)
    assert hull.vertices == (V(0, 0), V(0, 1), V(1, 0), V(1, 1))


def test_hull_of_a_point_and_of_collinear_points():
    assert gk.convex_hull([V(0, 0, 0)], 3).is_point()
    segment = gk.convex_hull([V(0, 0), V(2, 2), V(1, 1), V(3, 3)], 2)
    assert segment.vertices == (V(0, 0), V(3, 3))


def test_hull_errors():
    with pytest.raises(EmptyInputError):
        gk.convex_hull([], 2)
    with pytest.raises(DimensionMismatchError):
        gk.convex_hull([V(0, 0), V(0, 0, 0)])


def test_hull_matches_brute_force_extremality(rng):
    for dim in (1, 2, 3):
        for _ in range(5):
            points = random_points(rng, 20, dim, 0, 1)
            unique = sorted(set(points), key=lambda v: v.coords)
            brute = {unique[i] for i in gk.extreme_points_lp([v.coords for v in unique])}
            assert set(gk.convex_hull(points, dim).vertices) == brute


def test_hull_is_idempotent_and_order_independent(rng):
    points = random_points(rng, 15, 3)
    hull = gk.convex_hull(points, 3)
    assert gk.convex_hull(hull.vertices, 3) == hull
    assert gk.convex_hull(list(reversed(points)), 3) == hull


def test_cube_face_lattice():
    cube = gk.convex_hull([V(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)], 3)
    assert cube.vertex_count == 8
    assert len(cube.faces.edges) == 12
    assert len(cube.faces.two_faces) == 6
    assert all(len(face) == 4 for face in cube.faces.two_faces)


def test_face_data_unavailable_above_three_dimensions():
    simplex = gk.convex_hull([RatVec.unit(4, i) for i in range(4)], 4)
    assert simplex.faces is None
    with pytest.raises(FaceDataUnavailableError):
        gk.positive_edges(simplex)


def test_minkowski_sum_of_axis_segments():
    e1 = gk.convex_hull([V(0, 0), V(1, 0)], 2)
    e2 = gk.convex_hull([V(0, 0), V(0, 1)], 2)
    assert gk.minkowski_sum(e1, e2) == square()


def test_minkowski_sum_with_a_point_translates():
    point = Polytope(2, (V(2, -1),))
    assert gk.minkowski_sum(square(), point) == square().translate(V(2, -1))


def test_support_additivity_and_face_additivity(rng, config):
    P = gk.convex_hull(random_points(rng, 8, 3), 3)
    Q = gk.convex_hull(random_points(rng, 8, 3), 3)
    total = gk.minkowski_sum(P, Q)
    for u in random_points(rng, config['sampling']['support_directions'], 3):
        if u.is_zero():
            continue
        assert gk.support_value(total, u) == gk.support_value(P, u) + gk.support_value(Q, u)
        assert gk.support_face(total, u) == gk.minkowski_sum(gk.support_face(P, u), gk.support_face(Q, u))


def test_support_value_examples():
    assert gk.support_value(square(), V(1, 1)) == 2
    assert gk.support_value(square(), V(3, 0)) == 3 * gk.support_value(square(), V(1, 0))
    with pytest.raises(ZeroDirectionError):
        gk.support_value(square(), V(0, 0))


def test_support_face_of_pyramid_apex():
    pyramid, _ = pyramid_fixture()
    assert gk.support_face(pyramid, V(0, 0, 1)).vertices == (V(1, 1, 1),)
    base = gk.support_face(pyramid, V(0, 0, -1))
    assert base.vertex_count == 4


def test_positive_edges_failure_on_max2():
    segment = gk.convex_hull([V(1, 0), V(0, 1)], 2)
    ok, witness = gk.positive_edges(segment)
    assert not ok
    assert witness.direction.sign_pattern() == 'mixed'
    assert set(witness.direction.coords) == {1, -1}


def test_positive_edges_of_orthoscheme_and_pyramid():
    polytope = gk.convex_hull(CpwlFn.m_n(3).generators, 3)
    ok, oriented = gk.positive_edges(polytope)
    assert ok
    chain = [(V(0, 0, 0), V(0, 0, 1)), (V(0, 0, 1), V(0, 1, 1)), (V(0, 1, 1), V(1, 1, 1))]
    assert all(edge in oriented.edges for edge in chain)
    assert len(oriented) == 6
    assert all((head - tail).is_nonnegative() for tail, head in oriented.edges)
    assert gk.positive_edges(pyramid_fixture()[0])[0]


def test_point_has_positive_edges():
    ok, oriented = gk.positive_edges(Polytope(2, (V(1, 1),)))
    assert ok and len(oriented) == 0


def test_conv_with_point():
    base = gk.convex_hull([V(0, 0, 0), V(1, 0, 0), V(0, 1, 0), V(1, 1, 0)], 3)
    assert gk.conv_with_point(base, V(1, 1, 1)) == pyramid_fixture()[0]
    assert gk.conv_with_point(square(), V("1/2", "1/3")) == square()


def test_add_point_by_three_operations(rng):
    for _ in range(5):
        P = gk.convex_hull(random_points(rng, 6, 2), 2)
        q = random_points(rng, 1, 2)[0]
        shifted = gk.conv_with_point(P.translate(-q), RatVec.zero(2))
        assert gk.conv_with_point(P, q) == shifted.translate(q)


def test_homothetic():
    Q = gk.convex_hull([V(0, 0), V(2, 1), V(1, 3)], 2)
    P = Q.scale(2).translate(V(1, 1))
    assert gk.homothetic(P, Q) == (Fraction(2), V(1, 1))
    other = gk.convex_hull([V(0, 0), V(1, 0), V(0, 1)], 2)
    assert gk.homothetic(other, Q) is None
    assert gk.homothetic(Polytope(2, (V(5, 5),)), Q) == (Fraction(0), V(5, 5))


def test_polytope_json_round_trip():
    pyramid, _ = pyramid_fixture()
    assert Polytope.from_dict(pyramid.to_dict()) == pyramid
    assert pyramid.to_dict()['vertices'][0] == ['0', '0', '0']
