from fractions import Fraction

import pytest

from newton_forge.models.cpwl_fn import CpwlFn
from newton_forge.models.polytope import Polytope
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import network as nw
from newton_forge.modules import synthesis
from newton_forge.utils.errors import ConversionError, DimensionMismatchError, NotIsotonicError
from newton_forge.utils.fixtures import random_points, random_polygon, random_positive_planar_function
from newton_forge.utils.import_export import import_function, import_polytope

V = RatVec.of


def shapes(parts):
    return sorted(part.shape for part in parts)


def test_decompose_square_into_two_segments(samples):
    square = import_polytope(samples / 'square.json')
    parts = synthesis.decompose_polygon(square)
    assert shapes(parts) == ['segment', 'segment']
    assert {part.polytope.vertices for part in parts} == {(V(0, 0), V(0, 1)), (V(0, 0), V(1, 0))}


def test_decompose_hexagon_into_three_segments(samples):
    hexagon = import_polytope(samples / 'hexagon.json')
    parts = synthesis.decompose_polygon(hexagon)
    assert shapes(parts) == ['segment'] * 3
    assert {part.polytope.vertices[1] for part in parts} == {V(1, 0), V(0, 1), V(1, 1)}
    assert synthesis.resum_parts(parts) == hexagon


def test_decompose_triangle_point_and_segment():
    triangle = gk.convex_hull([V(2, 1), V(4, 1), V(2, 5)], 2)
    parts = synthesis.decompose_polygon(triangle)
    assert shapes(parts) == ['triangle']
    assert parts[0].polytope == triangle.translate(V(-2, -1))
    assert synthesis.decomposition_offset(triangle, parts) == V(2, 1)

    assert synthesis.decompose_polygon(Polytope(2, (V(3, 3),))) == []
    segment = gk.convex_hull([V(1, 1), V(3, 2)], 2)
    assert shapes(synthesis.decompose_polygon(segment)) == ['segment']


def test_decompose_needs_the_plane():
    with pytest.raises(DimensionMismatchError):
        synthesis.decompose_polygon(synthesis.pyramid_fixture()[0])


def test_decomposition_resums_to_random_polygons(rng):
    for _ in range(20):
        polygon = random_polygon(rng)
        parts = synthesis.decompose_polygon(polygon)
        assert all(part.shape in ('segment', 'triangle') for part in parts)
        offset = synthesis.decomposition_offset(polygon, parts)
        assert synthesis.resum_parts(parts).translate(offset) == polygon


def test_synthesize_the_triangle_example(samples, rng):
    fn = import_function(samples / 'triangle_fn.json')
    net = synthesis.synthesize_depth2_planar(fn)
    assert net.kind == 'monotone'
    assert nw.validate(net) == []
    assert nw.depth(net) == 2
    # relu(x1 + relu(x2))
    for x in random_points(rng, 30, 2):
        x1, x2 = x.coords
        assert nw.eval_net(net, x) == max(x1 + max(x2, 0), 0)


def test_synthesize_random_isotonic_functions(rng):
    for _ in range(5):
        fn = random_positive_planar_function(rng)
        net = synthesis.synthesize_depth2_planar(fn)
        assert nw.depth(net) <= 2
        assert cpwl.newton_polytope(nw.network_function(net)) == cpwl.newton_polytope(fn)
        for x in random_points(rng, 10, 2):
            assert nw.eval_net(net, x) == cpwl.evaluate(fn, x)


def test_synthesize_rejects_max2_with_a_witness():
    with pytest.raises(NotIsotonicError) as info:
        synthesis.synthesize_depth2_planar(CpwlFn.max_n(2))
    witness = info.value.witness
    assert witness.x.leq(witness.y)


def test_synthesize_rejects_negative_vertices():
    with pytest.raises(ConversionError):
        synthesis.synthesize_depth2_planar(CpwlFn(2, (V(-1, 0), V(0, 0))))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_build_m_n(n, rng):
    net = synthesis.build_m_n(n)
    assert nw.depth(net) == n
    assert nw.validate(net) == []
    assert cpwl.newton_polytope(nw.network_function(net)) == cpwl.newton_polytope(CpwlFn.m_n(n))
    for x in random_points(rng, 10, n):
        assert nw.eval_net(net, x) == cpwl.evaluate(CpwlFn.m_n(n), x)


def test_polytope_icnn_for_the_pyramid():
    pyramid, fn = synthesis.pyramid_fixture()
    circuit = synthesis.build_polytope_icnn(pyramid)
    assert nw.validate_circuit(circuit) == []
    assert nw.depth_circuit(circuit) == 5
    assert synthesis.circuit_gate_counts(circuit)['add_point'] == 5
    assert nw.eval_circuit(circuit).result == pyramid
    assert cpwl.isotonic_check(fn)[0]


def test_polytope_icnn_for_a_point():
    point = Polytope(2, (V(1, 2),))
    circuit = synthesis.build_polytope_icnn(point)
    assert nw.depth_circuit(circuit) == 0
    assert nw.eval_circuit(circuit).result == point


def test_build_max_icnn(rng):
    circuit, net = synthesis.build_max_icnn(3)
    assert nw.depth_circuit(circuit) == 3
    assert nw.depth(net) == 3
    assert nw.check_kind(net, 'icnn') == []
    for x in random_points(rng, 20, 3):
        assert nw.eval_net(net, x) == max(x.coords)
    with pytest.raises(ConversionError):
        synthesis.build_max_icnn(1)


def test_restrict_m3_circuit_to_its_top_face():
    circuit = nw.net_to_circuit(synthesis.build_m_n(3))
    restricted = synthesis.restrict_circuit_to_face(circuit, V(0, 0, 1))
    assert nw.depth_circuit(restricted) <= nw.depth_circuit(circuit)
    expected = gk.convex_hull([g.extend(0) for g in CpwlFn.m_n(2).generators], 3)
    assert nw.eval_circuit(restricted).result == expected


def test_restrict_pyramid_circuit_to_its_apex():
    pyramid, _ = synthesis.pyramid_fixture()
    circuit = synthesis.build_polytope_icnn(pyramid)
    u = V(0, 0, 1)
    restricted = synthesis.restrict_circuit_to_face(circuit, u)
    face = gk.support_face(pyramid, u)
    projected = face.translate(u.scale(-Fraction(gk.support_value(pyramid, u))))
    assert nw.eval_circuit(restricted).result == projected


def test_edge_scaling_dimension(samples):
    assert synthesis.edge_scaling_dimension(synthesis.pyramid_fixture()[0]) == 1
    assert synthesis.edge_scaling_dimension(import_polytope(samples / 'square.json')) == 2
    assert synthesis.edge_scaling_dimension(gk.convex_hull([V(0, 0), V(1, 0), V(0, 1)], 2)) == 1


def test_monotone_source():
    pyramid, _ = synthesis.pyramid_fixture()
    assert synthesis.monotone_source(pyramid) == V(0, 0, 0)
    assert synthesis.monotone_source(gk.convex_hull([V(1, 0), V(0, 1)], 2)) is None
