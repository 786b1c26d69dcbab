from fractions import Fraction

import networkx as nx
import pytest

from newton_forge.models.circuit import PointGate, PolytopeCircuit
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import lattice_game as lg
from newton_forge.modules import network as nw
from newton_forge.modules import synthesis
from newton_forge.utils.errors import CertificateError, GameError, SizeGuardError


@pytest.fixture(scope='module')
def ball1():
    return lg.build_ball(1)


@pytest.fixture(scope='module')
def ball2():
    return lg.build_ball(2)


@pytest.mark.parametrize("r", [0, 1, 2, 3, 5])
def test_ball_counts(r):
    ball = lg.build_ball(r)
    assert ball.vertex_count == 3 * r * r + 3 * r + 1
    assert len(ball.edges) == 9 * r * r + 3 * r
    assert len(ball.triangles) == 6 * r * r


def test_negative_radius():
    with pytest.raises(GameError):
        lg.build_ball(-1)


def test_three_connectivity(ball1, ball2):
    assert lg.check_3_connected(ball1)
    assert lg.check_3_connected(ball2)
    assert not lg.check_3_connected(nx.path_graph(5))
    assert not lg.check_3_connected(nx.complete_graph(3))


@pytest.mark.parametrize("r", [1, 2])
def test_realization_is_certified(r):
    ball = lg.build_ball(r)
    realization = lg.realize_polytope(ball)
    assert realization.certified
    assert realization.failures == ()
    assert realization.slope == Fraction(7, 8)
    assert realization.polytope.vertex_count == ball.vertex_count
    assert len(realization.normals) == len(ball.triangles)


def test_realization_needs_a_positive_radius():
    with pytest.raises(GameError):
        lg.realize_polytope(lg.build_ball(0))


def test_triangle_set_boundary_and_components(ball2):
    origin = (0, 0)
    assert len(lg.triangle_set(ball2, [origin])) == 6
    assert len(lg.triangle_set(ball2, [])) == 0
    assert len(lg.boundary(ball2, [origin])) == 6
    assert lg.boundary(ball2, ball2.vertices) == frozenset()

    ring = ball2.vertex_set - ball2.closed_neighborhood([origin])
    assert len(lg.connected_components(ball2, ring)) == 1
    assert lg.component_split_check(ball2, ball2.vertices, origin) == 1
    with pytest.raises(GameError):
        lg.boundary(ball2, [(7, 7)])


def test_component_split_never_exceeds_six(ball2):
    for q in ball2.vertices:
        assert lg.component_split_check(ball2, ball2.vertices, q) <= 6


def test_optimal_costs(ball1, ball2):
    assert lg.optimal_cost(ball1) == 1
    assert lg.optimal_cost(ball2) >= 2
    assert lg.optimal_cost(ball2, vertices=[(0, 0)]) == 1
    assert lg.optimal_cost(ball2, vertices=[]) == 0
    with pytest.raises(SizeGuardError):
        lg.optimal_cost(ball2, limit=5)


def test_optimal_strategy_play_matches_cost(ball2):
    tree = lg.play(ball2, lg.optimal_strategy(ball2))
    assert tree.strategy == 'optimal'
    assert tree.cost == lg.optimal_cost(ball2)


def test_play_rejects_white_selections(ball1):
    def outside(ball, region, path):
        return (5, 5)

    with pytest.raises(GameError):
        lg.play(ball1, outside)


@pytest.mark.parametrize("r", [1, 2, 4, 6])
def test_separator_stays_linear(r, config):
    ball = lg.build_ball(r)
    tree = lg.play(ball, lg.separator_strategy(ball))
    assert tree.cost <= config['lattice']['separator_constant'] * r
    assert tree.max_branching <= 6


def test_greedy_play_on_small_balls():
    for r in (1, 2, 3):
        tree = lg.play(lg.build_ball(r), lg.greedy_strategy())
        assert tree.cost >= 1
        assert tree.selection_count >= 1


def test_exhaustive_isoperimetry(ball1, ball2):
    report = lg.isoperimetry_scan(ball2)
    assert report.mode == 'exhaustive'
    assert report.min_boundary == 1
    assert report.min_ratio == Fraction(1, 2)
    assert len(lg.boundary(ball2, report.witness)) == report.min_boundary

    report = lg.exhaustive_isoperimetry(ball1)
    assert (report.min_boundary, report.min_ratio) == (1, 1)


def test_exhaustive_isoperimetry_refuses_large_balls():
    with pytest.raises(SizeGuardError):
        lg.exhaustive_isoperimetry(lg.build_ball(3))


def test_sampled_isoperimetry(ball2, rng):
    report = lg.isoperimetry_scan(ball2, mode='sampled', rng=rng, samples=50)
    assert report.mode == 'sampled'
    assert report.scanned == 50
    assert report.min_boundary >= lg.exhaustive_isoperimetry(ball2).min_boundary
    with pytest.raises(GameError):
        lg.isoperimetry_scan(ball2, mode='sampled')
    with pytest.raises(GameError):
        lg.isoperimetry_scan(ball2, mode='annealed', rng=rng)


def test_random_connected_set_is_connected(ball2, rng):
    for size in (1, 4, 9):
        chosen = lg.random_connected_set(ball2, rng, size)
        assert len(chosen) == size
        assert len(lg.connected_components(ball2, chosen)) == 1


def test_extracted_strategy_is_no_deeper_than_the_circuit(ball1):
    realization = lg.realize_polytope(ball1)
    circuit = synthesis.build_polytope_icnn(realization.polytope)
    tree = lg.extract_strategy_from_circuit(circuit, ball1, realization=realization)
    assert tree.cost <= nw.depth_circuit(circuit)
    assert tree.strategy == 'circuit'


def test_truncated_circuit_fails_the_certificate(ball1):
    realization = lg.realize_polytope(ball1)
    truncated = gk.convex_hull(realization.polytope.vertices[:-1], 3)
    circuit = synthesis.build_polytope_icnn(truncated)
    with pytest.raises(CertificateError):
        lg.extract_strategy_from_circuit(circuit, ball1, realization=realization)


def test_chain_embedding_of_the_realization_is_the_identity(ball1):
    realization = lg.realize_polytope(ball1)
    chain = lg.triangle_set(ball1, ball1.vertices)
    assert lg.chain_embedding(realization.polytope, chain, realization) == (1, RatVec.zero(3))


def test_white_chain_vertex_selects_a_black_neighbour(ball1):
    realization = lg.realize_polytope(ball1)
    circuit = synthesis.build_polytope_icnn(realization.polytope)
    region = [(-1, 0), (-1, 1), (0, -1)]
    tree = lg.extract_strategy_from_circuit(circuit, ball1, vertices=region, realization=realization)
    assert tree.cost == 2
    assert tree.root.selected == (-1, 1)
    (child,) = tree.root.children
    assert child.region == ((0, -1),)
    assert child.selected == (0, -1)
    assert child.path == ((-1, 1),)


def test_extracted_selections_are_black_and_within_depth(ball1):
    realization = lg.realize_polytope(ball1)
    circuit = synthesis.build_polytope_icnn(realization.polytope)
    tree = lg.extract_strategy_from_circuit(circuit, ball1, realization=realization)
    for node in tree.nodes():
        if not node.is_leaf:
            assert node.selected in node.region
    assert 1 <= tree.cost <= nw.depth_circuit(circuit)


def test_single_vertex_needs_an_add_point_gate(ball1):
    realization = lg.realize_polytope(ball1)
    point = PolytopeCircuit(3, (PointGate(realization.lifted[(0, 0)]),), 0, 'icnn')
    with pytest.raises(CertificateError):
        lg.extract_strategy_from_circuit(point, ball1, vertices=[(0, 0)], realization=realization)
    assert lg.extract_strategy_from_circuit(point, ball1, vertices=[], realization=realization).cost == 0


def test_tree_counters_are_integers():
    tree = lg.play(lg.build_ball(3), lg.separator_strategy())
    assert isinstance(tree.selection_count, int)
    assert isinstance(tree.max_branching, int)
    assert tree.to_dict()['selections'] == tree.selection_count
