"""Fixture builders shared by the verification suites, the CLI and the tests."""
from fractions import Fraction

from newton_forge.models.cpwl_fn import AffineMax, CpwlFn
from newton_forge.models.network import NetworkBuilder
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import network as nw
from newton_forge.modules import synthesis
from newton_forge.utils.config import load_config
from newton_forge.utils.sampling import random_coords, random_rational


def random_points(rng, count, dim, low=-5, high=5, denominator=None):
    return [RatVec(tuple(random_coords(rng, dim, low, high, denominator))) for _ in range(count)]


def random_polygon(rng, max_vertices=12, low=-5, high=5):
    """Hull of random points, retried until it is a genuine polygon."""
    while True:
        count = int(rng.integers(3, max_vertices + 1))
        polygon = gk.convex_hull(random_points(rng, count, 2, low, high), 2)
        if polygon.vertex_count >= 3:
            return polygon


def random_triangle(rng, low=-5, high=5):
    while True:
        triangle = gk.convex_hull(random_points(rng, 3, 2, low, high), 2)
        if triangle.vertex_count == 3:
            return triangle


def random_positive_vector(rng, dim, high=3):
    """A nonzero vector with non-negative coordinates."""
    while True:
        vector = RatVec(tuple(random_rational(rng, 0, high) for _ in range(dim)))
        if not vector.is_zero():
            return vector


def random_positive_polytope(rng, dim, count, high=3):
    """Hull of random points in the non-negative orthant."""
    return gk.convex_hull([RatVec(tuple(random_rational(rng, 0, high) for _ in range(dim)))
                           for _ in range(count)], dim)


def random_positive_planar_function(rng, segments=3, triangles=2):
    """
    A planar isotonic function: the support function of a sum of positive
    segments [0, w] and triangles conv{0, v2, v3} with 0 <= v2 <= v3, shifted by s >= 0.

    Returns:
        CpwlFn: The support function of the sum.
    """
    pieces = []
    for _ in range(segments):
        pieces.append(gk.convex_hull([RatVec.zero(2), random_positive_vector(rng, 2)], 2))
    for _ in range(triangles):
        v2 = random_positive_vector(rng, 2)
        v3 = v2 + random_positive_vector(rng, 2)
        pieces.append(gk.convex_hull([RatVec.zero(2), v2, v3], 2))
    shift = RatVec(tuple(random_rational(rng, 0, 2) for _ in range(2)))
    total = gk.minkowski_combination([(Fraction(1), piece) for piece in pieces], 2).translate(shift)
    return cpwl.from_polytope(total)


def duality_fixtures(rng, random_count=4):
    """
    Networks for the duality suite, keyed by fixture id.

    m_n (n <= 8), the MAX_n ICNNs (2 <= n <= 8), the square pyramid and
    ICNNs of random positive polytopes.
    """
    fixtures = {}
    for n in range(1, 9):
        fixtures[f"m_{n}"] = synthesis.build_m_n(n)
    for n in range(2, 9):
        fixtures[f"max_icnn_{n}"] = synthesis.build_max_icnn(n)[1]
    pyramid, _ = synthesis.pyramid_fixture()
    fixtures["pyramid"] = nw.circuit_to_net(synthesis.build_polytope_icnn(pyramid))
    for index in range(random_count):
        dim = 2 + index % 2
        polytope = random_positive_polytope(rng, dim, 6)
        fixtures[f"random_polytope_{index}"] = nw.circuit_to_net(synthesis.build_polytope_icnn(polytope))
    return fixtures


def monotone_fixtures(rng, count=3):
    """Monotone (ReLU+) networks: m_n and synthesized planar functions."""
    fixtures = {f"m_{n}": synthesis.build_m_n(n) for n in range(1, 6)}
    for index in range(count):
        fixtures[f"synth2d_{index}"] = synthesis.synthesize_depth2_planar(random_positive_planar_function(rng))
    return fixtures


def biased_monotone_nets():
    """Small monotone planar networks with biases."""
    nets = {}

    builder = NetworkBuilder(2)
    inner = builder.relu(builder.affine([(1, 1)], Fraction(-1, 2)))
    nets['relu_nested'] = builder.build(builder.relu(builder.affine([(0, 1), (inner, 1)], Fraction(-1, 4))), 'monotone')

    builder = NetworkBuilder(2)
    a = builder.relu(builder.affine([(0, 1)], Fraction(-1, 2)))
    b = builder.relu(builder.affine([(1, 1)], Fraction(-1, 2)))
    nets['hinge_sum'] = builder.build(builder.affine([(0, Fraction(1, 2)), (1, Fraction(1, 2)), (a, 1), (b, 1)]), 'monotone')

    builder = NetworkBuilder(2)
    s = builder.relu(builder.affine([(0, 1), (1, 1)], -1))
    nets['diagonal_hinge'] = builder.build(builder.affine([(0, Fraction(1, 2)), (1, Fraction(1, 2)), (s, Fraction(1, 2))]), 'monotone')
    return nets


def grid_best_affine(steps=None):
    """
    The affine a x1 + b x2 + c closest to MAX_2 in mean absolute value on [0, 1]^2,
    searched over a, b in {0, 1/steps, ..., 1} and c in {0, 1/(2 steps), ..., 1/2}.
    """
    steps = steps or load_config()['analysis']['grid_steps']
    target = CpwlFn.max_n(2)
    best = None
    for i in range(steps + 1):
        for j in range(steps + 1):
            for k in range(steps + 1):
                candidate = AffineMax.affine((Fraction(i, steps), Fraction(j, steps)), Fraction(k, 2 * steps))
                mean = cpwl.integrate_abs_diff(candidate, target)
                if best is None or mean < best[0]:
                    best = (mean, candidate)
    return best[1]


def isotonic_candidates():
    """
    Planar isotonic candidates for the inapproximability suite, keyed by id.

    Returns:
        dict: id -> AffineMax.
    """
    candidates = {
        'zero': AffineMax.affine((0, 0)),
        'x1': AffineMax.affine((1, 0)),
        'average': AffineMax.affine((Fraction(1, 2), Fraction(1, 2))),
        'sum': AffineMax.affine((1, 1)),
        'm_2': AffineMax.from_cpwl(CpwlFn.m_n(2)),
        'm_2_swapped': AffineMax(2, ((RatVec.zero(2), 0), (RatVec.of(1, 0), 0), (RatVec.of(1, 1), 0))),
        'grid_best_affine': grid_best_affine(),
    }
    for name, net in biased_monotone_nets().items():
        candidates[name] = nw.affine_pieces(net)
    return dict(sorted(candidates.items()))


def random_network(rng, input_dim=3, gate_count=8, kind='general'):
    """
    A random network: affine gates over up to three earlier nodes with
    weights in [-2, 2] (non-negative for 'monotone'), each followed by a relu half the time.
    """
    builder = NetworkBuilder(input_dim)
    nodes = list(range(input_dim))
    low = 0 if kind == 'monotone' else -2
    for _ in range(gate_count):
        fan_in = int(rng.integers(1, min(3, len(nodes)) + 1))
        sources = sorted({nodes[int(rng.integers(len(nodes)))] for _ in range(fan_in)})
        incoming = [(src, random_rational(rng, low, 2, 4)) for src in sources]
        node = builder.affine(incoming, random_rational(rng, -2, 2, 4))
        if rng.integers(2):
            node = builder.relu(node)
        nodes.append(node)
    return builder.build(nodes[-1], kind)
