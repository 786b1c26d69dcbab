"""
Constructive builders: polygon decomposition into segments and triangles,
depth-2 monotone synthesis in the plane, the m_n and MAX_n networks, generic
add-point circuits for arbitrary polytopes and the square pyramid fixture.
"""
import logging
from fractions import Fraction

from newton_forge.models.circuit import AddPointGate, CircuitBuilder, PointGate, SumGate
from newton_forge.models.cpwl_fn import CpwlFn
from newton_forge.models.network import NetworkBuilder
from newton_forge.models.polytope import DecompositionPart
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import network as nw
from newton_forge.utils import linear
from newton_forge.utils.errors import (
    CertificateError,
    ConversionError,
    DimensionMismatchError,
    FaceDataUnavailableError,
    NotIsotonicError,
)

logger = logging.getLogger(__name__)

PYRAMID_VERTICES = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (1, 1, 1))


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _part_from_edges(edges):
    vertices = [RatVec.zero(2)]
    for edge in edges[:-1]:
        vertices.append(vertices[-1] + edge)
    polytope = gk.convex_hull(vertices, 2).normalized()
    shape = 'segment' if polytope.vertex_count == 2 else 'triangle'
    return DecompositionPart(shape, polytope)


def _antiparallel_pair(edges):
    for i, first in enumerate(edges):
        for j in range(i + 1, len(edges)):
            second = edges[j]
            if _cross(first, second) == 0 and first.dot(second) < 0:
                return i, j
    return None


def _split_segment(edges, i, j):
    """Shorten the antiparallel edges i and j by the shorter of the two."""
    first, second = edges[i], edges[j]
    ratio = -second.dot(first) / first.dot(first)
    step = first if ratio >= 1 else -second
    remaining = list(edges)
    remaining[i] = first - step
    remaining[j] = second + step
    return [e for e in remaining if not e.is_zero()], _part_from_edges([step, -step])


def _split_triangle(edges, start):
    """
    Cut a triangle off a polygon without parallel edges.

    a_1 is the lexicographically smallest edge (by sorted endpoints); a_2 and
    a_3 are the edges at the vertex farthest from the line of a_1. The lines of
    a_1, a_2, a_3 bound a triangle with edges lambda_i a_i; its largest
    homothet t with edges tau_i a_i (tau_i <= 1) is the summand.
    """
    vertices = [start]
    for edge in edges[:-1]:
        vertices.append(vertices[-1] + edge)
    count = len(edges)

    def endpoints(k):
        tail, head = vertices[k], vertices[(k + 1) % count]
        return tuple(sorted((tail.coords, head.coords)))

    first = min(range(count), key=endpoints)
    base = vertices[first]
    far = max(range(count), key=lambda k: _cross(edges[first], vertices[k] - base))
    incoming, outgoing = (far - 1) % count, far

    chosen = sorted({first, incoming, outgoing})
    a1, a2, a3 = (edges[k] for k in chosen)
    weights = [abs(_cross(a2, a3)), abs(_cross(a3, a1)), abs(_cross(a1, a2))]
    top = max(weights)
    taus = [w / top for w in weights]

    remaining = list(edges)
    triangle_edges = []
    for k, tau in zip(chosen, taus):
        triangle_edges.append(edges[k].scale(tau))
        remaining[k] = edges[k].scale(1 - tau)
    return [e for e in remaining if not e.is_zero()], _part_from_edges(triangle_edges)


def decompose_polygon(polygon):
    """
    Write a polygon as a Minkowski sum of segments and triangles, up to translation.

    Parallel sides are shortened by the shorter one (a segment summand); a
    polygon without parallel sides loses a triangle. Each step removes at
    least one edge.

    Args:
        polygon (Polytope): Polytope in the plane.

    Returns:
        list: DecompositionPart items, each translated to its lex-min vertex.
    """
    if polygon.dim != 2:
        raise DimensionMismatchError(f"polygon decomposition needs dimension 2, got {polygon.dim}")
    if polygon.is_point():
        return []
    if polygon.vertex_count == 2:
        return [DecompositionPart('segment', polygon.normalized())]

    cycle = [polygon.vertices[i] for i in polygon.faces.two_faces[0]]
    edges = [b - a for a, b in zip(cycle, cycle[1:] + cycle[:1])]
    start = cycle[0]

    parts = []
    while len(edges) > 3:
        pair = _antiparallel_pair(edges)
        if pair is not None:
            edges, part = _split_segment(edges, *pair)
        else:
            edges, part = _split_triangle(edges, start)
        logger.debug("decompose: %s part, %d edges left", part.shape, len(edges))
        parts.append(part)
    if len(edges) >= 2:
        parts.append(_part_from_edges(edges))
    return parts


def decomposition_offset(polygon, parts):
    """The translation b with polygon = sum(parts) + b."""
    offset = polygon.lexmin()
    for part in parts:
        offset = offset - part.polytope.lexmin()
    return offset


def resum_parts(parts, dim=2):
    """Minkowski sum of the parts."""
    return gk.minkowski_combination([(Fraction(1), part.polytope) for part in parts], dim)


def monotone_source(polytope):
    """
    The vertex below every other vertex, if there is one.

    Returns:
        RatVec or None: The minimum for the componentwise order.
    """
    candidate = polytope.lexmin()
    if all(candidate.leq(v) for v in polytope.vertices):
        return candidate
    return None


def synthesize_depth2_planar(fn):
    """
    A monotone network of depth <= 2 computing a planar isotonic function.

    N(F) is decomposed into positive segments and triangles, each part is
    built from its source: a segment [0, w] as relu(<w, x>), a triangle
    0 <= v2 <= v3 as relu(<v2, x> + relu(<v3 - v2, x>)); the parts are added
    to <s, x> where s is the componentwise minimum of N(F).

    Args:
        fn (CpwlFn): Homogeneous function of two variables.

    Returns:
        ReluNetwork: Monotone network with Newton polytope N(F).

    Raises:
        NotIsotonicError: Carrying the witness when F is not isotonic.
        ConversionError: When N(F) has a negative vertex.
    """
    if fn.dim != 2:
        raise DimensionMismatchError(f"planar synthesis needs dimension 2, got {fn.dim}")
    ok, payload = cpwl.isotonic_check(fn)
    if not ok:
        raise NotIsotonicError(payload)
    non_negative, offending = cpwl.non_negative_subgradients(fn)
    if not non_negative:
        raise ConversionError(f"N(F) has negative vertices {[str(v) for v in offending]}")

    polytope = cpwl.newton_polytope(fn)
    source = monotone_source(polytope)
    parts = decompose_polygon(polytope)

    builder = NetworkBuilder(2)
    summands = []
    for part in parts:
        vertices = part.polytope.vertices
        if part.shape == 'segment':
            summands.append(builder.relu(builder.affine(_input_terms(vertices[1]))))
            continue
        _, middle, top = vertices
        inner = builder.relu(builder.affine(_input_terms(top - middle)))
        summands.append(builder.relu(builder.affine(_input_terms(middle) + [(inner, 1)])))
    output = builder.affine(_input_terms(source) + [(gate, 1) for gate in summands])
    net = builder.build(output, 'monotone')

    if nw.network_function(net) != cpwl.reduced(fn):
        raise CertificateError("synthesized network has a different Newton polytope", step='synthesis')
    logger.info("synthesized %d parts, depth %d", len(parts), nw.depth(net))
    return net


def _input_terms(vector):
    return [(i, c) for i, c in enumerate(vector) if c != 0]


def build_m_n(n):
    """
    m_n(x) = relu(x_n + m_{n-1}(x_1, ..., x_{n-1})) with m_1 = relu(x_1).

    Returns:
        ReluNetwork: Monotone network of depth n.
    """
    if n < 1:
        raise ConversionError("m_n needs n >= 1")
    builder = NetworkBuilder(n)
    current = builder.relu(0)
    for k in range(1, n):
        current = builder.relu(builder.affine([(k, 1), (current, 1)]))
    return builder.build(current, 'monotone')


def _add_point_expanded(builder, source, q):
    """conv(P union {q}) as (P - q) -> add zero -> + q."""
    shifted = builder.sum([(source, 1), (builder.point(-q), 1)])
    lifted = builder.add_point(shifted)
    return builder.sum([(lifted, 1), (builder.point(q), 1)])


def build_polytope_icnn(polytope):
    """
    An add-point circuit for a polytope with m vertices, of depth exactly m.

    Vertices are added in lexicographic order, the first one onto itself; each
    add-q is expanded into translate, add zero, translate back.

    Args:
        polytope (Polytope): Target polytope.

    Returns:
        PolytopeCircuit: ICNN-kind circuit whose output is the polytope.
    """
    builder = CircuitBuilder(polytope.dim)
    vertices = polytope.vertices
    current = builder.point(vertices[0])
    if len(vertices) == 1:
        return builder.build(current, 'icnn')
    for vertex in vertices:
        current = _add_point_expanded(builder, current, vertex)
    return builder.build(current, 'icnn')


def build_max_icnn(n):
    """
    MAX_n as an ICNN of depth n.

    Returns:
        tuple: (PolytopeCircuit with output conv{e_1, ..., e_n}, its ReluNetwork)
    """
    if n < 2:
        raise ConversionError("MAX_n ICNN builder needs n >= 2")
    simplex = gk.convex_hull([RatVec.unit(n, i) for i in range(n)], n)
    circuit = build_polytope_icnn(simplex)
    return circuit, nw.circuit_to_net(circuit)


def pyramid_fixture():
    """
    The square pyramid conv{(0,0,0), (1,0,0), (0,1,0), (1,1,0), (1,1,1)} and its support function.

    Returns:
        tuple: (Polytope, CpwlFn)
    """
    polytope = gk.convex_hull([RatVec(v) for v in PYRAMID_VERTICES], 3)
    return polytope, cpwl.from_polytope(polytope)


def restrict_circuit_to_face(circuit, u):
    """
    Replace every gate polytope P by P_u - (h(P, u) / <u, u>) u inside u-perp.

    Points are projected, sums keep their coefficients, and conv(Q union {q})
    becomes {q'}, conv(Q' union {q'}) or Q' as <q, u> is above, equal to or
    below h(Q, u). Depth never increases.

    Args:
        circuit (PolytopeCircuit): Circuit.
        u (RatVec): Nonzero direction.

    Returns:
        PolytopeCircuit: Circuit for the restricted output face.
    """
    trace = nw.eval_circuit(circuit)
    builder = CircuitBuilder(circuit.dim)
    mapping = {}
    monotone = circuit.kind == 'monotone'
    for node, gate in enumerate(circuit.gates):
        if isinstance(gate, PointGate):
            projected = gk.project_onto_hyperplane(gate.q, u)
            monotone = monotone and projected.is_nonnegative()
            mapping[node] = builder.point(projected)
        elif isinstance(gate, SumGate):
            mapping[node] = builder.sum([(mapping[src], a) for src, a in gate.terms])
        else:
            height = gk.support_value(trace[gate.source], u)
            level = gate.q.dot(u)
            projected = gk.project_onto_hyperplane(gate.q, u)
            if level > height:
                monotone = monotone and projected.is_nonnegative()
                mapping[node] = builder.point(projected)
            elif level == height:
                mapping[node] = builder.add_point(mapping[gate.source], projected)
            else:
                mapping[node] = mapping[gate.source]
    return builder.build(mapping[circuit.output], 'monotone' if monotone else 'icnn')


def edge_scaling_dimension(polytope):
    """
    Dimension of the space of edge scalings lambda_e with sum lambda_e d_e = 0
    around every 2-face.

    A value of 1 means every Minkowski summand is a homothet of the polytope.

    Args:
        polytope (Polytope): Polytope of dimension at most 3.

    Returns:
        int: Nullspace dimension of the closed-walk equations.
    """
    lattice = polytope.faces
    if lattice is None:
        raise FaceDataUnavailableError(f"no face data in dimension {polytope.dim}")
    index = {edge: k for k, edge in enumerate(lattice.edges)}
    rows = []
    for cycle in lattice.two_faces:
        ring = list(cycle)
        equations = [[Fraction(0)] * len(index) for _ in range(polytope.dim)]
        for a, b in zip(ring, ring[1:] + ring[:1]):
            direction = polytope.vertices[b] - polytope.vertices[a]
            column = index[(min(a, b), max(a, b))]
            for axis in range(polytope.dim):
                equations[axis][column] += direction[axis]
        rows.extend(equations)
    return linear.nullspace_dimension(rows, len(index))


def circuit_gate_counts(circuit):
    """Number of point, sum and add-point gates."""
    counts = {'point': 0, 'sum': 0, 'add_point': 0}
    for gate in circuit.gates:
        if isinstance(gate, PointGate):
            counts['point'] += 1
        elif isinstance(gate, SumGate):
            counts['sum'] += 1
        elif isinstance(gate, AddPointGate):
            counts['add_point'] += 1
    return counts


def m_n_function(n):
    """The CpwlFn of m_n."""
    return CpwlFn.m_n(n)
