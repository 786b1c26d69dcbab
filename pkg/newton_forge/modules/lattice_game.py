"""
The triangular-lattice ball B_r, its lifted polytope and the coloring game.

The game color(V_B) returns |V_B| when |V_B| <= 1; otherwise a strategy picks
q in V_B, the closed neighborhood B_1(q) turns white, and the cost is one
more than the most expensive of the remaining black components.
"""
import logging
import threading
from collections import deque
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np

from newton_forge.models.circuit import AddPointGate, PointGate, SumGate
from newton_forge.models.lattice import (
    AXIAL_DIRECTIONS,
    BallRealization,
    GameNode,
    GameTree,
    IsoperimetryReport,
    LatticeBall,
    TriangleChain,
    axial_coordinates,
)
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules import network as nw
from newton_forge.utils.config import load_config
from newton_forge.utils.errors import CertificateError, GameError, SizeGuardError
from newton_forge.utils.rational import parse_rational

logger = logging.getLogger(__name__)

MAX_COMPONENTS = 6
EXHAUSTIVE_VERTEX_LIMIT = 20


def _add(u, d):
    return (u[0] + d[0], u[1] + d[1])


def build_ball(r):
    """
    Enumerate B_r by breadth-first search from the origin.

    Args:
        r (int): Radius, r >= 0.

    Returns:
        LatticeBall: 3r^2 + 3r + 1 vertices, 9r^2 + 3r edges, 6r^2 triangles.
    """
    if r < 0:
        raise GameError(f"ball radius must be non-negative, got {r}")
    seen = {(0, 0)}
    frontier = [(0, 0)]
    for _ in range(r):
        layer = []
        for v in frontier:
            for d in AXIAL_DIRECTIONS:
                w = _add(v, d)
                if w not in seen:
                    seen.add(w)
                    layer.append(w)
        frontier = layer

    edges = set()
    triangles = set()
    for v in seen:
        for d in AXIAL_DIRECTIONS[:3]:
            w = _add(v, d)
            if w in seen:
                edges.add((min(v, w), max(v, w)))
        up = (v, _add(v, (1, 0)), _add(v, (0, 1)))
        down = (v, _add(v, (0, 1)), _add(v, (-1, 1)))
        for triangle in (up, down):
            if all(u in seen for u in triangle):
                triangles.add(tuple(sorted(triangle)))
    ball = LatticeBall(r, tuple(sorted(seen)), tuple(sorted(edges)), tuple(sorted(triangles)))
    logger.debug("built %s", ball)
    return ball


def check_3_connected(graph):
    """
    Exhaustive check that no two vertices disconnect the graph.

    Args:
        graph (LatticeBall or networkx.Graph): Graph to test.

    Returns:
        bool: True when at least 4 vertices remain connected after any 2 are removed.
    """
    if isinstance(graph, LatticeBall):
        graph = graph.graph
    if graph.number_of_nodes() < 4 or not nx.is_connected(graph):
        return False
    nodes = list(graph.nodes)
    for u, v in combinations(nodes, 2):
        rest = graph.subgraph([w for w in nodes if w != u and w != v])
        if not nx.is_connected(rest):
            logger.debug("removing %s and %s disconnects the graph", u, v)
            return False
    return True


def _lift(point):
    """Inverse stereographic projection onto the sphere through the origin with top (0, 0, 1)."""
    norm = point.dot(point)
    denominator = norm + 1
    return RatVec((point[0] / denominator, point[1] / denominator, norm / denominator))


def _strict_support_normal(a, b, c, others):
    """Outward normal of the plane through a, b, c when every other point is strictly inside, else None."""
    normal = RatVec(gk.cross3((b - a).coords, (c - a).coords))
    sides = [normal.dot(x - a) for x in others]
    if all(s < 0 for s in sides):
        return normal
    if all(s > 0 for s in sides):
        return -normal
    return None


def realize_polytope(ball, slopes=None):
    """
    Lift B_r onto a sphere and certify every lattice triangle as a face of the hull.

    Each embedding slope is tried in turn; the first one whose certificate
    passes is returned, otherwise the last attempt with its failures.

    Args:
        ball (LatticeBall): Ball with r >= 1.
        slopes (list, optional): Rational stand-ins for sqrt(3)/2; defaults to the config.

    Returns:
        BallRealization: Polytope P_r, outward triangle normals and failures.
    """
    if ball.r < 1:
        raise GameError("realization needs r >= 1")
    if slopes is None:
        slopes = load_config()['lattice']['embedding_slopes']

    realization = None
    for slope in slopes:
        slope = parse_rational(slope)
        lifted = {v: _lift(ball.plane_point(v, slope)) for v in ball.vertices}
        normals = {}
        failures = []
        for triangle in ball.triangles:
            a, b, c = (lifted[v] for v in triangle)
            others = [lifted[v] for v in ball.vertices if v not in triangle]
            normal = _strict_support_normal(a, b, c, others)
            if normal is None:
                failures.append(triangle)
            else:
                normals[triangle] = normal
        polytope = gk.convex_hull(list(lifted.values()), 3)
        realization = BallRealization(ball.r, slope, lifted, polytope, normals, tuple(failures))
        if realization.certified:
            logger.info("P_%d certified with slope %s", ball.r, slope)
            return realization
        logger.warning("slope %s leaves %d uncertified triangles", slope, len(failures))
    return realization


def _check_subset(ball, vertices):
    vertices = frozenset(vertices)
    unknown = vertices - ball.vertex_set
    if unknown:
        raise GameError(f"vertices outside B_{ball.r}: {sorted(unknown)}")
    return vertices


def triangle_set(ball, vertices):
    """
    All lattice triangles contained in the subgraph induced by B_1(U).

    Args:
        ball (LatticeBall): Ball.
        vertices (iterable): U.

    Returns:
        TriangleChain: T(U).
    """
    vertices = _check_subset(ball, vertices)
    if not vertices:
        return TriangleChain(())
    cover = ball.closed_neighborhood(vertices)
    return TriangleChain(tuple(t for t in ball.triangles if all(v in cover for v in t)))


def boundary(ball, vertices):
    """Outer vertex boundary: vertices outside K with a neighbor in K."""
    vertices = _check_subset(ball, vertices)
    return ball.closed_neighborhood(vertices) - vertices


def connected_components(ball, vertices):
    """Components of the induced subgraph, each a frozenset, ordered by smallest vertex."""
    remaining = set(vertices)
    components = []
    while remaining:
        start = min(remaining)
        remaining.discard(start)
        component = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in ball.adjacency[v]:
                if w in remaining:
                    remaining.discard(w)
                    component.add(w)
                    queue.append(w)
        components.append(frozenset(component))
    return components


def component_split_check(ball, vertices, q):
    """
    Number of black components left after coloring B_1(q) white.

    Args:
        ball (LatticeBall): Ball.
        vertices (iterable): V_B.
        q (tuple): Selected vertex of V_B.

    Returns:
        int: Component count (at most 6 in the triangular lattice).
    """
    vertices = _check_subset(ball, vertices)
    if q not in vertices:
        raise GameError(f"{q} is not a black vertex")
    return len(connected_components(ball, vertices - ball.closed_neighborhood([q])))


def play(ball, strategy, vertices=None):
    """
    Run color(V_B) with a strategy and record the game tree.

    Every node is checked for at most six children and for the boundary
    containment: the boundary of V_B lies in the boundary of the starting set
    together with B_1 of the vertices selected on the path.

    Args:
        ball (LatticeBall): Ball.
        strategy (callable): strategy(ball, region, path) -> vertex of region.
        vertices (iterable, optional): V_B. Defaults to the whole ball.

    Returns:
        GameTree: The played tree.

    Raises:
        GameError: When the strategy selects a vertex outside the region.
        CertificateError: When a node breaks the component or boundary bounds.
    """
    region = _check_subset(ball, ball.vertices if vertices is None else vertices)
    outer = boundary(ball, region)

    def color(region, path):
        covered = outer | ball.closed_neighborhood(path)
        if not boundary(ball, region) <= covered:
            raise CertificateError(f"boundary of a region escapes B_1 of {list(path)}", step='boundary')
        if len(region) <= 1:
            return GameNode(tuple(sorted(region)), path, None, (), len(region))

        q = strategy(ball, region, path)
        if q not in region:
            raise GameError(f"strategy selected {q}, which is not black")
        components = connected_components(ball, region - ball.closed_neighborhood([q]))
        if len(components) > MAX_COMPONENTS:
            raise CertificateError(f"selecting {q} left {len(components)} components", step='components')
        children = tuple(color(component, path + (q,)) for component in components)
        cost = 1 + max((child.cost for child in children), default=0)
        return GameNode(tuple(sorted(region)), path, q, children, cost)

    tree = GameTree(color(region, ()), getattr(strategy, 'name', 'custom'))
    logger.debug("%s strategy on B_%d: cost %d", tree.strategy, ball.r, tree.cost)
    return tree


class _CostTable:
    """Memo of optimal game costs keyed by frozen vertex sets; get-or-compute is atomic."""

    def __init__(self, ball, limit):
        self.ball = ball
        self.limit = limit
        self.values = {}
        self.lock = threading.RLock()

    def cost(self, region):
        if len(region) <= 1:
            return len(region)
        if len(region) > self.limit:
            raise SizeGuardError(f"exhaustive game search refuses {len(region)} > {self.limit} vertices")
        with self.lock:
            if region not in self.values:
                self.values[region] = min(cost for _, cost in self.moves(region))
            return self.values[region]

    def moves(self, region):
        """(q, cost after selecting q) for each q, stopping early at the trivial bound 1."""
        for q in sorted(region):
            rest = region - self.ball.closed_neighborhood([q])
            cost = 1 + max((self.cost(c) for c in connected_components(self.ball, rest)), default=0)
            yield q, cost
            if cost == 1:
                return


def optimal_cost(ball, vertices=None, limit=None):
    """
    Exact minimum of color(V_B) over all strategies.

    Args:
        ball (LatticeBall): Ball.
        vertices (iterable, optional): V_B. Defaults to the whole ball.
        limit (int, optional): Largest region searched; defaults to lattice.game_size_limit.

    Returns:
        int: Minimum cost.

    Raises:
        SizeGuardError: When a region exceeds the limit.
    """
    region = _check_subset(ball, ball.vertices if vertices is None else vertices)
    limit = limit or load_config()['lattice']['game_size_limit']
    return _CostTable(ball, limit).cost(region)


class OptimalStrategy:
    """Select the lex-smallest vertex attaining the optimal cost."""

    name = 'optimal'

    def __init__(self, ball, limit=None):
        self.table = _CostTable(ball, limit or load_config()['lattice']['game_size_limit'])

    def __call__(self, ball, region, path):
        target = self.table.cost(region)
        return next(q for q, cost in self.table.moves(region) if cost == target)


class GreedyStrategy:
    """Select the vertex whose closed neighborhood covers the most black vertices."""

    name = 'greedy'

    def __call__(self, ball, region, path):
        return min(region, key=lambda q: (-len(ball.closed_neighborhood([q]) & region), q))


class SeparatorStrategy:
    """
    Cut the region along a middle fiber.

    The fiber axis is the lattice direction along which the region is widest
    and the cut value is the midpoint of that extent. Fiber vertices are
    taken from one end, two per selection, until the region falls apart.
    """

    name = 'separator'

    def __call__(self, ball, region, path):
        coords = {v: axial_coordinates(v) for v in region}
        extents = []
        for axis in range(3):
            values = [c[axis] for c in coords.values()]
            extents.append((max(values) - min(values), -axis, min(values), max(values)))
        _, neg_axis, low, high = max(extents)
        axis = -neg_axis
        middle = (low + high) // 2
        along = (axis + 1) % 3
        # a connected region meets every fiber between its extremes
        return min(region, key=lambda v: (abs(coords[v][axis] - middle), coords[v][along], v))


def separator_strategy(ball=None):
    """The fiber-cutting strategy; it needs no precomputation."""
    return SeparatorStrategy()


def greedy_strategy(ball=None):
    return GreedyStrategy()


def optimal_strategy(ball, limit=None):
    return OptimalStrategy(ball, limit)


STRATEGIES = {
    'optimal': optimal_strategy,
    'separator': separator_strategy,
    'greedy': greedy_strategy,
}


def _window(vertex_count, window=None):
    low, high = (parse_rational(w) for w in (window or load_config()['lattice']['iso_window']))
    return low * vertex_count, high * vertex_count


def _popcount(values, bits):
    count = np.zeros_like(values)
    for bit in range(bits):
        count += (values >> bit) & 1
    return count


def exhaustive_isoperimetry(ball, window=None):
    """
    Scan every subset K of V(B_r) with a numpy bitmask sweep.

    Returns:
        IsoperimetryReport: min |boundary(K)| over K inside the size window.
    """
    n = ball.vertex_count
    if ball.r < 1 or n > EXHAUSTIVE_VERTEX_LIMIT:
        raise SizeGuardError(f"exhaustive isoperimetry needs 1 <= r <= 2, got r = {ball.r}")
    index = {v: i for i, v in enumerate(ball.vertices)}
    neighbor_masks = [sum(1 << index[w] for w in ball.adjacency[v]) for v in ball.vertices]

    masks = np.arange(1 << n, dtype=np.int64)
    reach = np.zeros_like(masks)
    for i, neighbors in enumerate(neighbor_masks):
        reach |= ((masks >> i) & 1) * neighbors
    boundary_sizes = _popcount(reach & ~masks, n)
    sizes = _popcount(masks, n)

    low, high = _window(n, window)
    valid = (sizes * low.denominator > low.numerator) & (sizes * high.denominator < high.numerator)
    candidates = np.flatnonzero(valid)
    best = candidates[np.argmin(boundary_sizes[candidates])]
    min_boundary = int(boundary_sizes[best])
    witness = tuple(v for v in ball.vertices if (int(best) >> index[v]) & 1)
    logger.info("exhaustive scan of B_%d: %d sets, min boundary %d", ball.r, len(candidates), min_boundary)
    return IsoperimetryReport(ball.r, 'exhaustive', int(len(candidates)), min_boundary,
                              Fraction(min_boundary, ball.r), witness)


def random_connected_set(ball, rng, size):
    start = ball.vertices[int(rng.integers(len(ball.vertices)))]
    chosen = {start}
    frontier = set(ball.adjacency[start])
    while len(chosen) < size and frontier:
        options = sorted(frontier)
        v = options[int(rng.integers(len(options)))]
        chosen.add(v)
        frontier.discard(v)
        frontier.update(w for w in ball.adjacency[v] if w not in chosen)
    return frozenset(chosen)


def sample_isoperimetry(ball, rng, samples=None, window=None):
    """
    Random connected K grown from a random vertex to a random size inside the window.

    Returns:
        IsoperimetryReport: The smallest boundary seen.
    """
    if ball.r < 1:
        raise GameError("isoperimetry needs r >= 1")
    samples = samples or load_config()['lattice']['iso_sample_count']
    low, high = _window(ball.vertex_count, window)
    smallest = int(low) + 1
    largest = -(-high.numerator // high.denominator) - 1
    if smallest > largest:
        raise GameError(f"no set size fits the window for B_{ball.r}")

    best, witness = None, ()
    for _ in range(samples):
        size = int(rng.integers(smallest, largest + 1))
        chosen = random_connected_set(ball, rng, size)
        count = len(boundary(ball, chosen))
        if best is None or count < best:
            best, witness = count, tuple(sorted(chosen))
    logger.info("sampled %d sets in B_%d: min boundary %d", samples, ball.r, best)
    return IsoperimetryReport(ball.r, 'sampled', samples, best, Fraction(best, ball.r), witness)


def isoperimetry_scan(ball, mode='exhaustive', rng=None, samples=None, window=None):
    """Dispatch to the exhaustive sweep or the sampled search."""
    if mode == 'exhaustive':
        return exhaustive_isoperimetry(ball, window)
    if mode in ('sampled', 'sample'):
        if rng is None:
            raise GameError("sampled isoperimetry needs a random generator")
        return sample_isoperimetry(ball, rng, samples, window)
    raise GameError(f"unknown isoperimetry mode {mode!r}")


def chain_embedding(polytope, chain, realization):
    """
    Find a > 0 and b such that a T + b lies in the boundary of Q for every triangle T of the chain.

    Triangles carry their outward normals from the realization. The images of
    the first triangle's first two vertices are looked up among the vertices
    of the face of Q in that triangle's normal direction; each candidate
    dilation is then checked on every triangle by an exact support test.

    Args:
        polytope (Polytope): Q in dimension 3.
        chain (TriangleChain): Lattice triangles.
        realization (BallRealization): Lift and normals of the ball.

    Returns:
        tuple or None: (a, b), or None when Q contains no positive homothet of the chain.
    """
    if not len(chain):
        return Fraction(1), RatVec.zero(3)
    first = chain.triangles[0]
    u0, u1 = realization.lifted[first[0]], realization.lifted[first[1]]
    span = u1 - u0
    axis = next(i for i, c in enumerate(span) if c != 0)
    face = gk.support_face(polytope, realization.normals[first])

    for p0 in face.vertices:
        for p1 in face.vertices:
            a = (p1[axis] - p0[axis]) / span[axis]
            if a <= 0 or p1 - p0 != span.scale(a):
                continue
            b = p0 - u0.scale(a)
            if _embedding_holds(polytope, chain, realization, a, b):
                return a, b
    return None


def _embedding_holds(polytope, chain, realization, a, b):
    images = {v: realization.lifted[v].scale(a) + b for v in chain.vertices}
    for triangle in chain:
        normal = realization.normals[triangle]
        height = gk.support_value(polytope, normal)
        if any(images[v].dot(normal) != height for v in triangle):
            return False
    return all(gk.contains_point(polytope, x) for x in images.values())


def _representative(ball, region, v):
    """The vertex to select when the gate adds v: v itself when black, else a black neighbour of v."""
    if v in region:
        return v
    candidates = sorted(w for w in ball.adjacency[v] if w in region)
    for u in candidates:
        rest = region - ball.closed_neighborhood([u])
        if not rest & ball.closed_neighborhood([v]):
            return u
    return candidates[0] if candidates else None


def extract_strategy_from_circuit(circuit, ball, vertices=None, realization=None):
    """
    Read a coloring strategy off a circuit whose output contains the chain T(V_B).

    Walking down from the output: a Sum gate passes to a summand that still
    contains the chain; conv(Q' union {q}) passes to Q' when q is not the image
    of a chain vertex, and otherwise makes a selection. A black chain vertex
    is selected itself; a white one is replaced by a black neighbour, chosen
    so that no remaining black vertex touches it when possible. After a
    selection each remaining component continues below with its own chain.
    Every selection consumes an add-point gate and a nonempty chain never
    reaches a point gate, so the cost is at most the add-point depth.

    Args:
        circuit (PolytopeCircuit): Circuit in dimension 3.
        ball (LatticeBall): Ball.
        vertices (iterable, optional): V_B. Defaults to the whole ball.
        realization (BallRealization, optional): Defaults to realize_polytope(ball).

    Returns:
        GameTree: Tree whose cost is at most depth_circuit(circuit).

    Raises:
        CertificateError: When some gate on the walk does not contain the chain.
    """
    realization = realization or realize_polytope(ball)
    trace = nw.eval_circuit(circuit)
    region = _check_subset(ball, ball.vertices if vertices is None else vertices)

    def descend(node, region, path):
        if not region:
            return GameNode((), path, None, (), 0)
        chain = triangle_set(ball, region)
        embedding = chain_embedding(trace[node], chain, realization)
        if embedding is None:
            raise CertificateError(f"gate {node} does not contain the chain of {len(chain)} triangles",
                                   step=f"gate {node}")
        gate = circuit.gates[node]
        if isinstance(gate, PointGate):
            raise CertificateError(f"point gate {node} cannot contain the chain of {sorted(region)}",
                                   step=f"gate {node}")
        if isinstance(gate, SumGate):
            for src, _ in gate.terms:
                if chain_embedding(trace[src], chain, realization) is not None:
                    return descend(src, region, path)
            raise CertificateError(f"no summand of gate {node} contains the chain", step=f"gate {node}")
        if isinstance(gate, AddPointGate):
            a, b = embedding
            hit = next((v for v in chain.vertices if realization.lifted[v].scale(a) + b == gate.q), None)
            if hit is None:
                return descend(gate.source, region, path)
            selected = _representative(ball, region, hit)
            if selected is None:
                raise CertificateError(f"{hit} has no black neighbour at gate {node}", step=f"gate {node}")
            rest = region - ball.closed_neighborhood([selected])
            children = tuple(descend(gate.source, c, path + (selected,))
                             for c in connected_components(ball, rest))
            cost = 1 + max((child.cost for child in children), default=0)
            return GameNode(tuple(sorted(region)), path, selected, children, cost)
        raise CertificateError(f"unknown gate {gate!r}")

    tree = GameTree(descend(circuit.output, region, ()), 'circuit')
    logger.info("extracted strategy of cost %d from a depth-%d circuit", tree.cost, nw.depth_circuit(circuit))
    return tree
