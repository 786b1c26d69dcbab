from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import networkx as nx

from newton_forge.models.ratvec import RatVec
from newton_forge.utils.rational import format_rational

# axial offsets of the six neighbors, counter-clockwise from +i
AXIAL_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def hex_distance(u, v=(0, 0)) -> int:
    di, dj = u[0] - v[0], u[1] - v[1]
    return max(abs(di), abs(dj), abs(di + dj))


def axial_coordinates(v):
    """The three fiber coordinates (i, j, -i - j) of an axial vertex."""
    return v[0], v[1], -v[0] - v[1]


@dataclass(frozen=True)
class LatticeBall:
    """
    The radius-r ball B_r around o = (0, 0) in the triangular lattice.

    Vertices are axial integer pairs; (i, j) sits at (i + j/2, s*j) in the plane.

    Attributes:
        r (int): Radius.
        vertices (tuple): Axial pairs, sorted.
        edges (tuple): Sorted vertex pairs at hex distance 1.
        triangles (tuple): Sorted vertex triples of the unit triangles inside the ball.
    """

    r: int
    vertices: tuple = field(default_factory=tuple)
    edges: tuple = field(default_factory=tuple)
    triangles: tuple = field(default_factory=tuple)

    @property
    def origin(self):
        return (0, 0)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @cached_property
    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    @cached_property
    def adjacency(self) -> dict:
        neighbors = {v: set() for v in self.vertices}
        for u, v in self.edges:
            neighbors[u].add(v)
            neighbors[v].add(u)
        return {v: frozenset(ns) for v, ns in neighbors.items()}

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    def degree(self, v) -> int:
        return len(self.adjacency[v])

    def closed_neighborhood(self, vertices) -> frozenset:
        """B_1(U): U together with every neighbor of U inside the ball."""
        result = set(vertices)
        for v in vertices:
            result.update(self.adjacency[v])
        return frozenset(result)

    def plane_point(self, v, slope) -> RatVec:
        return RatVec((Fraction(v[0]) + Fraction(v[1], 2), Fraction(slope) * v[1]))

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'vertices': [list(v) for v in self.vertices],
            'edges': [[list(u), list(v)] for u, v in self.edges],
            'triangles': [[list(v) for v in t] for t in self.triangles],
        }

    def __str__(self):
        return f"B_{self.r} ({self.vertex_count} vertices, {len(self.edges)} edges)"


@dataclass(frozen=True)
class TriangleChain:
    """
    A set of lattice triangles, each a sorted vertex triple.

    A chain is a pseudomanifold: triangles are connected through shared edges
    and no edge lies in more than two of them.
    """

    triangles: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'triangles', tuple(sorted(tuple(sorted(t)) for t in self.triangles)))

    def __len__(self):
        return len(self.triangles)

    def __iter__(self):
        return iter(self.triangles)

    @cached_property
    def vertices(self) -> tuple:
        return tuple(sorted({v for t in self.triangles for v in t}))

    @cached_property
    def edge_use(self) -> Counter:
        use = Counter()
        for a, b, c in self.triangles:
            use.update([(a, b), (a, c), (b, c)])
        return use

    def is_pseudomanifold(self) -> bool:
        if any(count > 2 for count in self.edge_use.values()):
            return False
        if len(self.triangles) <= 1:
            return True
        dual = nx.Graph()
        dual.add_nodes_from(range(len(self.triangles)))
        by_edge = {}
        for index, (a, b, c) in enumerate(self.triangles):
            for edge in ((a, b), (a, c), (b, c)):
                by_edge.setdefault(edge, []).append(index)
        for members in by_edge.values():
            if len(members) == 2:
                dual.add_edge(*members)
        return nx.is_connected(dual)

    def to_dict(self) -> dict:
        return {'triangles': [[list(v) for v in t] for t in self.triangles]}


@dataclass(frozen=True)
class BallRealization:
    """
    The lifted polytope P_r of a lattice ball with its face certificate.

    Attributes:
        r (int): Radius.
        slope (Fraction): Rational stand-in for sqrt(3)/2 used by the plane embedding.
        lifted (dict): Lattice vertex -> RatVec on the sphere.
        polytope (Polytope): Hull of the lifted points.
        normals (dict): Lattice triangle -> outward normal of its supporting plane.
        failures (tuple): Triangles whose plane does not strictly support the lift.
    """

    r: int
    slope: Fraction
    lifted: dict
    polytope: object
    normals: dict
    failures: tuple = ()

    @property
    def certified(self) -> bool:
        return not self.failures and self.polytope.vertex_count == len(self.lifted)

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'slope': format_rational(self.slope),
            'vertex_count': self.polytope.vertex_count,
            'certified_triangles': len(self.normals),
            'failures': [[list(v) for v in t] for t in self.failures],
            'certified': self.certified,
            'polytope': self.polytope.to_dict(),
        }


@dataclass(frozen=True)
class GameNode:
    """
    One call color(V_B) of the coloring game.

    Attributes:
        region (tuple): The black vertices V_B, sorted.
        path (tuple): L(V_B), the vertices selected on the way from the root.
        selected (tuple or None): The vertex q chosen here; None at leaves.
        children (tuple): GameNode per component of V_B minus B_1(q).
        cost (int): |V_B| at leaves, 1 + max child cost otherwise.
    """

    region: tuple
    path: tuple = ()
    selected: tuple = None
    children: tuple = ()
    cost: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.selected is None

    def to_dict(self) -> dict:
        return {
            'region': [list(v) for v in self.region],
            'selected': list(self.selected) if self.selected is not None else None,
            'cost': self.cost,
            'children': [child.to_dict() for child in self.children],
        }


@dataclass(frozen=True)
class GameTree:
    """A played coloring game: the root node and the strategy that produced it."""

    root: GameNode
    strategy: str = ''

    @property
    def cost(self) -> int:
        return self.root.cost

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def selection_count(self) -> int:
        return sum(1 for node in self.nodes() if not node.is_leaf)

    @property
    def max_branching(self) -> int:
        return max((len(node.children) for node in self.nodes()), default=0)

    def to_dict(self) -> dict:
        return {
            'strategy': self.strategy,
            'cost': self.cost,
            'selections': self.selection_count,
            'tree': self.root.to_dict(),
        }


@dataclass(frozen=True)
class IsoperimetryReport:
    """
    Smallest boundary found among the scanned vertex sets K in the size window.

    Attributes:
        r (int): Radius.
        mode (str): 'exhaustive' or 'sampled'.
        scanned (int): Number of sets inside the window.
        min_boundary (int): Smallest |boundary(K)|.
        min_ratio (Fraction): min_boundary / r.
        witness (tuple): One set attaining the minimum.
    """

    r: int
    mode: str
    scanned: int
    min_boundary: int
    min_ratio: Fraction
    witness: tuple = ()

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'mode': self.mode,
            'scanned': self.scanned,
            'min_boundary': self.min_boundary,
            'min_ratio': format_rational(self.min_ratio),
            'witness': [list(v) for v in self.witness],
        }
