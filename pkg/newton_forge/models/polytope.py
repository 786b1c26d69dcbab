from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from newton_forge.models.ratvec import RatVec, check_same_dim, lex_key
from newton_forge.utils import linear
from newton_forge.utils.errors import DimensionMismatchError, InputFormatError


@dataclass(frozen=True)
class FaceLattice:
    """
    Edges and 2-faces of a polytope of dimension at most 3.

    Attributes:
        edges (tuple): Pairs (i, j), i < j, of indices into the polytope's vertex tuple.
        two_faces (tuple): Each 2-face as a tuple of vertex indices in cyclic boundary order.
        normals (tuple): Outward normal per 2-face for full-dimensional 3-polytopes,
            None entries otherwise.
    """

    edges: tuple = ()
    two_faces: tuple = ()
    normals: tuple = ()


@dataclass(frozen=True)
class Polytope:
    """
    A convex polytope in V-representation.

    Vertices are extreme, pairwise distinct and kept in lexicographic order, so
    two polytopes are equal exactly when their vertex tuples are equal. Build
    instances with geometry_kernel.convex_hull unless the vertices are already
    known to be extreme.

    Attributes:
        dim (int): Ambient dimension.
        vertices (tuple): Extreme points as RatVec, lexicographically sorted.
    """

    dim: int
    vertices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.dim < 1:
            raise InputFormatError("polytope dimension must be positive")
        vertices = tuple(sorted(set(self.vertices), key=lex_key))
        if vertices:
            check_same_dim(vertices, self.dim)
        object.__setattr__(self, 'vertices', vertices)

    @cached_property
    def faces(self) -> Optional[FaceLattice]:
        """Face lattice for dim <= 3, None above (computed on first access)."""
        if self.dim > 3:
            return None
        from newton_forge.modules.geometry_kernel import face_lattice
        return face_lattice(self)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def is_point(self) -> bool:
        return len(self.vertices) == 1

    def lexmin(self) -> RatVec:
        return self.vertices[0]

    def translate(self, offset: RatVec) -> Polytope:
        if offset.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {offset.dim}")
        return Polytope(self.dim, tuple(v + offset for v in self.vertices))

    def scale(self, factor) -> Polytope:
        """Positive or zero dilation about the origin."""
        return Polytope(self.dim, tuple(v.scale(factor) for v in self.vertices))

    def normalized(self) -> Polytope:
        """Translate so the lexicographically smallest vertex sits at the origin."""
        return self.translate(-self.lexmin())

    def affine_dimension(self) -> int:
        return linear.affine_rank([v.coords for v in self.vertices])

    def validate(self):
        """
        Check that every listed vertex is extreme.

        Returns:
            tuple: (is_valid, error_message)
        """
        if not self.vertices:
            return False, "Polytope must have at least one vertex"
        for i, v in enumerate(self.vertices):
            others = [w.coords for j, w in enumerate(self.vertices) if j != i]
            if others and linear.in_convex_hull(v.coords, others):
                return False, f"Vertex {v} lies in the hull of the other vertices"
        return True, ""

    def to_dict(self) -> dict:
        """
        Convert the polytope to its canonical JSON form.

        Returns:
            dict: {"dim": n, "vertices": [["p/q", ...], ...]}
        """
        return {
            'dim': self.dim,
            'vertices': [v.to_list() for v in self.vertices],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Polytope:
        """
        Create a Polytope from JSON data; the vertex list is re-hulled.

        Args:
            data (dict): Dictionary with "dim" and "vertices".

        Returns:
            Polytope: The convex hull of the listed points.
        """
        from newton_forge.modules.geometry_kernel import convex_hull

        try:
            dim = int(data['dim'])
            points = [RatVec.from_list(p) for p in data['vertices']]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed polytope: {exc}") from exc
        return convex_hull(points, dim)

    def __str__(self):
        return f"Polytope(dim={self.dim}, {len(self.vertices)} vertices)"


@dataclass(frozen=True)
class OrientedEdgeSet:
    """
    Edges of a polytope oriented so that head - tail is non-negative.

    Attributes:
        edges (tuple): (tail, head) RatVec pairs, sorted.
    """

    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'edges', tuple(sorted(self.edges, key=lambda e: (e[0].coords, e[1].coords))))

    def __len__(self):
        return len(self.edges)

    def to_dict(self) -> dict:
        return {'edges': [[tail.to_list(), head.to_list()] for tail, head in self.edges]}


@dataclass(frozen=True)
class MixedEdge:
    """Witness that a polytope has no positive orientation: p - q has entries of both signs."""

    p: RatVec
    q: RatVec

    @property
    def direction(self) -> RatVec:
        return self.p - self.q

    def to_dict(self) -> dict:
        return {'p': self.p.to_list(), 'q': self.q.to_list(), 'direction': self.direction.to_list()}


@dataclass(frozen=True)
class DecompositionPart:
    """
    One Minkowski summand of a polygon decomposition.

    Attributes:
        shape (str): 'segment' or 'triangle'.
        polytope (Polytope): The part, translated so its lex-min vertex is the origin.
    """

    shape: str
    polytope: Polytope

    def to_dict(self) -> dict:
        return {'shape': self.shape, **self.polytope.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> DecompositionPart:
        try:
            shape = data['shape']
        except KeyError as exc:
            raise InputFormatError("decomposition part without a shape") from exc
        if shape not in ('segment', 'triangle'):
            raise InputFormatError(f"unknown part shape {shape!r}")
        return cls(shape, Polytope.from_dict(data))
