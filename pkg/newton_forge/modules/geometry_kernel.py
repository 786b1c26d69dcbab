"""
Exact convex geometry on rational point sets.

Hulls are computed on the affine hull of the input: sets of affine dimension
at most 3 are projected onto spanning coordinates (an affine isomorphism, so
extreme points are preserved) and hulled combinatorially; anything larger is
filtered point by point with an exact membership LP.
"""
import logging
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import NamedTuple

from newton_forge.models.polytope import FaceLattice, MixedEdge, OrientedEdgeSet, Polytope
from newton_forge.models.ratvec import RatVec, check_same_dim, lex_key
from newton_forge.utils import linear
from newton_forge.utils.errors import (
    DimensionMismatchError,
    EmptyInputError,
    FaceDataUnavailableError,
    ZeroDirectionError,
)
from newton_forge.utils.rational import lcm_of_denominators

logger = logging.getLogger(__name__)


class Facet(NamedTuple):
    """A 2-face of a full-dimensional 3-polytope: outward integer normal, offset, ccw cycle."""

    normal: tuple
    offset: int
    cycle: tuple


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _primitive(vector):
    divisor = gcd(*vector)
    if divisor == 0:
        return tuple(vector)
    return tuple(c // divisor for c in vector)


def _integer_points(points):
    scale = lcm_of_denominators(c for p in points for c in p)
    return [tuple(int(c * scale) for c in p) for p in points]


def _spanning_coordinates(points, k):
    """Pick k coordinates on which the projection of the affine hull is injective."""
    base = points[0]
    diffs = [_sub(p, base) for p in points[1:]]
    chosen = []
    for col in range(len(base)):
        trial = chosen + [col]
        if linear.rank([[row[c] for c in trial] for row in diffs]) == len(trial):
            chosen = trial
            if len(chosen) == k:
                break
    return chosen


def hull_2d(points):
    """
    Andrew's monotone chain on exact 2D points.

    Args:
        points (list): Distinct 2D tuples.

    Returns:
        list: Indices of the extreme points, counter-clockwise from the lex-min point.
    """
    order = sorted(range(len(points)), key=lambda i: points[i])
    if len(order) <= 2:
        return order

    def chain(indices):
        result = []
        for i in indices:
            while len(result) >= 2 and _cross2(points[result[-2]], points[result[-1]], points[i]) <= 0:
                result.pop()
            result.append(i)
        return result

    lower = chain(order)
    upper = chain(reversed(order))
    return lower[:-1] + upper[:-1]


def facets_3d(points):
    """
    Enumerate the facets of a full-dimensional 3D integer point set.

    Every plane through three points is tested against all points; each plane
    is visited once and the contact set of a supporting plane is hulled in 2D.

    Args:
        points (list): Distinct integer 3-tuples with affine rank 3.

    Returns:
        list: Facet tuples, cycles counter-clockwise seen from outside.
    """
    seen = set()
    facets = []
    for i, j, k in combinations(range(len(points)), 3):
        origin = points[i]
        normal = _primitive(cross3(_sub(points[j], origin), _sub(points[k], origin)))
        if not any(normal):
            continue
        offset = _dot(normal, origin)
        sign = 1 if next(c for c in normal if c != 0) > 0 else -1
        key = (tuple(sign * c for c in normal), sign * offset)
        if key in seen:
            continue
        seen.add(key)

        above = below = False
        for q in points:
            side = _dot(normal, q) - offset
            if side > 0:
                above = True
            elif side < 0:
                below = True
            if above and below:
                break
        if above and below:
            continue
        if above:
            normal = tuple(-c for c in normal)
            offset = -offset

        contact = [m for m, q in enumerate(points) if _dot(normal, q) == offset]
        drop = next(m for m in range(3) if normal[m] != 0)
        projected = [tuple(c for axis, c in enumerate(points[m]) if axis != drop) for m in contact]
        cycle = [contact[m] for m in hull_2d(projected)]
        a, b, c = (points[m] for m in cycle[:3])
        if _dot(cross3(_sub(b, a), _sub(c, a)), normal) < 0:
            cycle = [cycle[0]] + cycle[:0:-1]
        facets.append(Facet(normal, offset, tuple(cycle)))
    logger.debug("facet enumeration: %d points, %d facets", len(points), len(facets))
    return facets


def extreme_points_lp(points):
    """
    Brute-force extremality filter: p is kept iff p is not in conv(points minus p).

    Args:
        points (list): Distinct coordinate tuples.

    Returns:
        list: Indices of extreme points.
    """
    extreme = []
    for i, p in enumerate(points):
        others = [q for j, q in enumerate(points) if j != i]
        if not others or not linear.in_convex_hull(p, others):
            extreme.append(i)
    return extreme


def _extreme_indices(coords):
    k = linear.affine_rank(coords)
    if k == 0:
        return [0]
    if k == 1:
        # on a line lexicographic order is the order along the line
        return [0, len(coords) - 1]
    if k > 3:
        return extreme_points_lp(coords)
    cols = _spanning_coordinates(coords, k)
    projected = [tuple(p[c] for c in cols) for p in coords]
    if k == 2:
        return sorted(hull_2d(projected))
    return sorted({m for facet in facets_3d(_integer_points(projected)) for m in facet.cycle})


def convex_hull(points, dim=None):
    """
    Compute the convex hull of a finite rational point set.

    Args:
        points (list): RatVec points, duplicates allowed.
        dim (int, optional): Expected ambient dimension.

    Returns:
        Polytope: Exactly the extreme points, in canonical order.

    Raises:
        EmptyInputError: If no points are given.
        DimensionMismatchError: If the points disagree on dimension.
    """
    points = list(points)
    if not points:
        raise EmptyInputError("convex hull of an empty point set")
    dim = check_same_dim(points, dim)
    unique = sorted(set(points), key=lex_key)
    keep = _extreme_indices([v.coords for v in unique])
    return Polytope(dim, tuple(unique[i] for i in keep))


@lru_cache(maxsize=4096)
def face_lattice(polytope):
    """
    Edges and 2-faces of a polytope of dimension at most 3.

    Args:
        polytope (Polytope): Input polytope.

    Returns:
        FaceLattice: Index-based face data.
    """
    if polytope.dim > 3:
        raise FaceDataUnavailableError(f"face lattice requested in dimension {polytope.dim}")
    coords = [v.coords for v in polytope.vertices]
    k = linear.affine_rank(coords)
    if k == 0:
        return FaceLattice()
    if k == 1:
        return FaceLattice(edges=((0, 1),))

    if k == 2:
        cols = _spanning_coordinates(coords, 2)
        cycle = hull_2d([tuple(p[c] for c in cols) for p in coords])
        return FaceLattice(edges=_cycle_edges([cycle]), two_faces=(tuple(cycle),), normals=(None,))

    facets = facets_3d(_integer_points(coords))
    return FaceLattice(
        edges=_cycle_edges([f.cycle for f in facets]),
        two_faces=tuple(f.cycle for f in facets),
        normals=tuple(RatVec(f.normal) for f in facets),
    )


def _cycle_edges(cycles):
    edges = set()
    for cycle in cycles:
        ring = list(cycle)
        for a, b in zip(ring, ring[1:] + ring[:1]):
            edges.add((min(a, b), max(a, b)))
    return tuple(sorted(edges))


def polytope_edges(polytope):
    """Edges of a polytope (dim <= 3) as pairs of RatVec vertices."""
    lattice = polytope.faces
    if lattice is None:
        raise FaceDataUnavailableError(f"no face data in dimension {polytope.dim}")
    return [(polytope.vertices[i], polytope.vertices[j]) for i, j in lattice.edges]


def _check_dims(P, Q):
    if P.dim != Q.dim:
        raise DimensionMismatchError(f"dimension {P.dim} vs {Q.dim}")


def minkowski_sum(P, Q):
    """
    Minkowski sum P + Q.

    Args:
        P (Polytope): First summand.
        Q (Polytope): Second summand.

    Returns:
        Polytope: Hull of all pairwise vertex sums.
    """
    _check_dims(P, Q)
    if Q.is_point():
        return P.translate(Q.lexmin())
    if P.is_point():
        return Q.translate(P.lexmin())
    return convex_hull([p + q for p in P.vertices for q in Q.vertices], P.dim)


def minkowski_combination(terms, dim):
    """
    Positive combination sum_j a_j P_j.

    Args:
        terms (list): (coefficient, Polytope) pairs.
        dim (int): Ambient dimension (for the empty sum).

    Returns:
        Polytope: The combination; the empty combination is the origin.
    """
    result = Polytope(dim, (RatVec.zero(dim),))
    for coefficient, polytope in terms:
        result = minkowski_sum(result, polytope.scale(coefficient))
    return result


def _check_direction(P, u):
    if u.dim != P.dim:
        raise DimensionMismatchError(f"direction has dimension {u.dim}, polytope {P.dim}")
    if u.is_zero():
        raise ZeroDirectionError("support queries need a nonzero direction")


def support_value(P, u):
    """
    h(P, u) = max over vertices of <v, u>.

    Args:
        P (Polytope): Polytope.
        u (RatVec): Nonzero direction.

    Returns:
        Fraction: The support value.
    """
    _check_direction(P, u)
    return max(v.dot(u) for v in P.vertices)


def support_face(P, u):
    """
    Face of P maximizing <., u>.

    Args:
        P (Polytope): Polytope.
        u (RatVec): Nonzero direction.

    Returns:
        Polytope: The supported face (its vertices are vertices of P).
    """
    _check_direction(P, u)
    values = [v.dot(u) for v in P.vertices]
    top = max(values)
    return Polytope(P.dim, tuple(v for v, value in zip(P.vertices, values) if value == top))


def positive_edges(P):
    """
    Orient every edge of P into the non-negative orthant.

    Args:
        P (Polytope): Polytope with face data (dim <= 3).

    Returns:
        tuple: (True, OrientedEdgeSet) on success, (False, MixedEdge) naming an edge
            whose direction has entries of both signs.

    Raises:
        FaceDataUnavailableError: For dim > 3.
    """
    oriented = []
    for a, b in polytope_edges(P):
        direction = b - a
        pattern = direction.sign_pattern()
        if pattern == '+':
            oriented.append((a, b))
        elif pattern == '-':
            oriented.append((b, a))
        else:
            logger.debug("mixed edge %s -> %s", a, b)
            return False, MixedEdge(b, a)
    return True, OrientedEdgeSet(tuple(oriented))


def contains_point(P, q):
    """Exact membership test q in P."""
    if q.dim != P.dim:
        raise DimensionMismatchError(f"dimension {P.dim} vs {q.dim}")
    return linear.in_convex_hull(q.coords, [v.coords for v in P.vertices])


def conv_with_point(P, q):
    """
    conv(P union {q}).

    Args:
        P (Polytope): Polytope.
        q (RatVec): Added point.

    Returns:
        Polytope: P itself when q is already in P.
    """
    if contains_point(P, q):
        return P
    return convex_hull(list(P.vertices) + [q], P.dim)


def homothetic(P, Q):
    """
    Find a >= 0 and b with P = aQ + b.

    Args:
        P (Polytope): Candidate homothet.
        Q (Polytope): Reference polytope.

    Returns:
        tuple or None: (a, b) or None when P is not a homothet of Q.
    """
    _check_dims(P, Q)
    if P.is_point():
        return Fraction(0), P.lexmin()
    if Q.is_point() or P.vertex_count != Q.vertex_count:
        return None

    # positive dilation preserves lexicographic order, so vertices pair up by index
    q_span = Q.vertices[-1] - Q.vertices[0]
    p_span = P.vertices[-1] - P.vertices[0]
    axis = next(i for i, c in enumerate(q_span) if c != 0)
    a = p_span[axis] / q_span[axis]
    if a <= 0:
        return None
    b = P.vertices[0] - Q.vertices[0].scale(a)
    for p, q in zip(P.vertices, Q.vertices):
        if p != q.scale(a) + b:
            return None
    return a, b


def equal_up_to_translation(P, Q):
    """Compare after moving each lex-min vertex to the origin."""
    return P.dim == Q.dim and P.normalized() == Q.normalized()


def project_onto_hyperplane(v, u):
    """Orthogonal projection of v onto the hyperplane u-perp."""
    if u.is_zero():
        raise ZeroDirectionError("projection needs a nonzero normal")
    return v - u.scale(v.dot(u) / u.dot(u))
