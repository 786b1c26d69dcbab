"""
Convex CPWL functions through their Newton polytopes.

A homogeneous convex CPWL function F = max_i <v_i, x> is the support function
of N(F) = conv{v_i}; evaluation, subgradients and isotonicity are all read
off that polytope. The planar integration routines also accept max-of-affine
functions (AffineMax).
"""
import logging
from fractions import Fraction
from functools import lru_cache

from newton_forge.models.cpwl_fn import (
    AffineMax,
    CpwlFn,
    InapproximabilityCertificate,
    IsotonicityWitness,
    PiecewiseLinear1D,
    SlopeWitness,
    SubgradientSet,
)
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import geometry_kernel as gk
from newton_forge.utils import linear
from newton_forge.utils.config import load_config
from newton_forge.utils.errors import (
    CertificateError,
    DimensionMismatchError,
    InputFormatError,
    NotConvexError,
)
from newton_forge.utils.rational import parse_rational
from newton_forge.utils.sampling import random_coords, random_ordered_pair

logger = logging.getLogger(__name__)

UNIT_BOX = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))


def evaluate(fn, x):
    """
    Evaluate F at x exactly.

    Args:
        fn (CpwlFn or AffineMax): Function.
        x (RatVec): Point.

    Returns:
        Fraction: F(x).
    """
    if isinstance(fn, AffineMax):
        return fn.evaluate(x)
    if x.dim != fn.dim:
        raise DimensionMismatchError(f"function has dimension {fn.dim}, point {x.dim}")
    if x.is_zero():
        return Fraction(0)
    return max(v.dot(x) for v in fn.generators)


@lru_cache(maxsize=1024)
def newton_polytope(fn):
    """N(F) = conv of the generators."""
    return gk.convex_hull(fn.generators, fn.dim)


def from_polytope(polytope):
    """The support function of a polytope, as a CpwlFn on its vertices."""
    return CpwlFn(polytope.dim, polytope.vertices)


def reduced(fn):
    """Drop generators that are not vertices of N(F); the function is unchanged."""
    return from_polytope(newton_polytope(fn))


def subgradient(fn, x):
    """
    The subdifferential of F at x.

    Args:
        fn (CpwlFn): Function.
        x (RatVec): Point.

    Returns:
        SubgradientSet: support_face(N(F), x), or N(F) itself at x = 0.
    """
    if x.dim != fn.dim:
        raise DimensionMismatchError(f"function has dimension {fn.dim}, point {x.dim}")
    polytope = newton_polytope(fn)
    if x.is_zero():
        return SubgradientSet(polytope)
    return SubgradientSet(gk.support_face(polytope, x))


def set_leq(A, B):
    """
    The set order A <= B: every a in A lies below some b in B and every b in B above some a in A.

    Both conditions reduce to vertices by convexity; each vertex query is an exact LP.

    Args:
        A (Polytope or SubgradientSet): Lower set.
        B (Polytope or SubgradientSet): Upper set.

    Returns:
        bool: Whether A <= B.
    """
    A = A.carrier if isinstance(A, SubgradientSet) else A
    B = B.carrier if isinstance(B, SubgradientSet) else B
    if A.dim != B.dim:
        raise DimensionMismatchError(f"dimension {A.dim} vs {B.dim}")
    upper = [b.coords for b in B.vertices]
    lower = [a.coords for a in A.vertices]
    return (all(linear.exists_dominating(a.coords, upper) for a in A.vertices)
            and all(linear.exists_dominated(b.coords, lower) for b in B.vertices))


def _edge_normal(polytope, p, q):
    """A direction whose support face is exactly the edge [p, q]."""
    direction = p - q
    coords = [v.coords for v in polytope.vertices]
    k = linear.affine_rank(coords)

    if k == 1:
        axis = next(i for i, c in enumerate(direction) if c != 0)
        other = (axis + 1) % polytope.dim
        normal = [Fraction(0)] * polytope.dim
        normal[other] = direction[axis]
        normal[axis] = -direction[other]
        return RatVec(tuple(normal))

    if k == 2:
        if polytope.dim == 2:
            normal = RatVec.of(-direction[1], direction[0])
        else:
            a, b, c = (polytope.vertices[i] for i in polytope.faces.two_faces[0][:3])
            plane = gk.cross3((b - a).coords, (c - a).coords)
            normal = RatVec(gk.cross3(direction.coords, plane))
        if normal.dot(p) < gk.support_value(polytope, normal):
            normal = -normal
        return normal

    i, j = polytope.vertices.index(p), polytope.vertices.index(q)
    lattice = polytope.faces
    normal = RatVec.zero(polytope.dim)
    for cycle, facet_normal in zip(lattice.two_faces, lattice.normals):
        ring = list(cycle)
        pairs = set(zip(ring, ring[1:] + ring[:1]))
        if (i, j) in pairs or (j, i) in pairs:
            normal = normal + facet_normal
    return normal


def isotonic_check(fn):
    """
    Decide whether the subgradient of F is isotonic (dim <= 3).

    Success means N(F) has positive edges. On failure a mixed edge [p, q] of
    N(F) is turned into an explicit pair x <= y with incomparable subgradients:
    v is a positive vector with <v, p - q> > 0, z a direction supporting
    exactly the edge, and x = z - delta v, y = z + delta v.

    Args:
        fn (CpwlFn): Function.

    Returns:
        tuple: (True, OrientedEdgeSet) or (False, IsotonicityWitness).
    """
    polytope = newton_polytope(fn)
    ok, payload = gk.positive_edges(polytope)
    if ok:
        return True, payload

    edge = payload
    p, q = edge.p, edge.q
    d = edge.direction
    positive_mass = sum((c for c in d if c > 0), Fraction(0))
    negative_mass = -sum((c for c in d if c < 0), Fraction(0))
    weights = [negative_mass if c > 0 else positive_mass if c < 0 else Fraction(1) for c in d]
    alpha = 1 + max(abs(c) / w for c, w in zip(d, weights))
    v = d + RatVec(tuple(alpha * w for w in weights))

    z = _edge_normal(polytope, p, q)
    face = gk.support_face(polytope, z)
    if set(face.vertices) != {p, q}:
        raise CertificateError(f"no direction supports exactly the edge {q} -> {p}", step='edge_normal')

    delta = Fraction(1)
    for _ in range(256):
        x = z - v.scale(delta)
        y = z + v.scale(delta)
        if gk.support_face(polytope, x).vertices == (q,) and gk.support_face(polytope, y).vertices == (p,):
            reason = f"edge {q} -> {p} of N(F) has mixed direction {d}"
            logger.debug("isotonicity witness at delta=%s: %s", delta, reason)
            return False, IsotonicityWitness(x, y, reason, edge)
        delta /= 2
    raise CertificateError("witness perturbation did not separate the edge endpoints", step='delta')


def sample_isotonicity(fn, rng, pairs=None):
    """
    Search sampled pairs x <= y for a violation of subgradient(x) <= subgradient(y).

    Args:
        fn (CpwlFn): Function.
        rng (numpy.random.Generator): Random source.
        pairs (int, optional): Number of pairs; defaults to sampling.isotonic_pairs.

    Returns:
        IsotonicityWitness or None: The first violation found.
    """
    settings = load_config()['sampling']
    pairs = pairs or settings['isotonic_pairs']
    low, high = settings['coordinate_low'], settings['coordinate_high']
    for _ in range(pairs):
        x, y = random_ordered_pair(rng, fn.dim, low, high)
        x, y = RatVec(tuple(x)), RatVec(tuple(y))
        if not set_leq(subgradient(fn, x), subgradient(fn, y)):
            return IsotonicityWitness(x, y, "sampled pair with unordered subgradients")
    return None


def subgradient_inequality_violation(fn, rng, pairs=None):
    """
    Search sampled pairs (x, y) for a vertex g of subgradient(x) with F(y) < F(x) + <g, y - x>.

    Args:
        fn (CpwlFn): Function.
        rng (numpy.random.Generator): Random source.
        pairs (int, optional): Number of pairs; defaults to sampling.subgradient_pairs.

    Returns:
        dict or None: x, y and g of the first violation.
    """
    settings = load_config()['sampling']
    pairs = pairs or settings['subgradient_pairs']
    low, high = settings['coordinate_low'], settings['coordinate_high']
    for _ in range(pairs):
        x = RatVec(tuple(random_coords(rng, fn.dim, low, high)))
        y = RatVec(tuple(random_coords(rng, fn.dim, low, high)))
        value = evaluate(fn, x)
        for g in subgradient(fn, x).vertices:
            if evaluate(fn, y) < value + g.dot(y - x):
                return {'x': x.to_list(), 'y': y.to_list(), 'g': g.to_list()}
    return None


def non_negative_subgradients(fn):
    """
    Every subgradient of F is >= 0 iff every vertex of N(F) is.

    Returns:
        tuple: (is_valid, list of negative vertices)
    """
    offending = [v for v in newton_polytope(fn).vertices if not v.is_nonnegative()]
    return not offending, offending


def cpwl_scale_add(f1, f2, a1=1, a2=1):
    """
    a1 F1 + a2 F2 for a1, a2 >= 0, built as a1 N(F1) + a2 N(F2).

    Raises:
        NotConvexError: For a negative coefficient.
    """
    a1, a2 = parse_rational(a1), parse_rational(a2)
    if a1 < 0 or a2 < 0:
        raise NotConvexError("negative combinations leave the convex cone")
    if f1.dim != f2.dim:
        raise DimensionMismatchError(f"dimension {f1.dim} vs {f2.dim}")
    total = gk.minkowski_sum(newton_polytope(f1).scale(a1), newton_polytope(f2).scale(a2))
    return from_polytope(total)


def cpwl_relu(fn):
    """relu(F) = max(F, 0): N becomes conv({0} union N(F))."""
    return CpwlFn(fn.dim, fn.generators + (RatVec.zero(fn.dim),))


def cpwl_max(f1, f2):
    """max(F1, F2): union of generators."""
    if f1.dim != f2.dim:
        raise DimensionMismatchError(f"dimension {f1.dim} vs {f2.dim}")
    return CpwlFn(f1.dim, f1.generators + f2.generators)


def _as_affine_max(fn):
    return AffineMax.from_cpwl(fn) if isinstance(fn, CpwlFn) else fn


def _signed_area(polygon):
    total = Fraction(0)
    for (x1, y1), (x2, y2) in zip(polygon, polygon[1:] + polygon[:1]):
        total += x1 * y2 - x2 * y1
    return total / 2


def clip_polygon(polygon, w, c):
    """
    Sutherland-Hodgman clip of a convex polygon to {x : <w, x> + c >= 0}.

    Args:
        polygon (list): Vertices as (x, y) Fraction tuples in cyclic order.
        w (tuple): Half-plane normal.
        c (Fraction): Offset.

    Returns:
        list: The clipped polygon (possibly with fewer than 3 vertices).
    """
    if not polygon:
        return []
    result = []
    values = [w[0] * px + w[1] * py + c for px, py in polygon]
    for index, point in enumerate(polygon):
        nxt = (index + 1) % len(polygon)
        value, next_value = values[index], values[nxt]
        if value >= 0:
            result.append(point)
        if (value > 0 and next_value < 0) or (value < 0 and next_value > 0):
            t = value / (value - next_value)
            other = polygon[nxt]
            result.append((point[0] + t * (other[0] - point[0]), point[1] + t * (other[1] - point[1])))
    deduped = []
    for point in result:
        if not deduped or deduped[-1] != point:
            deduped.append(point)
    if len(deduped) > 1 and deduped[0] == deduped[-1]:
        deduped.pop()
    return deduped


def _region(fn, index, polygon):
    """Clip polygon to the region where piece index attains the max."""
    slope, bias = fn.pieces[index]
    for other, (other_slope, other_bias) in enumerate(fn.pieces):
        if other == index:
            continue
        difference = slope - other_slope
        polygon = clip_polygon(polygon, difference.coords, bias - other_bias)
        if len(polygon) < 3:
            return []
    return polygon


def _box_polygon(box):
    (x0, x1), (y0, y1) = ((parse_rational(a), parse_rational(b)) for a, b in box)
    if x0 >= x1 or y0 >= y1:
        raise InputFormatError(f"box must have positive width and height: {box}")
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)], (x1 - x0) * (y1 - y0)


def _integrate_affine(polygon, w, c):
    """Integral of <w, x> + c over a convex polygon, by a fan from the lex-min vertex."""
    start = polygon.index(min(polygon))
    ring = polygon[start:] + polygon[:start]
    total = Fraction(0)
    for b, d in zip(ring[1:], ring[2:]):
        area = abs(_signed_area([ring[0], b, d]))
        mean = sum(w[0] * px + w[1] * py + c for px, py in (ring[0], b, d)) / 3
        total += area * mean
    return total


def integrate_abs_diff(f, g, box=UNIT_BOX):
    """
    Exact mean of |F - G| over an axis-parallel box in the plane.

    The box is cut into the common linear regions of F and G; each cell is
    split along the zero line of the affine difference and both halves are
    integrated in closed form.

    Args:
        f (CpwlFn or AffineMax): First function (dim 2).
        g (CpwlFn or AffineMax): Second function (dim 2).
        box (tuple): ((x_min, x_max), (y_min, y_max)).

    Returns:
        Fraction: (1 / area) * integral of |F - G| over the box.
    """
    f, g = _as_affine_max(f), _as_affine_max(g)
    if f.dim != 2 or g.dim != 2:
        raise DimensionMismatchError("planar integration needs two functions of dimension 2")
    rectangle, area = _box_polygon(box)

    total = Fraction(0)
    for i in range(len(f.pieces)):
        f_cell = _region(f, i, rectangle)
        if not f_cell:
            continue
        for k in range(len(g.pieces)):
            cell = _region(g, k, f_cell)
            if not cell:
                continue
            w = (f.pieces[i][0] - g.pieces[k][0]).coords
            c = f.pieces[i][1] - g.pieces[k][1]
            upper = clip_polygon(cell, w, c)
            lower = clip_polygon(cell, (-w[0], -w[1]), -c)
            if len(upper) >= 3:
                total += _integrate_affine(upper, w, c)
            if len(lower) >= 3:
                total -= _integrate_affine(lower, w, c)
    return total / area


def linear_regions(fn, box=UNIT_BOX):
    """
    The linear regions of a planar function inside a box.

    Returns:
        list: (piece, polygon) pairs for pieces active on a region of positive area.
    """
    fn = _as_affine_max(fn)
    if fn.dim != 2:
        raise DimensionMismatchError("linear regions are drawn for planar functions")
    rectangle, _ = _box_polygon(box)
    regions = []
    for index, piece in enumerate(fn.pieces):
        polygon = _region(fn, index, rectangle)
        if polygon and _signed_area(polygon) != 0:
            regions.append((piece, polygon))
    return regions


def integral_abs_diff(f, g, box):
    """The integral (not the mean) of |F - G| over the box."""
    _, area = _box_polygon(box)
    return integrate_abs_diff(f, g, box) * area


def _integrate_abs_linear(t0, t1, y0, y1):
    """Integral over [t0, t1] of |h| for the linear h with h(t0) = y0, h(t1) = y1."""
    width = t1 - t0
    if (y0 >= 0 and y1 >= 0) or (y0 <= 0 and y1 <= 0):
        return width * abs(y0 + y1) / 2
    crossing = width * abs(y0) / (abs(y0) + abs(y1))
    return (crossing * abs(y0) + (width - crossing) * abs(y1)) / 2


def integrate_abs_diff_1d(f, a, b):
    """Exact integral over [0, 1] of |f(y) - (a y + b)|."""
    total = Fraction(0)
    for (t0, v0), (t1, v1) in zip(f.knots, f.knots[1:]):
        total += _integrate_abs_linear(t0, t1, v0 - (a * t0 + b), v1 - (a * t1 + b))
    return total


def slope_witness_1d(f, a, b):
    """
    Find points whose slopes are within 8 * integral of a.

    For convex f the smallest slope sits on the first piece and the largest on
    the last; those are the candidates, and the inequalities are checked.

    Args:
        f (PiecewiseLinear1D): Convex piecewise linear function on [0, 1].
        a (Fraction): Reference slope.
        b (Fraction): Reference intercept.

    Returns:
        SlopeWitness: The two points, their slopes and the exact bound.

    Raises:
        NotConvexError: If the slopes of f decrease somewhere.
    """
    if not isinstance(f, PiecewiseLinear1D):
        raise InputFormatError("slope witnesses need a PiecewiseLinear1D")
    if not f.is_convex():
        raise NotConvexError("slopes decrease; the function is not convex")
    a, b = parse_rational(a), parse_rational(b)
    integral = integrate_abs_diff_1d(f, a, b)
    bound = 8 * integral
    slopes = f.slopes()
    positions = [knot[0] for knot in f.knots]

    x = (positions[0] + positions[1]) / 2
    x_prime = (positions[-2] + positions[-1]) / 2
    g_x, g_x_prime = slopes[0], slopes[-1]
    if g_x > a + bound or g_x_prime < a - bound:
        raise CertificateError("slope bound violated", step='slope_witness_1d')
    return SlopeWitness(x, x_prime, g_x, g_x_prime, integral, bound)


def _mass_ratio(t):
    """Zero-mean weights for the test function sign(|u - v| - t) on the unit square."""
    far = (1 - t) ** 2
    near = 1 - far
    far_moment = Fraction(1, 3) - t ** 2 + Fraction(2, 3) * t ** 3
    near_moment = t ** 2 - Fraction(2, 3) * t ** 3
    if near <= far:
        return near / far, Fraction(1), far_moment, near_moment
    return Fraction(1), far / near, far_moment, near_moment


def affine_gap_lower_bound(side, t=None):
    """
    Lower bound on min over affine L of mean |MAX_2 - L| on a square of the given side.

    The test function phi = a on {|x1 - x2| >= t side} and -b elsewhere has
    zero mean, is orthogonal to x1 and x2 by symmetry and satisfies |phi| <= 1,
    so the mean of |MAX_2 - L| is at least E[MAX_2 phi] = E[|x1 - x2| phi] / 2.

    Args:
        side (Fraction): Side length of the square.
        t (Fraction, optional): Relative threshold in (0, 1); defaults to analysis.affine_gap_threshold.

    Returns:
        Fraction: The bound (side / 12 for t = 1/4).
    """
    if t is None:
        t = load_config()['analysis']['affine_gap_threshold']
    side, t = parse_rational(side), parse_rational(t)
    if not 0 < t < 1:
        raise InputFormatError(f"threshold must lie in (0, 1), got {t}")
    weight_far, weight_near, far_moment, near_moment = _mass_ratio(t)
    return side * (weight_far * far_moment - weight_near * near_moment) / 2


LOWER_BOX = ((Fraction(1, 4), Fraction(1, 2)), (Fraction(0), Fraction(1, 4)))
UPPER_BOX = ((Fraction(1, 2), Fraction(3, 4)), (Fraction(3, 4), Fraction(1)))


def affine_subgradient(fn, x):
    """Subdifferential of an AffineMax at x: hull of the active slopes."""
    return gk.convex_hull([slope for slope, _ in fn.active_pieces(x)], fn.dim)


def sample_isotonicity_affine(fn, rng, pairs, box=UNIT_BOX):
    """Sampled isotonicity search for an AffineMax inside a box."""
    (x0, x1), (y0, y1) = box
    for _ in range(pairs):
        lower = [x0 + (x1 - x0) * Fraction(int(rng.integers(0, 65)), 64),
                 y0 + (y1 - y0) * Fraction(int(rng.integers(0, 65)), 64)]
        upper = [lower[0] + (x1 - lower[0]) * Fraction(int(rng.integers(0, 65)), 64),
                 lower[1] + (y1 - lower[1]) * Fraction(int(rng.integers(0, 65)), 64)]
        x, y = RatVec(tuple(lower)), RatVec(tuple(upper))
        if not set_leq(affine_subgradient(fn, x), affine_subgradient(fn, y)):
            return IsotonicityWitness(x, y, "sampled pair with unordered subgradients")
    return None


def inapproximability_certificate(fn, rng, pairs=None, epsilon=None):
    """
    Exact distance report of a planar candidate F from MAX_2.

    Args:
        fn (CpwlFn or AffineMax): Candidate (dim 2).
        rng (numpy.random.Generator): Random source for the isotonicity search.
        pairs (int, optional): Sampled pairs for the search.
        epsilon (Fraction, optional): Threshold; defaults to analysis.epsilon.

    Returns:
        InapproximabilityCertificate: Mean over [0,1]^2, the two sub-box integrals and flags.
    """
    fn = _as_affine_max(fn)
    config = load_config()
    epsilon = parse_rational(epsilon or config['analysis']['epsilon'])
    pairs = pairs or config['sampling']['isotonic_pairs']
    target = CpwlFn.max_n(2)
    certificate = InapproximabilityCertificate(
        mean=integrate_abs_diff(fn, target, UNIT_BOX),
        lower_box_integral=integral_abs_diff(fn, target, LOWER_BOX),
        upper_box_integral=integral_abs_diff(fn, target, UPPER_BOX),
        epsilon=epsilon,
        isotonic=sample_isotonicity_affine(fn, rng, pairs) is None,
    )
    logger.info("inapproximability: mean=%s isotonic=%s", certificate.mean, certificate.isotonic)
    return certificate


def duality_holds(fn, directions):
    """eval(F, u) == h(N(F), u) for every nonzero direction given."""
    polytope = newton_polytope(fn)
    return all(evaluate(fn, u) == gk.support_value(polytope, u) for u in directions if not u.is_zero())
