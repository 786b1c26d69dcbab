from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from newton_forge.models.polytope import Polytope
from newton_forge.models.ratvec import RatVec, check_same_dim, lex_key
from newton_forge.utils.errors import DimensionMismatchError, EmptyInputError, InputFormatError
from newton_forge.utils.rational import format_rational, parse_rational


@dataclass(frozen=True)
class CpwlFn:
    """
    Homogeneous convex CPWL function F(x) = max_i <v_i, x>.

    Attributes:
        dim (int): Number of variables.
        generators (tuple): Linear forms v_i as RatVec, deduplicated and lex-sorted.
    """

    dim: int
    generators: tuple

    def __post_init__(self):
        generators = tuple(sorted(set(self.generators), key=lex_key))
        if not generators:
            raise EmptyInputError("a CPWL function needs at least one generator")
        check_same_dim(generators, self.dim)
        object.__setattr__(self, 'generators', generators)

    @classmethod
    def linear(cls, coefficients) -> CpwlFn:
        vector = coefficients if isinstance(coefficients, RatVec) else RatVec(tuple(coefficients))
        return cls(vector.dim, (vector,))

    @classmethod
    def max_n(cls, n: int) -> CpwlFn:
        """MAX_n(x) = max_i x_i."""
        return cls(n, tuple(RatVec.unit(n, i) for i in range(n)))

    @classmethod
    def m_n(cls, n: int) -> CpwlFn:
        """
        m_n, defined by m_0 = 0 and m_k = relu(x_k + m_{k-1}(x_1, ..., x_{k-1})).

        Its generators are 0 and the suffix sums e_j + ... + e_n: an orthoscheme.
        """
        generators = [RatVec.zero(n)]
        for j in range(n):
            generators.append(RatVec(tuple(1 if i >= j else 0 for i in range(n))))
        return cls(n, tuple(generators))

    def validate(self):
        """
        Returns:
            tuple: (is_valid, error_message)
        """
        for v in self.generators:
            if v.dim != self.dim:
                return False, f"Generator {v} does not have dimension {self.dim}"
        return True, ""

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'generators': [v.to_list() for v in self.generators],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CpwlFn:
        """
        Create a CpwlFn from JSON; nonzero biases belong to AffineMax instead.
        """
        try:
            dim = int(data['dim'])
            generators = tuple(RatVec.from_list(v) for v in data['generators'])
            biases = [parse_rational(b) for b in data.get('biases') or []]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed CPWL function: {exc}") from exc
        if any(b != 0 for b in biases):
            raise InputFormatError("function has nonzero biases; load it as an AffineMax")
        return cls(dim, generators)

    def __str__(self):
        terms = ', '.join(str(v) for v in self.generators)
        return f"max<{terms}>"


@dataclass(frozen=True)
class SubgradientSet:
    """
    The subdifferential of a homogeneous CPWL function at a point.

    Attributes:
        carrier (Polytope): The face of N(F) active at x (all of N(F) at x = 0).
    """

    carrier: Polytope

    @property
    def vertices(self):
        return self.carrier.vertices

    def to_dict(self) -> dict:
        return self.carrier.to_dict()


@dataclass(frozen=True)
class AffineMax:
    """
    Convex CPWL function with affine pieces: max_i (<a_i, x> + c_i).

    Attributes:
        dim (int): Number of variables.
        pieces (tuple): (slope RatVec, bias Fraction) pairs, deduplicated.
    """

    dim: int
    pieces: tuple

    def __post_init__(self):
        pieces = tuple(sorted({(slope, parse_rational(bias)) for slope, bias in self.pieces},
                              key=lambda piece: (piece[0].coords, piece[1])))
        if not pieces:
            raise EmptyInputError("an affine max needs at least one piece")
        check_same_dim([slope for slope, _ in pieces], self.dim)
        object.__setattr__(self, 'pieces', pieces)

    @classmethod
    def from_cpwl(cls, fn: CpwlFn) -> AffineMax:
        return cls(fn.dim, tuple((v, Fraction(0)) for v in fn.generators))

    @classmethod
    def affine(cls, slope, bias=0) -> AffineMax:
        vector = slope if isinstance(slope, RatVec) else RatVec(tuple(slope))
        return cls(vector.dim, ((vector, bias),))

    @property
    def is_homogeneous(self) -> bool:
        return all(bias == 0 for _, bias in self.pieces)

    def evaluate(self, x: RatVec) -> Fraction:
        if x.dim != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {x.dim}")
        return max(slope.dot(x) + bias for slope, bias in self.pieces)

    def active_pieces(self, x: RatVec):
        """Pieces attaining the maximum at x."""
        values = [slope.dot(x) + bias for slope, bias in self.pieces]
        top = max(values)
        return [piece for piece, value in zip(self.pieces, values) if value == top]

    def restrict_to_line(self, origin: RatVec, direction: RatVec) -> PiecewiseLinear1D:
        """
        The function t -> F(origin + t * direction) on [0, 1].

        Returns:
            PiecewiseLinear1D: Its knots.
        """
        lines = [(slope.dot(direction), slope.dot(origin) + bias) for slope, bias in self.pieces]
        return PiecewiseLinear1D.from_lines(lines)

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'generators': [slope.to_list() for slope, _ in self.pieces],
            'biases': [format_rational(bias) for _, bias in self.pieces],
        }

    @classmethod
    def from_dict(cls, data: dict) -> AffineMax:
        try:
            dim = int(data['dim'])
            slopes = [RatVec.from_list(v) for v in data['generators']]
            biases = data.get('biases') or ['0'] * len(slopes)
            if len(biases) != len(slopes):
                raise ValueError("generators and biases differ in length")
            pieces = tuple(zip(slopes, (parse_rational(b) for b in biases)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed affine max: {exc}") from exc
        return cls(dim, pieces)

    def __str__(self):
        return f"AffineMax(dim={self.dim}, {len(self.pieces)} pieces)"


@dataclass(frozen=True)
class PiecewiseLinear1D:
    """
    Continuous piecewise linear function on [0, 1] given by its knots.

    Attributes:
        knots (tuple): (t, value) pairs with t strictly increasing from 0 to 1.
    """

    knots: tuple

    def __post_init__(self):
        knots = tuple((parse_rational(t), parse_rational(y)) for t, y in self.knots)
        if len(knots) < 2 or knots[0][0] != 0 or knots[-1][0] != 1:
            raise InputFormatError("knots must start at 0 and end at 1")
        if any(a[0] >= b[0] for a, b in zip(knots, knots[1:])):
            raise InputFormatError("knot positions must be strictly increasing")
        object.__setattr__(self, 'knots', knots)

    @classmethod
    def from_lines(cls, lines) -> PiecewiseLinear1D:
        """
        Upper envelope of lines t -> a t + b on [0, 1].

        Args:
            lines (list): (a, b) pairs.
        """
        lines = [(parse_rational(a), parse_rational(b)) for a, b in lines]
        breakpoints = {Fraction(0), Fraction(1)}
        for (a1, b1), (a2, b2) in combinations(lines, 2):
            if a1 != a2:
                t = (b2 - b1) / (a1 - a2)
                if 0 < t < 1:
                    breakpoints.add(t)
        knots = [(t, max(a * t + b for a, b in lines)) for t in sorted(breakpoints)]
        return cls(tuple(_drop_collinear(knots)))

    def slopes(self):
        return [(y2 - y1) / (t2 - t1) for (t1, y1), (t2, y2) in zip(self.knots, self.knots[1:])]

    def is_convex(self) -> bool:
        slopes = self.slopes()
        return all(s1 <= s2 for s1, s2 in zip(slopes, slopes[1:]))

    def evaluate(self, t) -> Fraction:
        t = parse_rational(t)
        if not 0 <= t <= 1:
            raise InputFormatError(f"{t} is outside [0, 1]")
        for (t1, y1), (t2, y2) in zip(self.knots, self.knots[1:]):
            if t1 <= t <= t2:
                return y1 + (y2 - y1) * (t - t1) / (t2 - t1)
        return self.knots[-1][1]

    def subgradient(self, t):
        """
        One-sided slopes at t as an interval (left, right); one-sided at the ends.
        """
        t = parse_rational(t)
        slopes = self.slopes()
        positions = [knot[0] for knot in self.knots]
        for index, (t1, t2) in enumerate(zip(positions, positions[1:])):
            if t1 < t < t2:
                return slopes[index], slopes[index]
            if t == t1:
                left = slopes[index - 1] if index > 0 else slopes[index]
                return left, slopes[index]
        return slopes[-1], slopes[-1]

    def to_dict(self) -> dict:
        return {'knots': [[format_rational(t), format_rational(y)] for t, y in self.knots]}

    @classmethod
    def from_dict(cls, data: dict) -> PiecewiseLinear1D:
        try:
            return cls(tuple((t, y) for t, y in data['knots']))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"malformed 1D function: {exc}") from exc


def _drop_collinear(knots):
    result = [knots[0]]
    for index in range(1, len(knots) - 1):
        (t0, y0), (t1, y1), (t2, y2) = result[-1], knots[index], knots[index + 1]
        if (y1 - y0) * (t2 - t1) != (y2 - y1) * (t1 - t0):
            result.append(knots[index])
    result.append(knots[-1])
    return result


@dataclass(frozen=True)
class IsotonicityWitness:
    """
    A pair x <= y whose subgradients are not ordered.

    Attributes:
        x (RatVec): Lower point.
        y (RatVec): Upper point, y >= x componentwise.
        reason (str): Human readable explanation.
        edge (MixedEdge, optional): The edge of N(F) the pair was built from.
    """

    x: RatVec
    y: RatVec
    reason: str
    edge: object = None

    def to_dict(self) -> dict:
        data = {'x': self.x.to_list(), 'y': self.y.to_list(), 'reason': self.reason}
        if self.edge is not None:
            data['edge'] = self.edge.to_dict()
        return data


@dataclass(frozen=True)
class SlopeWitness:
    """
    Points whose slopes sit within 8 * integral of a reference slope a.

    Attributes:
        x (Fraction): Point with slope g_x <= a + bound.
        x_prime (Fraction): Point with slope g_x' >= a - bound.
        g_x (Fraction): Slope chosen at x.
        g_x_prime (Fraction): Slope chosen at x_prime.
        integral (Fraction): Exact integral of |f - (a y + b)| over [0, 1].
        bound (Fraction): 8 * integral.
    """

    x: Fraction
    x_prime: Fraction
    g_x: Fraction
    g_x_prime: Fraction
    integral: Fraction
    bound: Fraction

    def to_dict(self) -> dict:
        return {key: format_rational(getattr(self, key))
                for key in ('x', 'x_prime', 'g_x', 'g_x_prime', 'integral', 'bound')}


@dataclass(frozen=True)
class InapproximabilityCertificate:
    """
    Exact distance of a planar candidate from MAX_2 on the unit square.

    Attributes:
        mean (Fraction): Mean of |F - MAX_2| over [0, 1]^2.
        lower_box_integral (Fraction): Integral over [1/4, 1/2] x [0, 1/4].
        upper_box_integral (Fraction): Integral over [1/2, 3/4] x [3/4, 1].
        epsilon (Fraction): Threshold the mean is compared with.
        isotonic (bool): Whether the candidate passed the sampled isotonicity search.
    """

    mean: Fraction
    lower_box_integral: Fraction
    upper_box_integral: Fraction
    epsilon: Fraction
    isotonic: bool

    @property
    def exceeds_epsilon(self) -> bool:
        return self.mean >= self.epsilon

    def to_dict(self) -> dict:
        return {
            'mean': format_rational(self.mean),
            'lower_box_integral': format_rational(self.lower_box_integral),
            'upper_box_integral': format_rational(self.upper_box_integral),
            'epsilon': format_rational(self.epsilon),
            'isotonic': self.isotonic,
            'exceeds_epsilon': self.exceeds_epsilon,
        }
