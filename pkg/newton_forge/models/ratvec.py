from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from newton_forge.utils.errors import DimensionMismatchError, EmptyInputError
from newton_forge.utils.rational import format_rational, parse_rational


@dataclass(frozen=True)
class RatVec:
    """
    Exact rational coordinate vector.

    Attributes:
        coords (tuple): Fractions in lowest terms (Fraction normalizes the sign into the numerator).
    """

    coords: tuple

    def __post_init__(self):
        coords = tuple(parse_rational(c) for c in self.coords)
        if not coords:
            raise EmptyInputError("a vector needs at least one coordinate")
        object.__setattr__(self, 'coords', coords)

    @classmethod
    def of(cls, *values) -> RatVec:
        """Build a vector from positional coordinates: RatVec.of(1, "1/2")."""
        return cls(tuple(values))

    @classmethod
    def zero(cls, dim: int) -> RatVec:
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, index: int) -> RatVec:
        """The standard basis vector e_{index+1} of length dim."""
        return cls(tuple(1 if i == index else 0 for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def _check(self, other: RatVec):
        if self.dim != other.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")

    def __add__(self, other: RatVec) -> RatVec:
        self._check(other)
        return RatVec(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: RatVec) -> RatVec:
        self._check(other)
        return RatVec(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> RatVec:
        return RatVec(tuple(-a for a in self.coords))

    def scale(self, factor) -> RatVec:
        factor = Fraction(factor)
        return RatVec(tuple(factor * a for a in self.coords))

    def dot(self, other: RatVec | Sequence) -> Fraction:
        values = other.coords if isinstance(other, RatVec) else tuple(other)
        if len(values) != self.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {len(values)}")
        return sum((a * b for a, b in zip(self.coords, values)), Fraction(0))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def is_nonnegative(self) -> bool:
        return all(a >= 0 for a in self.coords)

    def leq(self, other: RatVec) -> bool:
        """Componentwise order: self <= other in every coordinate."""
        self._check(other)
        return all(a <= b for a, b in zip(self.coords, other.coords))

    def sign_pattern(self) -> str:
        """'+' if every entry is >= 0, '-' if every entry is <= 0, 'mixed' otherwise."""
        if self.is_nonnegative():
            return '+'
        if all(a <= 0 for a in self.coords):
            return '-'
        return 'mixed'

    def drop(self, index: int) -> RatVec:
        """The vector with coordinate index removed."""
        return RatVec(self.coords[:index] + self.coords[index + 1:])

    def extend(self, value) -> RatVec:
        return RatVec(self.coords + (parse_rational(value),))

    def to_list(self) -> list:
        """Serialize as a list of "p/q" strings."""
        return [format_rational(c) for c in self.coords]

    @classmethod
    def from_list(cls, data: Iterable) -> RatVec:
        return cls(tuple(data))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, index):
        return self.coords[index]

    def __str__(self):
        return '(' + ', '.join(format_rational(c) for c in self.coords) + ')'

    def __repr__(self):
        return f"RatVec{self}"


def lex_key(vector: RatVec):
    return vector.coords


def check_same_dim(vectors: Iterable[RatVec], dim: int | None = None) -> int:
    """
    Verify that all vectors share one dimension.

    Args:
        vectors (iterable): Vectors to check.
        dim (int, optional): Expected dimension.

    Returns:
        int: The common dimension.
    """
    vectors = list(vectors)
    if not vectors:
        raise EmptyInputError("no vectors given")
    expected = dim if dim is not None else vectors[0].dim
    for v in vectors:
        if v.dim != expected:
            raise DimensionMismatchError(f"expected dimension {expected}, got {v.dim}")
    return expected
