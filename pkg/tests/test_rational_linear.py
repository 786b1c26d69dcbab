from fractions import Fraction

import pytest

from newton_forge.utils import linear
from newton_forge.utils.errors import InputFormatError
from newton_forge.utils.rational import format_rational, parse_rational, parse_vector, to_decimal_string
from newton_forge.utils.sampling import make_rng, random_ordered_pair, random_rational, resolve_seed


def test_parse_rational_forms():
    assert parse_rational("2/3") == Fraction(2, 3)
    assert parse_rational(" -4 / 6 ") == Fraction(-2, 3)
    assert parse_rational("7") == 7
    assert parse_rational(5) == 5
    assert parse_rational(Fraction(1, 2)) == Fraction(1, 2)


@pytest.mark.parametrize("value", [0.5, "1/0", "abc", True, None, "1.5"])
def test_parse_rational_rejects(value):
    with pytest.raises(InputFormatError):
        parse_rational(value)


def test_format_and_decimal():
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"
    assert to_decimal_string(Fraction(2, 3)) == "0.666666666667"
    assert to_decimal_string(Fraction(1, 12)) == "0.0833333333333"


def test_parse_vector():
    assert parse_vector("1,-5,2/3") == [1, -5, Fraction(2, 3)]
    with pytest.raises(InputFormatError):
        parse_vector("")


def test_feasible_point_and_infeasible_system():
    # x + y = 1, x - y = 0 -> (1/2, 1/2)
    point = linear.find_feasible_point([[1, 1], [1, -1]], [1, 0])
    assert point == [Fraction(1, 2), Fraction(1, 2)]
    # x + y = -1 has no non-negative solution
    assert linear.find_feasible_point([[1, 1]], [-1]) is None


def test_rank_and_nullspace():
    assert linear.rank([[1, 2], [2, 4]]) == 1
    assert linear.rank([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) == 2
    assert linear.nullspace_dimension([[1, 1, 1]], 3) == 2
    assert linear.nullspace_dimension([], 4) == 4
    assert linear.affine_rank([(0, 0), (1, 1), (2, 2)]) == 1


def test_convex_hull_membership():
    square = [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert linear.in_convex_hull((Fraction(1, 2), Fraction(1, 3)), square)
    assert linear.in_convex_hull((1, 1), square)
    assert not linear.in_convex_hull((Fraction(3, 2), 0), square)
    assert not linear.in_convex_hull((0, 0), [])


def test_dominance_queries():
    segment = [(0, 1), (1, 0)]
    assert linear.exists_dominating((Fraction(1, 2), Fraction(1, 2)), segment)
    assert not linear.exists_dominating((1, 1), segment)
    assert linear.exists_dominated((1, 1), segment)
    assert not linear.exists_dominated((Fraction(1, 4), Fraction(1, 4)), segment)


def test_seed_precedence(monkeypatch, config):
    monkeypatch.delenv('NEWTON_FORGE_SEED', raising=False)
    assert resolve_seed() == config['sampling']['seed']
    monkeypatch.setenv('NEWTON_FORGE_SEED', '11')
    assert resolve_seed() == 11
    assert resolve_seed(3) == 3


def test_sampling_is_exact_and_reproducible():
    first = [random_rational(make_rng(5)) for _ in range(3)]
    second = [random_rational(make_rng(5)) for _ in range(3)]
    assert first == second
    assert all(isinstance(value, Fraction) for value in first)

    x, y = random_ordered_pair(make_rng(9), 4)
    assert all(a <= b for a, b in zip(x, y))
