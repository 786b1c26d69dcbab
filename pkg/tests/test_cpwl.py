from fractions import Fraction

import pytest

from newton_forge.models.cpwl_fn import AffineMax, CpwlFn, PiecewiseLinear1D
from newton_forge.models.polytope import Polytope
from newton_forge.models.ratvec import RatVec
from newton_forge.modules import cpwl
from newton_forge.modules import geometry_kernel as gk
from newton_forge.modules.synthesis import pyramid_fixture
from newton_forge.utils.errors import DimensionMismatchError, InputFormatError, NotConvexError
from newton_forge.utils.fixtures import random_points, random_positive_planar_function

V = RatVec.of

FIG2 = CpwlFn(2, (V(1, 0), V(0, 1), V(1, 1), V(0, 0)))
MAX2 = CpwlFn.max_n(2)


def test_evaluate_examples():
    assert cpwl.evaluate(MAX2, V(3, 5)) == 5
    assert cpwl.evaluate(FIG2, V(-1, -1)) == 0
    assert cpwl.evaluate(CpwlFn.m_n(3), V(1, 1, 1)) == 3
    assert cpwl.evaluate(MAX2, V(0, 0)) == 0
    with pytest.raises(DimensionMismatchError):
        cpwl.evaluate(MAX2, V(1, 2, 3))


def test_newton_polytope_examples():
    unit_square = gk.convex_hull([V(0, 0), V(1, 0), V(0, 1), V(1, 1)], 2)
    assert cpwl.newton_polytope(FIG2) == unit_square
    assert cpwl.newton_polytope(CpwlFn.linear((2, 3))).is_point()
    simplex = cpwl.newton_polytope(CpwlFn.max_n(4))
    assert simplex.vertex_count == 4


def test_duality_round_trip(rng):
    fn = CpwlFn(3, tuple(random_points(rng, 7, 3)))
    polytope = cpwl.newton_polytope(fn)
    for x in random_points(rng, 100, 3):
        if not x.is_zero():
            assert cpwl.evaluate(fn, x) == gk.support_value(polytope, x)


def test_subgradient_examples():
    assert cpwl.subgradient(FIG2, V(0, 0)).carrier == cpwl.newton_polytope(FIG2)
    assert cpwl.subgradient(MAX2, V(1, 2)).vertices == (V(0, 1),)
    assert set(cpwl.subgradient(MAX2, V(1, 1)).vertices) == {V(1, 0), V(0, 1)}


def test_subgradient_inequality(rng, config):
    fn = CpwlFn(2, tuple(random_points(rng, 6, 2)))
    points = random_points(rng, config['sampling']['subgradient_pairs'] + 1, 2)
    for x, y in zip(points, points[1:]):
        value = cpwl.evaluate(fn, x)
        for g in cpwl.subgradient(fn, x).vertices:
            assert cpwl.evaluate(fn, y) >= value + g.dot(y - x)
    assert cpwl.subgradient_inequality_violation(fn, rng) is None


def test_set_leq_examples():
    origin = Polytope(2, (V(0, 0),))
    square = gk.convex_hull([V(0, 0), V(1, 0), V(0, 1), V(1, 1)], 2)
    assert cpwl.set_leq(origin, square)
    assert not cpwl.set_leq(Polytope(2, (V(1, 0),)), Polytope(2, (V(0, 1),)))


def test_set_leq_is_additive_and_transitive(rng):
    base = gk.convex_hull(random_points(rng, 4, 2), 2)
    A, C = base, gk.convex_hull(random_points(rng, 3, 2), 2)
    shift = V(1, 1)
    B, D = gk.minkowski_sum(A, Polytope(2, (shift,))), gk.minkowski_sum(C, Polytope(2, (shift,)))
    assert cpwl.set_leq(A, B) and cpwl.set_leq(C, D)
    assert cpwl.set_leq(gk.minkowski_sum(A, C), gk.minkowski_sum(B, D))
    E = gk.minkowski_sum(B, Polytope(2, (shift,)))
    assert cpwl.set_leq(B, E) and cpwl.set_leq(A, E)


def test_isotonic_check_on_max2_builds_a_violating_pair():
    ok, witness = cpwl.isotonic_check(MAX2)
    assert not ok
    assert witness.x.leq(witness.y)
    assert not cpwl.set_leq(cpwl.subgradient(MAX2, witness.x), cpwl.subgradient(MAX2, witness.y))


def test_isotonic_check_successes():
    assert cpwl.isotonic_check(CpwlFn.m_n(3))[0]
    assert cpwl.isotonic_check(pyramid_fixture()[1])[0]


def test_sampled_isotonicity_agrees_with_the_edge_test(rng, config):
    fn = random_positive_planar_function(rng)
    assert cpwl.isotonic_check(fn)[0]
    assert cpwl.sample_isotonicity(fn, rng, config['sampling']['isotonic_pairs']) is None
    assert cpwl.non_negative_subgradients(fn) == (True, [])


def test_non_negative_subgradients_reports_offenders():
    fn = CpwlFn(2, (V(1, 0), V(-1, 2)))
    ok, offending = cpwl.non_negative_subgradients(fn)
    assert not ok
    assert offending == [V(-1, 2)]


def test_calculus_rules(rng):
    f1 = CpwlFn(2, tuple(random_points(rng, 4, 2)))
    f2 = CpwlFn(2, tuple(random_points(rng, 4, 2)))
    combined = cpwl.cpwl_scale_add(f1, f2, 2, Fraction(1, 3))
    rectified = cpwl.cpwl_relu(f1)
    maximum = cpwl.cpwl_max(f1, f2)
    for x in random_points(rng, 30, 2):
        a, b = cpwl.evaluate(f1, x), cpwl.evaluate(f2, x)
        assert cpwl.evaluate(combined, x) == 2 * a + b / 3
        assert cpwl.evaluate(rectified, x) == max(a, 0)
        assert cpwl.evaluate(maximum, x) == max(a, b)
    with pytest.raises(NotConvexError):
        cpwl.cpwl_scale_add(f1, f2, -1, 1)


def test_subgradient_of_sum_is_sum_of_subgradients(rng):
    f1 = CpwlFn(2, tuple(random_points(rng, 5, 2)))
    f2 = CpwlFn(2, tuple(random_points(rng, 5, 2)))
    total = cpwl.cpwl_scale_add(f1, f2)
    for x in random_points(rng, 20, 2):
        expected = gk.minkowski_sum(cpwl.subgradient(f1, x).carrier, cpwl.subgradient(f2, x).carrier)
        assert cpwl.subgradient(total, x).carrier == expected


def test_integrate_abs_diff_exact_values():
    zero = AffineMax.affine((0, 0))
    average = AffineMax.affine((Fraction(1, 2), Fraction(1, 2)))
    assert cpwl.integrate_abs_diff(zero, MAX2) == Fraction(2, 3)
    assert cpwl.integrate_abs_diff(average, MAX2) == Fraction(1, 6)
    assert cpwl.integrate_abs_diff(MAX2, MAX2) == 0
    assert cpwl.integrate_abs_diff(MAX2, average) == cpwl.integrate_abs_diff(average, MAX2)


def test_integrate_abs_diff_on_a_shifted_box():
    box = ((1, 2), (1, 2))
    # max(x1, x2) - (x1 + x2)/2 = |x1 - x2|/2, mean 1/6 on any unit square
    average = AffineMax.affine((Fraction(1, 2), Fraction(1, 2)))
    assert cpwl.integrate_abs_diff(average, MAX2, box) == Fraction(1, 6)


def test_linear_regions_of_max2():
    regions = cpwl.linear_regions(MAX2)
    assert len(regions) == 2
    assert all(len(polygon) == 3 for _, polygon in regions)


def test_slope_witness_examples():
    affine = PiecewiseLinear1D(((0, Fraction(1, 2)), (1, Fraction(3, 2))))
    witness = cpwl.slope_witness_1d(affine, 1, Fraction(1, 2))
    assert witness.integral == 0 and witness.g_x == 1

    vee = PiecewiseLinear1D(((0, Fraction(1, 2)), (Fraction(1, 2), 0), (1, Fraction(1, 2))))
    witness = cpwl.slope_witness_1d(vee, 0, Fraction(1, 4))
    assert witness.integral == Fraction(1, 8)
    assert witness.g_x <= 0 + witness.bound and witness.g_x_prime >= 0 - witness.bound

    hinge = PiecewiseLinear1D.from_lines([(0, 0), (2, -1)])
    assert hinge.knots == ((0, 0), (Fraction(1, 2), 0), (1, 1))
    assert all(isinstance(t, Fraction) for t, _ in hinge.knots)
    witness = cpwl.slope_witness_1d(hinge, 1, Fraction(-1, 2))
    assert (witness.g_x, witness.g_x_prime) == (0, 2)

    with pytest.raises(NotConvexError):
        cpwl.slope_witness_1d(PiecewiseLinear1D(((0, 0), (Fraction(1, 2), 1), (1, 0))), 0, 0)


def test_restrict_to_line_gives_knots():
    fn = AffineMax.from_cpwl(MAX2)
    restricted = fn.restrict_to_line(V(0, 1), V(1, -1))
    assert restricted.knots == ((0, 1), (Fraction(1, 2), Fraction(1, 2)), (1, 1))


def test_affine_gap_lower_bound(config):
    assert cpwl.affine_gap_lower_bound(1) == Fraction(1, 12)
    assert cpwl.affine_gap_lower_bound(4) == Fraction(1, 3)
    threshold = config['analysis']['affine_gap_threshold']
    assert cpwl.affine_gap_lower_bound(1) == cpwl.affine_gap_lower_bound(1, threshold)
    assert cpwl.affine_gap_lower_bound(1, '1/2') == Fraction(1, 18)
    with pytest.raises(InputFormatError):
        cpwl.affine_gap_lower_bound(1, 1)


def test_inapproximability_certificate_for_the_average(rng):
    average = AffineMax.affine((Fraction(1, 2), Fraction(1, 2)))
    certificate = cpwl.inapproximability_certificate(average, rng, pairs=50)
    assert certificate.mean == Fraction(1, 6)
    assert certificate.exceeds_epsilon
    assert certificate.isotonic
    assert certificate.epsilon == Fraction(1, 256)


def test_function_json_round_trip():
    assert CpwlFn.from_dict(FIG2.to_dict()) == FIG2
    shifted = AffineMax(2, ((V(1, 0), Fraction(-1, 2)), (V(0, 1), 0)))
    assert AffineMax.from_dict(shifted.to_dict()) == shifted
