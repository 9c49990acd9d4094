from fractions import Fraction

import pytest

from balls import Tolerance
from errors import ArityMismatch, PointOutsideRadii
from evaluation import _cheapest_majorant, _grid_below, eval_at, eval_detailed, integrate_last, translate_coeff
from majorant import majorant_of
from series_core import Inverse, antider, poly, recip, subst_poly, translate
from sparse_poly import Polynomial
from suites import oracle, oracle_slack

G = recip(poly(1, [(1, 0), (-1, 1)]))
L = antider(G, 1)


def test_geometric_at_one_half():
    ball = eval_at(G, Fraction(1, 2), Fraction(1, 10 ** 20))
    assert ball.contains(2)
    assert ball.rad <= Fraction(1, 10 ** 20)


def test_linear_polynomial_at_origin_is_exactly_zero():
    ball = eval_at(poly(1, [(1, 1)]), 0, Fraction(1, 10 ** 5))
    assert ball.mid == 0 and ball.rad == 0


def test_log_three_halves_matches_oracle():
    digits = 20
    ball = eval_at(L, Fraction(1, 3), Tolerance.from_digits(digits))
    expected = oracle('log:3/2', digits)
    assert abs(ball.mid - expected) <= ball.rad + oracle_slack(digits)


def test_detailed_result_reports_order_and_tail():
    eps = Fraction(1, 10 ** 12)
    res = eval_detailed(G, Fraction(1, 4), eps)
    assert res.tail < eps / 2
    assert res.order > 0
    assert res.ball.rad <= eps
    assert res.majorant.radii[0] > Fraction(1, 4)


def test_bivariate_point():
    s = subst_poly(G, [Polynomial(2, {(1, 0): 1, (0, 1): 1})])
    ball = eval_at(s, (Fraction(1, 8), Fraction(1, 8)), Fraction(1, 10 ** 15))
    assert ball.contains(Fraction(4, 3))


def test_point_outside_certified_radius():
    with pytest.raises(PointOutsideRadii):
        eval_at(G, 1, Fraction(1, 100))


def test_point_arity_mismatch():
    with pytest.raises(ArityMismatch):
        eval_at(G, (Fraction(1, 4), Fraction(1, 4)), Fraction(1, 100))


def test_translate_coeff_of_geometric():
    # G(X + 1/2) = 2 / (1 - 2X)
    ball = translate_coeff(G, (Fraction(1, 2),), (2,), Tolerance(Fraction(1, 2 ** 30)))
    assert ball.contains(8)
    assert ball.rad <= Fraction(1, 2 ** 30)


def test_translate_coeff_at_origin_is_plain_coefficient():
    ball = translate_coeff(G, (0,), (3,), Tolerance(Fraction(1, 2 ** 20)))
    assert ball.contains(1)


def test_evaluating_a_translated_series():
    shifted = translate(G, Fraction(1, 4))
    ball = eval_at(shifted, Fraction(1, 4), Fraction(1, 10 ** 10))
    assert ball.contains(2)


def test_integrate_last_variable():
    # integral over [0, 1/2] of 1/(1 - t) dt = log 2
    e = integrate_last(G, Fraction(1, 2))
    assert e.arity == 0
    ball = eval_at(e, (), Fraction(1, 10 ** 10))
    assert abs(ball.mid - oracle('log2', 10)) <= ball.rad + oracle_slack(10)


@pytest.mark.parametrize('q, expected', [
    (Fraction(1), Fraction(1)),
    (Fraction(1000), Fraction(256)),
    (Fraction(1, 3), Fraction(1, 256)),
    (Fraction(1, 256), Fraction(1, 256)),
    (Fraction(255, 256), Fraction(1, 256)),
])
def test_coefficient_tolerances_snap_to_a_coarse_dyadic_grid(q, expected):
    assert _grid_below(q) == expected


def test_translation_reuses_the_widest_known_majorant():
    inv = Inverse(poly(1, [(1, 1), (Fraction(1, 100), 2)]))
    wide = majorant_of(inv, need=(5,))
    chosen = _cheapest_majorant(inv, (Fraction(1),), [0], (0,), Fraction(1, 10 ** 20))
    assert chosen.radii == wide.radii
    ball = translate_coeff(inv, [1], [0], Fraction(1, 10 ** 20))
    # y + y^2/100 = 1 at y = 5 (sqrt(104) - 10)
    assert ball.rad <= Fraction(1, 10 ** 20)
    assert abs(float(ball.mid) - 5 * (104 ** 0.5 - 10)) < 1e-12
