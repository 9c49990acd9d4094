from fractions import Fraction

import pytest

from errors import NotRegular, SingularJacobian
from series_core import poly, recip
from sparse_poly import Polynomial, TotalDegree, TruncatedSeries
from weierstrass import (
    complexify, division_residual, implicit_series, inverse_coefficients, inverse_series,
    invert_matrix, preparation_residual, regular_order, wdiv, wprep,
)

ORDERS = (3, 3)

# X2^2 - X1
DISTINGUISHED = Polynomial(2, {(0, 2): 1, (1, 0): -1})
UNIT = Polynomial(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1})


def test_regular_order_report():
    t = TruncatedSeries.from_polynomial(DISTINGUISHED, TotalDegree(4))
    report = regular_order(t)
    assert report.regular and report.order == 2
    flat = TruncatedSeries.from_polynomial(Polynomial(2, {(1, 0): 1}), TotalDegree(4))
    assert not regular_order(flat).regular


def test_division_identity_holds_on_window():
    f = DISTINGUISHED * UNIT
    g = Polynomial(2, {(0, 0): 1, (2, 1): 3, (0, 3): -2, (1, 1): 1})
    result = wdiv(f, g, orders=ORDERS)
    assert result.r.degree < 2
    assert division_residual(f, g, result).is_zero()


def test_until_stable_schedule_agrees_with_fixed():
    f = DISTINGUISHED * UNIT
    g = Polynomial(2, {(0, 0): 2, (1, 2): 1})
    fixed = wdiv(f, g, orders=ORDERS)
    stable = wdiv(f, g, orders=ORDERS, schedule='until-stable')
    assert fixed.h.equals(stable.h)
    assert fixed.r.equals(stable.r)
    assert fixed.r.degree < 2


def test_remainders_compare_coefficientwise():
    f = DISTINGUISHED * UNIT
    two = wdiv(f, Polynomial(2, {(0, 0): 2, (1, 2): 1}), orders=ORDERS)
    three = wdiv(f, Polynomial(2, {(0, 0): 3, (1, 2): 1}), orders=ORDERS)
    assert two.r.equals(two.r)
    assert not two.r.equals(three.r)


def test_division_by_a_unit_series():
    f = recip(poly(2, [(1, 0, 0), (-1, 1, 0), (-1, 0, 1)]))
    g = Polynomial(2, {(1, 1): 1, (0, 2): 1})
    result = wdiv(f, g, orders=ORDERS)
    assert result.r.degree == -1
    assert division_residual(f, g, result).is_zero()


def test_preparation_recovers_factors():
    f = DISTINGUISHED * UNIT
    result = wprep(f, orders=ORDERS)
    P, u = result
    assert P.monic and P.degree == 2
    assert P.coefficient(0)[(1,)] == -1
    assert P.coefficient(0)[(0,)] == 0
    assert P.coefficient(1).is_zero()
    assert P.lower_vanish_at_origin()
    assert u[(0, 0)] == 1 and u[(1, 0)] == 1 and u[(0, 1)] == 1
    assert u[(1, 1)] == 0
    assert preparation_residual(f, result).is_zero()


def test_preparation_detects_order():
    f = Polynomial(2, {(0, 1): 1, (1, 0): -1})
    P, u = wprep(f, orders=ORDERS)
    assert P.degree == 1
    assert P.coefficient(0)[(1,)] == -1


def test_not_regular():
    with pytest.raises(NotRegular):
        wprep(Polynomial(2, {(1, 0): 1}), orders=ORDERS)
    with pytest.raises(NotRegular):
        wdiv(DISTINGUISHED, Polynomial(2, {(0, 0): 1}), d=1, orders=ORDERS)


def test_bad_arguments():
    with pytest.raises(ValueError):
        wdiv(DISTINGUISHED, DISTINGUISHED, orders=ORDERS, schedule='sometimes')
    with pytest.raises(ValueError):
        wprep(DISTINGUISHED, orders=(-1, 2))


def test_inverse_coefficients():
    # X + X^2 inverts to (sqrt(1 + 4X) - 1) / 2
    assert inverse_coefficients([0, 1, 1], 5) == [0, 1, -1, 2, -5]
    assert inverse_coefficients([0, 2], 3) == [0, Fraction(1, 2), 0]
    assert inverse_coefficients([0, 1], 0) == []


def test_inverse_series_node():
    e = inverse_series(poly(1, [(1, 1), (1, 2)]))
    assert [e.coeff((p,)) for p in range(6)] == [0, 1, -1, 2, -5, 14]


def test_invert_matrix():
    assert invert_matrix([[2, 1], [1, 1]]) == [[1, -1], [-1, 2]]
    with pytest.raises(ZeroDivisionError):
        invert_matrix([[1, 2], [2, 4]])


def test_implicit_two_equations():
    # Y1 = X + Y2, Y2 = X Y1
    F1 = poly(3, [(1, 0, 1, 0), (-1, 1, 0, 0), (-1, 0, 0, 1)])
    F2 = poly(3, [(1, 0, 0, 1), (-1, 1, 1, 0)])
    y1, y2 = implicit_series([F1, F2])
    assert [y1.coeff((p,)) for p in range(6)] == [0, 1, 1, 1, 1, 1]
    assert [y2.coeff((p,)) for p in range(6)] == [0, 0, 1, 1, 1, 1]


def test_implicit_preconditions():
    with pytest.raises(SingularJacobian):
        implicit_series([poly(2, [(1, 0, 2), (-1, 1, 0)])])
    with pytest.raises(SingularJacobian):
        implicit_series([poly(2, [(1, 0, 0), (1, 0, 1)])])


def test_complexify_pair():
    re, im = complexify(recip(poly(1, [(1, 0), (-1, 1)])))
    assert re.kind == 're' and im.kind == 'im'
    assert im.coeff((0, 3)) == -1
