from fractions import Fraction

import pytest
import sympy

from algebraic import (
    X, Y, AlgebraicSeriesDef, IsolatingInterval, isolate_real_roots, newton_lift,
    positive_root_lower, radius_bound, refine_root,
)
from errors import InconsistentDefinition, NotIsolating, NotSimpleRoot, ZeroPolynomial

GEOMETRIC = AlgebraicSeriesDef.from_rows([[-1], [1, -1]], 1)


def test_geometric_from_rows():
    assert [GEOMETRIC.coefficient(p) for p in range(10)] == [1] * 10


def test_catalan_from_sympy_expression():
    # X Y^2 - Y + 1 = 0, regular branch
    d = AlgebraicSeriesDef(X * Y ** 2 - Y + 1, 1)
    assert [d.coefficient(p) for p in range(7)] == [1, 1, 2, 5, 14, 42, 132]


def test_newton_lift_doubles_and_solves():
    d = AlgebraicSeriesDef.from_rows([[-1, -1], [0], [1]], 1)
    y = newton_lift(d, 3)
    assert len(y) == 8
    assert d.residual(y, 8) == [0] * 8


def test_definition_errors():
    with pytest.raises(InconsistentDefinition):
        AlgebraicSeriesDef.from_rows([[-1], [1, -1]], 2)
    with pytest.raises(NotSimpleRoot):
        AlgebraicSeriesDef.from_rows([[0, -1], [0], [1]], 0)
    with pytest.raises(InconsistentDefinition):
        AlgebraicSeriesDef(sympy.Integer(0), 0)


def test_radius_bound_dominates_coefficients():
    M, r = radius_bound(GEOMETRIC)
    assert 0 < r < 1
    for p in range(30):
        assert abs(GEOMETRIC.coefficient(p)) <= M / r ** p


def test_radius_bound_for_square_root():
    d = AlgebraicSeriesDef.from_rows([[-1, -1], [0], [1]], 1)
    M, r = radius_bound(d)
    assert 0 < r < 1
    for p in range(20):
        assert abs(d.coefficient(p)) <= M / r ** p


def test_isolate_and_refine_sqrt_two():
    ivs = isolate_real_roots([-2, 0, 1])
    assert len(ivs) == 2
    lo, hi = sorted(ivs, key=lambda iv: iv.lo)
    assert hi.lo >= 0
    root = refine_root([-2, 0, 1], hi, Fraction(1, 2 ** 40))
    assert root.rad <= Fraction(1, 2 ** 40)
    assert root.lower() ** 2 <= 2 <= root.upper() ** 2


def test_isolate_cubic_with_three_roots():
    # (T - 1)(T - 2)(T + 3)
    ivs = sorted(isolate_real_roots([6, -7, 0, 1]), key=lambda iv: iv.lo)
    assert len(ivs) == 3
    assert -3 in ivs[0] and 1 in ivs[1] and 2 in ivs[2]


def test_exact_root_at_endpoint():
    ball = refine_root([-1, 1], IsolatingInterval(Fraction(1), Fraction(2)), Fraction(1, 10))
    assert ball.is_exact() and ball.mid == 1


def test_root_errors():
    with pytest.raises(ZeroPolynomial):
        isolate_real_roots([0])
    with pytest.raises(NotIsolating):
        refine_root([-2, 0, 1], IsolatingInterval(Fraction(-2), Fraction(2)), Fraction(1, 100))
    with pytest.raises(NotIsolating):
        refine_root([6, -7, 0, 1], IsolatingInterval(Fraction(0), Fraction(5)), Fraction(1, 100))


def test_positive_root_lower():
    lo = positive_root_lower([1, -1])
    assert Fraction(1, 2) < lo <= 1
    assert positive_root_lower([1, 0]) is None
