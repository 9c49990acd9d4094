from fractions import Fraction
from math import comb

import pytest

from algebraic import AlgebraicSeriesDef
from balls import Ball
from errors import ArityMismatch, NonUnitReciprocal, NonvanishingSubstitution, NotInvertible
from series_core import (
    Alg, ComposeSeries, Im, ImplicitSystem, IntLast, Inverse, Re, add, antider, coeff, constant,
    deriv, mul, permute, poly, recip, restrict0, scale, sub, subst_poly, translate, truncate,
    variable,
)
from sparse_poly import Polynomial

X = variable(1, 1)
ONE_MINUS_X = poly(1, [(1, 0), (-1, 1)])
G = recip(ONE_MINUS_X)


def test_geometric_series():
    assert [G.coeff((p,)) for p in range(8)] == [1] * 8


def test_recip_of_one_plus_x_alternates():
    e = recip(poly(1, [(1, 0), (1, 1)]))
    assert [e.coeff((p,)) for p in range(6)] == [1, -1, 1, -1, 1, -1]


def test_fibonacci():
    fib = recip(poly(1, [(1, 0), (-1, 1), (-1, 2)]))
    assert [fib.coeff((p,)) for p in range(10)] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]


def test_recip_requires_unit():
    with pytest.raises(NonUnitReciprocal):
        recip(X)


def test_ring_operations():
    e = sub(mul(G, G), scale(2, G))
    # 1/(1-X)^2 - 2/(1-X): (p + 1) - 2
    assert [e.coeff((p,)) for p in range(6)] == [p - 1 for p in range(6)]
    assert add(G, constant(-1)).coeff((0,)) == 0


def test_arity_checks():
    two = variable(1, 2)
    with pytest.raises(ArityMismatch):
        add(G, two)
    with pytest.raises(ArityMismatch):
        G.coeff((1, 1))
    with pytest.raises(ArityMismatch):
        antider(G, 2)
    with pytest.raises(ArityMismatch):
        permute(two, (1, 1))


def test_truncate_window():
    t = truncate(G, 4)
    assert t.window.order == 4
    assert [t[(p,)] for p in range(6)] == [1, 1, 1, 1, 1, 0]
    with pytest.raises(ValueError):
        truncate(G, -1)


def test_subst_gives_binomial_coefficients():
    s = subst_poly(G, [Polynomial(2, {(1, 0): 1, (0, 1): 1})])
    assert s.arity == 2
    for a in range(4):
        for b in range(4):
            assert s.coeff((a, b)) == comb(a + b, a)


def test_subst_rejects_nonvanishing_polynomial():
    with pytest.raises(NonvanishingSubstitution):
        subst_poly(G, [Polynomial(1, {(0,): 1, (1,): 1})])


def test_antider_and_deriv():
    log = antider(G, 1)
    assert log.coeff((0,)) == 0
    assert [log.coeff((p,)) for p in range(1, 6)] == [Fraction(1, p) for p in range(1, 6)]
    back = deriv(log, 1)
    assert [back.coeff((p,)) for p in range(6)] == [1] * 6


def test_restrict0_and_permute():
    f = poly(2, [(1, 1, 0), (3, 0, 2), (5, 1, 1)])
    r = restrict0(f, 1)
    assert r.arity == 1
    assert r.coeff((2,)) == 3 and r.coeff((0,)) == 0
    swapped = permute(f, (2, 1))
    assert swapped.coeff((0, 1)) == 1
    assert swapped.coeff((2, 0)) == 3
    assert swapped.coeff((1, 1)) == 5


def test_translate_geometric_is_certified():
    shifted = translate(G, Fraction(1, 2))
    assert not shifted.exact
    eps = Fraction(1, 2 ** 30)
    for p in range(5):
        c = shifted.coeff((p,), eps)
        assert isinstance(c, Ball)
        assert c.rad <= eps
        assert c.contains(2 ** (p + 1))


def test_translate_by_zero_stays_exact():
    t = translate(G, 0)
    assert t.exact
    assert t.coeff((3,)) == 1


def test_algebraic_leaf_square_root():
    sqrt = Alg(AlgebraicSeriesDef.from_rows([[-1, -1], [0], [1]], 1))
    # sqrt(1 + X)
    assert [sqrt.coeff((p,)) for p in range(4)] == [1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]


def test_inverse_of_log_is_exp_minus_one():
    log = antider(G, 1)
    inv = Inverse(log)
    expected = [0, 1, Fraction(-1, 2), Fraction(1, 6), Fraction(-1, 24), Fraction(1, 120)]
    # -log(1 - X) inverts to 1 - exp(-X)
    assert [inv.coeff((p,)) for p in range(6)] == expected


def test_inverse_preconditions():
    with pytest.raises(NotInvertible):
        Inverse(G)
    with pytest.raises(NotInvertible):
        Inverse(poly(1, [(1, 2)]))


def test_implicit_single_equation():
    # Y - X - Y^2 = 0: Catalan generating function shifted
    F = poly(2, [(1, 0, 1), (-1, 1, 0), (-1, 0, 2)])
    y = ImplicitSystem([F]).components()[0]
    catalan = [0, 1, 1, 2, 5, 14, 42]
    assert [y.coeff((p,)) for p in range(7)] == catalan


def test_compose_with_series():
    inner = antider(G, 1)
    e = ComposeSeries(G, [inner])
    # 1/(1 - L) with L = -log(1 - X)
    assert [e.coeff((p,)) for p in range(4)] == [1, 1, Fraction(3, 2), Fraction(7, 3)]


def test_complexified_parts():
    # f = 1/(1-X); f(x + iy) real and imaginary parts
    re, im = Re(G), Im(G)
    assert re.arity == 2 and im.arity == 2
    assert re.coeff((2, 0)) == 1
    assert re.coeff((0, 2)) == -1
    assert im.coeff((0, 1)) == 1
    assert im.coeff((1, 1)) == 2
    assert re.coeff((1, 1)) == 0


def test_intlast_of_constant_one():
    one = constant(1, 2)
    e = IntLast(one, Fraction(1, 3))
    assert e.arity == 1
    assert e.coeff((0,), Fraction(1, 2 ** 20)).contains(Fraction(1, 3))


def test_sexpr_and_digest_are_stable():
    assert G.sexpr() == '(recip (poly 1 (1 0) (-1 1)))'
    assert G.digest() == recip(poly(1, [(-1, 1), (1, 0)])).digest()


def test_coeff_helper_matches_method():
    assert coeff(G, (5,)) == G.coeff((5,))
