from fractions import Fraction

import pytest
from hypothesis import given, settings as hyp_settings

from conftest import exact_dags, series_dags
from errors import MajorantUnavailable, PointOutsideRadii, TranslationOutsideDomain
from majorant import (
    GeometricMajorant, add_rule, antider_rule, complexify_rule, deriv_rule, majorant_of, mul_rule,
    tail_bound, translate_rule, validate_majorant,
)
from series_core import Inverse, antider, constant, mul, poly, recip, subst_poly, translate
from settings import get_settings
from sparse_poly import Polynomial

G = recip(poly(1, [(1, 0), (-1, 1)]))


def test_majorant_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        GeometricMajorant(0, (1,))
    with pytest.raises(ValueError):
        GeometricMajorant(1, (Fraction(1, 2), 0))


def test_bound_and_sup():
    m = GeometricMajorant(3, (Fraction(1, 2), 2))
    assert m.bound((2, 1)) == Fraction(3 * 4, 2)
    assert m.sup_on((Fraction(1, 4), 1)) == 3 * 2 * 2


def test_closed_form_rules():
    a = GeometricMajorant(2, (Fraction(1, 2),))
    b = GeometricMajorant(3, (Fraction(1, 3),))
    assert add_rule(a, b) == GeometricMajorant(5, (Fraction(1, 3),))
    assert mul_rule(a, b) == GeometricMajorant(6, (Fraction(1, 6),))
    assert antider_rule(a, 1) == GeometricMajorant(1, (Fraction(1, 2),))
    assert deriv_rule(a, 1) == GeometricMajorant(4, (Fraction(1, 4),))
    assert translate_rule(a, (Fraction(1, 4),)) == GeometricMajorant(4, (Fraction(1, 4),))
    assert complexify_rule(a) == GeometricMajorant(4, (Fraction(1, 4), Fraction(1, 4)))


def test_translate_rule_outside_radius():
    with pytest.raises(TranslationOutsideDomain):
        translate_rule(GeometricMajorant(1, (Fraction(1, 2),)), (Fraction(1, 2),))


def test_geometric_majorant_is_valid_and_cached():
    m = majorant_of(G)
    assert m.radii[0] < 1
    assert validate_majorant(G, m, 40) == (True, None)
    assert majorant_of(G) is m


def test_polynomial_majorant_honours_radius_hint():
    p = poly(1, [(1, 0), (2, 3)])
    m = majorant_of(p, need=(5,))
    assert m.radii[0] >= 5
    assert validate_majorant(p, m, 6)[0]


def test_hint_must_match_arity():
    with pytest.raises(ValueError):
        majorant_of(G, need=(1, 1))


def test_translated_majorant_is_valid():
    shifted = translate(G, Fraction(1, 4))
    m = majorant_of(shifted)
    assert validate_majorant(shifted, m, 12, Fraction(1, 2 ** 40))[0]


def test_product_and_antiderivative():
    e = antider(mul(G, G), 1)
    m = majorant_of(e)
    assert validate_majorant(e, m, 24)[0]


def test_tail_bound_dominates_true_tail():
    m = majorant_of(G)
    x = Fraction(1, 4)
    N = 10
    true_tail = x ** (N + 1) / (1 - x)
    assert tail_bound(m, (x,), N) >= true_tail


def test_tail_bound_edges():
    m = GeometricMajorant(1, (Fraction(1, 2), Fraction(1, 2)))
    assert tail_bound(m, (0, 0), 5) == 0
    with pytest.raises(PointOutsideRadii):
        tail_bound(m, (Fraction(1, 2), 0), 5)
    with pytest.raises(PointOutsideRadii):
        tail_bound(m, (0,), 5)
    assert tail_bound(GeometricMajorant(7, ()), (), 3) == 0


def test_tail_bound_shrinks_with_order():
    m = majorant_of(G)
    x = (Fraction(1, 8),)
    assert tail_bound(m, x, 20) < tail_bound(m, x, 10)


def test_constant_leaf():
    m = majorant_of(constant(-3))
    assert m.M >= 3


@hyp_settings(max_examples=25)
@given(exact_dags(arity=1, depth=3))
def test_random_univariate_majorants_are_sound(e):
    try:
        m = majorant_of(e)
    except MajorantUnavailable:
        return
    ok, bad = validate_majorant(e, m, 10)
    assert ok, f"{e.sexpr()} violates {m} at {bad}"


@hyp_settings(max_examples=15)
@given(exact_dags(arity=2, depth=2))
def test_random_bivariate_majorants_are_sound(e):
    try:
        m = majorant_of(e)
    except MajorantUnavailable:
        return
    ok, bad = validate_majorant(e, m, 5)
    assert ok, f"{e.sexpr()} violates {m} at {bad}"


@hyp_settings(max_examples=20)
@given(series_dags(arity=1, depth=3))
def test_majorants_hold_over_every_node_kind(e):
    try:
        m = majorant_of(e)
    except MajorantUnavailable:
        return
    ok, bad = validate_majorant(e, m, 8)
    assert ok, f"{e.sexpr()} violates {m} at {bad}"


@hyp_settings(max_examples=10)
@given(series_dags(arity=2, depth=2))
def test_bivariate_majorants_hold_over_every_node_kind(e):
    try:
        m = majorant_of(e)
    except MajorantUnavailable:
        return
    ok, bad = validate_majorant(e, m, 5)
    assert ok, f"{e.sexpr()} violates {m} at {bad}"


def test_inverse_majorant_lives_on_a_dyadic_grid():
    inv = Inverse(antider(recip(poly(1, [(1, 0), (1, 1)])), 1))
    m = majorant_of(inv)
    for q in (m.M, m.radii[0]):
        assert q.denominator & (q.denominator - 1) == 0
        assert q.denominator <= 2 ** 64
    assert Fraction(1, 4) < m.radii[0] < Fraction(1, 2)
    assert validate_majorant(inv, m, 24)[0]


def test_inverse_majorant_follows_the_radius_hint():
    inv = Inverse(poly(1, [(1, 1), (Fraction(1, 100), 2)]))
    plain = majorant_of(inv)
    wide = majorant_of(inv, need=(5,))
    assert wide.radii[0] > 2 * plain.radii[0]
    assert validate_majorant(inv, wide, 20)[0]


def test_shrink_search_regrows_toward_the_rejected_box():
    diagonal = subst_poly(G, [Polynomial(2, {(1, 1): 1})])
    m = majorant_of(diagonal, need=(Fraction(4, 7), Fraction(4, 3)))
    fill = get_settings().subst_fill * majorant_of(G).radii[0]
    assert m.radii[1] >= Fraction(4, 3)
    assert Fraction(19, 20) * fill < m.radii[0] * m.radii[1] <= fill
    assert validate_majorant(diagonal, m, 30)[0]
