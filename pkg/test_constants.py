from fractions import Fraction

import pytest

from balls import Tolerance
from constants import (
    DerivationProgram, _arctan_reduce, _halvings, _split_power_of_two, exp_minus_one, geometric, list_constants,
    log_rational, lookup, machin_pi,
)
from errors import NonpositiveArgument
from evaluation import eval_detailed
from majorant import majorant_of
from suites import oracle, oracle_slack

DIGITS = 12


def agrees(result, name, digits=DIGITS):
    return abs(result.ball.mid - oracle(name, digits)) <= result.ball.rad + oracle_slack(digits)


def test_machin_pi():
    res = machin_pi(20)
    assert res.meets_contract()
    assert res.ball.rad <= Tolerance.from_digits(20).eps
    assert agrees(res, 'pi', 20)
    assert len(res.derivation_hash) == 64
    assert machin_pi(10).derivation_hash == res.derivation_hash


@pytest.mark.parametrize('name, oracle_name', [
    ('e', 'e'),
    ('log2', 'log2'),
    ('pi_over_6', 'pi_over_6'),
    ('log:3/2', 'log:3/2'),
    ('log:10', 'log:10'),
    ('log:1/3', 'log:1/3'),
    ('exp:1/3', 'exp:1/3'),
    ('exp:-2', 'exp:-2'),
    ('sin:1/2', 'sin:1/2'),
    ('cos:1/2', 'cos:1/2'),
    ('atan:2', 'atan:2'),
    ('atan:-3/4', 'atan:-3/4'),
])
def test_registry_matches_oracle(name, oracle_name):
    res = lookup(name, DIGITS)
    assert res.meets_contract()
    assert agrees(res, oracle_name)


def test_dilog_half_at_low_precision():
    res = lookup('li2_half', 6)
    assert res.meets_contract()
    assert agrees(res, 'li2_half', 6)


def test_trivial_arguments_are_exact():
    assert log_rational(1, 10).ball.is_exact()
    assert lookup('exp:0', 10).ball.mid == 1
    assert lookup('sin:0', 10).ball.mid == 0


def test_lookup_errors():
    with pytest.raises(KeyError):
        lookup('tau', 10)
    with pytest.raises(KeyError):
        lookup('log:abc', 10)
    with pytest.raises(NonpositiveArgument):
        lookup('log:-1', 10)
    with pytest.raises(ValueError):
        lookup('pi', 0)


def test_argument_reductions():
    assert _split_power_of_two(Fraction(10)) == (3, Fraction(5, 4))
    assert _split_power_of_two(Fraction(1, 3)) == (-2, Fraction(4, 3))
    assert _arctan_reduce(Fraction(2)) == (Fraction(1, 2), -1, Fraction(1, 2))
    assert _arctan_reduce(Fraction(3, 4)) == (Fraction(1, 4), 1, Fraction(-1, 7))
    assert _arctan_reduce(Fraction(-1, 3)) == (0, -1, Fraction(1, 3))


def test_list_constants():
    names = [name for name, _ in list_constants()]
    assert 'pi' in names and 'li2_half' in names
    assert 'log:<q>' in names


def test_derivation_program_text():
    program = DerivationProgram('g', geometric(), (Fraction(1, 2),))
    assert program.text() == '(recip (poly 1 (1 0) (-1 1))) @ 1/2'
    assert program.evaluate(Fraction(1, 10 ** 8)).contains(2)


def test_exp_argument_reduction_keeps_the_inverse_series_short():
    series = exp_minus_one()
    k = _halvings(series, Fraction(1))
    y = Fraction(1, 2 ** k)
    r = majorant_of(series).radii[0]
    assert y <= r / 16 < 2 * y
    res = eval_detailed(series, y, Tolerance.from_digits(30))
    assert res.order <= 40
