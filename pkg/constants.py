"""
Derivation programs for classical constants.

Every constant is a series built from the closure operations, evaluated at a
rational point strictly inside its certified radius and combined exactly in
ball arithmetic. Arguments outside the certified discs are reduced first
(powers of two for log, halving for exp and sine, pi/4 shifts for arctan).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

from algebraic import AlgebraicSeriesDef, algebraic_series
from balls import Ball, Tolerance
from errors import EvaluationStalled, NonpositiveArgument
from evaluation import eval_at, integrate_last
from majorant import majorant_of
from series_core import (
    Inverse, SeriesExpr, antider, fmt_rat, poly, prec_for, recip, subst_poly,
)
from sparse_poly import Polynomial

logger = logging.getLogger(__name__)

_ATTEMPTS = 6
_TIGHTEN = 2 ** 16


@dataclass(frozen=True)
class DerivationProgram:
    name: str
    expr: SeriesExpr
    point: Tuple[Fraction, ...]
    doc: str = ''

    def text(self) -> str:
        return f"{self.expr.sexpr()} @ {' '.join(fmt_rat(x) for x in self.point)}"

    def evaluate(self, eps: Fraction) -> Ball:
        return eval_at(self.expr, self.point, eps)


@dataclass(frozen=True)
class ConstantResult:
    name: str
    ball: Ball
    digits: int
    derivation_hash: str

    def meets_contract(self) -> bool:
        return self.ball.rad <= Tolerance.from_digits(self.digits).eps


def derivation_digest(*parts: str) -> str:
    """sha256 over the newline-joined parts; every derivation_hash in CLI output comes from here."""
    return hashlib.sha256('\n'.join(parts).encode('utf-8')).hexdigest()


def _eps(digits: int) -> Fraction:
    if digits < 1:
        raise ValueError(f"digits must be >= 1, got {digits}")
    return Tolerance.from_digits(digits).eps


def _certify(compute: Callable[[Fraction], Ball], eps: Fraction, what: str) -> Ball:
    """Run compute(inner) with tighter inner tolerances until the result meets eps."""
    inner = eps
    for attempt in range(_ATTEMPTS):
        ball = compute(inner)
        if ball.rad <= eps:
            return ball
        logger.debug("%s: radius %.3g above %.3g, retrying", what, float(ball.rad), float(eps))
        inner /= _TIGHTEN
    raise EvaluationStalled(f"{what}: enclosure did not reach {float(eps):.3g}")


# --- series --------------------------------------------------------------------


@lru_cache(maxsize=None)
def geometric() -> SeriesExpr:
    """G = 1/(1 - X)."""
    return recip(poly(1, [(1, 0), (-1, 1)]))


@lru_cache(maxsize=None)
def log_series() -> SeriesExpr:
    """L = log(1 + X) as the antiderivative of 1/(1 + X)."""
    return antider(recip(poly(1, [(1, 0), (1, 1)])))


@lru_cache(maxsize=None)
def arctan_series() -> SeriesExpr:
    return antider(recip(poly(1, [(1, 0), (1, 2)])))


@lru_cache(maxsize=None)
def arcsine_series() -> SeriesExpr:
    """Antiderivative of (1 - X^2)^(-1/2): the algebraic leaf Y^2 (1 - X) = 1 with X -> X^2."""
    leaf = algebraic_series(AlgebraicSeriesDef.from_rows([[-1], [0], [1, -1]], 1))
    return antider(subst_poly(leaf, [Polynomial(1, {(2,): 1})]))


@lru_cache(maxsize=None)
def exp_minus_one() -> SeriesExpr:
    return Inverse(log_series())


@lru_cache(maxsize=None)
def sine_series() -> SeriesExpr:
    return Inverse(arcsine_series())


@lru_cache(maxsize=None)
def dilog_series() -> SeriesExpr:
    """Li2 = antider of S, S(x) = integral over [0, 1] of G(x t) dt."""
    inner = subst_poly(geometric(), [Polynomial(2, {(1, 1): 1})])
    return antider(integrate_last(inner, 1))


# reduced arguments sit within this fraction of the certified radius
_REDUCED = Fraction(1, 16)


def _halvings(series: SeriesExpr, x: Fraction) -> int:
    """Smallest k with |x| / 2^k <= r / 16, r the series' certified radius."""
    r = majorant_of(series).radii[0]
    k = 0
    while abs(x) / 2 ** k > r * _REDUCED:
        k += 1
    return k


# --- constants -----------------------------------------------------------------


@lru_cache(maxsize=64)
def _pi_ball(eps: Fraction) -> Ball:
    at = arctan_series()
    a = eval_at(at, Fraction(1, 5), eps / 64)
    b = eval_at(at, Fraction(1, 239), eps / 16)
    return a * 16 - b * 4


def _pi_hash() -> str:
    text = arctan_series().sexpr()
    return derivation_digest('machin', f"16 * {text} @ 1/5", f"-4 * {text} @ 1/239")


def machin_pi(digits: int) -> ConstantResult:
    """pi = 16 arctan(1/5) - 4 arctan(1/239)."""
    eps = _eps(digits)
    ball = _certify(_pi_ball, eps, 'pi')
    return ConstantResult('pi', ball, digits, _pi_hash())


@lru_cache(maxsize=64)
def _log2_ball(eps: Fraction) -> Ball:
    return -eval_at(log_series(), Fraction(-1, 2), eps)


def log2(digits: int) -> ConstantResult:
    """log 2 = -L(-1/2), the anchor for every other logarithm."""
    eps = _eps(digits)
    ball = _certify(_log2_ball, eps, 'log2')
    return ConstantResult('log2', ball, digits, derivation_digest('log2', f"-1 * {log_series().sexpr()} @ -1/2"))


def _split_power_of_two(q: Fraction) -> Tuple[int, Fraction]:
    """q = 2^k m with m in [3/4, 3/2]."""
    k = 0
    while q > Fraction(3, 2):
        q /= 2
        k += 1
    while q < Fraction(3, 4):
        q *= 2
        k -= 1
    return k, q


def log_rational(q, digits: int) -> ConstantResult:
    q = Fraction(q)
    if q <= 0:
        raise NonpositiveArgument(f"log of non-positive rational {q}")
    eps = _eps(digits)
    name = f"log:{fmt_rat(q)}"
    if q == 1:
        return ConstantResult(name, Ball.exact(0, prec_for(eps)), digits, derivation_digest('log', '1'))
    k, m = _split_power_of_two(q)

    def compute(inner: Fraction) -> Ball:
        ball = Ball.exact(0, prec_for(inner))
        if m != 1:
            ball = ball + eval_at(log_series(), m - 1, inner / 4)
        if k:
            ball = ball + _log2_ball(inner / (4 * abs(k))) * k
        return ball

    ball = _certify(compute, eps, name)
    text = log_series().sexpr()
    return ConstantResult(name, ball, digits, derivation_digest('log', f"{text} @ {fmt_rat(m - 1)}", f"{k} * log2"))


def exp_rational(q, digits: int) -> ConstantResult:
    """exp q = (1 + (E - 1)(q / 2^k))^(2^k) with E - 1 the inverse of the log series."""
    q = Fraction(q)
    eps = _eps(digits)
    name = f"exp:{fmt_rat(q)}"
    series = exp_minus_one()
    if q == 0:
        return ConstantResult(name, Ball.exact(1, prec_for(eps)), digits, derivation_digest('exp', '0'))
    k = _halvings(series, q)
    y = q / 2 ** k
    growth = 3 ** (int(abs(q)) + 1)

    def compute(inner: Fraction) -> Ball:
        ball = eval_at(series, y, inner / (2 ** (k + 2) * growth)) + 1
        for _ in range(k):
            ball = ball * ball
        return ball

    ball = _certify(compute, eps, name)
    return ConstantResult(name, ball, digits, derivation_digest('exp', f"{series.sexpr()} @ {fmt_rat(y)}", f"^ 2^{k}"))


def euler_e(digits: int) -> ConstantResult:
    res = exp_rational(1, digits)
    return ConstantResult('e', res.ball, digits, res.derivation_hash)


def arcsin_half(digits: int) -> ConstantResult:
    """pi/6 = arcsin(1/2) = A(1/2)."""
    eps = _eps(digits)
    program = DerivationProgram('pi_over_6', arcsine_series(), (Fraction(1, 2),))
    ball = _certify(program.evaluate, eps, 'pi_over_6')
    return ConstantResult('pi_over_6', ball, digits, derivation_digest('arcsin', program.text()))


def dilog_half(digits: int) -> ConstantResult:
    eps = _eps(digits)
    program = DerivationProgram('li2_half', dilog_series(), (Fraction(1, 2),))
    ball = _certify(program.evaluate, eps, 'li2_half')
    return ConstantResult('li2_half', ball, digits, derivation_digest('dilog', program.text()))


def _sin_cos(x: Fraction, eps: Fraction) -> Tuple[Ball, Ball]:
    series = sine_series()
    k = _halvings(series, x)
    y = x / 2 ** k

    def compute(inner: Fraction) -> Tuple[Ball, Ball]:
        s = eval_at(series, y, inner / 4 ** (k + 2))
        c = (1 - s * s).sqrt()
        for _ in range(k):
            s, c = 2 * s * c, 1 - 2 * s * s
        return s, c

    inner = eps
    for _ in range(_ATTEMPTS):
        s, c = compute(inner)
        if s.rad <= eps and c.rad <= eps:
            return s, c
        inner /= _TIGHTEN
    raise EvaluationStalled(f"sin/cos at {x}: enclosure did not reach {float(eps):.3g}")


def _trig_hash(kind: str, x: Fraction) -> str:
    series = sine_series()
    return derivation_digest(kind, f"{series.sexpr()} @ {fmt_rat(x)}", f"halvings {_halvings(series, x)}")


def sine_at(x, digits: int) -> ConstantResult:
    x = Fraction(x)
    eps = _eps(digits)
    name = f"sin:{fmt_rat(x)}"
    if x == 0:
        return ConstantResult(name, Ball.exact(0, prec_for(eps)), digits, derivation_digest('sin', '0'))
    s, _ = _sin_cos(x, eps)
    return ConstantResult(name, s, digits, _trig_hash('sin', x))


def cosine_at(x, digits: int) -> ConstantResult:
    x = Fraction(x)
    eps = _eps(digits)
    name = f"cos:{fmt_rat(x)}"
    if x == 0:
        return ConstantResult(name, Ball.exact(1, prec_for(eps)), digits, derivation_digest('cos', '0'))
    _, c = _sin_cos(x, eps)
    return ConstantResult(name, c, digits, _trig_hash('cos', x))


def _arctan_reduce(q: Fraction) -> Tuple[Fraction, int, Fraction]:
    """arctan q = c pi + s arctan(r) with |r| <= 1/2; returns (c, s, r)."""
    if q < 0:
        c, s, r = _arctan_reduce(-q)
        return -c, -s, r
    if q <= Fraction(1, 2):
        return Fraction(0), 1, q
    if q > 1:
        c, s, r = _arctan_reduce(1 / q)
        return Fraction(1, 2) - c, -s, r
    # q in (1/2, 1]: arctan q = pi/4 + arctan((q - 1) / (q + 1))
    return Fraction(1, 4), 1, (q - 1) / (q + 1)


def arctan_at(q, digits: int) -> ConstantResult:
    q = Fraction(q)
    eps = _eps(digits)
    name = f"atan:{fmt_rat(q)}"
    c, s, r = _arctan_reduce(q)

    def compute(inner: Fraction) -> Ball:
        ball = eval_at(arctan_series(), r, inner / 4) * s
        if c:
            ball = ball + _pi_ball(inner / (4 * abs(c) + 4)) * c
        return ball

    ball = _certify(compute, eps, name)
    return ConstantResult(name, ball, digits,
                          derivation_digest('atan', f"{arctan_series().sexpr()} @ {fmt_rat(r)}", f"{fmt_rat(c)} * pi"))


# --- registry -------------------------------------------------------------------

REGISTRY: Dict[str, Tuple[Callable[[int], ConstantResult], str]] = {
    'pi': (machin_pi, "16 atan(1/5) - 4 atan(1/239), arctan = antider of 1/(1+X^2)"),
    'e': (euler_e, "(1 + inverse(L)(1/2^k))^(2^k)"),
    'log2': (log2, "-L(-1/2), L = antider of 1/(1+X)"),
    'pi_over_6': (arcsin_half, "arcsin(1/2) from the algebraic series (1-X^2)^(-1/2)"),
    'li2_half': (dilog_half, "Li2(1/2) = antider of the integral over [0,1] of G(X T) dT, at 1/2"),
}

PARAMETRIC: Dict[str, Tuple[Callable[[Fraction, int], ConstantResult], str]] = {
    'log': (log_rational, "log q for rational q > 0"),
    'exp': (exp_rational, "exp q for rational q"),
    'sin': (sine_at, "sin q via inverse of the arcsine series"),
    'cos': (cosine_at, "cos q via the double-angle recurrence"),
    'atan': (arctan_at, "arctan q for rational q"),
}


def lookup(name: str, digits: int) -> ConstantResult:
    """Registry entry by name: 'pi', 'e', ... or parametric 'log:3/2', 'sin:1/2', ..."""
    if name in REGISTRY:
        return REGISTRY[name][0](digits)
    kind, sep, arg = name.partition(':')
    if sep and kind in PARAMETRIC:
        try:
            q = Fraction(arg)
        except (ValueError, ZeroDivisionError) as ex:
            raise KeyError(f"bad rational argument {arg!r} in {name!r}") from ex
        return PARAMETRIC[kind][0](q, digits)
    known = ', '.join(list(REGISTRY) + [f"{k}:<q>" for k in PARAMETRIC])
    raise KeyError(f"unknown constant {name!r}; known: {known}")


def list_constants() -> List[Tuple[str, str]]:
    return [(k, doc) for k, (_, doc) in REGISTRY.items()] + [(f"{k}:<q>", doc) for k, (_, doc) in PARAMETRIC.items()]
