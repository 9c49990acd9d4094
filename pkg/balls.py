"""
Ball arithmetic: dyadic midpoint plus dyadic radius, outward rounded.

Midpoints and radii are raw mpmath floats (sign, man, exp, bc); every
operation rounds the midpoint to nearest at the working precision and folds
the rounding error, computed exactly, into the radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath.libmp import (
    fzero, fone, from_rational, to_rational, to_str,
    mpf_add, mpf_sub, mpf_mul, mpf_div, mpf_abs, mpf_neg, mpf_cmp,
    mpf_sqrt, mpf_shift, round_nearest, round_ceiling, round_floor,
)

DEFAULT_PREC = 64


def _frac(raw) -> Fraction:
    p, q = to_rational(raw)
    return Fraction(p, q)


def _raw_up(q: Fraction, prec: int):
    """Dyadic upper bound of a non-negative rational."""
    return from_rational(q.numerator, q.denominator, prec, round_ceiling)


def _settle(exact_mid, rad, prec: int) -> 'Ball':
    mid = mpf_add(exact_mid, fzero, prec, round_nearest)
    err = mpf_abs(mpf_sub(exact_mid, mid))
    return Ball(mid, mpf_add(rad, err, prec, round_ceiling), prec)


class Ball:
    __slots__ = ('_mid', '_rad', 'prec')

    def __init__(self, mid=fzero, rad=fzero, prec: int = DEFAULT_PREC):
        self._mid = mid
        self._rad = rad
        self.prec = prec

    # --- construction -------------------------------------------------

    @classmethod
    def exact(cls, value, prec: int = DEFAULT_PREC) -> 'Ball':
        """Smallest-effort enclosure of a rational at the given precision."""
        q = Fraction(value)
        mid = from_rational(q.numerator, q.denominator, prec, round_nearest)
        err = abs(q - _frac(mid))
        return cls(mid, _raw_up(err, prec) if err else fzero, prec)

    @classmethod
    def from_interval(cls, lo: Fraction, hi: Fraction, prec: int = DEFAULT_PREC) -> 'Ball':
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        mid = (lo + hi) / 2
        ball = cls.exact(mid, prec)
        return ball.widen((hi - lo) / 2)

    # --- views ----------------------------------------------------------

    @property
    def mid(self) -> Fraction:
        return _frac(self._mid)

    @property
    def rad(self) -> Fraction:
        return _frac(self._rad)

    def lower(self) -> Fraction:
        return self.mid - self.rad

    def upper(self) -> Fraction:
        return self.mid + self.rad

    def abs_upper(self) -> Fraction:
        return abs(self.mid) + self.rad

    def excludes_zero(self) -> bool:
        return mpf_cmp(mpf_abs(self._mid), self._rad) > 0

    def is_exact(self) -> bool:
        return self._rad == fzero

    def contains(self, value) -> bool:
        if isinstance(value, Ball):
            return abs(value.mid - self.mid) + value.rad <= self.rad
        return abs(Fraction(value) - self.mid) <= self.rad

    def overlaps(self, other: 'Ball', slack: Fraction = Fraction(0)) -> bool:
        return abs(self.mid - other.mid) <= self.rad + other.rad + slack

    def identical(self, other: 'Ball') -> bool:
        return self._mid == other._mid and self._rad == other._rad

    def widen(self, extra: Fraction) -> 'Ball':
        if not extra:
            return self
        rad = mpf_add(self._rad, _raw_up(Fraction(extra), self.prec), self.prec, round_ceiling)
        return Ball(self._mid, rad, self.prec)

    def with_prec(self, prec: int) -> 'Ball':
        return _settle(self._mid, self._rad, prec)

    # --- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> 'Ball':
        if isinstance(other, Ball):
            return other
        if isinstance(other, (int, Fraction)):
            return Ball.exact(other, self.prec)
        return NotImplemented

    def __neg__(self) -> 'Ball':
        return Ball(mpf_neg(self._mid), self._rad, self.prec)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        rad = mpf_add(self._rad, other._rad, prec, round_ceiling)
        return _settle(mpf_add(self._mid, other._mid), rad, prec)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = max(self.prec, other.prec)
        a, b = mpf_abs(self._mid), mpf_abs(other._mid)
        rad = mpf_mul(a, other._rad, prec, round_ceiling)
        rad = mpf_add(rad, mpf_mul(b, self._rad, prec, round_ceiling), prec, round_ceiling)
        rad = mpf_add(rad, mpf_mul(self._rad, other._rad, prec, round_ceiling), prec, round_ceiling)
        return _settle(mpf_mul(self._mid, other._mid), rad, prec)

    __rmul__ = __mul__

    def reciprocal(self) -> 'Ball':
        if not self.excludes_zero():
            raise ZeroDivisionError(f"ball {self!r} contains zero")
        prec = self.prec
        m = mpf_abs(self._mid)
        mid = mpf_div(fone, self._mid, prec, round_nearest)
        # |1/m - mid| = |1 - mid*m| / |m|
        slack = mpf_abs(mpf_sub(fone, mpf_mul(mid, self._mid)))
        err = mpf_div(slack, m, prec, round_ceiling)
        # |1/x - 1/m| <= r / (|m| (|m| - r)) for |x - m| <= r
        gap = mpf_sub(m, self._rad, prec, round_floor)
        denom = mpf_mul(m, gap, prec, round_floor)
        spread = mpf_div(self._rad, denom, prec, round_ceiling)
        return Ball(mid, mpf_add(spread, err, prec, round_ceiling), prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int) -> 'Ball':
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Ball.exact(1, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sqrt(self) -> 'Ball':
        prec = self.prec
        lo = mpf_sub(self._mid, self._rad, prec, round_floor)
        hi = mpf_add(self._mid, self._rad, prec, round_ceiling)
        if mpf_cmp(lo, fzero) < 0:
            raise ValueError(f"square root of a ball reaching below zero: {self!r}")
        lo_s = mpf_sqrt(lo, prec, round_floor)
        hi_s = mpf_sqrt(hi, prec, round_ceiling)
        mid = mpf_shift(mpf_add(lo_s, hi_s), -1)
        rad = mpf_shift(mpf_sub(hi_s, lo_s), -1)
        return _settle(mid, rad, prec)

    def scale2(self, k: int) -> 'Ball':
        """Exact multiplication by 2**k."""
        return Ball(mpf_shift(self._mid, k), mpf_shift(self._rad, k), self.prec)

    # --- printing -------------------------------------------------------

    def format_mid(self, digits: int) -> str:
        return format_decimal(self.mid, digits)

    def format_rad(self) -> str:
        return decimal_upper(self.rad)

    def __repr__(self) -> str:
        return f"Ball({to_str(self._mid, 20)} ± {to_str(self._rad, 3)})"


def format_decimal(q: Fraction, digits: int) -> str:
    """Rational rounded to `digits` places after the decimal point."""
    n = round(q * 10 ** digits)
    sign = '-' if n < 0 else ''
    s = str(abs(n)).rjust(digits + 1, '0')
    if digits == 0:
        return sign + s
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def decimal_upper(q: Fraction, sig: int = 2) -> str:
    """Decimal upper bound of a non-negative rational with `sig` significant digits."""
    q = Fraction(q)
    if q <= 0:
        return "0"
    e = len(str(q.numerator)) - len(str(q.denominator))
    while q < Fraction(10) ** e:
        e -= 1
    while q >= Fraction(10) ** (e + 1):
        e += 1
    scale = Fraction(10) ** (e - sig + 1)
    m = -(-q // scale)
    if m >= 10 ** sig:
        m //= 10
        e += 1
        if m * Fraction(10) ** (e - sig + 1) < q:
            m += 1
    digits = str(m)
    body = digits[0] + ('.' + digits[1:] if len(digits) > 1 else '')
    return f"{body}e{e}"


@dataclass(frozen=True)
class Tolerance:
    eps: Fraction

    def __post_init__(self):
        if Fraction(self.eps) <= 0:
            raise ValueError(f"tolerance must be positive, got {self.eps}")
        object.__setattr__(self, 'eps', Fraction(self.eps))

    @classmethod
    def from_digits(cls, digits: int) -> 'Tolerance':
        return cls(Fraction(1, 2 * 10 ** digits))

    def bits(self) -> int:
        """Smallest k with 2**-k <= eps."""
        inv = 1 / self.eps
        k = max(0, (inv.numerator // inv.denominator).bit_length() - 1)
        while Fraction(1, 2 ** k) > self.eps:
            k += 1
        return k

    def scaled(self, factor) -> 'Tolerance':
        return Tolerance(self.eps * Fraction(factor))


def as_ball(value, prec: int = DEFAULT_PREC) -> Ball:
    if isinstance(value, Ball):
        return value
    return Ball.exact(value, prec)
