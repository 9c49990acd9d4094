"""
Univariate algebraic power series: y(X) with P(X, y(X)) = 0 and y(0) = y0.

Coefficients come from Newton-Hensel lifting on truncations; radius and
magnitude certificates come from the discriminant and leading coefficient
of P, all in exact rational arithmetic. Real roots of univariate
polynomials are isolated with Sturm sequences.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy
from sympy import QQ, Poly, integer_nthroot

from balls import Ball, Tolerance
from errors import (
    DegenerateDiscriminant, InconsistentDefinition, MajorantUnavailable,
    NotIsolating, NotSimpleRoot, ZeroPolynomial,
)
from settings import get_settings
from sparse_poly import list_mul, list_recip

logger = logging.getLogger(__name__)

X, Y, T = sympy.symbols('X Y T')


def _rat(q) -> sympy.Rational:
    q = Fraction(q)
    return sympy.Rational(q.numerator, q.denominator)


def _frac(r) -> Fraction:
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def _horner(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


class AlgebraicSeriesDef:
    """P in Q[X, Y] with a simple root y0 of P(0, Y)."""

    def __init__(self, P, y0):
        if not isinstance(P, Poly):
            P = Poly(P, X, Y, domain=QQ)
        else:
            P = Poly(P.as_expr(), X, Y, domain=QQ)
        if P.is_zero:
            raise InconsistentDefinition("defining polynomial is zero")
        self.P = P
        self.y0 = Fraction(y0)
        self._rows = self._to_rows(P)
        at0 = [row[0] if row else Fraction(0) for row in self._rows]
        if _horner(at0, self.y0) != 0:
            raise InconsistentDefinition(f"P(0, {self.y0}) != 0")
        slope = sum((k * at0[k] * self.y0 ** (k - 1) for k in range(1, len(at0))), Fraction(0))
        if slope == 0:
            raise NotSimpleRoot(f"dP/dY(0, {self.y0}) = 0")
        if P.degree(Y) > 0 and sympy.gcd(P, P.diff(Y)).degree(Y) > 0:
            raise DegenerateDiscriminant("defining polynomial is not squarefree in Y")
        self._lock = threading.Lock()
        self._coeffs: List[Fraction] = [self.y0]
        self._bound: Optional[Tuple[Fraction, Fraction]] = None

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], y0) -> 'AlgebraicSeriesDef':
        """rows[k] lists the X-coefficients (ascending) of Y**k."""
        expr = sum((_rat(c) * X ** i * Y ** k for k, row in enumerate(rows) for i, c in enumerate(row)),
                   sympy.Integer(0))
        return cls(expr, y0)

    @staticmethod
    def _to_rows(P: Poly) -> List[List[Fraction]]:
        dy = P.degree(Y)
        rows: List[List[Fraction]] = [[] for _ in range(dy + 1)]
        for (i, k), c in P.terms():
            row = rows[k]
            row.extend([Fraction(0)] * (i + 1 - len(row)))
            row[i] = _frac(c)
        return [row or [Fraction(0)] for row in rows]

    def rows(self) -> List[List[Fraction]]:
        return [list(r) for r in self._rows]

    def coefficient(self, p: int) -> Fraction:
        if p >= len(self._coeffs):
            n = len(self._coeffs)
            while n <= p:
                n *= 2
            lifted = newton_lift(self, max(1, (n - 1).bit_length()))
            with self._lock:
                if len(lifted) > len(self._coeffs):
                    self._coeffs = lifted
        return self._coeffs[p]

    def residual(self, y: Sequence[Fraction], n: int) -> List[Fraction]:
        """P(X, y(X)) truncated to n terms."""
        val, _ = _evaluate_rows(self._rows, list(y), n)
        return val

    def __repr__(self) -> str:
        return f"AlgebraicSeriesDef({self.P.as_expr()}, y0={self.y0})"


def _evaluate_rows(rows, y, n):
    """P(X, y) and dP/dY(X, y) truncated to n terms, Horner in Y."""
    val = [Fraction(0)] * n
    dval = [Fraction(0)] * n
    for row in reversed(rows):
        dval = [a + b for a, b in zip(list_mul(dval, y, n), val)]
        val = list_mul(val, y, n)
        for i, c in enumerate(row[:n]):
            val[i] += c
    return val, dval


def newton_lift(definition: AlgebraicSeriesDef, steps: int) -> List[Fraction]:
    """y after `steps` doublings: 2**steps coefficients, all exact."""
    y = [definition.y0]
    n = 1
    rows = definition._rows
    for step in range(steps):
        n *= 2
        y = y + [Fraction(0)] * (n - len(y))
        val, dval = _evaluate_rows(rows, y, n)
        corr = list_mul(val, list_recip(dval, n), n)
        y = [a - b for a, b in zip(y, corr)]
        logger.debug("newton step %d: %d coefficients", step + 1, n)
    return y


def algebraic_series(definition: AlgebraicSeriesDef):
    from series_core import Alg
    return Alg(definition)


# --- real roots -------------------------------------------------------------


@dataclass(frozen=True)
class IsolatingInterval:
    lo: Fraction
    hi: Fraction

    def __contains__(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi


def as_poly(p) -> Poly:
    if isinstance(p, Poly):
        gens = p.gens
        if len(gens) != 1:
            raise ValueError(f"expected a univariate polynomial, got generators {gens}")
        return Poly(p.as_expr(), gens[0], domain=QQ)
    if isinstance(p, (list, tuple)):
        expr = sum((_rat(c) * T ** i for i, c in enumerate(p)), sympy.Integer(0))
        return Poly(expr, T, domain=QQ)
    free = sorted(sympy.sympify(p).free_symbols, key=str)
    return Poly(p, *(free[:1] or [T]), domain=QQ)


def _sign_changes(seq: Sequence[Poly], x: sympy.Rational) -> int:
    signs = [bool(v > 0) for v in (q.eval(x) for q in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _cauchy_bound(q: Poly) -> Fraction:
    cs = [_frac(c) for c in q.all_coeffs()]
    lead = abs(cs[0])
    return 1 + max((abs(c) / lead for c in cs[1:]), default=Fraction(0))


def isolate_real_roots(p) -> List[IsolatingInterval]:
    P = as_poly(p)
    if P.is_zero:
        raise ZeroPolynomial("cannot isolate the roots of the zero polynomial")
    if P.degree() <= 0:
        return []
    q = sympy.sqf_part(P)
    seq = sympy.sturm(q)
    bound = _cauchy_bound(q)
    out: List[IsolatingInterval] = []

    def value(x: Fraction):
        return q.eval(_rat(x))

    def split(lo: Fraction, hi: Fraction, vlo: int, vhi: int):
        count = vlo - vhi
        if count == 0:
            return
        if count == 1:
            out.append(IsolatingInterval(lo, hi))
            return
        mid = (lo + hi) / 2
        j = 2
        while value(mid) == 0:
            mid = (lo + hi) / 2 + (hi - lo) / 2 ** j
            j += 1
        vmid = _sign_changes(seq, _rat(mid))
        split(lo, mid, vlo, vmid)
        split(mid, hi, vmid, vhi)

    lo, hi = -bound, bound
    split(lo, hi, _sign_changes(seq, _rat(lo)), _sign_changes(seq, _rat(hi)))
    return out


def refine_root(p, iv: IsolatingInterval, eps) -> Ball:
    P = as_poly(p)
    if P.is_zero:
        raise ZeroPolynomial("cannot refine a root of the zero polynomial")
    eps = Fraction(eps)
    q = sympy.sqf_part(P)
    lo, hi = Fraction(iv.lo), Fraction(iv.hi)
    prec = max(64, Tolerance(eps).bits() + 32)
    flo, fhi = q.eval(_rat(lo)), q.eval(_rat(hi))
    if lo == hi or flo == 0 or fhi == 0:
        if flo == 0 and (fhi != 0 or lo == hi):
            return Ball.exact(lo, prec)
        if fhi == 0 and flo != 0:
            return Ball.exact(hi, prec)
        raise NotIsolating(f"[{lo}, {hi}] does not isolate a single root")
    if lo > hi or bool(flo > 0) == bool(fhi > 0):
        raise NotIsolating(f"no sign change of the polynomial on [{lo}, {hi}]")
    seq = sympy.sturm(q)
    if _sign_changes(seq, _rat(lo)) - _sign_changes(seq, _rat(hi)) != 1:
        raise NotIsolating(f"[{lo}, {hi}] contains more than one root")
    positive_at_lo = bool(flo > 0)
    while hi - lo > eps:
        mid = (lo + hi) / 2
        fm = q.eval(_rat(mid))
        if fm == 0:
            return Ball.exact(mid, prec)
        if bool(fm > 0) == positive_at_lo:
            lo = mid
        else:
            hi = mid
    return Ball.from_interval(lo, hi, prec)


def positive_root_lower(coeffs: Sequence[Fraction], bits: Optional[int] = None) -> Fraction:
    """
    Rational lower bound for the positive root of c0 - c1 s - c2 s^2 - ...
    given as [c0, -c1, -c2, ...] with c0 > 0 and all other entries <= 0.
    Returns None when the tail vanishes (no positive root).
    """
    coeffs = [Fraction(c) for c in coeffs]
    if len(coeffs) < 2 or all(c == 0 for c in coeffs[1:]):
        return None
    bits = bits or get_settings().root_refine_bits
    hi = Fraction(1)
    while _horner(coeffs, hi) > 0:
        hi *= 2
    lo = Fraction(0)
    while hi - lo > hi / 2 ** bits:
        mid = (lo + hi) / 2
        if _horner(coeffs, mid) > 0:
            lo = mid
        else:
            hi = mid
    if lo == 0:
        lo = hi / 2 ** (bits + 1)
        while _horner(coeffs, lo) <= 0:
            lo /= 2
    return lo


def _root_upper(q: Fraction, k: int, bits: int) -> Fraction:
    """Rational upper bound for q**(1/k), q >= 0."""
    if q <= 0:
        return Fraction(0)
    if k == 1:
        return q
    u, v = q.numerator, q.denominator
    scale = 2 ** bits
    root, exact = integer_nthroot(u * v ** (k - 1) * scale ** k, k)
    return Fraction(int(root) + (0 if exact else 1), v * scale)


def _modulus_lower(coeffs: List[Fraction]) -> Optional[Fraction]:
    """Lower bound on the smallest modulus of the nonzero complex roots."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    while c and c[0] == 0:
        c.pop(0)
    if len(c) < 2:
        return None
    return positive_root_lower([abs(c[0])] + [-abs(x) for x in c[1:]])


def radius_bound(definition: AlgebraicSeriesDef) -> Tuple[Fraction, Fraction]:
    """(M, r) with |a_p| <= M r^-p for every coefficient of the series."""
    if definition._bound is not None:
        return definition._bound
    cfg = get_settings()
    rows = definition._rows
    dy = len(rows) - 1
    if dy >= 2:
        disc = sympy.discriminant(definition.P.as_expr(), Y)
        disc_poly = Poly(disc, X, domain=QQ)
        if disc_poly.is_zero:
            raise DegenerateDiscriminant("discriminant in Y vanishes identically")
        disc_coeffs = [_frac(c) for c in reversed(disc_poly.all_coeffs())]
    else:
        disc_coeffs = [Fraction(1)]
    lead = rows[-1]
    if lead[0] == 0:
        raise MajorantUnavailable("leading coefficient in Y vanishes at X = 0; no magnitude bound")

    r = cfg.radius_cap
    for factor in (disc_coeffs, lead):
        rho = _modulus_lower(factor)
        if rho is not None:
            r = min(r, rho / 2)

    for _ in range(cfg.shrink_steps):
        lead_low = abs(lead[0]) - sum((abs(c) * r ** i for i, c in enumerate(lead) if i), Fraction(0))
        if lead_low > 0:
            break
        r *= cfg.shrink_factor
    else:
        raise MajorantUnavailable("no disc where the leading coefficient stays away from zero")

    # Fujiwara: |y| <= 2 max(|a_{d-k}/a_d|^(1/k), |a_0/(2 a_d)|^(1/d))
    sizes = [sum((abs(c) * r ** i for i, c in enumerate(row)), Fraction(0)) for row in rows]
    best = Fraction(0)
    for k in range(1, dy + 1):
        ratio = sizes[dy - k] / lead_low
        if k == dy:
            ratio /= 2
        best = max(best, _root_upper(ratio, k, cfg.root_refine_bits))
    M = 2 * best if best > 0 else Fraction(1)
    logger.debug("radius bound for %r: M=%s r=%s", definition, M, r)
    definition._bound = (M, r)
    return definition._bound
