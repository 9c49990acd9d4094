"""
Certified evaluation at rational points.

The driver picks the smallest truncation order whose majorant tail is below
half the tolerance (doubling to bracket it, then bisecting) and sums the
partial series in ball arithmetic, requesting each coefficient tightly enough
for the whole error budget to hold. Precision doubles if rounding eats the
remaining budget.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, log
from typing import Sequence, Tuple, Union

from balls import Ball, Tolerance
from errors import ArityMismatch, EvaluationStalled, PointOutsideRadii
from majorant import GeometricMajorant, known_majorants, majorant_of, tail_bound, translation_majorant
from settings import get_settings
from sparse_poly import MultiIndex, indices_up_to, is_zero, monomial_value

logger = logging.getLogger(__name__)

PointLike = Union[Fraction, int, Sequence]


@dataclass(frozen=True)
class EvalResult:
    ball: Ball
    order: int
    prec: int
    tail: Fraction
    majorant: GeometricMajorant


def _point(x: PointLike, arity: int) -> Tuple[Fraction, ...]:
    if isinstance(x, (list, tuple)):
        pt = tuple(Fraction(v) for v in x)
    elif arity == 0 and x in (None, 0):
        pt = ()
    else:
        pt = (Fraction(x),)
    if len(pt) != arity:
        raise ArityMismatch(f"point has {len(pt)} entries, series has arity {arity}")
    return pt


def _tolerance(tol) -> Tolerance:
    if isinstance(tol, Tolerance):
        return tol
    return Tolerance(Fraction(tol))


def _grid_below(q: Fraction) -> Fraction:
    """Largest 2^(8j) not above q; coarse steps let requests share coefficient caches."""
    k = q.numerator.bit_length() - q.denominator.bit_length()
    if Fraction(2) ** k > q:
        k -= 1
    k -= k % 8
    return Fraction(2) ** k


def partial_sum(e, x: Sequence[Fraction], N: int, budget: Fraction, prec: int) -> Ball:
    """
    Sum of a_alpha x^alpha over |alpha| <= N. Each coefficient is requested to
    at most budget / |x^alpha|, so every term contributes at most `budget` of radius.
    """
    exact = Fraction(0)
    approx = Ball.exact(0, prec)
    for alpha in indices_up_to(len(x), N):
        w = monomial_value(alpha, x)
        if not w:
            continue
        c = e.coeff(alpha, _grid_below(budget / abs(w)))
        if is_zero(c):
            continue
        if isinstance(c, Ball):
            approx = approx + c * Ball.exact(w, prec)
        else:
            exact += c * w
    return approx + Ball.exact(exact, prec)


def _smallest_order(fits, start: int, limit: int) -> int:
    """Smallest N >= start with fits(N): doubling to bracket, then bisection."""
    hi = start
    while not fits(hi):
        if hi > limit:
            raise EvaluationStalled(f"no truncation order up to {limit} meets the tolerance")
        hi *= 2
    lo = max(start, hi // 2)
    if lo == hi or fits(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            hi = mid
        else:
            lo = mid
    return hi


def eval_detailed(e, x: PointLike = 0, tol=Fraction(1, 10 ** 30)) -> EvalResult:
    cfg = get_settings()
    tol = _tolerance(tol)
    pt = _point(x, e.arity)
    n = e.arity
    need = tuple(abs(v) / cfg.eval_margin if v else None for v in pt)
    m = majorant_of(e, need)
    for v, r in zip(pt, m.radii):
        if abs(v) >= r:
            raise PointOutsideRadii(f"|{v}| is not strictly inside certified radius {r}")
    eps = tol.eps
    N = _smallest_order(lambda k: tail_bound(m, pt, k) < eps / 2, cfg.eval_start_order, cfg.eval_max_order)
    tail = tail_bound(m, pt, N)
    prec = cfg.eval_start_prec
    while True:
        budget = (eps / 2 - tail) / (2 * comb(N + n, n))
        prec = max(prec, Tolerance(budget).bits() + 32)
        s = partial_sum(e, pt, N, budget, prec)
        if s.rad + tail <= eps:
            logger.debug("eval %s at %s: order %d, prec %d, tail %.3g", e.kind, pt, N, prec, float(tail))
            return EvalResult(s.widen(tail), N, prec, tail, m)
        if prec > 64 * Tolerance(eps).bits() + cfg.eval_start_prec:
            raise EvaluationStalled(f"partial sum radius {float(s.rad):.3g} stays above {float(eps):.3g}")
        prec *= 2


def eval_at(e, x: PointLike = 0, tol=Fraction(1, 10 ** 30)) -> Ball:
    """Ball of radius <= tol containing sum a_alpha x^alpha; x strictly inside the certified radii."""
    return eval_detailed(e, x, tol).ball


def _log(q: Fraction) -> float:
    return log(q.numerator) - log(q.denominator)


def _cheapest_majorant(e, a: Tuple[Fraction, ...], support, beta: MultiIndex, eps: Fraction) -> GeometricMajorant:
    """Among the majorants certified for e inside the translation margin, the one needing the fewest tail terms."""
    theta = get_settings().translate_margin
    best, cost = None, None
    for m in [translation_majorant(e, a)] + known_majorants(e):
        if any(abs(a[i]) > theta * m.radii[i] for i in support):
            continue
        t = max(abs(a[i]) / m.radii[i] for i in support)
        terms = (_log(m.bound(beta)) - _log(eps)) / -_log(t)
        if cost is None or terms < cost:
            best, cost = m, terms
    return best


def translate_coeff(e, a: Sequence, beta: MultiIndex, tol) -> Ball:
    """
    Enclosure of D^beta e(a) / beta!.

    Sums binom(beta+gamma, beta) * e_{beta+gamma} * a^gamma over gamma supported
    where a is nonzero. With t = max |a_i|/r_i and m = sum (beta_i + 1) over that
    support, the shell |gamma| = k contributes at most
    M r^-beta binom(k+m-1, m-1) t^k, whose ratios decrease, so the tail past K
    is bounded by a geometric series.
    """
    cfg = get_settings()
    tol = _tolerance(tol)
    a = tuple(Fraction(v) for v in a)
    beta = tuple(beta)
    if len(a) != e.arity or len(beta) != e.arity:
        raise ArityMismatch(f"translate_coeff: point {a} / index {beta} do not match arity {e.arity}")
    support = [i for i, v in enumerate(a) if v]
    if not support:
        return Ball.exact(0, 64) + e.coeff(beta, tol.eps)
    eps = tol.eps
    m = _cheapest_majorant(e, a, support, beta, eps)
    t = max(abs(a[i]) / m.radii[i] for i in support)
    mm = sum(beta[i] + 1 for i in support)
    base = m.bound(beta)

    def tail_after(K: int):
        q = Fraction(K + 1 + mm, K + 2) * t
        if q >= 1:
            return None
        return base * comb(K + mm, mm - 1) * t ** (K + 1) / (1 - q)

    def fits(K: int) -> bool:
        tail = tail_after(K)
        return tail is not None and tail < eps / 2

    K = _smallest_order(fits, cfg.eval_start_order, cfg.eval_max_order)
    tail = tail_after(K)
    terms = []
    for gamma in indices_up_to(len(support), K):
        full = list(beta)
        weight = Fraction(1)
        for i, g in zip(support, gamma):
            if g:
                full[i] += g
                weight *= comb(beta[i] + g, g) * a[i] ** g
        terms.append((tuple(full), weight))
    total_weight = sum((abs(w) for _, w in terms), Fraction(0))
    delta = eps / (4 * (1 + total_weight))
    prec = max(cfg.eval_start_prec, Tolerance(delta).bits() + 32)
    exact = Fraction(0)
    approx = Ball.exact(0, prec)
    for alpha, w in terms:
        c = e.coeff(alpha, delta)
        if is_zero(c):
            continue
        if isinstance(c, Ball):
            approx = approx + c * Ball.exact(w, prec)
        else:
            exact += c * w
    logger.debug("translate_coeff %s at %s: K=%d tail %.3g", beta, a, K, float(tail))
    return (approx + Ball.exact(exact, prec)).widen(tail)


def integrate_last(e, a):
    """x' -> integral over [0, a] of e(x', t) dt."""
    from series_core import IntLast
    return IntLast(e, a)
