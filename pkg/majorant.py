"""
Geometric majorants (M, r_1..r_n): |a_alpha| <= M * prod r_i^-alpha_i for all alpha.

majorant_of() walks the DAG bottom-up with one rule per node kind. Callers
may pass `need`, per-variable radius hints: a rule tries to certify at least
that radius in those variables and spends its slack on the others first.
Hints steer the search only; every returned majorant is valid on its own.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, List, Optional, Sequence, Tuple

from balls import Ball
from errors import MajorantUnavailable, PointOutsideRadii, TranslationOutsideDomain
from settings import get_settings
from sparse_poly import MultiIndex, indices_up_to, is_zero, zero_index

logger = logging.getLogger(__name__)

Need = Optional[Tuple[Optional[Fraction], ...]]

# exact coefficients folded into the inverse-function bound
INVERSE_HEAD = 32


@dataclass(frozen=True)
class GeometricMajorant:
    M: Fraction
    radii: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'M', Fraction(self.M))
        object.__setattr__(self, 'radii', tuple(Fraction(r) for r in self.radii))
        if self.M <= 0 or any(r <= 0 for r in self.radii):
            raise ValueError(f"majorant needs M > 0 and positive radii, got {self}")

    @property
    def arity(self) -> int:
        return len(self.radii)

    def bound(self, alpha: MultiIndex) -> Fraction:
        b = self.M
        for a, r in zip(alpha, self.radii):
            if a:
                b /= r ** a
        return b

    def sup_on(self, rho: Sequence[Fraction]) -> Fraction:
        """Upper bound of |f| on the closed polydisc rho (rho < r)."""
        out = self.M
        for p, r in zip(rho, self.radii):
            out /= 1 - Fraction(p) / r
        return out

    def __str__(self) -> str:
        radii = ', '.join(str(r) for r in self.radii)
        return f"M={self.M} r=({radii})"


def _abs_upper(c) -> Fraction:
    return c.abs_upper() if isinstance(c, Ball) else abs(Fraction(c))


def _abs_lower(c) -> Fraction:
    if isinstance(c, Ball):
        return max(Fraction(0), abs(c.mid) - c.rad)
    return abs(Fraction(c))


def _normalize(need, arity: int) -> Need:
    if need is None:
        return None
    need = tuple(None if v is None or Fraction(v) <= 0 else Fraction(v) for v in need)
    if len(need) != arity:
        raise ValueError(f"radius hint {need} does not match arity {arity}")
    return need if any(v is not None for v in need) else None


def _hint(need: Need, i: int) -> Optional[Fraction]:
    return None if need is None else need[i]


def _shrink(start: Sequence[Fraction], floor: Sequence[Optional[Fraction]], ok: Callable[[List[Fraction]], bool],
            what: str) -> List[Fraction]:
    """
    Shrink rho by shrink_factor until ok(rho). For the first half of the steps
    a demanded variable stops at its floor while the others keep shrinking.
    The first accepted box is then pushed back toward the last rejected one.
    """
    cfg = get_settings()
    rho = list(start)
    rejected = None
    for step in range(cfg.shrink_steps):
        if ok(rho):
            return _regrow(rho, rejected, ok)
        floors = step < cfg.shrink_steps // 2
        rejected = rho
        rho = [max(r * cfg.shrink_factor, f) if (floors and f is not None) else r * cfg.shrink_factor
               for r, f in zip(rho, floor)]
    if ok(rho):
        return _regrow(rho, rejected, ok)
    logger.warning("%s: shrink search failed after %d steps", what, cfg.shrink_steps)
    raise MajorantUnavailable(f"{what}: no certified polydisc after {cfg.shrink_steps} shrink steps")


def _regrow(rho: List[Fraction], rejected: Optional[List[Fraction]], ok, steps: int = 6) -> List[Fraction]:
    """Bisect on the segment from an accepted box to a rejected one; the result is always accepted."""
    if rejected is None:
        return rho
    lo, hi = Fraction(0), Fraction(1)
    best = rho
    for _ in range(steps):
        mid = (lo + hi) / 2
        trial = [a + mid * (b - a) for a, b in zip(rho, rejected)]
        if ok(trial):
            lo, best = mid, trial
        else:
            hi = mid
    return best


def _floors(need: Need, limits: Sequence[Fraction]) -> List[Optional[Fraction]]:
    """Demanded radii that can still sit strictly inside `limits`."""
    return [h if h is not None and h < lim else None for h, lim in zip(need or (None,) * len(limits), limits)]


# --- closed-form rules on majorants ------------------------------------------


def add_rule(a: GeometricMajorant, b: GeometricMajorant) -> GeometricMajorant:
    return GeometricMajorant(a.M + b.M, tuple(min(x, y) for x, y in zip(a.radii, b.radii)))


def mul_rule(a: GeometricMajorant, b: GeometricMajorant) -> GeometricMajorant:
    """(M1 M2, min(r)/2): uses (k+1) <= 2^k per variable."""
    return GeometricMajorant(a.M * b.M, tuple(min(x, y) / 2 for x, y in zip(a.radii, b.radii)))


def antider_rule(m: GeometricMajorant, i: int) -> GeometricMajorant:
    return GeometricMajorant(m.M * m.radii[i - 1], m.radii)


def deriv_rule(m: GeometricMajorant, i: int) -> GeometricMajorant:
    radii = list(m.radii)
    radii[i - 1] /= 2
    return GeometricMajorant(m.M / m.radii[i - 1], tuple(radii))


def translate_rule(m: GeometricMajorant, point: Sequence[Fraction]) -> GeometricMajorant:
    M = m.M
    radii = []
    for r, a in zip(m.radii, point):
        a = abs(Fraction(a))
        if a >= r:
            raise TranslationOutsideDomain(f"translation {a} is not inside radius {r}")
        M = M * r / (r - a)
        radii.append(r - a)
    return GeometricMajorant(M, tuple(radii))


def complexify_rule(m: GeometricMajorant) -> GeometricMajorant:
    half = tuple(r / 2 for r in m.radii)
    return GeometricMajorant(m.M * 2 ** m.arity, half + half)


# --- per-node rules -------------------------------------------------------------


def _poly(e, need):
    cfg = get_settings()
    box = [max(cfg.radius_cap, _hint(need, i) or 0) for i in range(e.arity)]
    M = max((abs(c) * _mono(alpha, box) for alpha, c in e.poly.terms.items()), default=Fraction(0))
    return GeometricMajorant(M or Fraction(1), tuple(box))


def _mono(alpha, radii) -> Fraction:
    v = Fraction(1)
    for a, r in zip(alpha, radii):
        if a:
            v *= r ** a
    return v


def _alg(e, need):
    from algebraic import radius_bound
    M, r = radius_bound(e.definition)
    return GeometricMajorant(M, (r,))


def _add(e, need):
    a, b = e.children
    return add_rule(majorant_of(a, need), majorant_of(b, need))


def _scale(e, need):
    m = majorant_of(e.children[0], need)
    if not e.factor:
        return m
    return GeometricMajorant(abs(e.factor) * m.M, m.radii)


def _mul(e, need):
    from series_core import Poly
    a, b = e.children
    if isinstance(a, Poly) or isinstance(b, Poly):
        p, other = (a, b) if isinstance(a, Poly) else (b, a)
        m = majorant_of(other, need)
        weight = p.poly.abs_sum_at(m.radii)
        return GeometricMajorant(m.M * weight if weight else m.M, m.radii)
    ma, mb = majorant_of(a, need), majorant_of(b, need)
    r = [min(x, y) for x, y in zip(ma.radii, mb.radii)]
    wants = [(_hint(need, i) is not None and r[i] / 2 < _hint(need, i) < r[i]) for i in range(e.arity)]
    if any(wants):
        rho = [_hint(need, i) if wants[i] else r[i] / 2 for i in range(e.arity)]
        return GeometricMajorant(ma.sup_on(rho) * mb.sup_on(rho), tuple(rho))
    return mul_rule(ma, mb)


def _recip(e, need):
    from series_core import Poly
    child = e.children[0]
    c0 = _abs_lower(child.coeff(zero_index(e.arity), Fraction(1, 2 ** 64)))
    if isinstance(child, Poly):
        return _recip_poly(child.poly, need, c0)
    cfg = get_settings()
    m = majorant_of(child, need)
    floor = _floors(need, m.radii)
    start = [max(r * cfg.shrink_factor, f or 0) for r, f in zip(m.radii, floor)]

    def excess(rho):
        if any(p >= r for p, r in zip(rho, m.radii)):
            return None
        return m.M / c0 * (m.sup_on(rho) / m.M - 1)

    def ok(rho):
        b = excess(rho)
        return b is not None and b <= Fraction(1, 2)

    rho = _shrink(start, floor, ok, 'recip')
    b = excess(rho)
    return GeometricMajorant(1 / (c0 * (1 - b)), tuple(rho))


def _recip_poly(p, need, c0):
    """Largest box s*B with sum_{g != 0} |c_g| (sB)^g <= (1 - slack) |c0|; then |1/q| <= 1/(slack' |c0|)."""
    from algebraic import positive_root_lower
    cfg = get_settings()
    box = [max(cfg.radius_cap, _hint(need, i) or 0) for i in range(p.arity)]
    by_degree = {}
    for alpha, c in p.terms.items():
        k = sum(alpha)
        if k:
            by_degree[k] = by_degree.get(k, Fraction(0)) + abs(c) * _mono(alpha, box)
    s = Fraction(1)
    if by_degree:
        top = max(by_degree)
        target = (1 - cfg.recip_slack) * c0
        root = positive_root_lower([target] + [-by_degree.get(k, Fraction(0)) for k in range(1, top + 1)])
        if root is not None:
            s = min(s, root)
    rho = tuple(s * b for b in box)
    low = c0 - p.abs_sum_at(rho, skip_constant=True)
    if low <= 0:
        raise MajorantUnavailable("recip: polynomial reaches zero on every candidate box")
    return GeometricMajorant(1 / low, rho)


def _antider(e, need):
    return antider_rule(majorant_of(e.children[0], need), e.var)


def _deriv(e, need):
    if need is not None:
        need = list(need)
        i = e.var - 1
        if need[i] is not None:
            need[i] *= 2
        need = tuple(need)
    return deriv_rule(majorant_of(e.children[0], need), e.var)


def _restrict0(e, need):
    child_need = None
    if need is not None:
        i = e.var - 1
        child_need = need[:i] + (None,) + need[i:]
    m = majorant_of(e.children[0], child_need)
    i = e.var - 1
    return GeometricMajorant(m.M, m.radii[:i] + m.radii[i + 1:])


def _permute(e, need):
    sigma = e.sigma
    child_need = None if need is None else tuple(need[s - 1] for s in sigma)
    m = majorant_of(e.children[0], child_need)
    radii: List[Fraction] = [Fraction(0)] * e.arity
    for j, s in enumerate(sigma):
        radii[s - 1] = m.radii[j]
    return GeometricMajorant(m.M, tuple(radii))


def translation_majorant(e, point: Sequence[Fraction], need: Need = None) -> GeometricMajorant:
    """Majorant of e certified far enough out that |a_i| <= margin * r_i."""
    theta = get_settings().translate_margin
    child_need = []
    for i, a in enumerate(point):
        a = abs(Fraction(a))
        h = _hint(need, i)
        want = max((h + a) if h is not None else Fraction(0), a / theta)
        child_need.append(want if want > 0 else None)
    m = majorant_of(e, tuple(child_need))
    for a, r in zip(point, m.radii):
        if abs(Fraction(a)) > theta * r:
            raise TranslationOutsideDomain(
                f"translation by {a} needs radius >= {abs(Fraction(a)) / theta}, certified {r}")
    return m


def _translate(e, need):
    if not any(e.point):
        return majorant_of(e.children[0], need)
    return translate_rule(translation_majorant(e.children[0], e.point, need), e.point)


def _subst(e, need):
    cfg = get_settings()
    polys = e.polys
    child = e.children[0]
    floor = [_hint(need, i) for i in range(e.arity)]
    start = [max(cfg.radius_cap, f or 0) for f in floor]
    lowest = [f or Fraction(0) for f in floor]
    sizes0 = [h.abs_sum_at(lowest) for h in polys]
    child_need = tuple(s / cfg.subst_fill if s else None for s in sizes0) if polys else None
    mc = majorant_of(child, child_need)

    def ok(rho):
        return all(h.abs_sum_at(rho) <= cfg.subst_fill * r for h, r in zip(polys, mc.radii))

    rho = _shrink(start, floor, ok, 'subst')
    M = mc.M
    for h, r in zip(polys, mc.radii):
        M /= 1 - h.abs_sum_at(rho) / r
    return GeometricMajorant(M, tuple(rho))


def _compose(e, need):
    cfg = get_settings()
    outer, *inner = e.children
    minner = [majorant_of(g, need) for g in inner]
    limit = [min(m.radii[k] for m in minner) for k in range(e.arity)]
    floor = _floors(need, limit)
    start = [max(lim * cfg.shrink_factor, f or 0) for lim, f in zip(limit, floor)]

    def sizes(rho):
        if any(p >= lim for p, lim in zip(rho, limit)):
            return None
        return [m.sup_on(rho) - m.M for m in minner]

    s0 = sizes([f or Fraction(0) for f in floor])
    mc = majorant_of(outer, tuple(s / cfg.subst_fill if s else None for s in s0))

    def ok(rho):
        s = sizes(rho)
        return s is not None and all(x <= cfg.subst_fill * r for x, r in zip(s, mc.radii))

    rho = _shrink(start, floor, ok, 'compose')
    M = mc.M
    for x, r in zip(sizes(rho), mc.radii):
        M /= 1 - x / r
    return GeometricMajorant(M, tuple(rho))


def _dyadic_floor(q: Fraction, bits: int = 64) -> Fraction:
    """Largest multiple of 2^-bits not above q."""
    return Fraction(q.numerator * 2 ** bits // q.denominator, 2 ** bits)


def _inverse(e, need):
    """
    Rouche bound: on |y| = d, |f(y) - c1 y| <= Phi(d), so f(y) = w has one root
    with |y| < d for |w| < |c1| d - Phi(d). The head of Phi uses exact
    coefficients, the tail the child's majorant. The widest certified disc wins.
    Candidate d and the certified radius sit on the 2^-64 grid.
    """
    from series_core import Poly
    child = e.children[0]
    eps = Fraction(1, 2 ** 64)
    c1 = _abs_lower(child.coeff((1,), eps))
    # a demanded radius rho needs |y| up to about rho / c1 in the child
    child_need = None
    if need is not None and need[0] is not None and c1 > 0:
        child_need = (need[0] * Fraction(8, 7) / c1,)
    m = majorant_of(child, child_need)
    r = m.radii[0]
    head = [_abs_upper(child.coeff((k,), eps)) for k in range(INVERSE_HEAD + 1)]
    finite = isinstance(child, Poly) and child.poly.degree() <= INVERSE_HEAD
    best = None
    d = r
    for _ in range(get_settings().shrink_steps):
        d = _dyadic_floor(d * Fraction(15, 16))
        if d <= 0:
            break
        t = d / r
        phi = sum((head[k] * d ** k for k in range(2, INVERSE_HEAD + 1)), Fraction(0))
        if not finite:
            phi += m.M * t ** (INVERSE_HEAD + 1) / (1 - t)
        rho = _dyadic_floor(Fraction(7, 8) * (c1 * d - phi))
        if rho > 0 and (best is None or rho > best[1]):
            best = (d, rho)
    if best is None:
        raise MajorantUnavailable("inverse: no radius certified by the Rouche bound")
    if need is not None and need[0] is not None and need[0] >= best[1]:
        logger.debug("inverse: demanded radius %s exceeds certified %s", need[0], best[1])
    return GeometricMajorant(best[0], (best[1],))


def _implicit(e, need):
    system = e.system
    n, m = system.x_arity, system.y_count
    key = need
    hit = system._majorants.get(key)
    if hit is not None:
        return hit
    if n == 0:
        out = GeometricMajorant(1, ())
        system._majorants[key] = out
        return out
    cfg = get_settings()
    kappa = max(sum(abs(x) for x in row) for row in system.jacobian_inverse)
    child_need = None if need is None else tuple(need) + (None,) * m
    majs = [majorant_of(F, child_need) for F in system.equations]
    rx = [min(mk.radii[i] for mk in majs) for i in range(n)]
    ry = min(mk.radii[n + j] for mk in majs for j in range(m))
    base = [min(_hint(need, i) or rx[i] * cfg.shrink_factor, rx[i] * cfg.shrink_factor) for i in range(n)]

    def certified(sigma, tau):
        worst_b, worst_q = Fraction(0), Fraction(0)
        for mk in majs:
            px = Fraction(1)
            for s, r in zip(sigma, mk.radii[:n]):
                px /= 1 - s / r
            py = Fraction(1)
            for j in range(m):
                py /= 1 - tau / mk.radii[n + j]
            worst_b = max(worst_b, mk.M * (px - 1))
            q = Fraction(0)
            for j in range(m):
                ryj = mk.radii[n + j]
                q += mk.M / ryj * (px * py / (1 - tau / ryj) - 1)
            worst_q = max(worst_q, q)
        lip = kappa * worst_q
        return lip <= Fraction(1, 2) and kappa * worst_b + lip * tau <= tau

    best = None
    tau = ry
    for _ in range(24):
        tau *= cfg.shrink_factor
        s = Fraction(1)
        for _ in range(48):
            sigma = [s * b for b in base]
            if certified(sigma, tau):
                if best is None or s > best[0]:
                    best = (s, tau, sigma)
                break
            s *= cfg.shrink_factor
    if best is None:
        raise MajorantUnavailable("implicit: contraction bound not certified")
    s, tau, sigma = best
    out = GeometricMajorant(tau, tuple(x * Fraction(7, 8) for x in sigma))
    system._majorants[key] = out
    return out


def _complexified(e, need):
    n = e.children[0].arity
    child_need = None
    if need is not None:
        child_need = []
        for j in range(n):
            hs = [h for h in (need[j], need[n + j]) if h is not None]
            child_need.append(2 * max(hs) if hs else None)
        child_need = tuple(child_need)
    return complexify_rule(majorant_of(e.children[0], child_need))


def _intlast(e, need):
    return majorant_of(e.inner, need)


_RULES = {
    'poly': _poly, 'alg': _alg, 'add': _add, 'scale': _scale, 'mul': _mul,
    'recip': _recip, 'antider': _antider, 'deriv': _deriv, 'restrict0': _restrict0,
    'permute': _permute, 'translate': _translate, 'subst': _subst, 'compose': _compose,
    'inverse': _inverse, 'implicit': _implicit, 're': _complexified, 'im': _complexified,
    'intlast': _intlast,
}


def majorant_of(e, need=None) -> GeometricMajorant:
    need = _normalize(need, e.arity)
    hit = e._majorants.get(need)
    if hit is not None:
        return hit
    rule = _RULES.get(e.kind)
    if rule is None:
        raise MajorantUnavailable(f"no majorant rule for node kind {e.kind!r}")
    m = rule(e, need)
    logger.debug("majorant %s (need %s): %s", e.kind, need, m)
    with e._lock:
        e._majorants.setdefault(need, m)
    return m


def known_majorants(e) -> List[GeometricMajorant]:
    """Every majorant certified for e so far, under any hint."""
    with e._lock:
        return list(e._majorants.values())


def tail_bound(m: GeometricMajorant, x: Sequence, N: int) -> Fraction:
    """Bound on |sum_{|alpha| > N} a_alpha x^alpha| from the geometric majorant."""
    n = m.arity
    if len(x) != n:
        raise PointOutsideRadii(f"point has {len(x)} entries, majorant has {n} radii")
    ratios = [abs(Fraction(v)) / r for v, r in zip(x, m.radii)]
    if any(t >= 1 for t in ratios):
        raise PointOutsideRadii(f"point {tuple(map(str, x))} is not strictly inside radii {tuple(map(str, m.radii))}")
    if n == 0:
        return Fraction(0)
    t = max(ratios)
    if t == 0:
        return Fraction(0)
    return m.M * comb(N + n, n - 1) * t ** (N + 1) / (1 - t) ** n


def validate_majorant(e, m: GeometricMajorant, N: int, tol=Fraction(1, 2 ** 64)):
    """(True, None) when |a_alpha| <= bound for all |alpha| <= N, else (False, first bad alpha)."""
    for alpha in indices_up_to(e.arity, N):
        c = e.coeff(alpha, tol)
        if is_zero(c):
            continue
        if _abs_upper(c) > m.bound(alpha):
            return False, alpha
    return True, None
