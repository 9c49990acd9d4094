"""
Expression DAG for integrated algebraic power series.

Every node is immutable after construction and extracts Taylor coefficients
lazily through its own recurrence. Coefficients are memoized per node; nodes
whose value depends on a translation produce certified balls and key their
memo on the requested tolerance as well.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple, Union

from balls import Ball, Tolerance, as_ball
from errors import (
    ArityMismatch, EvaluationStalled, MajorantUnavailable, NonUnitReciprocal,
    NonvanishingSubstitution, NotInvertible, SingularJacobian, TranslationOutsideDomain,
)
from settings import get_settings
from sparse_poly import (
    MultiIndex, Polynomial, TotalDegree, TruncatedSeries, add_index, compose_truncated,
    indices_below, indices_up_to, is_zero, sub_index, unit_index, zero_index,
)

logger = logging.getLogger(__name__)

Coefficient = Union[Fraction, Ball]

DEFAULT_EPS = Fraction(1, 2 ** 64)
_RETRIES = 8
_TIGHTEN = 2 ** 20
_BLOCK_SHRINK = 2 ** 16


def fmt_rat(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def prec_for(eps: Fraction) -> int:
    return max(get_settings().eval_start_prec, Tolerance(eps).bits() + 32)


def _eps_of(tol) -> Fraction:
    if tol is None:
        return DEFAULT_EPS
    if isinstance(tol, Tolerance):
        return tol.eps
    return Fraction(tol)


def _check_var(e: 'SeriesExpr', i: int, what: str):
    if not isinstance(i, int) or not 1 <= i <= e.arity:
        raise ArityMismatch(f"{what}: variable index {i} outside 1..{e.arity}")


def provably_zero(c: Coefficient) -> bool:
    return is_zero(c)


def provably_nonzero(c: Coefficient) -> bool:
    if isinstance(c, Ball):
        return c.excludes_zero()
    return c != 0


class SeriesExpr:
    """Base node. Subclasses implement `_compute(alpha, eps)`; eps is None for exact nodes."""

    kind = 'expr'

    def __init__(self, arity: int, children: Sequence['SeriesExpr'] = (), exact: Optional[bool] = None):
        self.arity = arity
        self.children = tuple(children)
        self.exact = all(c.exact for c in self.children) if exact is None else exact
        self._memo: Dict = {}
        self._lock = threading.Lock()
        self._majorants: Dict = {}
        self._text: Optional[str] = None

    # --- coefficients ---------------------------------------------------

    def coeff(self, alpha: Sequence[int], tol=None) -> Coefficient:
        alpha = tuple(alpha)
        if len(alpha) != self.arity:
            raise ArityMismatch(f"index {alpha} has {len(alpha)} entries, series has arity {self.arity}")
        if any(a < 0 for a in alpha):
            raise ArityMismatch(f"negative exponent in {alpha}")
        if self.exact:
            hit = self._memo.get(alpha)
            if hit is None:
                hit = self._compute(alpha, None)
                with self._lock:
                    hit = self._memo.setdefault(alpha, hit)
            return hit
        return self._certified(alpha, _eps_of(tol))

    def _certified(self, alpha: MultiIndex, eps: Fraction) -> Ball:
        cached = [b for b in self._memo.get(alpha, ()) if b.rad <= eps]
        if cached:
            return max(cached, key=lambda b: b.rad)
        inner = eps
        for attempt in range(_RETRIES):
            ball = as_ball(self._compute(alpha, inner), prec_for(inner))
            if ball.rad <= eps:
                with self._lock:
                    self._memo.setdefault(alpha, []).append(ball)
                return ball
            logger.debug("%s%s: radius %s above %s, tightening (attempt %d)",
                         self.kind, alpha, float(ball.rad), float(eps), attempt + 1)
            inner /= _TIGHTEN
        raise EvaluationStalled(f"{self.kind} coefficient {alpha} did not reach tolerance {float(eps):.3g}")

    def _compute(self, alpha: MultiIndex, eps: Optional[Fraction]) -> Coefficient:
        raise NotImplementedError

    def _wrap(self, value, eps: Optional[Fraction]) -> Coefficient:
        if eps is None:
            return value
        return as_ball(value, prec_for(eps))

    # --- identity -------------------------------------------------------

    def sexpr(self) -> str:
        if self._text is None:
            self._text = self._render()
        return self._text

    def _render(self) -> str:
        raise NotImplementedError

    def digest(self) -> str:
        return hashlib.sha256(self.sexpr().encode('utf-8')).hexdigest()

    def __repr__(self) -> str:
        text = self.sexpr()
        return f"<{type(self).__name__} arity={self.arity} {text[:60]}{'...' if len(text) > 60 else ''}>"


class Poly(SeriesExpr):
    kind = 'poly'

    def __init__(self, p: Polynomial):
        super().__init__(p.arity, exact=True)
        self.poly = p

    def _compute(self, alpha, eps):
        return self.poly.coeff(alpha)

    def _render(self):
        terms = self.poly.sorted_terms() or [(zero_index(self.arity), Fraction(0))]
        body = ' '.join('(' + ' '.join([fmt_rat(c)] + [str(a) for a in alpha]) + ')' for alpha, c in terms)
        return f"(poly {self.arity} {body})"


class Alg(SeriesExpr):
    kind = 'alg'

    def __init__(self, definition):
        super().__init__(1, exact=True)
        self.definition = definition

    def _compute(self, alpha, eps):
        return self.definition.coefficient(alpha[0])

    def _render(self):
        rows = ' '.join('(' + ' '.join(fmt_rat(c) for c in row) + ')' for row in self.definition.rows())
        return f"(alg ({rows}) {fmt_rat(self.definition.y0)})"


class Add(SeriesExpr):
    kind = 'add'

    def __init__(self, a: SeriesExpr, b: SeriesExpr):
        if a.arity != b.arity:
            raise ArityMismatch(f"add: arities {a.arity} and {b.arity} differ")
        super().__init__(a.arity, (a, b))

    def _compute(self, alpha, eps):
        ce = None if eps is None else eps / 2
        a, b = self.children
        return self._wrap(a.coeff(alpha, ce) + b.coeff(alpha, ce), eps)

    def _render(self):
        a, b = self.children
        return f"(add {a.sexpr()} {b.sexpr()})"


class Scale(SeriesExpr):
    kind = 'scale'

    def __init__(self, c, e: SeriesExpr):
        super().__init__(e.arity, (e,))
        self.factor = Fraction(c)

    def _compute(self, alpha, eps):
        if not self.factor:
            return self._wrap(Fraction(0), eps)
        ce = None if eps is None else eps / (2 * abs(self.factor))
        return self._wrap(self.factor * self.children[0].coeff(alpha, ce), eps)

    def _render(self):
        return f"(scale {fmt_rat(self.factor)} {self.children[0].sexpr()})"


class Mul(SeriesExpr):
    kind = 'mul'

    def __init__(self, a: SeriesExpr, b: SeriesExpr):
        if a.arity != b.arity:
            raise ArityMismatch(f"mul: arities {a.arity} and {b.arity} differ")
        super().__init__(a.arity, (a, b))

    def _compute(self, alpha, eps):
        a, b = self.children
        count = 1
        for k in alpha:
            count *= k + 1
        ce = None if eps is None else eps / (4 * count)
        total = Fraction(0)
        for beta in indices_below(alpha):
            x = a.coeff(beta, ce)
            if is_zero(x):
                continue
            y = b.coeff(sub_index(alpha, beta), ce)
            if not is_zero(y):
                total = total + x * y
        return self._wrap(total, eps)

    def _render(self):
        a, b = self.children
        return f"(mul {a.sexpr()} {b.sexpr()})"


class Recip(SeriesExpr):
    kind = 'recip'

    def __init__(self, e: SeriesExpr):
        super().__init__(e.arity, (e,))
        c0 = e.coeff(zero_index(e.arity), DEFAULT_EPS)
        if not provably_nonzero(c0):
            raise NonUnitReciprocal("reciprocal requires nonzero constant term")
        self._blocks: Dict[Fraction, Dict[MultiIndex, Ball]] = {}

    def _fill(self, alpha, lookup, store, child_eps):
        child = self.children[0]
        inv0 = 1 / child.coeff(zero_index(self.arity), child_eps)
        for gamma in sorted(indices_below(alpha), key=sum):
            if lookup(gamma) is not None:
                continue
            if not any(gamma):
                store(gamma, inv0)
                continue
            acc = Fraction(0)
            for beta in indices_below(gamma):
                if not any(beta):
                    continue
                a = child.coeff(beta, child_eps)
                if not is_zero(a):
                    c = lookup(sub_index(gamma, beta))
                    if not is_zero(c):
                        acc = acc + a * c
            store(gamma, -inv0 * acc)
        return lookup(alpha)

    def _compute(self, alpha, eps):
        if eps is None:
            def store(k, v):
                with self._lock:
                    self._memo.setdefault(k, v)
            return self._fill(alpha, self._memo.get, store, None)
        # certified mode: one block per working tolerance
        inner = eps / _BLOCK_SHRINK
        block = self._blocks.setdefault(inner, {})
        prec = prec_for(inner)
        return self._fill(alpha, block.get, lambda k, v: block.__setitem__(k, as_ball(v, prec)), inner)

    def _render(self):
        return f"(recip {self.children[0].sexpr()})"


class _Windowed(SeriesExpr):
    """Nodes whose coefficients come from a total-degree window computed in one pass."""

    def __init__(self, arity, children):
        super().__init__(arity, children)
        self._windows: Dict = {}

    def _window(self, N: int, eps) -> Dict[MultiIndex, Coefficient]:
        order, data = self._windows.get(eps, (-1, None))
        if order >= N:
            return data
        target = max(N, 2 * order) if order > 0 else N
        data = self._build(target, eps)
        with self._lock:
            self._windows[eps] = (target, data)
        return data

    def _compute(self, alpha, eps):
        inner = None if eps is None else eps / _BLOCK_SHRINK
        return self._wrap(self._window(sum(alpha), inner).get(alpha, Fraction(0)), eps)

    def _build(self, N, eps):
        raise NotImplementedError


class SubstPoly(_Windowed):
    kind = 'subst'

    def __init__(self, e: SeriesExpr, polys: Sequence[Polynomial], arity: Optional[int] = None):
        polys = list(polys)
        if len(polys) != e.arity:
            raise ArityMismatch(f"subst: {len(polys)} polynomials for a series of arity {e.arity}")
        if arity is None:
            if not polys:
                raise ArityMismatch("subst into an arity-0 series needs an explicit arity")
            arity = polys[0].arity
        for j, h in enumerate(polys, 1):
            if h.arity != arity:
                raise ArityMismatch(f"subst: polynomial {j} has arity {h.arity}, expected {arity}")
            if h.constant_term() != 0:
                raise NonvanishingSubstitution(f"subst: polynomial {j} does not vanish at 0")
        super().__init__(arity, (e,))
        self.polys = tuple(polys)

    def _build(self, N, eps):
        child = self.children[0]
        ce = None if eps is None else eps / 4
        return compose_truncated(lambda beta: child.coeff(beta, ce), child.arity,
                                 [h.terms for h in self.polys], self.arity, N)

    def _render(self):
        polys = ' '.join(Poly(h).sexpr() for h in self.polys)
        return f"(subst {self.children[0].sexpr()} {polys})"


class ComposeSeries(_Windowed):
    kind = 'compose'

    def __init__(self, e: SeriesExpr, inner: Sequence[SeriesExpr]):
        inner = list(inner)
        if len(inner) != e.arity or not inner:
            raise ArityMismatch(f"compose: {len(inner)} inner series for a series of arity {e.arity}")
        arity = inner[0].arity
        for j, g in enumerate(inner, 1):
            if g.arity != arity:
                raise ArityMismatch(f"compose: inner series {j} has arity {g.arity}, expected {arity}")
            if not provably_zero(g.coeff(zero_index(arity), DEFAULT_EPS)):
                raise NonvanishingSubstitution(f"compose: inner series {j} has nonzero constant term")
        super().__init__(arity, [e] + inner)

    def _build(self, N, eps):
        outer, *inner = self.children
        ce = None if eps is None else eps / 4
        truncs = []
        for g in inner:
            part = {}
            for beta in indices_up_to(self.arity, N):
                c = g.coeff(beta, ce)
                if not is_zero(c):
                    part[beta] = c
            truncs.append(part)
        return compose_truncated(lambda beta: outer.coeff(beta, ce), outer.arity, truncs, self.arity, N)

    def _render(self):
        return '(compose ' + ' '.join(c.sexpr() for c in self.children) + ')'


class Translate(SeriesExpr):
    kind = 'translate'

    def __init__(self, e: SeriesExpr, point: Sequence):
        point = tuple(Fraction(x) for x in point)
        if len(point) != e.arity:
            raise ArityMismatch(f"translate: point has {len(point)} entries, series has arity {e.arity}")
        trivial = not any(point)
        super().__init__(e.arity, (e,), exact=e.exact and trivial)
        self.point = point
        if not trivial:
            from majorant import translation_majorant
            try:
                self.child_majorant = translation_majorant(e, point)
            except MajorantUnavailable as ex:
                raise TranslationOutsideDomain(f"translate: no certified polydisc around {point}: {ex}") from ex

    def _compute(self, alpha, eps):
        child = self.children[0]
        if not any(self.point):
            return self._wrap(child.coeff(alpha, eps), eps)
        from evaluation import translate_coeff
        return translate_coeff(child, self.point, alpha, Tolerance(eps))

    def _render(self):
        pts = ' '.join(fmt_rat(x) for x in self.point)
        return f"(translate {self.children[0].sexpr()} {pts})"


class Antider(SeriesExpr):
    kind = 'antider'

    def __init__(self, e: SeriesExpr, i: int):
        _check_var(e, i, 'antider')
        super().__init__(e.arity, (e,))
        self.var = i

    def _compute(self, alpha, eps):
        k = alpha[self.var - 1]
        if k == 0:
            return self._wrap(Fraction(0), eps)
        below = sub_index(alpha, unit_index(self.arity, self.var))
        return self._wrap(self.children[0].coeff(below, eps) / k, eps)

    def _render(self):
        return f"(antider {self.var} {self.children[0].sexpr()})"


class Deriv(SeriesExpr):
    kind = 'deriv'

    def __init__(self, e: SeriesExpr, i: int):
        _check_var(e, i, 'deriv')
        super().__init__(e.arity, (e,))
        self.var = i

    def _compute(self, alpha, eps):
        k = alpha[self.var - 1] + 1
        ce = None if eps is None else eps / (2 * k)
        above = add_index(alpha, unit_index(self.arity, self.var))
        return self._wrap(k * self.children[0].coeff(above, ce), eps)

    def _render(self):
        return f"(deriv {self.var} {self.children[0].sexpr()})"


class Restrict0(SeriesExpr):
    kind = 'restrict0'

    def __init__(self, e: SeriesExpr, i: int):
        _check_var(e, i, 'restrict0')
        super().__init__(e.arity - 1, (e,))
        self.var = i

    def lift(self, alpha: MultiIndex) -> MultiIndex:
        i = self.var - 1
        return alpha[:i] + (0,) + alpha[i:]

    def _compute(self, alpha, eps):
        return self._wrap(self.children[0].coeff(self.lift(alpha), eps), eps)

    def _render(self):
        return f"(restrict0 {self.var} {self.children[0].sexpr()})"


class Permute(SeriesExpr):
    """g(X) = f(X_s(1), ..., X_s(n)); coefficient of g at alpha is f's at (alpha_s(1), ..., alpha_s(n))."""

    kind = 'permute'

    def __init__(self, e: SeriesExpr, sigma: Sequence[int]):
        sigma = tuple(int(s) for s in sigma)
        if sorted(sigma) != list(range(1, e.arity + 1)):
            raise ArityMismatch(f"permute: {sigma} is not a permutation of 1..{e.arity}")
        super().__init__(e.arity, (e,))
        self.sigma = sigma

    def child_index(self, alpha: MultiIndex) -> MultiIndex:
        return tuple(alpha[s - 1] for s in self.sigma)

    def _compute(self, alpha, eps):
        return self._wrap(self.children[0].coeff(self.child_index(alpha), eps), eps)

    def _render(self):
        return f"(permute ({' '.join(map(str, self.sigma))}) {self.children[0].sexpr()})"


class Inverse(SeriesExpr):
    kind = 'inverse'

    def __init__(self, e: SeriesExpr):
        if e.arity != 1:
            raise NotInvertible(f"inverse: series must have arity 1, got {e.arity}")
        if not provably_zero(e.coeff((0,), DEFAULT_EPS)):
            raise NotInvertible("inverse: constant term is not zero")
        if not provably_nonzero(e.coeff((1,), DEFAULT_EPS)):
            raise NotInvertible("inverse: linear coefficient is not provably nonzero")
        super().__init__(1, (e,))
        self._lists: Dict = {}

    def coefficients(self, n: int, eps=None) -> List[Coefficient]:
        from weierstrass import inverse_coefficients
        have = self._lists.get(eps)
        if have is not None and len(have) >= n:
            return have
        n = max(n, 2 * len(have)) if have else n
        child = self.children[0]
        f = [child.coeff((k,), eps) for k in range(n)]
        out = inverse_coefficients(f, n)
        with self._lock:
            self._lists[eps] = out
        return out

    def _compute(self, alpha, eps):
        inner = None if eps is None else eps / _BLOCK_SHRINK
        return self._wrap(self.coefficients(alpha[0] + 1, inner)[alpha[0]], eps)

    def _render(self):
        return f"(inverse {self.children[0].sexpr()})"


class ImplicitSystem:
    """F_1..F_m in (X_1..X_n, Y_1..Y_m) with F(0) = 0 and dF/dY(0) invertible."""

    def __init__(self, equations: Sequence[SeriesExpr]):
        equations = tuple(equations)
        if not equations:
            raise ArityMismatch("implicit: at least one equation is required")
        total = equations[0].arity
        m = len(equations)
        if any(F.arity != total for F in equations) or total < m:
            raise ArityMismatch(f"implicit: {m} equations need a common arity >= {m}")
        for k, F in enumerate(equations, 1):
            if not F.exact:
                raise SingularJacobian(f"implicit: equation {k} has certified, not exact, coefficients")
            if F.coeff(zero_index(total)) != 0:
                raise SingularJacobian(f"implicit: equation {k} does not vanish at the origin")
        self.equations = equations
        self.y_count = m
        self.x_arity = total - m
        self.jacobian = [[F.coeff(unit_index(total, self.x_arity + j)) for j in range(1, m + 1)]
                         for F in equations]
        from weierstrass import invert_matrix
        try:
            self.jacobian_inverse = invert_matrix(self.jacobian)
        except ZeroDivisionError as ex:
            raise SingularJacobian(f"implicit: Jacobian {self.jacobian} is singular at 0") from ex
        self._lock = threading.Lock()
        self._solutions: Dict[int, List[Dict[MultiIndex, Fraction]]] = {}
        self._majorants: Dict = {}

    def solution(self, N: int) -> List[Dict[MultiIndex, Fraction]]:
        best = max((k for k in self._solutions if k >= N), default=None)
        if best is not None:
            return self._solutions[best]
        from weierstrass import implicit_newton
        known = max(self._solutions, default=0)
        target = max(N, 2 * known)
        sol = implicit_newton(self, target)
        with self._lock:
            self._solutions[target] = sol
        return sol

    def components(self) -> List['Implicit']:
        return [Implicit(self, k) for k in range(1, self.y_count + 1)]

    def sexpr(self) -> str:
        return ' '.join(F.sexpr() for F in self.equations)


class Implicit(SeriesExpr):
    kind = 'implicit'

    def __init__(self, system: ImplicitSystem, index: int = 1):
        if not 1 <= index <= system.y_count:
            raise ArityMismatch(f"implicit: component {index} outside 1..{system.y_count}")
        super().__init__(system.x_arity, system.equations)
        self.system = system
        self.index = index

    def _compute(self, alpha, eps):
        return self.system.solution(sum(alpha))[self.index - 1].get(alpha, Fraction(0))

    def _render(self):
        return f"(implicit {self.index} {self.system.sexpr()})"


class _Complexified(SeriesExpr):
    real_part = True

    def __init__(self, e: SeriesExpr):
        super().__init__(2 * e.arity, (e,))

    def _compute(self, alpha, eps):
        n = self.children[0].arity
        mu, nu = alpha[:n], alpha[n:]
        s = sum(nu)
        if (s % 2 == 0) != self.real_part:
            return self._wrap(Fraction(0), eps)
        sign = -1 if (s // 2) % 2 else 1
        weight = 1
        for m, v in zip(mu, nu):
            weight *= comb(m + v, v)
        ce = None if eps is None else eps / weight
        return self._wrap(sign * weight * self.children[0].coeff(add_index(mu, nu), ce), eps)


class Re(_Complexified):
    kind = 're'
    real_part = True

    def _render(self):
        return f"(re {self.children[0].sexpr()})"


class Im(_Complexified):
    kind = 'im'
    real_part = False

    def _render(self):
        return f"(im {self.children[0].sexpr()})"


class IntLast(SeriesExpr):
    """x' -> integral from 0 to a of f(x', t) dt, as Restrict0(Translate(Antider(f, n), (0, .., a)), n)."""

    kind = 'intlast'

    def __init__(self, e: SeriesExpr, a):
        if e.arity < 1:
            raise ArityMismatch("intlast: series needs at least one variable")
        self.bound = Fraction(a)
        n = e.arity
        point = (Fraction(0),) * (n - 1) + (self.bound,)
        self.inner = Restrict0(Translate(Antider(e, n), point), n)
        super().__init__(n - 1, (e,), exact=self.inner.exact)

    def _compute(self, alpha, eps):
        return self.inner.coeff(alpha, eps)

    def _render(self):
        return f"(intlast {fmt_rat(self.bound)} {self.children[0].sexpr()})"


# --- public operations ----------------------------------------------------


def coeff(e: SeriesExpr, alpha: Sequence[int], tol=None) -> Coefficient:
    return e.coeff(alpha, tol)


def truncate(e: SeriesExpr, N: int, tol=None) -> TruncatedSeries:
    if N < 0:
        raise ValueError(f"truncation order must be >= 0, got {N}")
    window = TotalDegree(N)
    return TruncatedSeries(e.arity, window, {a: e.coeff(a, tol) for a in window.indices(e.arity)})


def poly(arity: int, terms: Sequence[Tuple]) -> Poly:
    """Polynomial leaf from (coefficient, exponent, ...) tuples."""
    return Poly(Polynomial(arity, [(tuple(t[1:]), t[0]) for t in terms]))


def constant(c, arity: int = 1) -> Poly:
    return Poly(Polynomial.constant(c, arity))


def variable(i: int, arity: int) -> Poly:
    return Poly(Polynomial.variable(i, arity))


def recip(e: SeriesExpr) -> Recip:
    return Recip(e)


def add(a: SeriesExpr, b: SeriesExpr) -> Add:
    return Add(a, b)


def mul(a: SeriesExpr, b: SeriesExpr) -> Mul:
    return Mul(a, b)


def scale(c, e: SeriesExpr) -> Scale:
    return Scale(c, e)


def sub(a: SeriesExpr, b: SeriesExpr) -> Add:
    return Add(a, Scale(-1, b))


def subst_poly(e: SeriesExpr, polys: Sequence[Polynomial], arity: Optional[int] = None) -> SubstPoly:
    return SubstPoly(e, polys, arity)


def translate(e: SeriesExpr, point) -> Translate:
    if not isinstance(point, (list, tuple)):
        point = (point,)
    return Translate(e, point)


def antider(e: SeriesExpr, i: int = 1) -> Antider:
    return Antider(e, i)


def deriv(e: SeriesExpr, i: int = 1) -> Deriv:
    return Deriv(e, i)


def restrict0(e: SeriesExpr, i: int) -> Restrict0:
    return Restrict0(e, i)


def permute(e: SeriesExpr, sigma: Sequence[int]) -> Permute:
    return Permute(e, sigma)
