"""
Weierstrass division and preparation on truncation windows, plus the
structural closure operations: composition, inverse function, implicit
functions and complexification.

Division works on a staircase window: with f = X_n^d U + B, where B has
X_n-degree < d and vanishes at X' = 0, the fixpoint h = U^-1 Q(g - B h)
gains one X'-order per pass, and each X'-order consumes d extra X_n-orders.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from errors import NotRegular
from settings import get_settings
from sparse_poly import (
    LastVariableBox, MultiIndex, Polynomial, Staircase, TotalDegree, TruncatedSeries,
    compose_truncated, is_zero, list_compose, list_deriv, list_mul, list_recip,
    unit_index, zero_index,
)

logger = logging.getLogger(__name__)

SCHEDULES = ('fixed', 'until-stable')


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    order: Optional[int] = None


class XnPolynomial:
    """sum_k a_k(X') X_n^k for k < len(coeffs), plus X_n^d when monic (d = len(coeffs))."""

    def __init__(self, arity: int, coeffs: Sequence[TruncatedSeries], monic: bool = False):
        self.arity = arity
        self.coeffs = list(coeffs)
        self.monic = monic

    @property
    def degree(self) -> int:
        if self.monic:
            return len(self.coeffs)
        nonzero = [k for k, a in enumerate(self.coeffs) if not a.is_zero()]
        return max(nonzero, default=-1)

    def coefficient(self, k: int) -> TruncatedSeries:
        return self.coeffs[k]

    def lower_vanish_at_origin(self) -> bool:
        return all(is_zero(a.constant_term()) for a in self.coeffs)

    def equals(self, other: 'XnPolynomial') -> bool:
        """Same X_n-coefficients; trailing zero coefficients are ignored unless monic."""
        mine, theirs = self.coeffs, other.coeffs
        if self.monic != other.monic or (self.monic and len(mine) != len(theirs)):
            return False
        common = min(len(mine), len(theirs))
        return (all(a.equals(b) for a, b in zip(mine, theirs))
                and all(a.is_zero() for a in mine[common:] + theirs[common:]))

    def to_series(self, window) -> TruncatedSeries:
        out: Dict[MultiIndex, object] = {}
        for k, a in enumerate(self.coeffs):
            for head, c in a.items():
                out[head + (k,)] = c
        if self.monic:
            out[zero_index(self.arity - 1) + (len(self.coeffs),)] = Fraction(1)
        return TruncatedSeries(self.arity, window, out)

    def __repr__(self) -> str:
        kind = 'monic ' if self.monic else ''
        return f"XnPolynomial({kind}degree {self.degree}, arity {self.arity})"


class DivisionResult(NamedTuple):
    h: TruncatedSeries
    r: XnPolynomial


class PreparationResult(NamedTuple):
    P: XnPolynomial
    u: TruncatedSeries


def _coefficient_source(f):
    if isinstance(f, TruncatedSeries):
        return f.arity, lambda a: f[a]
    if isinstance(f, Polynomial):
        return f.arity, f.coeff
    return f.arity, f.coeff


def _truncated(f, window) -> TruncatedSeries:
    arity, get = _coefficient_source(f)
    if isinstance(f, TruncatedSeries):
        return f.with_window(window)
    if isinstance(f, Polynomial):
        return TruncatedSeries.from_polynomial(f, window)
    return TruncatedSeries.from_function(arity, window, get)


def regular_order(f: TruncatedSeries) -> RegularityReport:
    """Order of f(0, X_n) as far as the window reaches; regular=False if it is all zero there."""
    head = zero_index(f.arity - 1)
    orders = [alpha[-1] for alpha, c in f.items() if alpha[:-1] == head and not is_zero(c)]
    if not orders:
        return RegularityReport(False)
    return RegularityReport(True, min(orders))


def _detect_order(f, limit: int = 64) -> int:
    arity, get = _coefficient_source(f)
    head = zero_index(arity - 1)
    for k in range(limit + 1):
        if not is_zero(get(head + (k,))):
            return k
    raise NotRegular(f"f(0, X_{arity}) vanishes up to order {limit}")


def _windows(f, d: Optional[int], orders: Optional[Tuple[int, int]]):
    if f.arity < 1:
        raise NotRegular("Weierstrass division needs at least one variable")
    if d is None:
        d = _detect_order(f)
    if orders is None:
        cfg = get_settings()
        orders = (cfg.window_x_order, d + cfg.window_n_extra)
    nx, nn = orders
    if nx < 0 or nn < 0:
        raise ValueError(f"window orders must be non-negative, got {orders}")
    return d, nx, nn


def _quotient(s: TruncatedSeries, d: int, window) -> TruncatedSeries:
    return TruncatedSeries(s.arity, window, {a[:-1] + (a[-1] - d,): c for a, c in s.items() if a[-1] >= d})


def wdiv(f, g, d: Optional[int] = None, orders: Optional[Tuple[int, int]] = None,
         schedule: str = 'fixed') -> DivisionResult:
    """
    g = f h + r with deg_{X_n} r < d, exact on the box |alpha'| <= orders[0],
    alpha_n <= orders[1]. f must be regular in X_n of order d.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}, expected one of {SCHEDULES}")
    d, nx, nn = _windows(f, d, orders)
    n = f.arity
    if g.arity != n:
        raise NotRegular(f"wdiv: f has arity {n}, g has arity {g.arity}")
    inner = Staircase(nx, nn, d)
    outer = Staircase(nx, nn + d, d)
    F = _truncated(f, outer)
    G = _truncated(g, outer)
    report = regular_order(F)
    if not report.regular or report.order != d:
        raise NotRegular(f"f is not regular in X_{n} of order {d} (found {report})")

    U = _quotient(F, d, inner)
    B = TruncatedSeries(n, outer, {a: c for a, c in F.items() if a[-1] < d})
    u_inv = U.reciprocal()

    def remainder_input(h: TruncatedSeries) -> TruncatedSeries:
        return G - B * h.with_window(outer)

    def step(h: TruncatedSeries) -> TruncatedSeries:
        return u_inv * _quotient(remainder_input(h), d, inner)

    if schedule == 'fixed':
        h = TruncatedSeries(n, inner)
        for _ in range(nx + 1):
            h = step(h)
    else:
        h = u_inv * _quotient(G, d, inner)
        for passes in range(nx + 2):
            nxt = step(h)
            if nxt.equals(h):
                break
            h = nxt
        logger.debug("wdiv until-stable: %d passes", passes + 1)

    rest = remainder_input(h)
    r_window = TotalDegree(nx)
    r_coeffs = [TruncatedSeries(n - 1, r_window, {a[:-1]: c for a, c in rest.items() if a[-1] == k})
                for k in range(d)]
    box = LastVariableBox(nx, nn)
    return DivisionResult(h.with_window(box), XnPolynomial(n, r_coeffs))


def division_residual(f, g, result: DivisionResult) -> TruncatedSeries:
    """g - (f h + r) on the result's window; zero when the identity holds."""
    box = result.h.window
    F, G = _truncated(f, box), _truncated(g, box)
    return G - (F * result.h + result.r.to_series(box))


def wprep(f, d: Optional[int] = None, orders: Optional[Tuple[int, int]] = None) -> PreparationResult:
    """f = P u with P a Weierstrass polynomial of degree d and u a unit, on the window."""
    d, nx, nn = _windows(f, d, orders)
    n = f.arity
    xd = Polynomial(n, {zero_index(n - 1) + (d,): 1})
    h, r = wdiv(f, xd, d, (nx, nn))
    P = XnPolynomial(n, [a.scale(-1) for a in r.coeffs], monic=True)
    try:
        u = h.reciprocal()
    except ZeroDivisionError as ex:
        raise NotRegular("wprep: quotient of X_n^d by f is not a unit") from ex
    return PreparationResult(P, u)


def preparation_residual(f, result: PreparationResult) -> TruncatedSeries:
    box = result.u.window
    return _truncated(f, box) - result.P.to_series(box) * result.u


# --- structural closure ---------------------------------------------------------


def compose_series(e, g: Sequence):
    from series_core import ComposeSeries
    return ComposeSeries(e, g)


def inverse_series(e):
    from series_core import Inverse
    return Inverse(e)


def implicit_series(F: Sequence) -> List:
    from series_core import ImplicitSystem
    return ImplicitSystem(F).components()


def complexify(e):
    from series_core import Im, Re
    return Re(e), Im(e)


def inverse_coefficients(f: Sequence, n: int) -> List:
    """First n coefficients of g with f(g(X)) = X, by Newton: g <- g - (f(g) - X) / f'(g)."""
    if n <= 0:
        return []
    if n == 1:
        return [Fraction(0)]
    f = list(f) + [Fraction(0)] * max(0, n + 1 - len(f))
    g: List = [Fraction(0), 1 / f[1]]
    size = 2
    while size < n:
        size = min(2 * size, n)
        g = g + [Fraction(0)] * (size - len(g))
        fg = list_compose(f[:size], g, size)
        fg[1] = fg[1] - 1
        slope = list_compose(list_deriv(f[:size + 1]), g, size)
        corr = list_mul(fg, list_recip(slope, size), size)
        g = [a - b for a, b in zip(g, corr)]
        logger.debug("inverse Newton step to %d terms", size)
    return g[:n]


def invert_matrix(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse over Q; ZeroDivisionError when singular."""
    m = len(rows)
    work = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(rows)]
    for col in range(m):
        pivot = next((r for r in range(col, m) if work[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError(f"matrix is singular at column {col + 1}")
        work[col], work[pivot] = work[pivot], work[col]
        p = work[col][col]
        work[col] = [x / p for x in work[col]]
        for r in range(m):
            if r != col and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[col])]
    return [row[m:] for row in work]


def _solve_series(matrix: List[List[TruncatedSeries]], rhs: List[TruncatedSeries]) -> List[TruncatedSeries]:
    """Gaussian elimination over truncated series; pivots are chosen with a nonzero constant term."""
    m = len(rhs)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(m):
        pivot = next((r for r in range(col, m) if not is_zero(a[r][col].constant_term())), None)
        if pivot is None:
            raise ZeroDivisionError(f"Jacobian is singular at the origin (column {col + 1})")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col].reciprocal()
        a[col] = [x * inv for x in a[col]]
        for r in range(m):
            if r != col and not a[r][col].is_zero():
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [row[m] for row in a]


def implicit_newton(system, N: int) -> List[Dict[MultiIndex, Fraction]]:
    """
    Coefficients of g with F(X, g(X)) = 0 up to total degree N.
    Newton on truncations: G <- G - J(X, G)^-1 F(X, G), correct order k -> 2k + 1.
    """
    from series_core import Deriv
    n, m = system.x_arity, system.y_count
    if n == 0:
        return [{} for _ in range(m)]
    derivs = getattr(system, '_jacobian_nodes', None)
    if derivs is None:
        derivs = [[Deriv(F, n + j) for j in range(1, m + 1)] for F in system.equations]
        system._jacobian_nodes = derivs
    coords = [{unit_index(n, i): Fraction(1)} for i in range(1, n + 1)]
    G: List[Dict[MultiIndex, Fraction]] = [{} for _ in range(m)]
    size = 0
    while size < N:
        size = min(2 * size + 1, N)
        window = TotalDegree(size)
        inner = coords + G
        values = [TruncatedSeries(n, window, compose_truncated(F.coeff, F.arity, inner, n, size))
                  for F in system.equations]
        jac = [[TruncatedSeries(n, window, compose_truncated(D.coeff, D.arity, inner, n, size)) for D in row]
               for row in derivs]
        step = _solve_series(jac, values)
        G = [dict((TruncatedSeries(n, window, g) - s).items()) for g, s in zip(G, step)]
        logger.debug("implicit Newton: order %d", size)
    return G
