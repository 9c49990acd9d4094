"""
Sparse multivariate polynomials with rational coefficients and finite
windows onto power series.

Multi-indices are plain tuples of non-negative ints. Coefficients inside a
TruncatedSeries may be Fractions or Balls; the helpers here only use ring
operations so both flow through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple

from balls import Ball

MultiIndex = Tuple[int, ...]


def is_zero(c) -> bool:
    if isinstance(c, Ball):
        return c.mid == 0 and c.is_exact()
    return c == 0


def zero_index(n: int) -> MultiIndex:
    return (0,) * n


def unit_index(n: int, i: int) -> MultiIndex:
    """Exponent vector of X_i (1-based)."""
    return tuple(1 if j == i - 1 else 0 for j in range(n))


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def sub_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def indices_of_degree(n: int, d: int) -> Iterator[MultiIndex]:
    """All exponent vectors of n variables with total degree d, lexicographically descending."""
    if n == 0:
        if d == 0:
            yield ()
        return
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in indices_of_degree(n - 1, d - first):
            yield (first,) + rest


def indices_up_to(n: int, N: int) -> Iterator[MultiIndex]:
    """Graded enumeration of all exponent vectors with total degree <= N."""
    for d in range(N + 1):
        yield from indices_of_degree(n, d)


def indices_below(alpha: MultiIndex) -> Iterator[MultiIndex]:
    """All beta <= alpha componentwise."""
    return product(*(range(a + 1) for a in alpha))


def monomial_value(alpha: MultiIndex, point: Sequence[Fraction]) -> Fraction:
    v = Fraction(1)
    for a, x in zip(alpha, point):
        if a:
            v *= Fraction(x) ** a
    return v


class Polynomial:
    """Sparse polynomial over Q in `arity` variables."""

    __slots__ = ('arity', 'terms')

    def __init__(self, arity: int, terms: Dict[MultiIndex, Fraction] | Iterable = ()):
        self.arity = arity
        items = terms.items() if isinstance(terms, dict) else terms
        clean: Dict[MultiIndex, Fraction] = {}
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != arity:
                raise ValueError(f"exponent {alpha} does not have {arity} entries")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = Fraction(c)
            total = clean.get(alpha, Fraction(0)) + c
            if total:
                clean[alpha] = total
            else:
                clean.pop(alpha, None)
        self.terms = clean

    @classmethod
    def constant(cls, c, arity: int) -> 'Polynomial':
        return cls(arity, {zero_index(arity): Fraction(c)})

    @classmethod
    def variable(cls, i: int, arity: int) -> 'Polynomial':
        return cls(arity, {unit_index(arity, i): Fraction(1)})

    @classmethod
    def univariate(cls, coeffs: Sequence) -> 'Polynomial':
        return cls(1, {(k,): Fraction(c) for k, c in enumerate(coeffs) if c})

    def coeff(self, alpha: MultiIndex) -> Fraction:
        return self.terms.get(tuple(alpha), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeff(zero_index(self.arity))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def min_degree(self) -> int:
        return min((sum(a) for a in self.terms), default=-1)

    def sorted_terms(self) -> List[Tuple[MultiIndex, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-a for a in t[0])))

    def __add__(self, other: 'Polynomial') -> 'Polynomial':
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, Fraction(0)) + c
        return Polynomial(self.arity, out)

    def __neg__(self) -> 'Polynomial':
        return Polynomial(self.arity, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: 'Polynomial') -> 'Polynomial':
        return self + (-other)

    def __mul__(self, other) -> 'Polynomial':
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            return Polynomial(self.arity, {a: c * v for a, v in self.terms.items()})
        out: Dict[MultiIndex, Fraction] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                k = add_index(a, b)
                out[k] = out.get(k, Fraction(0)) + c * d
        return Polynomial(self.arity, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.arity == other.arity and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.arity, frozenset(self.terms.items())))

    def abs_sum_at(self, radii: Sequence[Fraction], skip_constant: bool = False) -> Fraction:
        """Sum of |c_g| * radii^g: a sup bound of |p| on the closed polydisc."""
        total = Fraction(0)
        for alpha, c in self.terms.items():
            if skip_constant and not any(alpha):
                continue
            total += abs(c) * monomial_value(alpha, radii)
        return total

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * monomial_value(a, point) for a, c in self.terms.items()), Fraction(0))

    def as_dict(self) -> Dict[MultiIndex, Fraction]:
        return dict(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return f"Polynomial({self.arity}, 0)"
        parts = [f"{c}*X^{list(a)}" for a, c in self.sorted_terms()]
        return f"Polynomial({self.arity}, {' + '.join(parts)})"


# --- windows ------------------------------------------------------------


@dataclass(frozen=True)
class TotalDegree:
    order: int

    def contains(self, alpha: MultiIndex) -> bool:
        return sum(alpha) <= self.order

    def indices(self, arity: int) -> Iterator[MultiIndex]:
        return indices_up_to(arity, self.order)


@dataclass(frozen=True)
class LastVariableBox:
    """|alpha'| <= x_order and alpha_n <= n_order (the Weierstrass output window)."""
    x_order: int
    n_order: int

    def contains(self, alpha: MultiIndex) -> bool:
        return sum(alpha[:-1]) <= self.x_order and alpha[-1] <= self.n_order

    def indices(self, arity: int) -> Iterator[MultiIndex]:
        for head in indices_up_to(arity - 1, self.x_order):
            for k in range(self.n_order + 1):
                yield head + (k,)


@dataclass(frozen=True)
class Staircase:
    """alpha_n <= n_order + slope * (x_order - |alpha'|): closed under going down in every slot."""
    x_order: int
    n_order: int
    slope: int

    def limit(self, head: MultiIndex) -> int:
        return self.n_order + self.slope * (self.x_order - sum(head))

    def contains(self, alpha: MultiIndex) -> bool:
        s = sum(alpha[:-1])
        return s <= self.x_order and alpha[-1] <= self.limit(alpha[:-1])

    def indices(self, arity: int) -> Iterator[MultiIndex]:
        for head in indices_up_to(arity - 1, self.x_order):
            for k in range(self.limit(head) + 1):
                yield head + (k,)


class TruncatedSeries:
    """Finite window onto a power series; missing entries inside the window are zero."""

    def __init__(self, arity: int, window, coeffs: Dict[MultiIndex, object] | None = None):
        self.arity = arity
        self.window = window
        self.coeffs: Dict[MultiIndex, object] = {}
        for alpha, c in (coeffs or {}).items():
            if window.contains(alpha) and not is_zero(c):
                self.coeffs[alpha] = c

    @property
    def order(self) -> int:
        return getattr(self.window, 'order', getattr(self.window, 'x_order', 0))

    @classmethod
    def from_function(cls, arity: int, window, fn: Callable[[MultiIndex], object]) -> 'TruncatedSeries':
        return cls(arity, window, {a: fn(a) for a in window.indices(arity)})

    @classmethod
    def from_polynomial(cls, p: Polynomial, window) -> 'TruncatedSeries':
        return cls(p.arity, window, p.terms)

    def __getitem__(self, alpha: MultiIndex):
        return self.coeffs.get(tuple(alpha), Fraction(0))

    def items(self):
        return self.coeffs.items()

    def entries(self) -> Iterator[Tuple[MultiIndex, object]]:
        """Every index of the window with its coefficient, zeros included."""
        for alpha in self.window.indices(self.arity):
            yield alpha, self[alpha]

    def is_zero(self) -> bool:
        return not self.coeffs

    def constant_term(self):
        return self[zero_index(self.arity)]

    def with_window(self, window) -> 'TruncatedSeries':
        return TruncatedSeries(self.arity, window, self.coeffs)

    def __add__(self, other: 'TruncatedSeries') -> 'TruncatedSeries':
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out[a] + c if a in out else c
        return TruncatedSeries(self.arity, self.window, out)

    def __neg__(self) -> 'TruncatedSeries':
        return TruncatedSeries(self.arity, self.window, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other: 'TruncatedSeries') -> 'TruncatedSeries':
        return self + (-other)

    def scale(self, c) -> 'TruncatedSeries':
        return TruncatedSeries(self.arity, self.window, {a: c * v for a, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        out: Dict[MultiIndex, object] = {}
        contains = self.window.contains
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                k = add_index(a, b)
                if contains(k):
                    out[k] = out[k] + c * d if k in out else c * d
        return TruncatedSeries(self.arity, self.window, out)

    def reciprocal(self) -> 'TruncatedSeries':
        c0 = self.constant_term()
        if is_zero(c0):
            raise ZeroDivisionError("truncated series has zero constant term")
        inv0 = 1 / c0
        support = [(a, c) for a, c in self.coeffs.items() if any(a)]
        out: Dict[MultiIndex, object] = {}
        for gamma in sorted(self.window.indices(self.arity), key=sum):
            if not any(gamma):
                out[gamma] = inv0
                continue
            acc = Fraction(0)
            for beta, b in support:
                rest = sub_index(gamma, beta)
                if min(rest) < 0:
                    continue
                prev = out.get(rest)
                if prev is not None and not is_zero(prev):
                    acc = acc + b * prev
            if not is_zero(acc):
                out[gamma] = -inv0 * acc
        return TruncatedSeries(self.arity, self.window, out)

    def equals(self, other: 'TruncatedSeries') -> bool:
        return (self - other).is_zero()

    def __repr__(self) -> str:
        return f"TruncatedSeries(arity={self.arity}, window={self.window}, nnz={len(self.coeffs)})"


# --- dict-level truncated arithmetic (total degree) ---------------------


def mul_truncated(a: Dict[MultiIndex, object], b: Dict[MultiIndex, object], N: int) -> Dict[MultiIndex, object]:
    out: Dict[MultiIndex, object] = {}
    for x, c in a.items():
        dx = sum(x)
        if dx > N:
            continue
        for y, d in b.items():
            if dx + sum(y) > N:
                continue
            k = add_index(x, y)
            out[k] = out[k] + c * d if k in out else c * d
    return {k: v for k, v in out.items() if not is_zero(v)}


def power_table(g: Dict[MultiIndex, object], arity: int, N: int) -> List[Dict[MultiIndex, object]]:
    """g^0 .. g^N truncated at total degree N; g must vanish at the origin."""
    table = [{zero_index(arity): Fraction(1)}]
    for _ in range(N):
        table.append(mul_truncated(table[-1], g, N))
    return table


def compose_truncated(outer: Callable[[MultiIndex], object], outer_arity: int,
                      inner: Sequence[Dict[MultiIndex, object]], inner_arity: int,
                      N: int) -> Dict[MultiIndex, object]:
    """
    Coefficients of f(g_1, ..., g_k) up to total degree N.

    `outer(alpha)` returns the coefficient of f; every g_j has zero constant
    term, so only outer indices with |alpha| <= N contribute.
    """
    powers = [power_table(g, inner_arity, N) for g in inner]
    result: Dict[MultiIndex, object] = {}

    def walk(j: int, alpha: List[int], acc: Dict[MultiIndex, object]):
        if j == outer_arity:
            c = outer(tuple(alpha))
            if is_zero(c):
                return
            for k, v in acc.items():
                term = c * v
                result[k] = result[k] + term if k in result else term
            return
        low = min(sum(k) for k in acc)
        for e in range(N - low + 1):
            term = powers[j][e]
            if not term:
                if e == 0:
                    continue
                break
            prod = acc if e == 0 else mul_truncated(acc, term, N)
            if prod:
                alpha.append(e)
                walk(j + 1, alpha, prod)
                alpha.pop()

    walk(0, [], {zero_index(inner_arity): Fraction(1)})
    return {k: v for k, v in result.items() if not is_zero(v)}


# --- univariate truncated lists ----------------------------------------

# below this many terms the schoolbook loops win
_PACKED_MIN = 24


def _rational_list(xs: Sequence) -> bool:
    return all(type(x) is Fraction or type(x) is int for x in xs)


def _scaled(xs: Sequence) -> Tuple[List[int], int]:
    """Integers c_i and a common denominator D with xs[i] == c_i / D."""
    den = 1
    for x in xs:
        den = lcm(den, Fraction(x).denominator)
    return [Fraction(x).numerator * (den // Fraction(x).denominator) for x in xs], den


def _packed_mul(a: Sequence, b: Sequence, n: int) -> List[Fraction]:
    """
    Exact product of rational lists through one big-integer multiplication:
    both lists are scaled to integers and packed at k bits per slot, with k
    wide enough that no slot of the product overflows.
    """
    ia, da = _scaled(a)
    ib, db = _scaled(b)
    top_a = max((abs(c) for c in ia), default=0)
    top_b = max((abs(c) for c in ib), default=0)
    if not top_a or not top_b:
        return [Fraction(0)] * n
    k = (top_a * top_b * min(len(ia), len(ib))).bit_length() + 2
    pa = 0
    for c in reversed(ia):
        pa = (pa << k) + c
    pb = 0
    for c in reversed(ib):
        pb = (pb << k) + c
    v = pa * pb
    mask = (1 << k) - 1
    half = 1 << (k - 1)
    den = da * db
    out: List[Fraction] = []
    for _ in range(n):
        r = v & mask
        v >>= k
        if r >= half:
            r -= 1 << k
            v += 1
        out.append(Fraction(r, den))
    return out


def list_mul(a: Sequence, b: Sequence, n: int) -> List:
    """Product of two coefficient lists, keeping n terms."""
    a, b = a[:n], b[:n]
    if min(len(a), len(b)) >= _PACKED_MIN and _rational_list(a) and _rational_list(b):
        return _packed_mul(a, b, n)
    out: List = [Fraction(0)] * n
    for i, x in enumerate(a):
        if is_zero(x):
            continue
        for j, y in enumerate(b[:n - i]):
            if not is_zero(y):
                out[i + j] = out[i + j] + x * y
    return out


def _recip_newton(a: Sequence, n: int) -> List[Fraction]:
    """b <- b - b (a b - 1), doubling the number of correct terms each step."""
    b: List[Fraction] = [1 / Fraction(a[0])]
    size = 1
    while size < n:
        size = min(2 * size, n)
        err = list_mul(a[:size], b, size)
        err[0] -= 1
        corr = list_mul(b, err, size)
        b = [x - y for x, y in zip(b + [Fraction(0)] * (size - len(b)), corr)]
    return b


def list_recip(a: Sequence, n: int) -> List:
    if is_zero(a[0]):
        raise ZeroDivisionError("series has zero constant term")
    if n >= 2 * _PACKED_MIN and _rational_list(a[:n]):
        return _recip_newton(a, n)
    inv0 = 1 / a[0]
    out: List = [inv0]
    for k in range(1, n):
        acc = Fraction(0)
        for j in range(1, min(k, len(a) - 1) + 1):
            if not is_zero(a[j]):
                acc = acc + a[j] * out[k - j]
        out.append(-inv0 * acc)
    return out


def list_compose(f: Sequence, g: Sequence, n: int) -> List:
    """f(g) keeping n terms, g[0] == 0 (Horner)."""
    out: List = [Fraction(0)] * n
    for c in reversed(list(f[:n])):
        out = list_mul(out, g, n)
        out[0] = out[0] + c
    return out


def list_deriv(f: Sequence) -> List:
    return [k * f[k] for k in range(1, len(f))] or [Fraction(0)]
