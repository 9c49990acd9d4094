"""
Verification suites.

A suite is a YAML manifest under `derivations/` listing cases. Golden cases
point at `.iad` derivation files and state the expected coefficients or the
constant they must enclose; property cases name a seeded random check. Cases
run on a thread pool and come back in manifest order.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath  # type: ignore
import yaml  # type: ignore

from algebraic import AlgebraicSeriesDef, algebraic_series, isolate_real_roots, refine_root
from balls import Ball, Tolerance
from constants import DerivationProgram, lookup
from dsl import Diagnostic, parse_file
from errors import (
    MajorantUnavailable, NonUnitReciprocal, NotInvertible, PointOutsideRadii, SingularJacobian,
    TranslationOutsideDomain,
)
from evaluation import EvalResult, eval_detailed
from majorant import majorant_of, tail_bound, validate_majorant
from series_core import (
    DEFAULT_EPS, Add, Antider, ComposeSeries, Deriv, Im, Implicit, ImplicitSystem, IntLast, Inverse, Mul,
    Permute, Poly, Re, Recip, Scale, SeriesExpr, SubstPoly, Translate, fmt_rat, provably_nonzero, truncate,
)
from settings import DERIVATIONS_DIR
from sparse_poly import Polynomial, indices_up_to, monomial_value, unit_index, zero_index
from weierstrass import division_residual, preparation_residual, wdiv, wprep

logger = logging.getLogger(__name__)

executor = ThreadPoolExecutor(max_workers=4)
# mpmath keeps its working precision in one global context
_MP_LOCK = threading.Lock()


@dataclass(frozen=True)
class CaseResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        mark = '✅' if self.ok else '❌'
        return f"{mark} {self.name}: {self.detail}"


# --- expected values -----------------------------------------------------------


def _odd(fn: Callable[[int], Fraction]) -> Callable[[Tuple[int, ...]], Fraction]:
    return lambda a: fn((a[0] - 1) // 2) if a[0] % 2 else Fraction(0)


FORMULAS: Dict[str, Callable[[Tuple[int, ...]], Fraction]] = {
    'ones': lambda a: Fraction(1),
    'alternating': lambda a: Fraction((-1) ** a[0]),
    'powers_of_two': lambda a: Fraction(2) ** a[0],
    'two_pow_p_plus_1': lambda a: Fraction(2) ** (a[0] + 1),
    'binomial': lambda a: Fraction(comb(sum(a), a[0])),
    'diagonal': lambda a: Fraction(int(a[0] == a[1])),
    'integrated_geometric': lambda a: Fraction(1, a[0]) if a[0] else Fraction(0),
    'log': lambda a: Fraction((-1) ** (a[0] + 1), a[0]) if a[0] else Fraction(0),
    'arctan': _odd(lambda k: Fraction((-1) ** k, 2 * k + 1)),
    'arcsine': _odd(lambda k: Fraction(factorial(2 * k), (2 ** k * factorial(k)) ** 2 * (2 * k + 1))),
    'exp_minus_one': lambda a: Fraction(1, factorial(a[0])) if a[0] else Fraction(0),
}

_ORACLE_CONSTANTS = {
    'pi': lambda: +mpmath.pi,
    'pi_over_4': lambda: mpmath.pi / 4,
    'pi_over_6': lambda: mpmath.pi / 6,
    'e': lambda: +mpmath.e,
    'log2': lambda: mpmath.log(2),
    'li2_half': lambda: mpmath.polylog(2, mpmath.mpf(1) / 2),
    'li2_half_closed_form': lambda: mpmath.pi ** 2 / 12 - mpmath.log(2) ** 2 / 2,
}

_ORACLE_FUNCTIONS = {
    'log': mpmath.log,
    'exp': mpmath.exp,
    'atan': mpmath.atan,
    'asin': mpmath.asin,
    'sin': mpmath.sin,
    'cos': mpmath.cos,
    'li2': lambda x: mpmath.polylog(2, x),
}


def mpf_to_fraction(v) -> Fraction:
    # _mpf_ is (sign, mantissa, exponent, bitcount); man_exp drops the sign
    sign, man, exp, _ = mpmath.mpf(v)._mpf_
    q = Fraction(int(man)) * Fraction(2) ** exp
    return -q if sign else q


def oracle(name: str, digits: int) -> Fraction:
    """Independent mpmath value of a named constant or 'fn:q', good to far more than `digits`."""
    with _MP_LOCK, mpmath.workdps(2 * digits + 20):
        if name in _ORACLE_CONSTANTS:
            return mpf_to_fraction(_ORACLE_CONSTANTS[name]())
        kind, sep, arg = name.partition(':')
        if not sep or kind not in _ORACLE_FUNCTIONS:
            raise KeyError(f"no oracle for {name!r}")
        q = Fraction(arg)
        return mpf_to_fraction(_ORACLE_FUNCTIONS[kind](mpmath.mpf(q.numerator) / q.denominator))


def oracle_slack(digits: int) -> Fraction:
    return Fraction(1, 10 ** (2 * digits + 10))


# --- random inputs -------------------------------------------------------------

_SMALL = tuple(Fraction(v) for v in (-2, -1, 1, 2)) + (Fraction(1, 2), Fraction(-1, 3), Fraction(3, 4))
_KINDS = ('add', 'mul', 'scale', 'recip', 'antider', 'deriv', 'subst', 'permute')
# certified or structurally heavier nodes, drawn less often
_RARE_KINDS = ('translate', 'compose', 'inverse', 'implicit', 'complexify', 'intlast')
_EXACT_RARE_KINDS = ('compose', 'inverse', 'implicit', 'complexify')
_RARE_SHARE = 0.2
# constructors that may reject a random child
_REJECTED = (MajorantUnavailable, NonUnitReciprocal, NotInvertible, SingularJacobian, TranslationOutsideDomain)


def random_rational(rng: random.Random) -> Fraction:
    return rng.choice(_SMALL)


def random_polynomial(rng: random.Random, arity: int, degree: int = 2, terms: int = 3,
                      vanish: bool = False) -> Polynomial:
    out: Dict[Tuple[int, ...], Fraction] = {}
    for _ in range(terms):
        alpha = tuple(rng.randint(0, degree) for _ in range(arity))
        if vanish and not any(alpha):
            continue
        out[alpha] = out.get(alpha, Fraction(0)) + random_rational(rng)
    p = Polynomial(arity, out)
    if vanish and p.is_zero():
        p = Polynomial.variable(rng.randint(1, arity), arity)
    return p


@lru_cache(maxsize=None)
def algebraic_leaves() -> Tuple[SeriesExpr, ...]:
    """1/(1-X), sqrt(1+X), (1-X)^(-1/2) as algebraic series."""
    rows = ([[-1], [1, -1]], [[-1, -1], [0], [1]], [[-1], [0], [1, -1]])
    return tuple(algebraic_series(AlgebraicSeriesDef.from_rows(r, 1)) for r in rows)


def with_unit_constant(e: SeriesExpr, rng: random.Random) -> SeriesExpr:
    if provably_nonzero(e.coeff(zero_index(e.arity), DEFAULT_EPS)):
        return e
    return Add(e, Poly(Polynomial.constant(rng.choice((1, 2, -1)), e.arity)))


def dyadic_below(q: Fraction) -> Fraction:
    """Largest 1/2^k not above q, capped at 1."""
    k = 0
    while Fraction(1, 2 ** k) > q:
        k += 1
    return Fraction(1, 2 ** k)


def random_implicit_equation(rng: random.Random, arity: int) -> Polynomial:
    """F(X, Y) vanishing at the origin with a nonzero Y coefficient."""
    p = random_polynomial(rng, arity + 1, degree=2, terms=3, vanish=True)
    y = unit_index(arity + 1, arity + 1)
    terms = {a: c for a, c in p.terms.items() if a != y}
    terms[y] = random_rational(rng)
    return Polynomial(arity + 1, terms)


def _rare_expr(rng: random.Random, kind: str, arity: int, depth: int, exact: bool) -> Optional[SeriesExpr]:
    def child(n: int = arity, d: int = depth - 1) -> SeriesExpr:
        return random_expr(rng, n, d, exact)

    if kind == 'translate':
        e = child()
        i = rng.randrange(arity)
        point = [Fraction(0)] * arity
        point[i] = rng.choice((1, -1)) * dyadic_below(majorant_of(e).radii[i] / 8)
        return Translate(e, point)
    if kind == 'compose':
        return ComposeSeries(child(1), [Antider(child(), rng.randint(1, arity))])
    if kind == 'inverse':
        inv = Inverse(Antider(with_unit_constant(child(1), rng), 1))
        if arity == 1:
            return inv
        return SubstPoly(inv, [random_polynomial(rng, arity, vanish=True)], arity)
    if kind == 'implicit':
        return Implicit(ImplicitSystem([Poly(random_implicit_equation(rng, arity))]))
    if kind == 'complexify' and arity % 2 == 0:
        return rng.choice((Re, Im))(child(arity // 2))
    if kind == 'intlast':
        e = child(arity + 1, min(depth - 1, 1))
        return IntLast(e, dyadic_below(majorant_of(e).radii[-1] / 8))
    return None


def random_expr(rng: random.Random, arity: int = 1, depth: int = 3, exact: bool = False) -> SeriesExpr:
    """
    Random DAG over every node kind; a rejected rare node becomes a polynomial.
    With exact=True translations and integrals are left out, so every coefficient is rational.
    """
    if depth <= 0 or rng.random() < 0.2:
        if arity == 1 and rng.random() < 0.3:
            return rng.choice(algebraic_leaves())
        return Poly(random_polynomial(rng, arity))
    if rng.random() < _RARE_SHARE:
        try:
            rare = _rare_expr(rng, rng.choice(_EXACT_RARE_KINDS if exact else _RARE_KINDS), arity, depth, exact)
        except _REJECTED:
            rare = Poly(random_polynomial(rng, arity))
        if rare is not None:
            return rare
    kind = rng.choice(_KINDS)

    def child():
        return random_expr(rng, arity, depth - 1, exact)

    if kind == 'add':
        return Add(child(), child())
    if kind == 'mul':
        return Mul(child(), child())
    if kind == 'scale':
        return Scale(random_rational(rng), child())
    if kind == 'recip':
        return Recip(with_unit_constant(child(), rng))
    if kind == 'antider':
        return Antider(child(), rng.randint(1, arity))
    if kind == 'deriv':
        return Deriv(child(), rng.randint(1, arity))
    if kind == 'permute' and arity == 2:
        return Permute(child(), (2, 1))
    outer = random_expr(rng, 1, depth - 1, exact)
    return SubstPoly(outer, [random_polynomial(rng, arity, vanish=True)], arity)


def random_regular(rng: random.Random, arity: int, d: int) -> Polynomial:
    """Polynomial regular of order d in the last variable."""
    head0 = zero_index(arity - 1)
    lead = head0 + (d,)
    terms: Dict[Tuple[int, ...], Fraction] = {lead: random_rational(rng)}
    for _ in range(2):
        alpha = tuple(rng.randint(0, 1) for _ in range(arity - 1)) + (rng.randint(d, d + 2),)
        if alpha != lead:
            terms[alpha] = terms.get(alpha, Fraction(0)) + random_rational(rng)
    for _ in range(3):
        head = list(head0)
        head[rng.randrange(arity - 1)] += rng.randint(1, 2)
        alpha = tuple(head) + (rng.randint(0, d + 1),)
        terms[alpha] = terms.get(alpha, Fraction(0)) + random_rational(rng)
    return Polynomial(arity, terms)


# --- property checks -------------------------------------------------------------


def _arity_and_order(rng, params) -> Tuple[int, int]:
    arity = rng.choice(params.get('arities', [1]))
    order = int(params.get('order', 16)) if arity == 1 else int(params.get('order_multivariate', 8))
    return arity, order


def check_majorant_soundness(rng: random.Random, params: dict) -> Tuple[bool, str]:
    arity, order = _arity_and_order(rng, params)
    e = random_expr(rng, arity, int(params.get('depth', 4)))
    try:
        m = majorant_of(e)
    except MajorantUnavailable:
        return True, 'skipped'
    ok, bad = validate_majorant(e, m, order)
    return ok, '' if ok else f"{e.sexpr()[:120]}: bound {m} fails at {bad}"


def containment_point(e: SeriesExpr, point: Sequence[Fraction], tol: Tolerance, cap: int,
                      tries: int = 6) -> Tuple[List[Fraction], Optional[EvalResult]]:
    """Halve the point toward the origin until four times the driver's order fits under cap; None if it never does."""
    point = list(point)
    for _ in range(tries):
        res = eval_detailed(e, point, tol)
        if 4 * res.order <= cap:
            return point, res
        point = [v / 2 for v in point]
    return point, None


def check_ball_containment(rng: random.Random, params: dict) -> Tuple[bool, str]:
    """Certified ball against an exact partial sum at four times the driver's order."""
    arity, cap = _arity_and_order(rng, params)
    e = random_expr(rng, arity, int(params.get('depth', 3)), exact=True)
    try:
        radii = majorant_of(e).radii
    except MajorantUnavailable:
        return True, 'skipped'
    point = []
    for r in radii:
        k = int(r * 16 * rng.choice((Fraction(1, 4), Fraction(1, 2))))
        point.append(Fraction(k, 16))
    tol = Tolerance.from_digits(int(params.get('digits', 8)))
    try:
        point, res = containment_point(e, point, tol, cap)
    except (MajorantUnavailable, PointOutsideRadii):
        return True, 'skipped'
    if res is None:
        return False, f"{e.sexpr()[:120]}: driver order stays above {cap // 4} down to {point}"
    K = 4 * res.order
    exact = sum((e.coeff(a) * monomial_value(a, point) for a in indices_up_to(arity, K)), Fraction(0))
    slack = tail_bound(res.majorant, point, K)
    ok = res.ball.widen(slack).contains(exact)
    return ok, '' if ok else f"{e.sexpr()[:120]} at {point}: {res.ball} misses partial sum {float(exact)} (order {K})"


def check_weierstrass(rng: random.Random, params: dict) -> Tuple[bool, str]:
    arity = rng.choice(params.get('arities', [2, 3]))
    d = rng.randint(1, int(params.get('max_d', 4)))
    orders = tuple(params.get('orders', [3, 4]))
    f = random_regular(rng, arity, d)
    g = random_polynomial(rng, arity, degree=3, terms=4)
    div = wdiv(f, g, d, orders)
    if not division_residual(f, g, div).is_zero():
        return False, f"division residual nonzero for f={f}, g={g}"
    stable = wdiv(f, g, d, orders, schedule='until-stable')
    if not (div.h.equals(stable.h) and div.r.equals(stable.r)):
        return False, f"fixed and until-stable schedules disagree for f={f}, g={g}"
    prep = wprep(f, d, orders)
    if not preparation_residual(f, prep).is_zero():
        return False, f"preparation residual nonzero for f={f}"
    if not (prep.P.monic and prep.P.degree == d and prep.P.lower_vanish_at_origin()):
        return False, f"P is not a Weierstrass polynomial of degree {d} for f={f}"
    return True, ''


def check_inverse(rng: random.Random, params: dict) -> Tuple[bool, str]:
    N = int(params.get('order', 16))
    e = Antider(with_unit_constant(random_expr(rng, 1, int(params.get('depth', 2)), exact=True), rng), 1)
    comp = truncate(ComposeSeries(e, [Inverse(e)]), N)
    bad = [a for a, c in comp.entries() if c != (1 if a == (1,) else 0)]
    return not bad, '' if not bad else f"{e.sexpr()[:120]}: e(inverse(e)) differs from X at {bad[0]}"


def check_implicit(rng: random.Random, params: dict) -> Tuple[bool, str]:
    N = int(params.get('order', 12))
    m = rng.choice(params.get('equations', [1, 2]))
    total = 1 + m
    while True:
        lin = [[random_rational(rng) for _ in range(m)] for _ in range(m)]
        if m == 1 or lin[0][0] * lin[1][1] != lin[0][1] * lin[1][0]:
            break
    equations = []
    for k in range(m):
        p = random_polynomial(rng, total, degree=2, terms=3, vanish=True)
        terms = {a: c for a, c in p.terms.items() if sum(a) > 1 or a[0]}
        for j in range(m):
            alpha = tuple(int(i == 1 + j) for i in range(total))
            terms[alpha] = lin[k][j]
        equations.append(Poly(Polynomial(total, terms)))
    system = ImplicitSystem(equations)
    inner = [Poly(Polynomial.variable(1, 1))] + [Implicit(system, j) for j in range(1, m + 1)]
    for k, F in enumerate(equations, 1):
        residual = truncate(ComposeSeries(F, inner), N)
        if not residual.is_zero():
            return False, f"equation {k} of {system.sexpr()[:120]} leaves a residual"
    return True, ''


def _mp(q) -> 'mpmath.mpf':
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


def check_roots(rng: random.Random, params: dict) -> Tuple[bool, str]:
    """sqrt(2), 2^(1/3) and the middle root of a random cubic with three real roots."""
    digits = int(params.get('digits', 20))
    eps = Fraction(1, 10 ** digits)
    a = rng.randint(-5, 1)
    b = a + rng.randint(2, 4)
    c = b + rng.randint(2, 4)
    shift = rng.choice((Fraction(1, 3), Fraction(-1, 3), Fraction(1, 7)))
    # (X-a)(X-b)(X-c) + shift, lowest degree first
    cubic = [-a * b * c + shift, a * b + a * c + b * c, -(a + b + c), 1]

    def middle():
        found = mpmath.polyroots([_mp(v) for v in cubic[::-1]], maxsteps=200, extraprec=200)
        return sorted(mpmath.re(z) for z in found)[1]

    cases = [([-2, 0, 1], 1, lambda: mpmath.sqrt(2)),
             ([-2, 0, 0, 1], 0, lambda: mpmath.cbrt(2)),
             (cubic, 1, middle)]
    for coeffs, which, exact in cases:
        roots = sorted(isolate_real_roots(coeffs), key=lambda iv: iv.lo)
        ball = refine_root(coeffs, roots[which], eps)
        with _MP_LOCK, mpmath.workdps(2 * digits + 20):
            want = mpf_to_fraction(exact())
        if ball.rad > eps or not ball.widen(oracle_slack(digits)).contains(want):
            return False, f"root {which + 1} of {[fmt_rat(v) for v in coeffs]}: {ball} misses {float(want)}"
    return True, ''


PROPERTIES: Dict[str, Callable[[random.Random, dict], Tuple[bool, str]]] = {
    'majorant_soundness': check_majorant_soundness,
    'ball_containment': check_ball_containment,
    'weierstrass': check_weierstrass,
    'inverse': check_inverse,
    'implicit': check_implicit,
    'roots': check_roots,
}


# --- golden checks ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _load_expr(path: str) -> SeriesExpr:
    parsed = parse_file(path)
    if isinstance(parsed, Diagnostic):
        raise ValueError(f"{os.path.basename(path)}:{parsed.render()}")
    return parsed.expr


def _point(raw, arity: int) -> Tuple[Fraction, ...]:
    if raw is None:
        return (Fraction(0),) * arity
    if isinstance(raw, (list, tuple)):
        return tuple(Fraction(str(v)) for v in raw)
    return (Fraction(str(raw)),)


def _combine(terms: Sequence[dict], base_dir: str, digits: int) -> Ball:
    """sum factor * value**power over terms; a term is a derivation file at a point or a registry constant."""
    eps = Tolerance.from_digits(digits).eps
    total: Optional[Ball] = None
    for term in terms:
        factor = Fraction(str(term.get('factor', 1)))
        power = int(term.get('power', 1))
        if 'const' in term:
            ball = lookup(term['const'], digits + 4).ball
        else:
            path = os.path.join(base_dir, term['file'])
            expr = _load_expr(path)
            program = DerivationProgram(term['file'], expr, _point(term.get('at'), expr.arity), path)
            ball = program.evaluate(eps / (2 * len(terms) * max(1, abs(factor))))
        value = (ball ** power) * factor
        total = value if total is None else total + value
    return total


def _check_coeffs(case: dict, base_dir: str) -> Tuple[bool, str]:
    expr = _load_expr(os.path.join(base_dir, case['file']))
    order = int(case['order'])
    tol = Tolerance.from_digits(int(case['digits'])).eps if 'digits' in case else None
    if 'formula' in case:
        want_at = FORMULAS[case['formula']]
    else:
        listed = [Fraction(str(v)) for v in case['expect']]
        if expr.arity != 1 or len(listed) != order + 1:
            raise ValueError(f"'expect' needs {order + 1} values for a univariate series")
        want_at = lambda a: listed[a[0]]  # noqa: E731
    checked = 0
    for alpha in indices_up_to(expr.arity, order):
        c = expr.coeff(alpha, tol)
        want = want_at(alpha)
        if isinstance(c, Ball):
            if not c.contains(want) or (tol is not None and c.rad > tol):
                return False, f"coefficient {alpha}: {c} does not enclose {fmt_rat(want)}"
        elif c != want:
            return False, f"coefficient {alpha}: got {fmt_rat(c)}, expected {fmt_rat(want)}"
        checked += 1
    return True, f"{checked} coefficients match"


def _check_eval(case: dict, base_dir: str) -> Tuple[bool, str]:
    digits = int(case['digits'])
    ball = _combine(case['terms'], base_dir, digits)
    want = oracle(case['oracle'], digits)
    ok = ball.widen(oracle_slack(digits)).contains(want) and ball.rad <= Tolerance.from_digits(digits).eps
    return ok, f"{ball.format_mid(digits)} ± {ball.format_rad()}"


def _check_identity(case: dict, base_dir: str) -> Tuple[bool, str]:
    digits = int(case['digits'])
    left = _combine(case['left'], base_dir, digits)
    right = _combine(case['right'], base_dir, digits)
    gap = abs(left.mid - right.mid)
    return left.overlaps(right), f"|difference| {float(gap):.3g} within radii {float(left.rad + right.rad):.3g}"


def _check_constant(case: dict, base_dir: str) -> Tuple[bool, str]:
    digits = int(case['digits'])
    res = lookup(case['constant'], digits)
    want = oracle(case.get('oracle', case['constant']), digits)
    ok = res.meets_contract() and res.ball.widen(oracle_slack(digits)).contains(want)
    return ok, f"{res.ball.format_mid(digits)} ± {res.ball.format_rad()}"


def _check_property(case: dict, base_dir: str) -> Tuple[bool, str]:
    prop = PROPERTIES[case['property']]
    count = int(case.get('count', 10))
    rng = random.Random(case.get('seed', 0))
    params = case.get('params') or {}
    skipped = 0
    for i in range(count):
        ok, detail = prop(rng, params)
        if not ok:
            return False, f"case {i + 1}/{count}: {detail}"
        skipped += detail == 'skipped'
    note = f" ({skipped} without a majorant)" if skipped else ''
    return True, f"{count - skipped}/{count} passed{note}"


CHECKS: Dict[str, Callable[[dict, str], Tuple[bool, str]]] = {
    'coeffs': _check_coeffs,
    'eval': _check_eval,
    'identity': _check_identity,
    'constant': _check_constant,
    'property': _check_property,
}


# --- running ----------------------------------------------------------------------


def suite_path(name: str, directory: str = DERIVATIONS_DIR) -> str:
    if name.endswith(('.yaml', '.yml')):
        return name
    return os.path.join(directory, f"{name}.yaml")


def load_suite(name: str, directory: str = DERIVATIONS_DIR) -> Tuple[str, List[dict]]:
    path = suite_path(name, directory)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no suite manifest at {path}")
    with open(path, 'r', encoding='utf-8') as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected an object with a 'cases' list")
    cases = data.get('cases') or []
    for i, case in enumerate(cases, 1):
        if not isinstance(case, dict) or case.get('kind') not in CHECKS or 'name' not in case:
            raise ValueError(f"{path}: case {i} needs a name and a kind in {sorted(CHECKS)}")
    return os.path.dirname(path), cases


def run_case(case: dict, base_dir: str) -> CaseResult:
    started = time.perf_counter()
    try:
        ok, detail = CHECKS[case['kind']](case, base_dir)
    except Exception as e:
        ok, detail = False, f"{type(e).__name__}: {e}"
    logger.info("case %s finished in %.2fs", case['name'], time.perf_counter() - started)
    return CaseResult(case['name'], ok, detail)


def run_suite(name: str, directory: str = DERIVATIONS_DIR, only: Optional[Sequence[str]] = None) -> List[CaseResult]:
    """Run every case of a manifest; results in manifest order."""
    base_dir, cases = load_suite(name, directory)
    if only:
        cases = [c for c in cases if c['name'] in only]
    futures = [executor.submit(run_case, case, base_dir) for case in cases]
    return [f.result() for f in futures]
