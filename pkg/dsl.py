"""
Derivation language: S-expressions over the series node kinds.

    (antider 1 (recip (poly 1 (1 0) (1 2))))     ; arctan

`parse(text)` never raises; it returns a `DslAst` (the form tree plus its
lowered `SeriesExpr`) or a `Diagnostic` with line, column and the tokens
that would have been accepted. `format(ast)` prints the canonical text.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from algebraic import AlgebraicSeriesDef, algebraic_series
from errors import ArityMismatch, IanError, PreconditionError
from series_core import (
    Add, Antider, ComposeSeries, Deriv, Im, Implicit, ImplicitSystem, IntLast, Inverse,
    Mul, Permute, Poly, Re, Recip, Restrict0, Scale, SeriesExpr, SubstPoly, Translate,
    fmt_rat,
)
from sparse_poly import Polynomial

logger = logging.getLogger(__name__)

MAX_DEPTH = 200

FORMS = ('poly', 'alg', 'recip', 'add', 'mul', 'scale', 'subst', 'compose', 'translate',
         'antider', 'deriv', 'restrict0', 'permute', 'inverse', 'implicit', 're', 'im', 'intlast')

_RAT = re.compile(r'^[+-]?\d+(/\d+)?$')
_INT = re.compile(r'^[+-]?\d+$')


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # 'syntax' | 'arity' | 'precondition'
    message: str
    line: int
    col: int
    expected: Tuple[str, ...] = ()

    def render(self) -> str:
        text = f"{self.line}:{self.col}: {self.kind} error: {self.message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        return text


@dataclass(frozen=True)
class Form:
    """One node of the parse tree; `params` holds the literal arguments."""
    kind: str
    params: tuple
    children: Tuple['Form', ...]
    span: Span = field(compare=False, default=Span(1, 1))


@dataclass(frozen=True)
class DslAst:
    root: Form
    expr: SeriesExpr = field(compare=False, repr=False)


class _Failure(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _fail(kind: str, message: str, span: Span, expected: Sequence[str] = ()):
    raise _Failure(Diagnostic(kind, message, span.line, span.col, tuple(expected)))


# --- reader ------------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    text: str
    span: Span


@dataclass
class _List:
    items: list
    span: Span


def _tokens(text: str) -> List[_Token]:
    out: List[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == '\n':
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ';':
            while i < n and text[i] != '\n':
                i += 1
        elif ch in '()':
            out.append(_Token(ch, Span(line, col)))
            i += 1
            col += 1
        else:
            start, scol = i, col
            while i < n and not text[i].isspace() and text[i] not in '();':
                i += 1
                col += 1
            out.append(_Token(text[start:i], Span(line, scol)))
    return out


def _read(text: str):
    """Token stream to nested _List / _Token values; iterative, depth-limited."""
    tokens = _tokens(text)
    if not tokens:
        _fail('syntax', "empty input", Span(1, 1), ['('])
    stack: List[_List] = []
    result = None
    for tok in tokens:
        if result is not None:
            _fail('syntax', f"unexpected {tok.text!r} after the expression", tok.span, ['end of input'])
        if tok.text == '(':
            if len(stack) >= MAX_DEPTH:
                _fail('syntax', f"nesting deeper than {MAX_DEPTH}", tok.span)
            stack.append(_List([], tok.span))
        elif tok.text == ')':
            if not stack:
                _fail('syntax', "unbalanced ')'", tok.span, ['('])
            done = stack.pop()
            if stack:
                stack[-1].items.append(done)
            else:
                result = done
        elif not stack:
            _fail('syntax', f"unexpected atom {tok.text!r}", tok.span, ['('])
        else:
            stack[-1].items.append(tok)
    if stack:
        last = tokens[-1].span
        _fail('syntax', "unexpected end of input", Span(last.line, last.col + len(tokens[-1].text)), [')'])
    return result


# --- grammar -----------------------------------------------------------------


def _rat(item, span: Span) -> Fraction:
    if not isinstance(item, _Token) or not _RAT.match(item.text):
        _fail('syntax', "expected a rational", getattr(item, 'span', span), ['<int>', '<int>/<int>'])
    num, _, den = item.text.partition('/')
    if den and int(den) == 0:
        _fail('syntax', f"zero denominator in {item.text}", item.span, ['<int>/<positive int>'])
    return Fraction(int(num), int(den) if den else 1)


def _int(item, span: Span, minimum: int = 0) -> int:
    if not isinstance(item, _Token) or not _INT.match(item.text):
        _fail('syntax', "expected an integer", getattr(item, 'span', span), ['<int>'])
    value = int(item.text)
    if value < minimum:
        _fail('arity', f"{value} is below {minimum}", item.span, [f'<int >= {minimum}'])
    return value


def _list(item, span: Span, what: str) -> _List:
    if not isinstance(item, _List):
        _fail('syntax', f"expected {what}", getattr(item, 'span', span), ['('])
    return item


def _count(sx: _List, kind: str, low: int, high: Optional[int] = None):
    got = len(sx.items) - 1
    if got < low or (high is not None and got > high):
        want = str(low) if high == low else (f"{low}+" if high is None else f"{low}..{high}")
        _fail('arity', f"({kind} ...) takes {want} arguments, got {got}", sx.span)


def _poly_form(sx: _List) -> Form:
    _count(sx, 'poly', 2, None)
    arity = _int(sx.items[1], sx.span)
    terms = []
    for item in sx.items[2:]:
        term = _list(item, sx.span, "a (<rat> <exp>*) term")
        if not term.items:
            _fail('syntax', "empty polynomial term", term.span, ['<rat>'])
        c = _rat(term.items[0], term.span)
        exps = tuple(_int(x, term.span) for x in term.items[1:])
        if len(exps) != arity:
            _fail('arity', f"term has {len(exps)} exponents, polynomial has arity {arity}", term.span)
        terms.append((c, exps))
    return Form('poly', (arity, tuple(terms)), (), sx.span)


def _build(sx, depth: int = 0) -> Form:
    if isinstance(sx, _Token):
        _fail('syntax', f"expected an expression, got {sx.text!r}", sx.span, ['('])
    if depth > MAX_DEPTH:
        _fail('syntax', f"nesting deeper than {MAX_DEPTH}", sx.span)
    if not sx.items:
        _fail('syntax', "empty form", sx.span, FORMS)
    head = sx.items[0]
    if not isinstance(head, _Token) or head.text not in FORMS:
        where = getattr(head, 'span', sx.span)
        _fail('syntax', f"unknown form {getattr(head, 'text', '(...)')!r}", where, FORMS)
    kind = head.text
    args = sx.items[1:]
    sub = lambda item: _build(item, depth + 1)  # noqa: E731

    if kind == 'poly':
        return _poly_form(sx)
    if kind == 'alg':
        _count(sx, kind, 2, 2)
        rows_sx = _list(args[0], sx.span, "a list of Y-degree rows")
        rows = []
        for row in rows_sx.items:
            row = _list(row, rows_sx.span, "a row of rationals")
            if not row.items:
                _fail('syntax', "empty row", row.span, ['<rat>'])
            rows.append(tuple(_rat(x, row.span) for x in row.items))
        if not rows:
            _fail('syntax', "no rows", rows_sx.span, ['('])
        return Form(kind, (tuple(rows), _rat(args[1], sx.span)), (), sx.span)
    if kind in ('recip', 'inverse', 're', 'im'):
        _count(sx, kind, 1, 1)
        return Form(kind, (), (sub(args[0]),), sx.span)
    if kind in ('add', 'mul'):
        _count(sx, kind, 2, 2)
        return Form(kind, (), (sub(args[0]), sub(args[1])), sx.span)
    if kind in ('scale', 'intlast'):
        _count(sx, kind, 2, 2)
        return Form(kind, (_rat(args[0], sx.span),), (sub(args[1]),), sx.span)
    if kind == 'subst':
        _count(sx, kind, 2, None)
        polys = []
        for item in args[1:]:
            p = _list(item, sx.span, "a (poly ...) form")
            if not p.items or not isinstance(p.items[0], _Token) or p.items[0].text != 'poly':
                _fail('syntax', "subst arguments must be polynomials", p.span, ['(poly'])
            polys.append(_poly_form(p))
        return Form(kind, (), (sub(args[0]),) + tuple(polys), sx.span)
    if kind == 'compose':
        _count(sx, kind, 2, None)
        return Form(kind, (), tuple(sub(a) for a in args), sx.span)
    if kind == 'translate':
        _count(sx, kind, 2, None)
        return Form(kind, (tuple(_rat(a, sx.span) for a in args[1:]),), (sub(args[0]),), sx.span)
    if kind in ('antider', 'deriv', 'restrict0'):
        _count(sx, kind, 2, 2)
        return Form(kind, (_int(args[0], sx.span, 1),), (sub(args[1]),), sx.span)
    if kind == 'permute':
        _count(sx, kind, 2, 2)
        sigma = _list(args[0], sx.span, "a permutation list")
        return Form(kind, (tuple(_int(x, sigma.span, 1) for x in sigma.items),), (sub(args[1]),), sx.span)
    # implicit: optional component index, then the equations
    _count(sx, kind, 1, None)
    index = 1
    if isinstance(args[0], _Token):
        index = _int(args[0], sx.span, 1)
        args = args[1:]
        if not args:
            _fail('arity', "implicit needs at least one equation", sx.span, ['('])
    return Form(kind, (index,), tuple(sub(a) for a in args), sx.span)


# --- lowering ----------------------------------------------------------------


def _polynomial(form: Form) -> Polynomial:
    arity, terms = form.params
    return Polynomial(arity, [(exps, c) for c, exps in terms])


def _construct(form: Form, kids: List[SeriesExpr]) -> SeriesExpr:
    k = form.kind
    if k == 'poly':
        return Poly(_polynomial(form))
    if k == 'alg':
        rows, y0 = form.params
        return algebraic_series(AlgebraicSeriesDef.from_rows(rows, y0))
    if k == 'recip':
        return Recip(kids[0])
    if k == 'add':
        return Add(*kids)
    if k == 'mul':
        return Mul(*kids)
    if k == 'scale':
        return Scale(form.params[0], kids[0])
    if k == 'subst':
        polys = [_polynomial(p) for p in form.children[1:]]
        return SubstPoly(kids[0], polys, polys[0].arity)
    if k == 'compose':
        return ComposeSeries(kids[0], kids[1:])
    if k == 'translate':
        return Translate(kids[0], form.params[0])
    if k == 'antider':
        return Antider(kids[0], form.params[0])
    if k == 'deriv':
        return Deriv(kids[0], form.params[0])
    if k == 'restrict0':
        return Restrict0(kids[0], form.params[0])
    if k == 'permute':
        return Permute(kids[0], form.params[0])
    if k == 'inverse':
        return Inverse(kids[0])
    if k == 'implicit':
        return Implicit(ImplicitSystem(kids), form.params[0])
    if k == 're':
        return Re(kids[0])
    if k == 'im':
        return Im(kids[0])
    return IntLast(kids[0], form.params[0])


def _lower(form: Form, memo: Dict[Form, SeriesExpr]) -> SeriesExpr:
    hit = memo.get(form)
    if hit is not None:
        return hit
    # subst children past the first are polynomial literals, not subterms
    subterms = form.children[:1] if form.kind == 'subst' else form.children
    kids = [_lower(c, memo) for c in subterms]
    try:
        expr = _construct(form, kids)
    except PreconditionError as ex:
        kind = 'arity' if isinstance(ex, ArityMismatch) else 'precondition'
        _fail(kind, str(ex), form.span)
    except IanError as ex:
        _fail('precondition', str(ex), form.span)
    memo[form] = expr
    return expr


def lower(root: Form) -> SeriesExpr:
    """Form tree to SeriesExpr; identical subtrees share one node."""
    try:
        return _lower(root, {})
    except _Failure:
        raise
    except Exception as ex:
        # anything else a literal can provoke (huge exponents, overflow) is still the input's fault
        raise _Failure(Diagnostic('precondition', f"{type(ex).__name__}: {ex}", root.span.line, root.span.col))


def parse(text: str) -> Union[DslAst, Diagnostic]:
    try:
        root = _build(_read(text))
        expr = lower(root)
    except _Failure as f:
        logger.debug("parse failed: %s", f.diagnostic.render())
        return f.diagnostic
    except (ValueError, RecursionError, OverflowError, MemoryError) as ex:
        return Diagnostic('syntax', f"{type(ex).__name__}: {ex}", 1, 1)
    return DslAst(root, expr)


def parse_file(path: str) -> Union[DslAst, Diagnostic]:
    with open(path, 'r', encoding='utf-8', errors='replace') as fh:
        return parse(fh.read())


# --- printing ----------------------------------------------------------------


def _fmt_poly(params) -> str:
    arity, terms = params
    body = ' '.join('(' + ' '.join([fmt_rat(c)] + [str(e) for e in exps]) + ')' for c, exps in terms)
    return f"(poly {arity} {body})"


def _fmt(form: Form) -> str:
    k, p = form.kind, form.params
    kids = [_fmt(c) for c in form.children]
    if k == 'poly':
        return _fmt_poly(p)
    if k == 'alg':
        rows = ' '.join('(' + ' '.join(fmt_rat(c) for c in row) + ')' for row in p[0])
        return f"(alg ({rows}) {fmt_rat(p[1])})"
    if k in ('scale', 'intlast'):
        return f"({k} {fmt_rat(p[0])} {kids[0]})"
    if k == 'translate':
        return f"(translate {kids[0]} {' '.join(fmt_rat(a) for a in p[0])})"
    if k in ('antider', 'deriv', 'restrict0'):
        return f"({k} {p[0]} {kids[0]})"
    if k == 'permute':
        return f"(permute ({' '.join(map(str, p[0]))}) {kids[0]})"
    if k == 'implicit':
        return f"(implicit {p[0]} {' '.join(kids)})"
    return f"({k} {' '.join(kids)})"


def format(ast: Union[DslAst, Form]) -> str:  # noqa: A001
    """Canonical single-line text; parses back to an equal AST."""
    root = ast.root if isinstance(ast, DslAst) else ast
    return _fmt(root)
