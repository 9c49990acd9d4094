import glob
import os

import pytest
from hypothesis import given, strategies as st

import dsl
from conftest import DERIVATIONS
from dsl import FORMS, MAX_DEPTH, Diagnostic, DslAst, parse, parse_file

GEOMETRIC = '(recip (poly 1 (1 0) (-1 1)))'


def test_parse_geometric():
    ast = parse(GEOMETRIC)
    assert isinstance(ast, DslAst)
    assert [ast.expr.coeff((p,)) for p in range(5)] == [1] * 5
    assert dsl.format(ast) == GEOMETRIC


def test_comments_and_layout_are_ignored():
    text = '; the geometric series\n(recip\n   (poly 1 (1 0)   ; constant\n         (-1 1)))\n'
    ast = parse(text)
    assert isinstance(ast, DslAst)
    assert ast.root == parse(GEOMETRIC).root


def test_identical_subforms_share_one_node():
    ast = parse('(add (antider 1 (poly 1 (1 0))) (antider 1 (poly 1 (1 0))))')
    a, b = ast.expr.children
    assert a is b


def test_implicit_with_component_index():
    ast = parse('(implicit 1 (poly 2 (1 0 1) (-1 1 0) (-1 0 2)))')
    assert isinstance(ast, DslAst)
    assert [ast.expr.coeff((p,)) for p in range(5)] == [0, 1, 1, 2, 5]
    assert dsl.format(ast).startswith('(implicit 1 (poly 2')
    assert parse('(implicit (poly 2 (1 0 1) (-1 1 0)))').root.params == (1,)


@pytest.mark.parametrize('path', sorted(glob.glob(os.path.join(DERIVATIONS, '*.iad'))),
                         ids=os.path.basename)
def test_derivation_files_parse_and_reprint(path):
    ast = parse_file(path)
    assert isinstance(ast, DslAst), ast.render()
    again = parse(dsl.format(ast))
    assert isinstance(again, DslAst)
    assert again.root == ast.root


def test_empty_input():
    d = parse('   ; nothing\n')
    assert isinstance(d, Diagnostic)
    assert (d.kind, d.line, d.col) == ('syntax', 1, 1)
    assert d.expected == ('(',)


def test_unclosed_form():
    d = parse('(recip (poly 1 (1 0) (-1 1))')
    assert d.kind == 'syntax'
    assert d.expected == (')',)
    assert 'end of input' in d.message


def test_unknown_form_reports_column_and_choices():
    d = parse('(frob 1)')
    assert (d.kind, d.line, d.col) == ('syntax', 1, 2)
    assert d.expected == FORMS
    assert d.render().startswith("1:2: syntax error: unknown form 'frob' (expected poly, alg")


def test_position_on_later_line():
    d = parse('(add\n  (poly 1 (1 1))\n  (frob))')
    assert (d.line, d.col) == (3, 4)


def test_arity_errors():
    d = parse('(add (poly 1 (1 1)) (poly 2 (1 1 0)))')
    assert (d.kind, d.line, d.col) == ('arity', 1, 1)
    d = parse('(poly 1 (1 1 2))')
    assert (d.kind, d.col) == ('arity', 9)
    d = parse('(antider 0 (poly 1 (1 1)))')
    assert (d.kind, d.col) == ('arity', 10)
    d = parse('(recip (poly 1 (1 0)) (poly 1 (1 0)))')
    assert d.kind == 'arity'
    assert 'takes 1 arguments, got 2' in d.message


def test_precondition_errors():
    d = parse('(recip (poly 1 (1 1)))')
    assert (d.kind, d.line, d.col) == ('precondition', 1, 1)
    d = parse('(inverse (recip (poly 1 (1 0) (-1 1))))')
    assert d.kind == 'precondition'
    d = parse('(alg ((-1) (1 -1)) 2)')
    assert d.kind == 'precondition'


@pytest.mark.parametrize('text, fragment', [
    (')', "unbalanced"),
    ('(poly 1 (1 0)) extra', "after the expression"),
    ('(scale 1/0 (poly 1 (1 1)))', "zero denominator"),
    ('(scale x (poly 1 (1 1)))', "expected a rational"),
    ('()', "empty form"),
    ('(subst (poly 1 (1 1)) (recip (poly 1 (1 0))))', "must be polynomials"),
    ('poly', "unexpected atom"),
])
def test_syntax_errors(text, fragment):
    d = parse(text)
    assert isinstance(d, Diagnostic)
    assert d.kind == 'syntax'
    assert fragment in d.message


def test_nesting_limit():
    d = parse('(' * (MAX_DEPTH + 50))
    assert d.kind == 'syntax'
    assert 'nesting' in d.message
    assert d.col == MAX_DEPTH + 1


@given(st.text(alphabet='()01-/ \n;abcdelmnoprsty', max_size=80))
def test_parse_never_raises_on_near_miss_text(text):
    assert isinstance(parse(text), (DslAst, Diagnostic))


@given(st.binary(max_size=64))
def test_parse_never_raises_on_bytes(raw):
    assert isinstance(parse(raw.decode('utf-8', errors='replace')), (DslAst, Diagnostic))
