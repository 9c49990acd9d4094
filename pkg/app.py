import sys
import json
import logging
from functools import wraps
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import click  # type: ignore

from balls import Ball, Tolerance, decimal_upper
from constants import ConstantResult, derivation_digest, list_constants, lookup
from dsl import Diagnostic, DslAst, parse
from errors import IanError
from evaluation import eval_at
from majorant import majorant_of
from series_core import SeriesExpr, fmt_rat
from settings import LOG_LEVEL, get_settings
from sparse_poly import TruncatedSeries, indices_up_to
from suites import executor, run_suite
from weierstrass import wdiv, wprep

logger = logging.getLogger(__name__)

JSON_KEYS = ('kind', 'name', 'mid', 'rad', 'digits', 'derivation_hash')

EXIT_DIAGNOSTIC = 1
EXIT_PRECONDITION = 2
EXIT_VERIFY = 3


def emit_json(result: dict) -> str:
    """One JSON object; the schema keys first in fixed order, extras after."""
    ordered = {k: result.get(k) for k in JSON_KEYS}
    ordered.update((k, v) for k, v in result.items() if k not in ordered)
    return json.dumps(ordered, ensure_ascii=False)


def rad_text(ball: Ball, digits: int) -> str:
    if ball.rad == 0:
        return "0"
    eps = Tolerance.from_digits(digits).eps
    return "≤" + decimal_upper(eps if ball.rad <= eps else ball.rad, 1)


def ball_text(ball: Ball, digits: int) -> str:
    return f"{ball.format_mid(digits)} ± {rad_text(ball, digits)}"


def coeff_text(c, digits: int) -> str:
    if isinstance(c, Ball):
        return ball_text(c, digits)
    return fmt_rat(c)


def parse_point(raw: Optional[str], arity: int) -> Tuple[Fraction, ...]:
    if raw is None or raw.strip() == '':
        return (Fraction(0),) * arity
    try:
        point = tuple(Fraction(v.strip()) for v in raw.split(','))
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"{raw!r} is not a comma-separated list of rationals") from e
    if len(point) != arity:
        raise click.BadParameter(f"point has {len(point)} entries, the series has arity {arity}")
    return point


def parse_orders(raw: Optional[str]) -> Optional[Tuple[int, int]]:
    if raw is None:
        return None
    try:
        a, b = (int(v) for v in raw.split(','))
    except ValueError as e:
        raise click.BadParameter(f"--orders expects A,B, got {raw!r}") from e
    if a < 0 or b < 0:
        raise click.BadParameter("--orders must be non-negative")
    return a, b


def load_source(ctx: click.Context, source: Optional[str], inline: Optional[str]) -> Tuple[str, DslAst]:
    """Parse a derivation file or an inline -e expression; diagnostics exit with status 1."""
    if (source is None) == (inline is None):
        raise click.UsageError("give exactly one of a derivation file or -e EXPR")
    if inline is not None:
        label, text = '<inline>', inline
    else:
        label = source
        try:
            with open(source, 'r', encoding='utf-8', errors='replace') as f:
                text = f.read()
        except OSError as e:
            raise click.BadParameter(f"cannot read {source}: {e}") from e
    parsed = parse(text)
    if isinstance(parsed, Diagnostic):
        click.echo(f"❌ {label}:{parsed.render()}", err=True)
        ctx.exit(EXIT_DIAGNOSTIC)
    return label, parsed


def truncated_rows(s: TruncatedSeries, digits: int) -> List[list]:
    return [[list(alpha), coeff_text(c, digits)] for alpha, c in s.entries()]


def guarded(fn):
    """Precondition failures from the engine become exit status 2."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return fn(*args, **kwargs)
        except IanError as e:
            click.echo(f"❌ {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_PRECONDITION)
    return wrapper


def digits_option(fn):
    return click.option('--digits', type=click.IntRange(min=1), default=None,
                        help='Decimal digits (default IAN_DEFAULT_DIGITS).')(fn)


def resolve_digits(digits: Optional[int]) -> int:
    return digits if digits is not None else get_settings().default_digits


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Debug logging on stderr.')
def cli(verbose: bool):
    """Certified integrated algebraic power series."""
    logging.basicConfig(level=logging.DEBUG if verbose else LOG_LEVEL, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s', force=True)


@cli.command('eval')
@click.argument('source', required=False)
@click.option('-e', 'inline', help='Inline derivation instead of a file.')
@click.option('--at', 'at', default=None, help='Comma-separated rational point (default 0).')
@digits_option
@click.option('--json', 'as_json', is_flag=True, help='Machine-readable output.')
@guarded
def eval_cmd(source, inline, at, digits, as_json):
    """Evaluate a derivation at a rational point."""
    ctx = click.get_current_context()
    label, ast = load_source(ctx, source, inline)
    expr = ast.expr
    digits = resolve_digits(digits)
    point = parse_point(at, expr.arity)
    ball = eval_at(expr, point, Tolerance.from_digits(digits))
    if as_json:
        click.echo(emit_json({
            'kind': 'ball', 'name': label, 'mid': ball.format_mid(digits), 'rad': rad_text(ball, digits),
            'digits': digits,
            'derivation_hash': derivation_digest(expr.sexpr(), ' '.join(fmt_rat(x) for x in point)),
        }))
    else:
        click.echo(ball_text(ball, digits))


@cli.command('coeffs')
@click.argument('source', required=False)
@click.option('-e', 'inline', help='Inline derivation instead of a file.')
@click.option('--order', type=click.IntRange(min=0), default=8, show_default=True)
@digits_option
@click.option('--json', 'as_json', is_flag=True)
@guarded
def coeffs_cmd(source, inline, order, digits, as_json):
    """Coefficient table up to a total degree."""
    ctx = click.get_current_context()
    label, ast = load_source(ctx, source, inline)
    expr = ast.expr
    digits = resolve_digits(digits)
    tol = Tolerance.from_digits(digits).eps
    rows = [(alpha, expr.coeff(alpha, tol)) for alpha in indices_up_to(expr.arity, order)]
    if as_json:
        click.echo(emit_json({
            'kind': 'coeffs', 'name': label, 'digits': digits, 'derivation_hash': expr.digest(),
            'order': order, 'coeffs': [[list(a), coeff_text(c, digits)] for a, c in rows],
        }))
        return
    for alpha, c in rows:
        click.echo(f"{','.join(map(str, alpha))}\t{coeff_text(c, digits)}")


def _const_json(res: ConstantResult) -> str:
    return emit_json({
        'kind': 'ball', 'name': res.name, 'mid': res.ball.format_mid(res.digits),
        'rad': rad_text(res.ball, res.digits), 'digits': res.digits, 'derivation_hash': res.derivation_hash,
    })


@cli.command('const')
@click.argument('names', nargs=-1, required=True)
@digits_option
@click.option('--json', 'as_json', is_flag=True)
@guarded
def const_cmd(names, digits, as_json):
    """Certified constants from the registry (see `list`)."""
    ctx = click.get_current_context()
    digits = resolve_digits(digits)
    futures = [executor.submit(lookup, name, digits) for name in names]
    results = []
    for name, fut in zip(names, futures):
        try:
            results.append(fut.result())
        except KeyError as e:
            click.echo(f"❌ {e.args[0]}", err=True)
            ctx.exit(EXIT_DIAGNOSTIC)
    for res in results:
        click.echo(_const_json(res) if as_json else f"{res.name} = {ball_text(res.ball, digits)}")


def _prep_payload(label: str, expr: SeriesExpr, d: int, orders, P, u, digits: int) -> dict:
    return {
        'kind': 'prep', 'name': label, 'digits': digits,
        'derivation_hash': derivation_digest(expr.sexpr(), f"d={d}", f"orders={orders}"),
        'P': [truncated_rows(a, digits) for a in P.coeffs], 'u': truncated_rows(u, digits),
    }


@cli.command('wprep')
@click.argument('source', required=False)
@click.option('-e', 'inline', help='Inline derivation instead of a file.')
@click.option('--d', 'd', type=click.IntRange(min=0), default=None, help='Regularity order (detected if absent).')
@click.option('--orders', default=None, help='Window orders A,B: |alpha\'| <= A, alpha_n <= B.')
@digits_option
@click.option('--json', 'as_json', is_flag=True)
@guarded
def wprep_cmd(source, inline, d, orders, digits, as_json):
    """Weierstrass preparation f = P u on a finite window."""
    ctx = click.get_current_context()
    label, ast = load_source(ctx, source, inline)
    digits = resolve_digits(digits)
    P, u = wprep(ast.expr, d, parse_orders(orders))
    if as_json:
        click.echo(emit_json(_prep_payload(label, ast.expr, P.degree, orders, P, u, digits)))
        return
    click.echo(f"P: monic of degree {P.degree} in X_{P.arity}")
    for k, a in enumerate(P.coeffs):
        terms = ', '.join(f"{list(alpha)}: {coeff_text(c, digits)}" for alpha, c in sorted(a.items()))
        click.echo(f"  a_{k}: {terms or '0'}")
    click.echo(f"u: {len(u.coeffs)} nonzero coefficients, u(0) = {coeff_text(u.constant_term(), digits)}")


@cli.command('wdiv')
@click.argument('f_source')
@click.argument('g_source')
@click.option('--d', 'd', type=click.IntRange(min=0), default=None)
@click.option('--orders', default=None)
@digits_option
@click.option('--json', 'as_json', is_flag=True)
@guarded
def wdiv_cmd(f_source, g_source, d, orders, digits, as_json):
    """Weierstrass division g = f h + r on a finite window."""
    ctx = click.get_current_context()
    f_label, f_ast = load_source(ctx, f_source, None)
    g_label, g_ast = load_source(ctx, g_source, None)
    digits = resolve_digits(digits)
    h, r = wdiv(f_ast.expr, g_ast.expr, d, parse_orders(orders))
    if as_json:
        click.echo(emit_json({
            'kind': 'prep', 'name': f"{g_label} / {f_label}", 'digits': digits,
            'derivation_hash': derivation_digest(f_ast.expr.sexpr(), g_ast.expr.sexpr(), f"d={d}", f"orders={orders}"),
            'h': truncated_rows(h, digits), 'r': [truncated_rows(a, digits) for a in r.coeffs],
        }))
        return
    click.echo(f"h: {len(h.coeffs)} nonzero coefficients")
    for k, a in enumerate(r.coeffs):
        terms = ', '.join(f"{list(alpha)}: {coeff_text(c, digits)}" for alpha, c in sorted(a.items()))
        click.echo(f"  r_{k}: {terms or '0'}")


@cli.command('majorant')
@click.argument('source', required=False)
@click.option('-e', 'inline', help='Inline derivation instead of a file.')
@click.option('--need', default=None, help='Comma-separated radius hints, one per variable.')
@click.option('--json', 'as_json', is_flag=True)
@guarded
def majorant_cmd(source, inline, need, as_json):
    """Certified geometric majorant (M, r)."""
    ctx = click.get_current_context()
    label, ast = load_source(ctx, source, inline)
    expr = ast.expr
    hints = parse_point(need, expr.arity) if need else None
    m = majorant_of(expr, hints)
    if as_json:
        click.echo(emit_json({
            'kind': 'majorant', 'name': label, 'derivation_hash': expr.digest(),
            'M': fmt_rat(m.M), 'radii': [fmt_rat(r) for r in m.radii],
        }))
        return
    click.echo(f"M ≤ {decimal_upper(m.M)}")
    for i, r in enumerate(m.radii, 1):
        click.echo(f"r_{i} = {fmt_rat(r)} (≈ {float(r):.6g})")


@cli.command('verify')
@click.option('--suite', 'suite', default='paper', show_default=True, help='Manifest name or path.')
@click.option('--case', 'only', multiple=True, help='Run only the named cases.')
def verify_cmd(suite, only):
    """Run a golden or property suite; exit 3 when a case fails."""
    ctx = click.get_current_context()
    try:
        results = run_suite(suite, only=only or None)
    except (FileNotFoundError, ValueError) as e:
        click.echo(f"❌ {e}", err=True)
        ctx.exit(EXIT_DIAGNOSTIC)
    for res in results:
        click.echo(res.line())
    failed = [r for r in results if not r.ok]
    click.echo(f"{len(results) - len(failed)}/{len(results)} cases passed")
    if failed or not results:
        ctx.exit(EXIT_VERIFY)


@cli.command('list')
def list_cmd():
    """Constants known to `const`."""
    for name, doc in list_constants():
        click.echo(f"{name:12} {doc}")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the exit status instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        rv = cli.main(args=args, prog_name='ian', standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_DIAGNOSTIC
    except click.ClickException as e:
        e.show()
        return EXIT_DIAGNOSTIC
    return rv if isinstance(rv, int) else 0


if __name__ == '__main__':
    sys.exit(run_cli())
