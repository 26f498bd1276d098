from __future__ import annotations
from typing import Callable, ParamSpec, Sequence, TypeVar
from pathlib import Path
import functools
import os
import sys

from loguru import logger
from dotenv import load_dotenv
import click

from .automorphic import automorphy_residual, automorphy_screen, normalize_c1
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, LabError
from .innerprod import SpectralSpec, u_grid
from .lfun import (
    MainTermSpec, ShiftedConvolutionSpec, lh_continued, lh_sharp, residue_at_pole,
    spectral_main_term_f,
)
from .maassdata import SpectralBasis, check_weyl, coefficient_screen, hecke_residual, load_basis
from .pairings import PairingCache
from .report import (
    EvalRow, open_output, manifest_path, write_check_table, write_compare_csv,
    write_eval_csv, write_manifest,
)
from .scs import PerronSpec, compare_main_term, compare_sharp
from .types import CompareModes, EvalTargets, Signs, as_point
from .verify import (
    core_identities, data_identities, reproduction_identities, run_identities,
    unfolding_identities,
)

P = ParamSpec('P')
R = TypeVar('R')

EXIT_FAILED = 1
EXIT_DATA = 2
DEFAULT_SMOOTHED_GRID = tuple(float(T) for T in range(20, 201, 20))
DEFAULT_SHARP_GRID = tuple(float(x) for x in range(100, 1001, 100))


def setup_logging(verbose: bool, quiet: bool) -> None:
    if verbose:
        level = 'DEBUG'
    elif quiet:
        level = 'WARNING'
    else:
        level = os.environ.get('SCSLAB_LOG_LEVEL', 'INFO')
    logger.remove()
    logger.add(sys.stderr, level=level)


def lab_command(f: Callable[P, R]) -> Callable[P, R]:
    """Map scslab errors onto the exit-code contract"""
    @functools.wraps(f)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            return f(*args, **kwargs)
        except ConfigError as exc:
            raise click.UsageError(str(exc)) from exc
        except DataError as exc:
            logger.exception(f'data error: {exc}')
            sys.exit(EXIT_DATA)
    return wrapper


def load_screened_basis(config: RunConfig) -> SpectralBasis:
    """The basis under ``config.data_dir``, screened and normalized"""
    basis = load_basis(config.require_data_dir())
    if config.K_max is not None:
        basis = basis.truncated(config.K_max)
    for form in basis:
        automorphy_screen(form)
    return SpectralBasis.from_iter(normalize_c1(form) for form in basis)


def parse_point(text: str) -> complex:
    """``2``, ``0.5+14i`` or ``0.5+14j``"""
    try:
        return as_point(complex(text.replace(' ', '').replace('i', 'j')))
    except ValueError as exc:
        raise click.BadParameter(f'not a number: {text!r}') from exc


def _pair_spec(config: RunConfig, basis: SpectralBasis, phi1: int, phi2: int) -> ShiftedConvolutionSpec:
    try:
        Phi1, Phi2 = basis[phi1], basis[phi2]
    except IndexError as exc:
        raise click.BadParameter(str(exc)) from exc
    return ShiftedConvolutionSpec(h=config.h, Phi1=Phi1, Phi2=Phi2, eps=config.eps, theta=config.theta)


def _echo_config(config: RunConfig, **extra) -> dict:
    return {'config': config, **extra}


@click.group()
@click.option('--data', 'data_dir', type=click.Path(exists=True, file_okay=False, path_type=Path),
              help='Directory of maass-form v1 files (default: $SCSLAB_DATA_DIR, else the bundled forms).')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Config file with [run] and per-tolerance sections.')
@click.option('--h', type=int, help='The shift h.')
@click.option('--eps', type=float, help='The ε of the smoothed sums.')
@click.option('--out', 'output', type=click.Path(dir_okay=False, path_type=Path),
              help='Output file (default: stdout); a manifest.json is written next to it.')
@click.option('--k-max', 'K_max', type=int, help='Use only the first K forms of the basis.')
@click.option('--tighten', type=float, help='Divide every tolerance by this factor.')
@click.option('-v', '--verbose', is_flag=True, help='Debug logging.')
@click.option('-q', '--quiet', is_flag=True, help='Warnings and errors only.')
@click.pass_context
def cli(
    ctx: click.Context,
    data_dir: Path|None,
    config_path: Path|None,
    h: int|None,
    eps: float|None,
    output: Path|None,
    K_max: int|None,
    tighten: float|None,
    verbose: bool,
    quiet: bool,
) -> None:
    setup_logging(verbose, quiet)
    try:
        ctx.obj = load_config(
            config_path, tighten, data_dir=data_dir, h=h, eps=eps, output=output, K_max=K_max,
        )
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


@cli.command()
@click.option('--full', is_flag=True, help='Also run the unfolding and reproduction checks (slow).')
@click.pass_obj
@lab_command
def verify(config: RunConfig, full: bool) -> None:
    """Run the identity suites and print a pass/fail table"""
    basis = load_screened_basis(config)
    identities = core_identities() + data_identities(basis, config.h)
    if full:
        identities += unfolding_identities(basis, cache_dir=config.cache_dir)
        identities += reproduction_identities(basis, config.h, cache_dir=config.cache_dir)
    results = run_identities(identities, config.tol)
    with open_output(config.output) as out:
        write_check_table(results, out)
    write_manifest(manifest_path(config.output), **_echo_config(config, command='verify', results=results))
    if not all(r.passed for r in results):
        failed = [r.name for r in results if not r.passed]
        logger.error(f'{len(failed)} identities failed: {", ".join(failed)}')
        sys.exit(EXIT_FAILED)


def _lazy_pairings(cache: PairingCache, basis: SpectralBasis, K: int|None):
    memo: dict[str, dict] = {}

    def get() -> tuple[dict, dict]:
        if not memo:
            memo['triples'] = cache.triples_sync(basis, K)
            memo['eisen'] = cache.eisen_sync(u_grid(SpectralSpec()))
        return memo['triples'], memo['eisen']

    return get


def _eval_rows(what: str, spec: ShiftedConvolutionSpec, basis: SpectralBasis, points: Sequence[str],
               cache: PairingCache, K: int|None) -> list[EvalRow]:
    rows: list[EvalRow] = []
    if what == 'residues':
        triples = cache.triples_sync(basis, K)
        for k in sorted(triples):
            for sign in Signs:
                try:
                    res = residue_at_pole(spec, k, sign, basis, triples)
                    rows.append(EvalRow(f'k={k} {sign}', res.value, res.err))
                except LabError as exc:
                    rows.append(EvalRow(f'k={k} {sign}', None, None, str(exc)))
        return rows
    if what == 'f':
        Ts: dict[str, float|None] = {}
        for p in points:
            try:
                Ts[p] = float(p)
            except ValueError:
                Ts[p] = None
        valid = sorted({T for T in Ts.values() if T is not None and T > 1})
        f: dict[float, float] = {}
        tail = 0.
        if valid:
            triples = cache.triples_sync(basis, K)
            main = spectral_main_term_f(spec, MainTermSpec(tuple(valid), K), basis, triples)
            f, tail = dict(main.pairs()), main.tail
        for p in points:
            T = Ts[p]
            if T is None:
                rows.append(EvalRow(p, None, None, f'not a number: {p!r}'))
            elif T in f:
                rows.append(EvalRow(p, complex(f[T]), tail))
            else:
                rows.append(EvalRow(p, None, None, 'T must exceed 1'))
        return rows
    pairings = _lazy_pairings(cache, basis, K)
    for p in points:
        try:
            s = parse_point(p)
            if what == 'lh_sharp':
                res = lh_sharp(spec, s)
            elif s.real > 1.1:
                res = lh_continued(spec, s)
            else:
                triples, eisen = pairings()
                res = lh_continued(spec, s, basis, triples=triples, eisen=eisen)
            rows.append(EvalRow(p, res.value, res.err))
        except (LabError, click.BadParameter) as exc:
            if isinstance(exc, DataError):
                raise
            logger.warning(f'{what} at {p}: {exc}')
            rows.append(EvalRow(p, None, None, str(exc)))
    return rows


@cli.command('eval')
@click.argument('what', type=click.Choice(EvalTargets))
@click.argument('points', nargs=-1)
@click.option('--phi1', default=1, show_default=True, help='Basis index of Φ₁.')
@click.option('--phi2', default=1, show_default=True, help='Basis index of Φ₂.')
@click.pass_obj
@lab_command
def eval_(config: RunConfig, what: str, points: tuple[str, ...], phi1: int, phi2: int) -> None:
    """Evaluate L_h, L_h^#, the residues or f(T) and write CSV rows

    POINTS are values of s (``0.5+14i``) for lh and lh_sharp, heights T for f,
    and ignored for residues (which use every k up to --k-max).
    """
    if what != 'residues' and not points:
        raise click.UsageError(f'{what} needs at least one point')
    basis = load_screened_basis(config)
    spec = _pair_spec(config, basis, phi1, phi2)
    cache = PairingCache(spec.Phi1, spec.Phi2, directory=config.cache_dir)
    rows = _eval_rows(what, spec, basis, points, cache, config.K_max)
    with open_output(config.output) as out:
        write_eval_csv(rows, out)
    write_manifest(manifest_path(config.output), **_echo_config(config, command='eval', what=what, rows=rows))
    if rows and not any(r.ok for r in rows):
        logger.error(f'every {what} evaluation failed')
        sys.exit(EXIT_FAILED)


@cli.command()
@click.argument('mode', type=click.Choice(CompareModes))
@click.argument('grid', nargs=-1, type=float)
@click.option('--phi1', default=1, show_default=True, help='Basis index of Φ₁.')
@click.option('--phi2', default=1, show_default=True, help='Basis index of Φ₂.')
@click.option('--perron/--no-perron', default=False, help='Add the Perron reproduction of every row.')
@click.option('--snap/--no-snap', default=True, help='Move smoothed heights into spectral gaps.')
@click.pass_obj
@lab_command
def compare(config: RunConfig, mode: str, grid: tuple[float, ...], phi1: int, phi2: int,
            perron: bool, snap: bool) -> None:
    """Direct sums against the spectral main term, with a fitted-exponent footer

    GRID defaults to T = 20, 40, ..., 200 (smoothed) or x = 100, 200, ..., 1000 (sharp).
    """
    basis = load_screened_basis(config)
    spec = _pair_spec(config, basis, phi1, phi2)
    if mode == 'smoothed':
        cache = PairingCache(spec.Phi1, spec.Phi2, directory=config.cache_dir)
        triples = cache.triples_sync(basis, config.K_max)
        results = compare_main_term(
            spec, list(grid or DEFAULT_SMOOTHED_GRID), basis, triples, config.K_max, snap=snap,
            pspec=PerronSpec.smoothed(spec) if perron else None,
        )
    else:
        results = compare_sharp(spec, list(grid or DEFAULT_SHARP_GRID), with_perron=perron)
    with open_output(config.output) as out:
        write_compare_csv(results, out, mode)
    write_manifest(manifest_path(config.output), **_echo_config(config, command='compare', mode=mode, results=results))


@cli.command()
@click.pass_obj
@lab_command
def screen(config: RunConfig) -> None:
    """Screen every data file: automorphy, Hecke closure, coefficient envelope"""
    basis = load_basis(config.require_data_dir())
    failed = 0
    with open_output(config.output) as out:
        out.write(f'{"form":<20}  {"automorphy":>11}  {"hecke":>9}  {"envelope":>8}  result\n')
        for form in basis:
            res = automorphy_residual(form)
            hecke = hecke_residual(form)
            bad = coefficient_screen(form)
            ok = res < 1e-5 and hecke < config.tol.specfun
            failed += not ok
            out.write(f'{form.label():<20}  {res:>11.3e}  {hecke:>9.1e}  {len(bad):>8d}  {"PASS" if ok else "FAIL"}\n')
    if failed:
        logger.error(f'{failed} of {basis.count} forms failed the screen')
        sys.exit(EXIT_DATA)
    logger.success(f'all {basis.count} forms passed the screen')


@cli.command()
@click.pass_obj
@lab_command
def info(config: RunConfig) -> None:
    """List the loaded basis and compare its size with the Weyl law"""
    basis = load_basis(config.require_data_dir())
    with open_output(config.output) as out:
        for k, form in enumerate(basis, start=1):
            extra = []
            if form.l1ad is not None:
                extra.append(f'L(1,Ad)={form.l1ad:.10g}')
            if form.c1 is not None:
                extra.append(f'c1={form.c1:.10g}')
            out.write(f'{k:>4}  r={form.r:.10f}  {form.parity:<4}  N={form.max_index:<6}  {"  ".join(extra)}\n')
        if basis.count:
            T = basis.max_r()
            count, weyl, slack = check_weyl(basis, T)
            status = 'ok' if abs(count - weyl) <= slack else 'incomplete?'
            out.write(f'N({T:.4f}) = {count}, Weyl law {weyl:.2f} ± {slack:.2f} ({status})\n')


if __name__ == '__main__':
    load_dotenv()
    cli()
