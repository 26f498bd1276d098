"""CSV tables, text reports and run manifests

Numbers are written with 15 significant digits so that reruns with the same
configuration produce identical bytes.
"""
from __future__ import annotations
from typing import IO, Any, Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
import contextlib
import csv
import math
import sys

from loguru import logger

from .errors import DomainError
from .scs import SCSResult, exponent_fit
from .serialization import DataclassSerialize, dumps
from .types import CompareMode

__all__ = (
    'COMPARE_HEADER', 'EVAL_HEADER', 'EvalRow', 'CheckResult', 'fmt', 'open_output',
    'compare_footer', 'write_compare_csv', 'write_eval_csv', 'write_check_table',
    'write_manifest', 'manifest_path',
)

COMPARE_HEADER = ('T', 'direct', 'main', 'remainder', 'budget_tail', 'budget_perron')
EVAL_HEADER = ('input', 'value_re', 'value_im', 'err', 'status')


def fmt(x: float|None) -> str:
    if x is None:
        return ''
    return f'{x:.15g}'


@dataclass(frozen=True)
class EvalRow(DataclassSerialize):
    """One evaluated point; *status* is ``ok`` or the error message"""
    input: str
    value: complex|None
    err: float|None
    status: str = 'ok'

    @property
    def ok(self) -> bool:
        return self.status == 'ok'

    def cells(self) -> list[str]:
        if self.value is None:
            return [self.input, '', '', fmt(self.err), self.status]
        return [self.input, fmt(self.value.real), fmt(self.value.imag), fmt(self.err), self.status]


@dataclass(frozen=True)
class CheckResult(DataclassSerialize):
    """Outcome of one identity check"""
    name: str
    residual: float
    tol: float
    detail: str = ''

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tol


@contextlib.contextmanager
def open_output(path: Path|None) -> Iterator[IO[str]]:
    """*path* opened for writing, or stdout when ``None``"""
    if path is None:
        yield sys.stdout
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as f:
        yield f
    logger.info(f'wrote {path}')


def compare_footer(results: Sequence[SCSResult], mode: CompareMode) -> list[str]:
    """Fitted exponent of |remainder| against the cutoff and the constant of the envelope
    """
    lines = [f'mode={mode}']
    xs = [r.cutoff for r in results]
    rem = [r.remainder for r in results]
    try:
        alpha, C = exponent_fit(xs, rem)
        lines.append(f'exponent_fit alpha={fmt(alpha)} C={fmt(C)}')
    except DomainError:
        lines.append('exponent_fit unavailable')
    ratios = [abs(r.remainder) / r.budgets['envelope'] for r in results if r.budgets['envelope'] > 0]
    if ratios:
        lines.append(f'envelope_constant C={fmt(max(ratios))}')
    unsnapped = [fmt(r.cutoff) for r in results if not r.snapped]
    if unsnapped:
        lines.append(f'unsnapped cutoffs: {" ".join(unsnapped)}')
    return lines


def write_compare_csv(results: Sequence[SCSResult], out: IO[str], mode: CompareMode) -> None:
    w = csv.writer(out, lineterminator='\n')
    w.writerow(COMPARE_HEADER)
    for r in results:
        w.writerow([
            fmt(r.cutoff), fmt(r.direct_sum), fmt(r.main_term), fmt(r.remainder),
            fmt(r.budgets['tail']), fmt(r.budgets['envelope']),
        ])
    for line in compare_footer(results, mode):
        out.write(f'# {line}\n')


def write_eval_csv(rows: Iterable[EvalRow], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator='\n')
    w.writerow(EVAL_HEADER)
    for row in rows:
        w.writerow(row.cells())


def write_check_table(results: Sequence[CheckResult], out: IO[str]) -> None:
    """Plain-text pass/fail table"""
    width = max([len(r.name) for r in results] + [8])
    out.write(f'{"identity":<{width}}  {"residual":>12}  {"tol":>9}  result\n')
    for r in results:
        status = 'PASS' if r.passed else 'FAIL'
        line = f'{r.name:<{width}}  {r.residual:>12.3e}  {r.tol:>9.1e}  {status}'
        if r.detail and not r.passed:
            line = f'{line}  {r.detail}'
        out.write(line + '\n')
    failed = sum(not r.passed for r in results)
    out.write(f'{len(results) - failed} passed, {failed} failed\n')


def manifest_path(output: Path|None) -> Path|None:
    if output is None:
        return None
    return Path(output).with_name('manifest.json')


def write_manifest(path: Path|None, **content: Any) -> None:
    """JSON manifest (config echo and residuals) next to a CSV output"""
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(content, indent=2, sort_keys=True) + '\n')
    logger.debug(f'wrote manifest {path}')
