"""Maass form spectral data: parsing, Hecke eigenvalues and the spectral basis.

Files are line oriented (``maass-form v1``)::

    maass-form v1
    level 1
    parity even
    r 13.779751351890
    l1ad 1.1476866711
    coeff 2 1.549304477941
    coeff 3 0.246899772454
    ...

``l1ad`` (L(1, Ad φ)) and ``c1`` are optional. Blank lines and lines starting
with ``#`` are ignored.
"""
from __future__ import annotations
from typing import Iterator, Iterable, Any, Self
from dataclasses import dataclass, field, replace
from pathlib import Path
import hashlib
import math
import threading

import numpy as np
from loguru import logger

from .errors import (
    DataError, DomainError, MaassParseError, MissingPrimeError, BasisCoverageError,
    UnnormalizedFormError,
)
from .gamma import log_gamma
from .serialization import DataclassSerialize
from .types import Parity, Parities, THETA
from .zeta import divisor_sigma, zeta

__all__ = (
    'MaassForm', 'SpectralBasis', 'EisensteinCoefficient', 'parse_maass_file',
    'serialize_maass_file', 'load_maass_file', 'load_basis', 'hecke_coefficient',
    'fourier_coefficient', 'coefficient_screen', 'weyl_count', 'check_weyl',
    'eisenstein_coefficient', 'FILE_HEADER', 'FILE_SUFFIX',
)

FILE_HEADER = 'maass-form v1'
FILE_SUFFIX = '.maass'
KNOWN_KEYS = ('level', 'parity', 'r', 'l1ad', 'c1', 'coeff')
SCREEN_SLACK = 0.05
DEDUP_RADIUS = 1e-9


def _factorize(n: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _num_divisors(n: int) -> int:
    return math.prod(e + 1 for _, e in _factorize(n))


@dataclass(eq=False)
class MaassForm(DataclassSerialize):
    """A level one Hecke-Maass cusp form given by its Fourier data

    Attributes:
        r: Spectral parameter, eigenvalue 1/4 + r²
        parity: ``'even'`` or ``'odd'``
        coeffs: Hecke eigenvalues λ(n) as read from the data (λ(1) = 1)
        c1: First Fourier coefficient, ``None`` until normalized
        l1ad: L(1, Ad φ) if supplied
        source: Provenance string (usually the file path)
    """
    r: float
    parity: Parity
    coeffs: dict[int, float]
    c1: complex|None = None
    l1ad: float|None = None
    source: str = ''
    level: int = 1
    _cache: dict[int, float] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.parity not in Parities:
            raise DomainError(f'invalid parity {self.parity!r}')
        if not self.r > 0:
            raise DomainError(f'spectral parameter must be positive, got {self.r}')
        self.coeffs = {int(k): float(v) for k, v in self.coeffs.items()}
        self.coeffs.setdefault(1, 1.)
        self._cache[1] = 1.

    def _iter_ser_fields(self) -> Iterator[str]:
        yield from ('r', 'parity', 'coeffs', 'c1', 'l1ad', 'source', 'level')

    def _serialize(self) -> dict[str, Any]:
        d = super()._serialize()
        d['coeffs'] = {str(k): v for k, v in self.coeffs.items()}
        return d

    @classmethod
    def _get_deserialize_kwargs(cls, data: dict) -> dict[str, Any]:
        data = dict(data)
        data['coeffs'] = {int(k): v for k, v in data['coeffs'].items()}
        return data

    @property
    def eigenvalue(self) -> float:
        return 0.25 + self.r ** 2

    @property
    def sign(self) -> int:
        """C(-n) = sign·C(n)"""
        return 1 if self.parity == 'even' else -1

    @property
    def normalized(self) -> bool:
        return self.c1 is not None

    @property
    def max_index(self) -> int:
        """Largest N such that every prime p <= N has data"""
        n = 1
        while True:
            nxt = n + 1
            for p, _ in _factorize(nxt):
                if p not in self.coeffs:
                    return n
            n = nxt

    @property
    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f'{self.r!r}|{self.parity}|{self.c1!r}'.encode())
        for k in sorted(self.coeffs):
            h.update(f'|{k}:{self.coeffs[k]!r}'.encode())
        return h.hexdigest()[:16]

    def with_c1(self, c1: complex) -> MaassForm:
        return replace(self, c1=complex(c1))

    def label(self) -> str:
        return f'{self.parity}:{self.r:.6f}'


def hecke_coefficient(form: MaassForm, n: int) -> float:
    """λ(n) from the prime values by multiplicativity and the Hecke recursion

    ``λ(p^{j+1}) = λ(p)λ(p^j) - λ(p^{j-1})``. Results are cached on the form.

    Raises:
        MissingPrimeError: if λ(p) is missing for a prime ``p | n``
    """
    n = int(n)
    if n < 1:
        raise DomainError(f'Hecke eigenvalues are indexed by n >= 1, got {n}')
    val = form._cache.get(n)
    if val is not None:
        return val
    total = 1.
    for p, e in _factorize(n):
        lp = form.coeffs.get(p)
        if lp is None:
            raise MissingPrimeError(p, form.source)
        prev, cur = 1., lp
        for _ in range(e - 1):
            prev, cur = cur, lp * cur - prev
        total *= cur
    with form._lock:
        form._cache.setdefault(n, total)
    return form._cache[n]


def hecke_array(form: MaassForm, n_max: int) -> np.ndarray:
    """λ(1), ..., λ(n_max) as an array indexed from 0"""
    return np.array([hecke_coefficient(form, n) for n in range(1, n_max + 1)])


def fourier_coefficient(form: MaassForm, n: int) -> complex:
    """C(n) = c1·λ(|n|), with C(-n) = ±C(n) according to parity
    """
    if n == 0:
        raise DomainError('cusp forms have no constant term')
    if form.c1 is None:
        raise UnnormalizedFormError(f'form {form.label()} has no c1')
    val = form.c1 * hecke_coefficient(form, abs(n))
    if n < 0:
        val *= form.sign
    return val


def coefficient_screen(form: MaassForm, slack: float = SCREEN_SLACK) -> list[int]:
    """Indices with ``|λ(n)| > d(n)·n^θ·(1 + slack)``, checked on the raw data
    """
    bad = []
    for n, lam in sorted(form.coeffs.items()):
        bound = _num_divisors(n) * n ** THETA * (1 + slack)
        if abs(lam) > bound:
            bad.append(n)
    return bad


def hecke_residual(form: MaassForm) -> float:
    """Max deviation between stored composite λ(n) and the multiplicative value"""
    worst = 0.
    for n, lam in form.coeffs.items():
        if n == 1 or len(_factorize(n)) == 1 and _factorize(n)[0][1] == 1:
            continue
        try:
            worst = max(worst, abs(lam - hecke_coefficient(form, n)))
        except MissingPrimeError:
            continue
    return worst


def _parse_float(token: str, lineno: int, fieldname: str, path) -> float:
    try:
        val = float(token)
    except ValueError:
        raise MaassParseError(
            f'non-numeric value {token!r} for {fieldname!r}', lineno, fieldname, path,
        ) from None
    if not math.isfinite(val):
        raise MaassParseError(
            f'non-finite value {token!r} for {fieldname!r}', lineno, fieldname, path,
        )
    return val


def parse_maass_file(text: bytes|str, path: Path|str|None = None) -> MaassForm:
    """Parse and validate a ``maass-form v1`` document

    Raises:
        MaassParseError: with the offending line number and field name
    """
    if isinstance(text, bytes):
        try:
            text = text.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise MaassParseError(f'not valid UTF-8: {exc}', path=path) from None
    lines = text.splitlines()
    if not lines or lines[0].strip() != FILE_HEADER:
        raise MaassParseError(f'first line must be {FILE_HEADER!r}', 1, 'header', path)
    seen: dict[str, int] = {}
    values: dict[str, Any] = {}
    coeffs: dict[int, float] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        key, *args = line.split()
        if key not in KNOWN_KEYS:
            raise MaassParseError(f'unknown key {key!r}', lineno, key, path)
        if key == 'coeff':
            if len(args) != 2:
                raise MaassParseError('expected "coeff <n> <lambda_n>"', lineno, key, path)
            try:
                n = int(args[0])
            except ValueError:
                raise MaassParseError(
                    f'non-numeric coefficient index {args[0]!r}', lineno, key, path,
                ) from None
            if n < 1:
                raise MaassParseError(f'coefficient index must be >= 1, got {n}', lineno, key, path)
            if n in coeffs:
                raise MaassParseError(f'duplicate coefficient index {n}', lineno, key, path)
            coeffs[n] = _parse_float(args[1], lineno, key, path)
            continue
        if key in seen:
            raise MaassParseError(
                f'duplicate key {key!r} (first on line {seen[key]})', lineno, key, path,
            )
        seen[key] = lineno
        if key == 'c1':
            if len(args) not in (1, 2):
                raise MaassParseError('expected "c1 <re> [<im>]"', lineno, key, path)
            parts = [_parse_float(a, lineno, key, path) for a in args]
            values[key] = complex(parts[0], parts[1] if len(parts) == 2 else 0.)
            continue
        if len(args) != 1:
            raise MaassParseError(f'expected exactly one value for {key!r}', lineno, key, path)
        if key == 'parity':
            if args[0] not in Parities:
                raise MaassParseError(
                    f'invalid parity token {args[0]!r}; expected one of {Parities}',
                    lineno, key, path,
                )
            values[key] = args[0]
        elif key == 'level':
            level = _parse_float(args[0], lineno, key, path)
            if level != 1:
                raise MaassParseError(f'only level 1 is supported, got {args[0]}', lineno, key, path)
            values[key] = 1
        else:
            values[key] = _parse_float(args[0], lineno, key, path)
    for required in ('r', 'parity'):
        if required not in values:
            raise MaassParseError(f'missing required key {required!r}', field=required, path=path)
    if values['r'] <= 0:
        raise MaassParseError('r must be positive', seen['r'], 'r', path)
    if 1 in coeffs and coeffs[1] != 1:
        raise MaassParseError(f'lambda(1) must equal 1, got {coeffs[1]}', field='coeff', path=path)
    form = MaassForm(
        r=values['r'],
        parity=values['parity'],
        coeffs=coeffs,
        c1=values.get('c1'),
        l1ad=values.get('l1ad'),
        source=str(path) if path is not None else '',
    )
    if form.c1 is None:
        logger.debug(f'{form.label()} has no c1; it will be normalized before use')
    return form


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_maass_file(form: MaassForm) -> str:
    lines = [FILE_HEADER, f'level {form.level}', f'parity {form.parity}', f'r {_fmt(form.r)}']
    if form.l1ad is not None:
        lines.append(f'l1ad {_fmt(form.l1ad)}')
    if form.c1 is not None:
        lines.append(f'c1 {_fmt(form.c1.real)} {_fmt(form.c1.imag)}')
    for n in sorted(form.coeffs):
        if n == 1:
            continue
        lines.append(f'coeff {n} {_fmt(form.coeffs[n])}')
    return '\n'.join(lines) + '\n'


def load_maass_file(path: Path) -> MaassForm:
    path = Path(path)
    return parse_maass_file(path.read_bytes(), path)


def weyl_count(T: float) -> float:
    """Main terms of the counting function N(T) = #{r_k <= T}"""
    if T <= 1:
        return 0.
    return (
        T ** 2 / 12 - 2 * T * math.log(T) / math.pi
        + T * (2 + math.log(math.pi / 2)) / math.pi
    )


@dataclass(frozen=True)
class SpectralBasis(DataclassSerialize):
    """Orthonormal Maass forms ordered by spectral parameter
    """
    forms: tuple[MaassForm, ...]

    def __post_init__(self):
        ordered = sorted(self.forms, key=lambda f: f.r)
        dedup: list[MaassForm] = []
        for f in ordered:
            if dedup and abs(f.r - dedup[-1].r) < DEDUP_RADIUS:
                logger.warning(f'dropping duplicate spectral parameter {f.r} from {f.source}')
                continue
            dedup.append(f)
        object.__setattr__(self, 'forms', tuple(dedup))

    @classmethod
    def from_iter(cls, forms: Iterable[MaassForm]) -> Self:
        return cls(tuple(forms))

    @property
    def count(self) -> int:
        return len(self.forms)

    @property
    def r_values(self) -> np.ndarray:
        return np.array([f.r for f in self.forms])

    def __len__(self) -> int:
        return len(self.forms)

    def __iter__(self) -> Iterator[MaassForm]:
        return iter(self.forms)

    def __getitem__(self, k: int) -> MaassForm:
        """1-based access, matching the index k of φ_k"""
        if not 1 <= k <= len(self.forms):
            raise IndexError(f'basis index {k} outside 1..{len(self.forms)}')
        return self.forms[k - 1]

    def truncated(self, k_max: int) -> SpectralBasis:
        return SpectralBasis(self.forms[:k_max])

    @property
    def content_hash(self) -> str:
        h = hashlib.sha256()
        for f in self.forms:
            h.update(f.content_hash.encode())
        return h.hexdigest()[:16]

    def max_r(self) -> float:
        return float(self.r_values.max()) if self.forms else 0.

    def covers(self, lo: float, hi: float) -> bool:
        return bool(self.forms) and self.max_r() >= hi

    def require_cover(self, lo: float, hi: float) -> None:
        if not self.covers(lo, hi):
            raise BasisCoverageError(
                f'loaded spectrum (max r={self.max_r():.4f}) does not cover [{lo}, {hi}]'
            )


def check_weyl(basis: SpectralBasis, T: float) -> tuple[int, float, float]:
    """Compare the number of loaded r_k <= T with the Weyl law

    Returns:
        ``(count, main_terms, slack)`` where *slack* is the allowed deviation,
        taken as ``T/log T``
    """
    count = int(np.sum(basis.r_values <= T))
    slack = T / math.log(T) if T > math.e else T
    return count, weyl_count(T), slack


def load_basis(data_dir: Path) -> SpectralBasis:
    """Load every ``*.maass`` file under *data_dir*

    Raises:
        DataError: if the directory holds no data files
    """
    data_dir = Path(data_dir)
    files = sorted(data_dir.glob(f'*{FILE_SUFFIX}'))
    if not files:
        raise DataError(f'no {FILE_SUFFIX} files in {data_dir}')
    forms = []
    for p in files:
        form = load_maass_file(p)
        bad = coefficient_screen(form)
        if bad:
            logger.warning(f'{p}: {len(bad)} coefficients exceed the d(n)n^θ envelope, first n={bad[0]}')
        forms.append(form)
    basis = SpectralBasis.from_iter(forms)
    logger.info(f'loaded {basis.count} Maass forms from {data_dir}')
    return basis


@dataclass(frozen=True)
class EisensteinCoefficient(DataclassSerialize):
    """c(ℓ, s) = 2π^s σ_{1-2s}(|ℓ|) |ℓ|^{s-1/2} / (Γ(s)ζ(2s))
    """
    ell: int
    s: complex
    value: complex

    @classmethod
    def compute(cls, ell: int, s: complex) -> Self:
        return cls(ell=ell, s=complex(s), value=eisenstein_coefficient(ell, s))


def eisenstein_coefficient(ell: int, s: complex, zeta_2s: complex|None = None) -> complex:
    if ell == 0:
        raise DomainError('Eisenstein coefficients are indexed by ell != 0')
    s = complex(s)
    a = abs(int(ell))
    if zeta_2s is None:
        zeta_2s = zeta(2 * s)
    log_pre = math.log(2) + s * math.log(math.pi) + (s - 0.5) * math.log(a) - log_gamma(s)
    return complex(np.exp(log_pre)) * divisor_sigma(1 - 2 * s, a) / zeta_2s
