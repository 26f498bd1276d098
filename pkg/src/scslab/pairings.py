"""On-disk cache of triple products and Eisenstein pairings

One text file per ``(Φ₁, Φ₂, domain)``::

    triple odd:9.533695 3f2a9c0e51d7b8a4 0.01234 -1.2e-17 3.1e-09
    eisen 0.25 0.0051 0.0007 2.2e-08
    eisen -0.25 0.0051 -0.0007 2.2e-08

Triple products are keyed by the content hash of φ_k, with its label kept
alongside. When the data behind a label changes, only the entries with the
old hash are dropped. Entries are write-once.
"""
from __future__ import annotations
from typing import Iterable, Literal, Self
import asyncio
import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import aiofiles
import numpy as np
from loguru import logger

from .automorphic import TruncatedDomain
from .errors import DataError
from .innerprod import PairingResult, eisenstein_pairing_pair, triple_product
from .maassdata import MaassForm, SpectralBasis
from .serialization import DataclassSerialize

__all__ = ('CacheEntry', 'PairingCache', 'cache_dir', 'parse_cache', 'MAX_JOBS')

MAX_JOBS = 4

type EntryKind = Literal['triple', 'eisen']


def cache_dir() -> Path:
    d = os.environ.get('SCSLAB_CACHE_DIR')
    if d:
        return Path(d)
    return Path.home() / '.config' / 'scslab'


@dataclass(frozen=True)
class CacheEntry(DataclassSerialize):
    """One cache line; *key* is the form label for triples and u for Eisenstein pairings"""
    kind: EntryKind
    key: str|float
    value: complex
    err: float
    form_hash: str = ''

    def to_line(self) -> str:
        if self.kind == 'triple':
            head = f'triple {self.key} {self.form_hash}'
        else:
            head = f'eisen {self.key!r}'
        return f'{head} {self.value.real!r} {self.value.imag!r} {self.err!r}'

    @classmethod
    def from_line(cls, line: str, lineno: int = 0, path: Path|None = None) -> Self:
        parts = line.split()
        width = {'triple': 6, 'eisen': 5}.get(parts[0] if parts else '')
        if width is None or len(parts) != width:
            raise DataError(f'{path}:{lineno}: malformed cache line {line!r}')
        kind = parts[0]
        try:
            re, im, err = (float(p) for p in parts[-3:])
            if kind == 'triple':
                return cls(kind=kind, key=parts[1], value=complex(re, im), err=err, form_hash=parts[2])
            return cls(kind=kind, key=float(parts[1]), value=complex(re, im), err=err)
        except ValueError as exc:
            raise DataError(f'{path}:{lineno}: {exc}') from exc

    def to_pairing(self) -> PairingResult:
        return PairingResult(self.value, self.err, {'cached': True, self.kind: self.key})


def parse_cache(text: str, path: Path|None = None) -> list[CacheEntry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        entries.append(CacheEntry.from_line(line, lineno, path))
    return entries


class PairingCache:
    """Pairings of one (Φ₁, Φ₂) against the spectrum, backed by a text file

    Missing triple products and Eisenstein pairings are computed in worker
    threads, at most *max_jobs* at a time, and written back to the file.
    """
    def __init__(
        self,
        Phi1: MaassForm,
        Phi2: MaassForm,
        dom: TruncatedDomain = TruncatedDomain(),
        directory: Path|None = None,
        max_jobs: int = MAX_JOBS,
    ) -> None:
        self.Phi1 = Phi1
        self.Phi2 = Phi2
        self.dom = dom
        self.directory = Path(directory) if directory is not None else cache_dir()
        self.max_jobs = max_jobs
        self._lock: asyncio.Lock|None = None
        self._loaded = False
        self._triples: dict[str, CacheEntry] = {}
        self._eisen: dict[float, PairingResult] = {}

    @property
    def key(self) -> str:
        h = hashlib.sha256()
        d = self.dom
        h.update(f'{self.Phi1.content_hash}|{self.Phi2.content_hash}'.encode())
        h.update(f'|{d.Y!r}|{d.panels_x}|{d.panels_y}|{d.order}|{d.tol!r}'.encode())
        return h.hexdigest()[:20]

    @property
    def path(self) -> Path:
        return self.directory / f'pairings-{self.key}.txt'

    def _get_lock(self) -> asyncio.Lock:
        if self._lock is None:
            self._lock = asyncio.Lock()
        return self._lock

    @logger.catch(reraise=True)
    async def _read(self) -> None:
        if not self.path.exists():
            return
        async with aiofiles.open(self.path, 'r') as f:
            s = await f.read()
        for e in parse_cache(s, self.path):
            if e.kind == 'triple':
                self._triples.setdefault(e.form_hash, e)
            else:
                self._eisen.setdefault(float(e.key), e.to_pairing())
        logger.debug(f'{self.path}: {len(self._triples)} triple, {len(self._eisen)} eisen entries')

    @logger.catch(reraise=True)
    async def _write(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lines = [e.to_line() for e in sorted(self._triples.values(), key=lambda e: (e.key, e.form_hash))]
        for u in sorted(self._eisen):
            p = self._eisen[u]
            lines.append(CacheEntry('eisen', u, p.value, p.err).to_line())
        async with aiofiles.open(self.path, 'w') as f:
            await f.write('\n'.join(lines) + '\n')

    async def _ensure_loaded(self) -> None:
        if self._loaded:
            return
        async with self._get_lock():
            if self._loaded:
                return
            await self._read()
            self._loaded = True

    def _drop_stale(self, forms: Iterable[MaassForm]) -> int:
        """Forget entries whose label matches one of *forms* but whose hash does not"""
        current = {f.label(): f.content_hash for f in forms}
        stale = [h for h, e in self._triples.items() if e.key in current and current[e.key] != h]
        for h in stale:
            logger.warning(f'{self.path}: data of {self._triples[h].key} changed, dropping its triple product')
            del self._triples[h]
        return len(stale)

    async def triples(self, basis: SpectralBasis, k_max: int|None = None) -> dict[int, PairingResult]:
        """⟨φ_k, Φ̄₁Φ₂⟩ for k ≤ k_max, computing and storing what is missing
        """
        await self._ensure_loaded()
        K = min(k_max or basis.count, basis.count)
        forms = {k: basis[k] for k in range(1, K + 1)}
        sem = asyncio.Semaphore(self.max_jobs)

        async def job(k: int) -> tuple[int, PairingResult]:
            async with sem:
                logger.info(f'triple product k={k} r={forms[k].r:.6f}')
                res = await asyncio.to_thread(triple_product, forms[k], self.Phi1, self.Phi2, self.dom)
            return k, res

        async with self._get_lock():
            dropped = self._drop_stale(forms.values())
            missing = [k for k, f in forms.items() if f.content_hash not in self._triples]
        fresh: dict[int, PairingResult] = {}
        if missing or dropped:
            fresh = dict(await asyncio.gather(*[job(k) for k in missing]))
            async with self._get_lock():
                for k, res in fresh.items():
                    f = forms[k]
                    entry = CacheEntry('triple', f.label(), complex(res.value), res.err, f.content_hash)
                    self._triples.setdefault(f.content_hash, entry)
                await self._write()
            if missing:
                logger.success(f'stored {len(missing)} triple products in {self.path}')
        return {
            k: fresh[k] if k in fresh else self._triples[f.content_hash].to_pairing()
            for k, f in forms.items()
        }

    async def eisen(self, us: Iterable[float]) -> dict[float, PairingResult]:
        """⟨E(·, ½±iu), Φ̄₁Φ₂⟩ for every u > 0 given, keyed by ±u
        """
        await self._ensure_loaded()
        us = [float(u) for u in us]
        sem = asyncio.Semaphore(self.max_jobs)

        async def job(u: float) -> tuple[float, tuple[PairingResult, PairingResult]]:
            async with sem:
                res = await asyncio.to_thread(eisenstein_pairing_pair, u, self.Phi1, self.Phi2, self.dom)
            return u, res

        missing = [u for u in us if u not in self._eisen or -u not in self._eisen]
        if missing:
            logger.info(f'computing {len(missing)} Eisenstein pairings')
            results = await asyncio.gather(*[job(u) for u in missing])
            async with self._get_lock():
                for u, (plus, minus) in results:
                    self._eisen.setdefault(u, plus)
                    self._eisen.setdefault(-u, minus)
                await self._write()
            logger.success(f'stored {2 * len(missing)} Eisenstein pairings in {self.path}')
        out = {}
        for u in us:
            out[u] = self._eisen[u]
            out[-u] = self._eisen[-u]
        return out

    def triples_sync(self, basis: SpectralBasis, k_max: int|None = None) -> dict[int, PairingResult]:
        self._lock = None
        return asyncio.run(self.triples(basis, k_max))

    def eisen_sync(self, us: Iterable[float]|np.ndarray) -> dict[float, PairingResult]:
        self._lock = None
        return asyncio.run(self.eisen(list(us)))
