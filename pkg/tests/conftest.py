from __future__ import annotations
from pathlib import Path
import math
import os
import sys

import numpy as np
import pytest
from loguru import logger

from scslab.maassdata import MaassForm, SpectralBasis, load_basis
from scslab.automorphic import normalize_c1
from scslab.config import BUNDLED_DATA

GOLDEN = (1 + math.sqrt(5)) / 2


def primes_upto(n: int) -> list[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    # the CLI rebinds the sink to whatever stderr the runner provided
    logger.remove()
    logger.add(sys.stderr, level='WARNING')


@pytest.fixture
def make_form():
    """Hecke-consistent coefficient data that is not automorphic

    ``λ(p) = 2cos(p·angle)`` stays inside the Deligne bound, so every
    envelope and multiplicativity check applies; only the automorphy screen
    can tell it from a real form.
    """
    def factory(
        r: float = 9.533695,
        parity: str = 'even',
        n_max: int = 600,
        angle: float = GOLDEN,
        c1: complex|None = 1.,
        **kw,
    ) -> MaassForm:
        coeffs = {p: 2 * math.cos(p * angle) for p in primes_upto(n_max)}
        return MaassForm(r=r, parity=parity, coeffs=coeffs, c1=c1, **kw)
    return factory


@pytest.fixture
def form(make_form) -> MaassForm:
    return make_form()


@pytest.fixture
def odd_form(make_form) -> MaassForm:
    return make_form(r=12.173008, parity='odd', angle=math.sqrt(2))


@pytest.fixture
def basis(make_form) -> SpectralBasis:
    return SpectralBasis.from_iter([
        make_form(r=9.533695),
        make_form(r=12.173008, parity='odd', angle=math.sqrt(2)),
        make_form(r=13.779751, angle=math.sqrt(3)),
    ])


@pytest.fixture(scope='session')
def data_dir() -> Path:
    """Real Maass form data: ``SCSLAB_DATA_DIR`` if set, else the bundled forms"""
    d = os.environ.get('SCSLAB_DATA_DIR')
    return Path(d) if d else BUNDLED_DATA


@pytest.fixture(scope='session')
def real_basis(data_dir) -> SpectralBasis:
    basis = load_basis(data_dir)
    return SpectralBasis.from_iter(normalize_c1(f) for f in basis)
