from __future__ import annotations
import functools
import math

import numpy as np
from scipy.special import bernoulli

from .errors import ZetaPoleError
from .types import as_point

__all__ = ('zeta', 'zeta_array', 'divisor_sigma')

EM_TERMS = 20


@functools.cache
def _em_coefficients(m: int) -> tuple[float, ...]:
    """B_{2k}/(2k)! for k = 1..m
    """
    b = bernoulli(2 * m)
    return tuple(float(b[2 * k]) / math.factorial(2 * k) for k in range(1, m + 1))


def zeta(s: complex|float) -> complex:
    """Riemann zeta by Euler-Maclaurin summation

    Accurate to about 1e-12 relative for Re(s) >= -1 and |Im(s)| <= 200.

    Raises:
        ZetaPoleError: at s = 1
    """
    s = as_point(s, 's')
    if s == 1:
        raise ZetaPoleError('zeta has a pole at s=1')
    n_sum = int(abs(s)) + 30
    n = np.arange(1, n_sum, dtype=float)
    head = complex(np.sum(np.exp(-s * np.log(n))))
    big_n = float(n_sum)
    log_n = math.log(big_n)
    n_pow = np.exp(-s * log_n)
    total = head + n_pow * big_n / (s - 1) + 0.5 * n_pow
    # rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    term = s * n_pow / big_n
    for k, coef in enumerate(_em_coefficients(EM_TERMS), start=1):
        total += coef * term
        term *= (s + 2 * k - 1) * (s + 2 * k) / (big_n * big_n)
    return total


def zeta_array(s) -> np.ndarray:
    arr = np.asarray(s, dtype=complex)
    out = np.fromiter((zeta(v) for v in arr.ravel()), dtype=complex, count=arr.size)
    return out.reshape(arr.shape)


def divisor_sigma(nu: complex|float, ell: int) -> complex:
    """σ_ν(ℓ) = Σ_{d|ℓ} d^ν
    """
    ell = int(ell)
    if ell < 1:
        raise ValueError(f'ell must be a positive integer, got {ell}')
    nu = as_point(nu, 'nu')
    total = 0j
    d = 1
    while d * d <= ell:
        if ell % d == 0:
            total += d ** nu
            e = ell // d
            if e != d:
                total += e ** nu
        d += 1
    return total
