"""Complex gamma function via a 15-term Lanczos approximation (g = 607/128)

Everything is computed in log form so that gamma ratios with large imaginary
parts (decaying like ``e^{-π|t|/2}``) never underflow before they are combined.
"""
from __future__ import annotations
from typing import overload
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import GammaPoleError

__all__ = ('log_gamma', 'gamma', 'rgamma', 'log_beta', 'beta', 'is_gamma_pole')

LANCZOS_G = 607 / 128
LANCZOS_P = np.array([
    57.1562356658629235, -59.5979603554754912,
    14.1360979747417471, -0.491913816097620199,
    .339946499848118887e-4, .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,
    -.210264441724104883e-3, .217439618115212643e-3,
    -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5,
])
LANCZOS_P0 = 0.999999999999997092
LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
LOG_PI = math.log(math.pi)

# beyond this |Im z| the two exponentials in sin(πz) differ by e^{40π}
_LOGSIN_SWITCH = 20.


def is_gamma_pole(z: ArrayLike) -> NDArray[np.bool_]:
    z = np.asarray(z, dtype=complex)
    re = z.real
    return (z.imag == 0) & (re <= 0) & (re == np.round(re))


def _lanczos(z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # valid for Re z >= 0.5
    ser = np.full(z.shape, LANCZOS_P0, dtype=complex)
    for j, p in enumerate(LANCZOS_P, start=1):
        ser = ser + p / (z + j)
    t = z + LANCZOS_G + 0.5
    return LOG_SQRT_2PI + (z + 0.5) * np.log(t) - t + np.log(ser) - np.log(z)


def _log_sin_pi(z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    out = np.empty(z.shape, dtype=complex)
    big_up = z.imag > _LOGSIN_SWITCH
    big_dn = z.imag < -_LOGSIN_SWITCH
    mid = ~(big_up | big_dn)
    if np.any(mid):
        out[mid] = np.log(np.sin(np.pi * z[mid]))
    if np.any(big_up):
        zu = z[big_up]
        out[big_up] = -1j * np.pi * zu + np.log(0.5j) + np.log1p(-np.exp(2j * np.pi * zu))
    if np.any(big_dn):
        zd = z[big_dn]
        out[big_dn] = 1j * np.pi * zd + np.log(-0.5j) + np.log1p(-np.exp(-2j * np.pi * zd))
    return out


def _log_gamma_array(z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    refl = z.real < 0.5
    w = np.where(refl, 1 - z, z)
    out = _lanczos(w)
    if np.any(refl):
        zr = z[refl]
        out[refl] = LOG_PI - _log_sin_pi(zr) - out[refl]
    return out


@overload
def log_gamma(z: complex|float) -> complex: ...
@overload
def log_gamma(z: NDArray) -> NDArray[np.complex128]: ...
def log_gamma(z):
    """log Γ(z) for complex scalars or arrays

    The imaginary part is continuous along vertical lines in Re z >= 0.5 and
    may differ from other conventions by a multiple of 2π elsewhere, which
    never affects ``exp(log_gamma(z))``.

    Raises:
        GammaPoleError: if any *z* is a nonpositive integer
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(is_gamma_pole(arr)):
        bad = arr[is_gamma_pole(arr)].ravel()[0]
        raise GammaPoleError(f'gamma has a pole at z={bad.real:g}')
    out = _log_gamma_array(np.atleast_1d(arr))
    if arr.ndim == 0:
        return complex(out[0])
    return out.reshape(arr.shape)


@overload
def gamma(z: complex|float) -> complex: ...
@overload
def gamma(z: NDArray) -> NDArray[np.complex128]: ...
def gamma(z):
    return np.exp(log_gamma(z)) if np.ndim(z) else complex(np.exp(log_gamma(z)))


@overload
def rgamma(z: complex|float) -> complex: ...
@overload
def rgamma(z: NDArray) -> NDArray[np.complex128]: ...
def rgamma(z):
    """1/Γ(z), equal to 0 at the poles of Γ
    """
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    poles = is_gamma_pole(arr)
    out = np.zeros(arr.shape, dtype=complex)
    ok = ~poles
    if np.any(ok):
        out[ok] = np.exp(-_log_gamma_array(arr[ok]))
    if np.ndim(z) == 0:
        return complex(out[0])
    return out.reshape(np.shape(z))


def log_beta(a, b):
    return log_gamma(a) + log_gamma(b) - log_gamma(np.asarray(a) + np.asarray(b))


def beta(a, b):
    """B(a, b) = Γ(a)Γ(b)/Γ(a+b); zero when a+b sits on a gamma pole
    """
    s = np.asarray(a, dtype=complex) + np.asarray(b, dtype=complex)
    out = np.exp(log_gamma(a) + log_gamma(b)) * rgamma(s)
    if np.ndim(out) == 0:
        return complex(out)
    return out
