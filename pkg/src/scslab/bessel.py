r"""Modified Bessel functions of the second kind for imaginary and complex order.

Uses the integral

.. math::
    K_\nu(z) = \frac12\int_{-\infty}^{\infty} e^{-z\cosh t + \nu t}\,dt

taken along the horizontal line ``Im t = c`` through (or as close as allowed
to) the saddle point ``sinh(ic) = ν/z``.  On that line the integrand is
no longer oscillatory, so ``K_{ir}(x)`` of size ``e^{-πr/2}`` is obtained
without cancellation. The trapezoid rule on a line converges exponentially;
the step is chosen from the width of the strip of analyticity around the
line, the same double-exponential mechanism as tanh-sinh.

The scaled variant :math:`\tilde K_{ir}(x) = e^{\pi r/2} K_{ir}(x)` stays of
order one for ``x`` below the turning point and should be used whenever
products of several K-factors are formed.
"""
from __future__ import annotations
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from loguru import logger

from .errors import DomainError

__all__ = ('bessel_k', 'bessel_k_imag_order', 'log_bessel_k')

CHUNK = 128
DEFAULT_TOL = 1e-15


def _line_params(nu: complex, z: NDArray[np.complex128], tol: float):
    r = nu.imag
    alpha = abs(nu.real)
    az = np.abs(z)
    psi = np.angle(z)
    lim = 0.5 * math.pi - np.abs(psi)
    if np.any(lim <= 0.05):
        raise DomainError('bessel_k needs |arg z| < π/2')
    delta = np.minimum(min(math.pi / 8, 2. / max(r, 1e-9)), lim / 4)
    c = np.arcsin(np.minimum(r / az, 1.))
    c = np.clip(c, 0., lim - 2 * delta)
    a = np.minimum(delta, 0.5 * (lim - c))
    log_tol = -math.log(tol)
    h = 2 * math.pi * a / (log_tol + 5 + 2 * (r + alpha) * a)
    m = az * np.minimum(np.cos(psi + c), np.cos(psi - c))
    u_max = np.arccosh(1 + (log_tol + 10) / m)
    u_max = np.arccosh(1 + (log_tol + 10 + alpha * u_max) / m)
    return c, float(np.min(h)), float(np.max(u_max))


def _log_sum(nu: complex, z: NDArray[np.complex128], tol: float) -> tuple[NDArray, NDArray]:
    """Return ``(mantissa, log_scale)`` with ``K_ν(z) = mantissa·exp(log_scale)``
    """
    c, h, u_max = _line_params(nu, z, tol)
    n = int(math.ceil(u_max / h))
    t = h * np.arange(-n, n + 1)
    tc = t[None, :] + 1j * c[:, None]
    expo = -z[:, None] * np.cosh(tc) + nu * tc
    ref = np.max(expo.real, axis=1)
    total = np.sum(np.exp(expo - ref[:, None]), axis=1)
    return 0.5 * h * total, ref


def log_bessel_k(nu: complex, z: ArrayLike, tol: float = DEFAULT_TOL) -> tuple[NDArray, NDArray]:
    """``K_ν(z)`` as a mantissa and a real log-scale, for products that would underflow
    """
    nu = complex(nu)
    if nu.imag < 0:
        nu = -nu
    arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(arr.real <= 0):
        raise DomainError('bessel_k needs Re z > 0')
    mant = np.empty(arr.shape, dtype=complex)
    scale = np.empty(arr.shape, dtype=float)
    order = np.argsort(np.abs(arr))
    for start in range(0, arr.size, CHUNK):
        idx = order[start:start + CHUNK]
        mant[idx], scale[idx] = _log_sum(nu, arr[idx], tol)
    return mant, scale


def bessel_k(nu: complex, z: ArrayLike, scaled: bool = False, tol: float = DEFAULT_TOL):
    """K_ν(z) for complex order and ``|arg z| < π/2``

    With *scaled* the result is multiplied by ``e^{π|Im ν|/2}``.
    """
    mant, scale = log_bessel_k(nu, z, tol)
    if scaled:
        scale = scale + 0.5 * math.pi * abs(complex(nu).imag)
    out = mant * np.exp(scale)
    if np.ndim(z) == 0:
        return complex(out[0])
    return out.reshape(np.shape(z))


def bessel_k_imag_order(r: float, x: ArrayLike, scaled: bool = False, tol: float = DEFAULT_TOL):
    """K_{ir}(x) for real ``r`` and ``x > 0``; real valued

    Arguments:
        r: Order parameter, the sign is irrelevant since K_{-ir} = K_{ir}
        x: Positive argument (scalar or array)
        scaled: Return ``e^{π|r|/2} K_{ir}(x)``
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError('bessel_k_imag_order needs x > 0')
    r = abs(float(r))
    if r > 30 and np.any(xs < 1e-3):
        logger.warning(f'K_ir(x) with r={r:g} and x < 1e-3: accuracy may degrade')
    out = bessel_k(1j * r, xs, scaled=scaled, tol=tol)
    if np.ndim(x) == 0:
        return float(out.real)
    return np.real(out)
