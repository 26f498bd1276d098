"""Gauss hypergeometric function 2F1 for complex parameters.

``gauss_2f1`` sums the power series where it converges quickly and otherwise
maps the argument with the Pfaff transformation ``z -> z/(z-1)``, the
connection formula around ``z = 1`` or the inversion ``z -> 1/z``.
``barnes_2f1`` evaluates the Barnes integral representation on a vertical
line and serves as an independent cross-check.
"""
from __future__ import annotations
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DomainError, LinePlacementError, NonConvergentRegionError, ParameterPoleError,
)
from .gamma import log_gamma, rgamma, is_gamma_pole
from .quadrature import ContourSpec, IntegralResult, vertical_line_integral
from .types import as_point

__all__ = ('gauss_2f1', 'gauss_2f1_boundary', 'barnes_2f1', 'barnes_2f1_result', 'default_barnes_contour')

SERIES_EPS = 1e-17
SERIES_MAX_TERMS = 20000
SERIES_RADIUS = 0.985
CONNECTION_RADIUS = 0.3
INVERSION_RADIUS = 1.5
INTEGER_SLACK = 1e-6


def _is_nonpositive_int(x: complex) -> bool:
    return bool(is_gamma_pole(x))


def _near_integer(x: complex) -> bool:
    return abs(x.imag) < INTEGER_SLACK and abs(x.real - round(x.real)) < INTEGER_SLACK


def _series(a: complex, b: complex, c: complex, z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    total = np.ones(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    for k in range(SERIES_MAX_TERMS):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        total = total + term
        if np.all(np.abs(term) <= SERIES_EPS * np.abs(total)):
            return total
    raise NonConvergentRegionError(
        f'2F1 series did not converge in {SERIES_MAX_TERMS} terms (max |z|={np.max(np.abs(z)):.4g})'
    )


def _connection(a: complex, b: complex, c: complex, z: NDArray[np.complex128]) -> NDArray[np.complex128]:
    # F(a,b;c;z) in terms of functions of 1-z
    w = 1 - z
    lg_c = log_gamma(c)
    coef1 = np.exp(lg_c + log_gamma(c - a - b)) * rgamma(c - a) * rgamma(c - b)
    coef2 = np.exp(lg_c + log_gamma(a + b - c)) * rgamma(a) * rgamma(b)
    f1 = _series(a, b, a + b - c + 1, w)
    f2 = _series(c - a, c - b, c - a - b + 1, w)
    return coef1 * f1 + coef2 * np.exp((c - a - b) * np.log(w)) * f2


def _inversion(
    a: complex, b: complex, c: complex, z: NDArray[np.complex128], log_mz: NDArray[np.complex128],
) -> NDArray[np.complex128]:
    # F(a,b;c;z) in terms of functions of 1/z; log_mz fixes the branch of log(-z)
    iz = 1 / z
    lg_c = log_gamma(c)
    coef1 = np.exp(lg_c + log_gamma(b - a) - a * log_mz) * rgamma(c - a) * rgamma(b)
    coef2 = np.exp(lg_c + log_gamma(a - b) - b * log_mz) * rgamma(c - b) * rgamma(a)
    f1 = _dispatch(a, a - c + 1, a - b + 1, iz, allow_pfaff=False)
    f2 = _dispatch(b - c + 1, b, b - a + 1, iz, allow_pfaff=False)
    return coef1 * f1 + coef2 * f2


def _dispatch(
    a: complex, b: complex, c: complex, z: NDArray[np.complex128], allow_pfaff: bool,
) -> NDArray[np.complex128]:
    out = np.empty(z.shape, dtype=complex)
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _series(a, b, c, z)
    conn_ok = not _near_integer(c - a - b)
    az = np.abs(z)
    a1z = np.abs(1 - z)
    todo = np.ones(z.shape, dtype=bool)

    zero = z == 0
    out[zero] = 1.
    todo &= ~zero

    m = todo & (az <= 0.5)
    if np.any(m):
        out[m] = _series(a, b, c, z[m])
        todo &= ~m
    if conn_ok:
        m = todo & (a1z < CONNECTION_RADIUS)
        if np.any(m):
            out[m] = _connection(a, b, c, z[m])
            todo &= ~m
    if allow_pfaff:
        m = todo & (z.real < 0.5)
        if np.any(m):
            zm = z[m]
            w = zm / (zm - 1)
            pre = np.exp(-a * np.log(1 - zm))
            out[m] = pre * _dispatch(a, c - b, c, w, allow_pfaff=False)
            todo &= ~m
    m = todo & (az < SERIES_RADIUS)
    if np.any(m):
        out[m] = _series(a, b, c, z[m])
        todo &= ~m
    if conn_ok:
        m = todo & (a1z < SERIES_RADIUS)
        if np.any(m):
            out[m] = _connection(a, b, c, z[m])
            todo &= ~m
    if allow_pfaff and not _near_integer(a - b):
        # off the cut [1, ∞) only; the principal log(-z) is continuous there
        m = todo & (az > INVERSION_RADIUS) & ~((z.imag == 0) & (z.real > 0))
        if np.any(m):
            out[m] = _inversion(a, b, c, z[m], np.log(-z[m]))
            todo &= ~m
    if np.any(todo):
        bad = z[todo][0]
        raise NonConvergentRegionError(f'no 2F1 transformation covers z={bad}')
    return out


def gauss_2f1(a: complex, b: complex, c: complex, z: ArrayLike):
    """₂F₁(a, b; c; z) for complex parameters; *z* may be an array

    Raises:
        ParameterPoleError: *c* is a nonpositive integer
        NonConvergentRegionError: *z* is outside every supported region
            (on the cut ``z > 1`` far from 1, or an integer ``a - b``
            where inversion would be needed)
    """
    a = as_point(a, 'a')
    b = as_point(b, 'b')
    c = as_point(c, 'c')
    if _is_nonpositive_int(c):
        raise ParameterPoleError(f'2F1 parameter c={c} is a nonpositive integer')
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(arr)):
        raise DomainError('2F1 argument must be finite')
    out = _dispatch(a, b, c, arr.ravel(), allow_pfaff=True).reshape(arr.shape)
    if np.ndim(z) == 0:
        return complex(out[0])
    return out


def gauss_2f1_boundary(a: complex, b: complex, c: complex, x: float, side: int = 1) -> complex:
    """Boundary value ₂F₁(a, b; c; x + i0·side) on the cut ``x > 1``
    """
    a = as_point(a, 'a')
    b = as_point(b, 'b')
    c = as_point(c, 'c')
    if not x > 1:
        return gauss_2f1(a, b, c, x)
    if _is_nonpositive_int(c):
        raise ParameterPoleError(f'2F1 parameter c={c} is a nonpositive integer')
    z = np.array([complex(x)])
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return complex(_series(a, b, c, z)[0])
    if _near_integer(a - b):
        raise NonConvergentRegionError(f'a - b = {a - b} is an integer; no inversion available')
    log_mz = np.array([math.log(x) - 1j * math.pi * side])
    return complex(_inversion(a, b, c, z, log_mz)[0])


def barnes_2f1_result(
    alpha: complex, beta: complex, gamma: complex, z: complex, contour: ContourSpec,
) -> IntegralResult:
    """Barnes integral for ₂F₁ on the line ``Re w = contour.beta``

    ``F = Γ(γ)/(Γ(α)Γ(β)) · (1/2πi)∫ Γ(α+w)Γ(β+w)Γ(-w)/Γ(γ+w) (-z)^w dw``

    The line must separate the poles of ``Γ(-w)`` from those of
    ``Γ(α+w)Γ(β+w)``, i.e. ``-min(Re α, Re β) < contour.beta < 0``.
    """
    alpha = as_point(alpha, 'alpha')
    beta = as_point(beta, 'beta')
    gamma = as_point(gamma, 'gamma')
    z = as_point(z, 'z')
    rho = -contour.beta
    if rho <= 0 or alpha.real <= rho or beta.real <= rho:
        raise LinePlacementError(
            f'Barnes line Re(w)={contour.beta} does not separate the poles '
            f'(need 0 < ρ < min(Re α, Re β) = {min(alpha.real, beta.real):g})'
        )
    if z.imag == 0 and z.real >= 0:
        raise DomainError('barnes_2f1 needs |arg(-z)| < π')
    log_mz = complex(np.log(-z))
    pre = log_gamma(gamma) - log_gamma(alpha) - log_gamma(beta)

    def integrand(w: NDArray[np.complex128]) -> NDArray[np.complex128]:
        lg = (
            log_gamma(alpha + w) + log_gamma(beta + w) + log_gamma(-w)
        )
        return np.exp(lg + pre + w * log_mz) * rgamma(gamma + w)

    return vertical_line_integral(integrand, contour)


def barnes_2f1(alpha: complex, beta: complex, gamma: complex, z: complex, contour: ContourSpec) -> complex:
    return barnes_2f1_result(alpha, beta, gamma, z, contour).value


def default_barnes_contour(alpha: complex, beta: complex, z: complex, tol: float = 1e-8) -> ContourSpec:
    """A contour halfway into the admissible strip with a height from the decay rate
    """
    rho = 0.5 * min(complex(alpha).real, complex(beta).real, 1.)
    decay = math.pi - abs(np.angle(-complex(z)))
    shift = abs(complex(alpha).imag) + abs(complex(beta).imag)
    t_max = min(400., (-math.log(tol) + 10) / max(decay, 0.05) + shift)
    return ContourSpec(beta=-rho, t_max=t_max, step=0.25, tol=tol)
