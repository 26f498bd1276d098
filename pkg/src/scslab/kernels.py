"""Kernels of the shifted convolution sum with different spectral parameters

With ``δ = r₁ - r₂`` and ``a = n/(n+h)`` the termwise kernel is

    ℱ₊(w) = B(-w+ir₂, -w-ir₁) F(-iδ, -w+ir₂; -2w-iδ; 1-a)

and the Gauss connection formula splits it as ``ℱ₊ = M₊ + ℰ`` with

    M₊ = B(-w+ir₂, -w-ir₂) F(-iδ, -w+ir₂; w+ir₂+1; a)
    ℰ  = a^{-w-ir₂} Γ(w+ir₂)Γ(-w-ir₁)/Γ(-iδ) F(-2w, -w-ir₁; -w-ir₂+1; a)

``M₋`` differs from ``M₊`` only in its beta factor. For ``a < 0`` the
argument ``1-a`` of ℱ₊ lies on the cut of F and is read as ``1-a + i0·side``,
which puts a phase on the power ``a^{-w-ir₂}``; for ``a > 1`` the arguments of
M₊ and ℰ are on the cut instead and are read from the same side.

The module also holds the two integral identities the kernels are derived
from: the product formula for ``K_a(x)K_b(y)`` and the Mellin transform of
``e^{-y}K_{ir₁}(my)K_{ir₂}(ny)``.
"""
from __future__ import annotations
from typing import Literal
from dataclasses import dataclass, field
import functools
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .bessel import bessel_k, bessel_k_imag_order
from .errors import (
    ConvergenceError, DomainError, NonConvergentRegionError, PoleProximityError,
)
from .gamma import beta, log_gamma, rgamma
from .hypergeom import barnes_2f1, default_barnes_contour, gauss_2f1, gauss_2f1_boundary
from .quadrature import IntegralResult, line_trapezoid
from .serialization import DataclassSerialize
from .types import as_point

__all__ = (
    'KernelArgs', 'KernelValues', 'KernelRegime', 'kernel_F_plus', 'kernel_M_plus',
    'kernel_M_minus', 'kernel_E', 'connection_phase', 'kernel_functions',
    'connection_residual', 'm_ratio_residual', 'connection_grid',
    'resolve_connection_prefactor', 'k_product_lhs', 'k_product_rhs',
    'mellin_exp_bessel', 'bessel_mellin_lhs', 'bessel_mellin_rhs',
)

POLE_RADIUS = 1e-6
CONNECTION_TOL = 1e-8
GRID_R1 = 9.53
GRID_R2 = 12.17
GRID_W = (-0.6, -0.5 + 0.3j, -0.75 - 0.4j)
GRID_A = (-3., -1.5, -0.4, 0.15, 0.5, 0.85, 1.3, 2.5, 6.)

type KernelRegime = Literal['negative', 'unit', 'large']


@dataclass(frozen=True)
class KernelArgs(DataclassSerialize):
    """Point at which the kernels are evaluated

    Attributes:
        w: Mellin variable (``-s/2`` in the shifted convolution sum)
        a: The ratio ``n/(n+h)``
        r1: Spectral parameter of Φ₁
        r2: Spectral parameter of Φ₂
        side: Side of the cut used for arguments on ``(1, ∞)``
    """
    w: complex
    a: float
    r1: float
    r2: float
    side: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'w', as_point(self.w, 'w'))
        if not math.isfinite(self.a):
            raise DomainError(f'a must be finite, got {self.a}')
        if self.a == 1 or self.a == 0:
            raise DomainError(f'a = {self.a} is not an admissible ratio n/(n+h)')
        if self.side not in (1, -1):
            raise DomainError(f'side must be +1 or -1, got {self.side}')

    @property
    def delta(self) -> float:
        return self.r1 - self.r2

    @property
    def regime(self) -> KernelRegime:
        if self.a < 0:
            return 'negative'
        if self.a < 1:
            return 'unit'
        return 'large'


@dataclass(frozen=True)
class KernelValues(DataclassSerialize):
    F_plus: complex
    M_plus: complex
    M_minus: complex
    E: complex
    phase: complex = 1. + 0j
    params: dict = field(default_factory=dict)


def _check_poles(what: str, *zs: complex) -> None:
    for z in zs:
        z = complex(z)
        if z.real < POLE_RADIUS and abs(z.imag) < POLE_RADIUS and abs(z.real - round(z.real)) < POLE_RADIUS:
            raise PoleProximityError(f'{what}: gamma argument {z} is within {POLE_RADIUS:g} of a pole')


def _f21(a: complex, b: complex, c: complex, x: float, side: int) -> complex:
    _check_poles('2F1 denominator', c)
    if x > 1:
        return gauss_2f1_boundary(a, b, c, x, side)
    return gauss_2f1(a, b, c, x)


def kernel_F_plus(args: KernelArgs) -> complex:
    w, d = args.w, args.delta
    p = -w + 1j * args.r2
    q = -w - 1j * args.r1
    _check_poles('ℱ₊', p, q)
    return beta(p, q) * _f21(-1j * d, p, p + q, 1 - args.a, args.side)


def _m_hypergeometric(args: KernelArgs) -> complex:
    w = args.w
    return _f21(-1j * args.delta, -w + 1j * args.r2, w + 1j * args.r2 + 1, args.a, args.side)


def kernel_M_plus(args: KernelArgs) -> complex:
    w = args.w
    p = -w + 1j * args.r2
    pbar = -w - 1j * args.r2
    _check_poles('M₊', p, pbar)
    return beta(p, pbar) * _m_hypergeometric(args)


def kernel_M_minus(args: KernelArgs) -> complex:
    w = args.w
    p = -w + 1j * args.r2
    pbar = -w - 1j * args.r2
    _check_poles('M₋', p, pbar, 2 * w + 1)
    return (beta(p, 2 * w + 1) + beta(pbar, 2 * w + 1)) * _m_hypergeometric(args)


def kernel_E(args: KernelArgs) -> complex:
    """ℰ with the power taken as ``|a|^{-w-ir₂}``; see :func:`connection_phase`
    """
    w, d = args.w, args.delta
    if d == 0:
        return 0j
    g1 = w + 1j * args.r2
    g2 = -w - 1j * args.r1
    _check_poles('ℰ', g1, g2)
    pre = np.exp(log_gamma(g1) + log_gamma(g2) - g1 * math.log(abs(args.a))) * rgamma(-1j * d)
    return complex(pre) * _f21(-2 * w, g2, 1 - g1, args.a, args.side)


def connection_phase(args: KernelArgs) -> complex:
    """Phase of ``a^{-w-ir₂}`` relative to ``|a|^{-w-ir₂}``

    For ``a < 0`` the argument ``1-a + i0·side`` of ℱ₊ corresponds to
    ``a - i0·side``.
    """
    if args.a > 0:
        return 1. + 0j
    return complex(np.exp(1j * math.pi * args.side * (args.w + 1j * args.r2)))


def kernel_functions(args: KernelArgs) -> KernelValues:
    """All four kernels at one point

    Raises:
        PoleProximityError: a gamma or beta factor is at a pole
    """
    return KernelValues(
        F_plus=kernel_F_plus(args),
        M_plus=kernel_M_plus(args),
        M_minus=kernel_M_minus(args),
        E=kernel_E(args),
        phase=connection_phase(args),
        params={'regime': args.regime, 'side': args.side},
    )


def connection_residual(args: KernelArgs, exponent: int = 0) -> float:
    """Residual of ``ℱ₊ = 2^{-kw}(M₊ + phase·ℰ)``, relative to ``|ℱ₊|+|M₊|+|ℰ|``
    """
    v = kernel_functions(args)
    rhs = 2 ** (-exponent * args.w) * (v.M_plus + v.phase * v.E)
    scale = abs(v.F_plus) + abs(v.M_plus) + abs(v.E)
    return abs(v.F_plus - rhs) / scale


def m_ratio_residual(args: KernelArgs) -> float:
    """Relative residual of ``M₋ = cos(iπr₂)/cos(πw)·M₊``
    """
    ratio = np.cos(1j * math.pi * args.r2) / np.cos(math.pi * args.w)
    lhs = kernel_M_minus(args)
    rhs = complex(ratio) * kernel_M_plus(args)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def connection_grid(r1: float = GRID_R1, r2: float = GRID_R2) -> list[KernelArgs]:
    """The 27 points (three w, nine a over all three regimes) of the kernel checks"""
    return [KernelArgs(w=w, a=a, r1=r1, r2=r2) for w in GRID_W for a in GRID_A]


@functools.cache
def resolve_connection_prefactor(tol: float = CONNECTION_TOL) -> int:
    """The exponent k for which ``ℱ₊ = 2^{-kw}(M₊ + ℰ)`` holds on the grid

    Both candidate placements of ``2^{-w}`` are tried; the first one whose
    worst residual is below *tol* is adopted.

    Raises:
        ConvergenceError: neither placement satisfies the identity
    """
    grid = connection_grid()
    worst = {}
    for k in (0, 1):
        worst[k] = max(connection_residual(args, k) for args in grid)
        logger.debug(f'connection identity with 2^(-{k}w): worst residual {worst[k]:.3g}')
        if worst[k] <= tol:
            logger.info(f'kernel connection convention: prefactor 2^(-{k}w), residual {worst[k]:.3g}')
            return k
    raise ConvergenceError(f'connection identity fails for both prefactor placements: {worst}')


def k_product_lhs(a: complex, b: complex, x: float, y: float) -> complex:
    return bessel_k(a, x) * bessel_k(b, y)


def k_product_rhs(a: complex, b: complex, x: float, y: float, tol: float = 1e-12) -> IntegralResult:
    """½∫ K_{a-b}(√(x²+y²+2xy cosh u)) e^{-(a+b)u/2} ((xe^u+y)/(ye^u+x))^{(a-b)/2} du
    """
    if not (x > 0 and y > 0):
        raise DomainError(f'k_product_rhs needs x, y > 0, got {x}, {y}')
    nu = complex(a) - complex(b)
    mean = 0.5 * (complex(a) + complex(b))
    u_max = math.acosh(max(1., 2500 / (2 * x * y))) + 1.

    def integrand(u: NDArray[np.float64]) -> NDArray[np.complex128]:
        arg = np.sqrt(x * x + y * y + 2 * x * y * np.cosh(u))
        ratio = (x * np.exp(u) + y) / (y * np.exp(u) + x)
        return bessel_k(nu, arg) * np.exp(-mean * u + 0.5 * nu * np.log(ratio))

    return line_trapezoid(integrand, -u_max, u_max, 0.1, tol).scaled(0.5)


def mellin_exp_bessel(nu: complex, a: float, b: float, s: complex) -> complex:
    """∫₀^∞ e^{-ay} K_ν(by) y^{s-1} dy in closed form

    ``√π (2a)^{-s} (b/a)^ν Γ(s+ν)Γ(s-ν)/Γ(s+½) F((s+ν+1)/2, (s+ν)/2; s+½; 1-(b/a)²)``
    """
    s = as_point(s, 's')
    nu = complex(nu)
    if not (a > 0 and b > 0):
        raise DomainError(f'mellin_exp_bessel needs a, b > 0, got {a}, {b}')
    if not s.real > abs(nu.real):
        raise DomainError(f'mellin_exp_bessel needs Re s > |Re ν|, got s={s}, ν={nu}')
    ratio = b / a
    log_pre = (
        0.5 * math.log(math.pi) - s * math.log(2 * a) + nu * math.log(ratio)
        + log_gamma(s + nu) + log_gamma(s - nu) - log_gamma(s + 0.5)
    )
    f = gauss_2f1((s + nu + 1) / 2, (s + nu) / 2, s + 0.5, 1 - ratio * ratio)
    return complex(np.exp(log_pre)) * f


def bessel_mellin_lhs(m: float, n: float, s: complex, r1: float, r2: float, tol: float = 1e-10) -> IntegralResult:
    """∫₀^∞ K_{ir₁}(my) K_{ir₂}(ny) e^{-y} y^s dy/y by the trapezoid rule in log y
    """
    s = as_point(s, 's')
    if not s.real > 0:
        raise DomainError(f'bessel_mellin_lhs needs Re s > 0, got {s}')
    damp = math.exp(-0.5 * math.pi * (abs(r1) + abs(r2)))
    lo = -(-math.log(tol) + 5) / s.real
    hi = math.log(60 / (1 + m + n)) + 2

    def integrand(t: NDArray[np.float64]) -> NDArray[np.complex128]:
        y = np.exp(t)
        k1 = bessel_k_imag_order(r1, m * y, scaled=True)
        k2 = bessel_k_imag_order(r2, n * y, scaled=True)
        return k1 * k2 * np.exp(s * t - y)

    return line_trapezoid(integrand, lo, hi, 0.05, tol).scaled(damp)


def _f21_array(a: complex, b: complex, c: complex, z: NDArray[np.complex128], tol: float) -> NDArray[np.complex128]:
    try:
        return gauss_2f1(a, b, c, z)
    except NonConvergentRegionError:
        pass
    out = np.empty(z.shape, dtype=complex)
    for j, zj in enumerate(z):
        try:
            out[j] = gauss_2f1(a, b, c, zj)
        except NonConvergentRegionError:
            out[j] = barnes_2f1(a, b, c, zj, default_barnes_contour(a, b, zj, tol))
    return out


def bessel_mellin_rhs(m: float, n: float, s: complex, r1: float, r2: float, tol: float = 1e-10) -> IntegralResult:
    """The u-integral form of :func:`bessel_mellin_lhs`

    ``√π 2^{-s-1} Γ(s+ν)Γ(s-ν)/Γ(s+½) ∫ F((s+ν+1)/2, (s+ν)/2; s+½; 1-α²)
    e^{-i(r₁+r₂)u/2} (me^{u/2}+ne^{-u/2})^ν du`` with ``ν = i(r₁-r₂)`` and
    ``α² = m²+n²+2mn cosh u``. For r₁ = r₂ this is the cosine transform
    ``√π 2^{-s} Γ(s)²/Γ(s+½) ∫₀^∞ F cos(ru) du``.

    The integral is taken on ``Im u = -(π-δ)``, where the exponential factor
    has already decayed by ``e^{-(r₁+r₂)(π-δ)/2}``; ``α²`` stays off the
    negative axis for any shift below π.
    """
    s = as_point(s, 's')
    if not (m > 0 and n > 0):
        raise DomainError(f'bessel_mellin_rhs needs m, n > 0, got {m}, {n}')
    if not s.real > 0:
        raise DomainError(f'bessel_mellin_rhs needs Re s > 0, got {s}')
    nu = 1j * (r1 - r2)
    mean = 0.5 * (r1 + r2)
    eta = math.pi - math.pi / (1 + abs(mean))
    fa, fb, fc = (s + nu + 1) / 2, (s + nu) / 2, s + 0.5
    log_pre = (
        0.5 * math.log(math.pi) - (s + 1) * math.log(2)
        + log_gamma(s + nu) + log_gamma(s - nu) - log_gamma(s + 0.5)
    )
    x_max = 2 * (-math.log(tol) + 5) / s.real

    def integrand(x: NDArray[np.float64]) -> NDArray[np.complex128]:
        u = x - 1j * eta
        alpha2 = m * m + n * n + 2 * m * n * np.cosh(u)
        base = m * np.exp(0.5 * u) + n * np.exp(-0.5 * u)
        f = _f21_array(fa, fb, fc, 1 - alpha2, tol)
        return f * np.exp(-1j * mean * u + nu * np.log(base))

    res = line_trapezoid(integrand, -x_max, x_max, 0.05, tol)
    return res.scaled(complex(np.exp(log_pre)))
