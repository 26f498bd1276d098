"""The Picard-type integral

    ℱ_{b,a}(s) = ∫₀¹ cos(b log t) t^{s/2-1} (a t + (1-t)²/2)^{-s/2} dt
               = ∫₀^∞ cos(b u) (a - 1 + cosh u)^{-s/2} du

At ``a = 2`` it is a beta function; at ``a = 0`` it differs from the ``a = 2``
value by ``cos(iπb)/cos(πs/2)``.
"""
from __future__ import annotations
from typing import Literal
from dataclasses import dataclass
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .errors import DomainError, SecantPoleError
from .gamma import log_gamma
from .quadrature import (
    QuadratureSpec, IntegralResult, tanh_sinh, gauss_legendre_panels, line_trapezoid,
)
from .serialization import DataclassSerialize
from .types import as_point

__all__ = (
    'PicardSpec', 'PicardMethod', 'picard_F', 'picard_F_result',
    'picard_closed_a2', 'picard_closed_a0',
)

type PicardMethod = Literal['auto', 'closed', 'cosh', 'interval']

DEFAULT_QUAD = QuadratureSpec(tol=1e-10)


@dataclass(frozen=True)
class PicardSpec(DataclassSerialize):
    b: float
    a: float
    s: complex

    def __post_init__(self):
        object.__setattr__(self, 's', as_point(self.s, 's'))
        if not self.a >= 0:
            raise DomainError(f'Picard offset a must be >= 0, got {self.a}')
        if not self.s.real > 0:
            raise DomainError(f'Picard function needs Re(s) > 0, got s={self.s}')

    @property
    def abs_b(self) -> float:
        # ℱ_{-b,a} = ℱ_{b,a}
        return abs(float(self.b))


def _log_closed_a2(b: float, s: complex) -> complex:
    half = 0.5 * s
    return (
        (half - 1) * math.log(2)
        + log_gamma(half + 1j * b) + log_gamma(half - 1j * b) - log_gamma(s)
    )


def picard_closed_a2(b: float, s: complex) -> complex:
    """2^{s/2-1} Γ(s/2+ib) Γ(s/2-ib) / Γ(s)
    """
    return complex(np.exp(_log_closed_a2(abs(b), as_point(s, 's'))))


def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2 * x)) - math.log(2)


def picard_closed_a0(b: float, s: complex) -> complex:
    """cos(iπb)/cos(πs/2) times the ``a = 2`` closed form
    """
    s = as_point(s, 's')
    cs = complex(np.cos(0.5 * math.pi * s))
    if abs(cs) < 1e-12:
        raise SecantPoleError(f'sec(πs/2) has a pole at s={s}')
    b = abs(b)
    return complex(np.exp(_log_closed_a2(b, s) + _log_cosh(math.pi * b))) / cs


def _cosh_line(spec: PicardSpec, tol: float) -> IntegralResult:
    """Cosh representation for a > 0 along the shifted line Im u = η
    """
    a, b, s = spec.a, spec.abs_b, spec.s
    sigma, t = s.real, s.imag
    eta_max = math.acos(1 - a) if a <= 2 else math.pi
    # the shift damps both tails only while b exceeds |Im s|/2
    if b > 0.5 * abs(t):
        delta = eta_max / (1 + b)
        eta = eta_max - delta
    else:
        delta = eta_max
        eta = 0.
    d = 0.5 * delta
    step = min(0.25, 2 * math.pi * d / (40 + (b + 0.5 * abs(t)) * d))
    x_max = (2 / sigma) * (36 + 0.5 * abs(t) * max(eta, d)) + 5

    def integrand(x: NDArray[np.float64]) -> NDArray[np.complex128]:
        u = x + 1j * eta
        base = a + 2 * np.sinh(0.5 * u) ** 2
        return np.exp(1j * b * u - 0.5 * s * np.log(base))

    logger.debug(f'picard cosh line: {a=} {b=} {s=} {eta=:.4g} {step=:.3g} {x_max=:.4g}')
    res = line_trapezoid(integrand, -x_max, x_max, step, tol, min_levels=1)
    return res.scaled(0.5)


def _cosh_real(spec: PicardSpec, quad: QuadratureSpec) -> IntegralResult:
    """Real-axis cosh representation for a = 0, needing 0 < Re s < 1
    """
    b, s = spec.abs_b, spec.s
    if not s.real < 1:
        raise DomainError('the a = 0 cosh integral converges only for Re(s) < 1')

    def integrand(u: NDArray[np.float64]) -> NDArray[np.complex128]:
        base = 2 * np.sinh(0.5 * u) ** 2
        return np.cos(b * u) * np.exp(-0.5 * s * np.log(base))

    u_max = (2 / s.real) * (-math.log(quad.tol) + 5) + math.log(2)
    # u^{-σ} at the origin: evaluate from the exact distance to 0
    head = tanh_sinh(lambda u, d_lo, _d_hi: integrand(d_lo), 0., 1., tol=quad.tol, with_distances=True)
    panels = max(8, int(math.ceil((u_max - 1) * max(1., b))))
    tail = gauss_legendre_panels(integrand, 1., u_max, panels=panels)
    # |integrand| <= 2^{σ/2} e^{-σu/2} beyond u_max
    trunc = 2 ** (0.5 * s.real) * math.exp(-0.5 * s.real * u_max) / (0.5 * s.real)
    return head + tail + IntegralResult(value=0j, quad_err=0., trunc_err=trunc)


def _interval(spec: PicardSpec, quad: QuadratureSpec) -> IntegralResult:
    """The defining integral over t ∈ (0, 1)

    Geometric Gauss-Legendre panels [e^{-j-1}, e^{-j}] for j >= 1 and tanh-sinh
    on [1/e, 1]. For large b the value is of size e^{-πb} while the integrand
    is of size one, so only absolute accuracy is available.
    """
    a, b, s = spec.a, spec.abs_b, spec.s
    if a == 0 and not s.real < 1:
        raise DomainError('the a = 0 interval integral converges only for Re(s) < 1')
    half = 0.5 * s

    def integrand(t, _d_lo=None, d_hi=None):
        one_minus = (1 - t) if d_hi is None else d_hi
        base = a * t + 0.5 * one_minus ** 2
        logt = np.log(t)
        return np.cos(b * logt) * np.exp((half - 1) * logt - half * np.log(base))

    sig = 0.5 * s.real
    n_panels = int(math.ceil((math.log(2 ** sig / sig) - math.log(quad.tol / 10)) / sig))
    edges = np.exp(-np.arange(n_panels, 0, -1, dtype=float))
    edges = np.append(edges, math.exp(-1.))
    edges = np.unique(edges)
    body = gauss_legendre_panels(integrand, 0., 1., edges=edges)
    top = tanh_sinh(integrand, math.exp(-1.), 1., tol=quad.tol, with_distances=True)
    trunc = 2 ** sig * math.exp(-n_panels * sig) / sig
    return body + top + IntegralResult(value=0j, quad_err=0., trunc_err=trunc)


def picard_F_result(
    spec: PicardSpec,
    quad: QuadratureSpec = DEFAULT_QUAD,
    method: PicardMethod = 'auto',
) -> IntegralResult:
    """Evaluate ℱ_{b,a}(s) and report an error estimate

    Arguments:
        method: ``'closed'`` (a ∈ {0, 2} only), ``'cosh'``, ``'interval'``
            or ``'auto'`` (closed form when available, else ``'cosh'``)
    """
    a = spec.a
    if method == 'auto':
        method = 'closed' if a in (0., 2.) else 'cosh'
    if method == 'closed':
        if a == 2:
            value = picard_closed_a2(spec.b, spec.s)
        elif a == 0:
            value = picard_closed_a0(spec.b, spec.s)
        else:
            raise DomainError(f'no closed form for a={a}')
        return IntegralResult(value=value, quad_err=0.)
    if method == 'cosh':
        if a == 0:
            return _cosh_real(spec, quad)
        return _cosh_line(spec, quad.tol)
    if method == 'interval':
        return _interval(spec, quad)
    raise DomainError(f'unknown Picard method: {method!r}')


def picard_F(spec: PicardSpec, quad: QuadratureSpec = DEFAULT_QUAD, method: PicardMethod = 'auto') -> complex:
    return picard_F_result(spec, quad, method).value
