"""Generic quadrature engines shared by every numerical module.

Integrands are always evaluated on whole ``numpy`` arrays of abscissas so that
the expensive special-function calls can be vectorised by the caller.

Three engines are provided:

* :func:`tanh_sinh` for finite intervals with (possibly singular) endpoints
* :func:`gauss_legendre_panels` for smooth integrands on finite intervals
* :func:`line_trapezoid` / :func:`vertical_line_integral` for analytic
  integrands decaying along a (truncated) line, where the plain trapezoid
  rule converges exponentially
"""
from __future__ import annotations
from typing import Callable, Iterator
from dataclasses import dataclass, field
import functools
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .errors import DomainError, NonFiniteIntegrandError, QuadratureError
from .serialization import DataclassSerialize
from .types import QuadScheme, QuadSchemes

__all__ = (
    'QuadratureSpec', 'ContourSpec', 'IntegralResult', 'tanh_sinh',
    'gauss_legendre_panels', 'integrate', 'line_trapezoid', 'line_trapezoid_batch',
    'vertical_line_integral',
)

type RealArray = NDArray[np.float64]
type Integrand = Callable[[RealArray], NDArray]
type DistanceIntegrand = Callable[[RealArray, RealArray, RealArray], NDArray]

TANH_SINH_TMAX = 4.5
TANH_SINH_MAX_LEVEL = 10


@dataclass(frozen=True)
class QuadratureSpec(DataclassSerialize):
    """Parameters for interval and semi-infinite integrals

    Attributes:
        scheme: Quadrature rule for finite pieces
        panels: Number of Gauss-Legendre panels (ignored by tanh-sinh)
        tol: Relative tolerance
        cutoff: Upper limit used to truncate semi-infinite integrals
    """
    scheme: QuadScheme = 'tanh-sinh'
    panels: int = 12
    tol: float = 1e-10
    cutoff: float = 40.

    def __post_init__(self):
        if self.scheme not in QuadSchemes:
            raise DomainError(f'unknown quadrature scheme: {self.scheme!r}')
        if not 0 < self.tol < 1:
            raise DomainError(f'tol must lie in (0, 1), got {self.tol}')
        if self.panels < 1:
            raise DomainError(f'panels must be positive, got {self.panels}')
        if not self.cutoff > 0:
            raise DomainError(f'cutoff must be positive, got {self.cutoff}')


@dataclass(frozen=True)
class ContourSpec(DataclassSerialize):
    """A truncated vertical line ``Re(w) = beta, |Im(w)| <= t_max``
    """
    beta: float
    t_max: float = 40.
    step: float = 0.25
    tol: float = 1e-6

    def __post_init__(self):
        if not self.t_max > 0:
            raise DomainError(f't_max must be positive, got {self.t_max}')
        if not 0 < self.step <= 0.25:
            raise DomainError(f'step must lie in (0, 0.25], got {self.step}')
        if not 0 < self.tol < 1:
            raise DomainError(f'tol must lie in (0, 1), got {self.tol}')


@dataclass
class IntegralResult(DataclassSerialize):
    """A quadrature value with its error estimate

    ``err`` is the sum of the discretisation estimate ``quad_err`` and the
    truncation estimate ``trunc_err``.
    """
    value: complex
    quad_err: float
    trunc_err: float = 0.
    step: float = math.nan
    levels: int = 0
    evaluations: int = 0
    err: float = field(init=False)

    def __post_init__(self):
        self.err = float(self.quad_err) + float(self.trunc_err)

    def _iter_ser_fields(self) -> Iterator[str]:
        for name in super()._iter_ser_fields():
            if name != 'err':
                yield name

    def scaled(self, factor: complex) -> IntegralResult:
        """Multiply value and errors by a constant
        """
        a = abs(factor)
        return IntegralResult(
            value=self.value * factor,
            quad_err=self.quad_err * a,
            trunc_err=self.trunc_err * a,
            step=self.step,
            levels=self.levels,
            evaluations=self.evaluations,
        )

    def __add__(self, other: IntegralResult) -> IntegralResult:
        return IntegralResult(
            value=self.value + other.value,
            quad_err=self.quad_err + other.quad_err,
            trunc_err=self.trunc_err + other.trunc_err,
            step=min(self.step, other.step),
            levels=max(self.levels, other.levels),
            evaluations=self.evaluations + other.evaluations,
        )


def _check_finite(values: NDArray, abscissas: NDArray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise NonFiniteIntegrandError(abscissas[idx].item())


@functools.cache
def _leggauss(order: int) -> tuple[RealArray, RealArray]:
    return np.polynomial.legendre.leggauss(order)


@functools.cache
def _tanh_sinh_level(level: int) -> tuple[RealArray, RealArray, RealArray, RealArray]:
    """Nodes added at *level* on [-1, 1]

    Returns ``(x, dist_lo, dist_hi, weights)`` where the distances are to the
    endpoints -1 and 1, computed without cancellation.
    """
    h = 2.0 ** -level
    n = int(TANH_SINH_TMAX / h)
    j = np.arange(-n, n + 1)
    if level > 0:
        j = j[j % 2 != 0]
    t = j * h
    u = 0.5 * np.pi * np.sinh(t)
    dist_lo = 2. / (1. + np.exp(-2. * u))
    dist_hi = 2. / (1. + np.exp(2. * u))
    x = np.where(u < 0, -1. + dist_lo, 1. - dist_hi)
    w = 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    return x, dist_lo, dist_hi, w


def tanh_sinh(
    f: Integrand|DistanceIntegrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    with_distances: bool = False,
    min_level: int = 3,
    max_level: int = TANH_SINH_MAX_LEVEL,
) -> IntegralResult:
    """Double-exponential quadrature on ``[a, b]``

    Arguments:
        f: Vectorised integrand. With ``with_distances`` it is called as
            ``f(x, x - a, b - x)`` so endpoint singularities can be evaluated
            from the exact distances
        tol: Relative tolerance on successive level differences

    Returns:
        An :class:`IntegralResult` whose ``quad_err`` is the last level change
    """
    if not b > a:
        raise DomainError(f'tanh_sinh needs a < b, got [{a}, {b}]')
    half = 0.5 * (b - a)
    total = 0j
    prev: complex|None = None
    delta = math.inf
    evaluations = 0
    for level in range(max_level + 1):
        x, d_lo, d_hi, w = _tanh_sinh_level(level)
        xs = a + half * (x + 1.)
        if with_distances:
            vals = f(xs, half * d_lo, half * d_hi)      # type: ignore[call-arg]
        else:
            vals = f(xs)                                # type: ignore[call-arg]
        vals = np.asarray(vals)
        mask = w > 0
        _check_finite(vals[mask], xs[mask])
        evaluations += xs.size
        total += complex(np.sum(np.where(mask, vals * w, 0)))
        value = total * half * 2.0 ** -level
        if prev is not None:
            delta = abs(value - prev)
            if level >= min_level and delta <= tol * abs(value):
                return IntegralResult(
                    value=value, quad_err=delta, step=2.0 ** -level,
                    levels=level, evaluations=evaluations,
                )
        prev = value
    if delta <= 10 * tol * abs(value) or delta < 1e-300:
        logger.debug(f'tanh_sinh on [{a}, {b}] accepted at max level: {delta=}')
        return IntegralResult(
            value=value, quad_err=delta, step=2.0 ** -max_level,
            levels=max_level, evaluations=evaluations,
        )
    raise QuadratureError(
        f'tanh_sinh on [{a}, {b}] did not reach tol={tol}', achieved=delta,
    )


def _gl_sum(f: Integrand, edges: RealArray, order: int) -> complex:
    nodes, weights = _leggauss(order)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = (mid + half * nodes[None, :]).ravel()
    vals = np.asarray(f(xs))
    _check_finite(vals, xs)
    return complex(np.sum(vals.reshape(half.shape[0], -1) * (half * weights[None, :])))


def gauss_legendre_panels(
    f: Integrand,
    a: float,
    b: float,
    panels: int = 12,
    order: int = 20,
    edges: RealArray|None = None,
) -> IntegralResult:
    """Composite Gauss-Legendre rule with *panels* equal panels on ``[a, b]``

    The error estimate is the change when every panel is split in two. Custom
    (for instance geometric) panel *edges* may be passed instead.
    """
    if edges is None:
        if not b > a:
            raise DomainError(f'gauss_legendre_panels needs a < b, got [{a}, {b}]')
        edges = np.linspace(a, b, panels + 1)
    edges = np.asarray(edges, dtype=float)
    coarse = _gl_sum(f, edges, order)
    fine_edges = np.empty(2 * edges.size - 1)
    fine_edges[0::2] = edges
    fine_edges[1::2] = 0.5 * (edges[:-1] + edges[1:])
    fine = _gl_sum(f, fine_edges, order)
    return IntegralResult(
        value=fine,
        quad_err=abs(fine - coarse),
        step=float(np.max(np.diff(edges))) / 2,
        levels=1,
        evaluations=3 * order * (edges.size - 1),
    )


def integrate(f: Integrand, a: float, b: float, quad: QuadratureSpec) -> IntegralResult:
    """Integrate over ``[a, b]`` with the rule named by *quad*
    """
    if quad.scheme == 'tanh-sinh':
        return tanh_sinh(f, a, b, tol=quad.tol)
    return gauss_legendre_panels(f, a, b, panels=quad.panels)


def _tail_estimate(vals: NDArray, step: float) -> float:
    """Mass of the outermost tenth of the samples at either end
    """
    n = max(2, vals.size // 10)
    mags = np.abs(vals)
    return float(step * (np.sum(mags[:n]) + np.sum(mags[-n:])))


def line_trapezoid(
    f: Integrand,
    lo: float,
    hi: float,
    step: float,
    tol: float,
    max_levels: int = 6,
    min_levels: int = 1,
) -> IntegralResult:
    """Trapezoid rule on ``[lo, hi]`` for an integrand negligible at both ends

    The step is halved (reusing all previous samples) until successive values
    differ by less than ``tol`` relative to the integral of ``|f|``. The
    truncation estimate is the integrand mass in the last tenth of the range
    at either end.
    """
    if not hi > lo:
        raise DomainError(f'line_trapezoid needs lo < hi, got [{lo}, {hi}]')
    n = max(2, int(math.ceil((hi - lo) / step)))
    h = (hi - lo) / n
    xs = lo + h * np.arange(n + 1)
    vals = np.asarray(f(xs))
    _check_finite(vals, xs)
    endw = np.ones(n + 1)
    endw[0] = endw[-1] = 0.5
    total = complex(np.sum(vals * endw))
    abs_total = float(np.sum(np.abs(vals) * endw))
    value = total * h
    trunc = _tail_estimate(vals, h)
    evaluations = xs.size
    delta = math.inf
    for level in range(1, max_levels + 1):
        mids = lo + h * (np.arange(n) + 0.5)
        mvals = np.asarray(f(mids))
        _check_finite(mvals, mids)
        evaluations += mids.size
        total += complex(np.sum(mvals))
        abs_total += float(np.sum(np.abs(mvals)))
        n *= 2
        h *= 0.5
        new_value = total * h
        delta = abs(new_value - value)
        value = new_value
        scale = max(abs(value), abs_total * h)
        logger.debug(f'line_trapezoid level {level}: {h=:.3g} {delta=:.3g} {scale=:.3g}')
        if level >= min_levels and delta <= tol * scale:
            return IntegralResult(
                value=value, quad_err=delta, trunc_err=trunc,
                step=h, levels=level, evaluations=evaluations,
            )
    raise QuadratureError(
        f'line_trapezoid on [{lo}, {hi}] did not reach tol={tol} after {max_levels} halvings',
        achieved=delta,
    )


def line_trapezoid_batch(
    f: Callable[[RealArray], NDArray],
    lo: float,
    hi: float,
    step: float,
    tol: float,
    max_levels: int = 6,
) -> tuple[NDArray[np.complex128], NDArray[np.float64], NDArray[np.float64]]:
    """:func:`line_trapezoid` for a family of integrands sharing the abscissas

    *f* maps ``xs`` of shape ``(n,)`` to values of shape ``(k, n)``.

    Returns:
        ``(values, quad_errs, trunc_errs)``, each of shape ``(k,)``
    """
    if not hi > lo:
        raise DomainError(f'line_trapezoid_batch needs lo < hi, got [{lo}, {hi}]')
    n = max(2, int(math.ceil((hi - lo) / step)))
    h = (hi - lo) / n
    xs = lo + h * np.arange(n + 1)
    vals = np.asarray(f(xs))
    _check_finite(vals, np.broadcast_to(xs, vals.shape))
    endw = np.ones(n + 1)
    endw[0] = endw[-1] = 0.5
    total = np.sum(vals * endw, axis=-1)
    abs_total = np.sum(np.abs(vals) * endw, axis=-1)
    value = total * h
    edge = max(2, vals.shape[-1] // 10)
    mags = np.abs(vals)
    trunc = h * (np.sum(mags[:, :edge], axis=-1) + np.sum(mags[:, -edge:], axis=-1))
    delta = np.full(value.shape, math.inf)
    for level in range(1, max_levels + 1):
        mids = lo + h * (np.arange(n) + 0.5)
        mvals = np.asarray(f(mids))
        _check_finite(mvals, np.broadcast_to(mids, mvals.shape))
        total = total + np.sum(mvals, axis=-1)
        abs_total = abs_total + np.sum(np.abs(mvals), axis=-1)
        n *= 2
        h *= 0.5
        new_value = total * h
        delta = np.abs(new_value - value)
        value = new_value
        scale = np.maximum(np.abs(value), abs_total * h)
        worst = float(np.max(delta / np.where(scale > 0, scale, 1.)))
        logger.debug(f'line_trapezoid_batch level {level}: {h=:.3g} worst relative change {worst:.3g}')
        if worst <= tol:
            return value, delta, trunc
    raise QuadratureError(
        f'line_trapezoid_batch on [{lo}, {hi}] did not reach tol={tol} after {max_levels} halvings',
        achieved=float(np.max(delta)),
    )


def vertical_line_integral(f: Callable[[NDArray[np.complex128]], NDArray], contour: ContourSpec) -> IntegralResult:
    """``(1/2πi)∫ f(w) dw`` over ``Re(w) = beta, |Im(w)| <= t_max``

    Arguments:
        f: Vectorised integrand taking an array of complex ``w``

    Raises:
        NonFiniteIntegrandError: carrying the offending ordinate ``Im(w)``
    """
    beta = contour.beta

    def g(t: RealArray) -> NDArray:
        return np.asarray(f(beta + 1j * t))

    res = line_trapezoid(
        g, -contour.t_max, contour.t_max, contour.step, contour.tol,
    )
    return res.scaled(1 / (2 * math.pi))
