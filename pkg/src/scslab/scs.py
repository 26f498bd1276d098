"""Shifted convolution sums and their Perron reproductions

The smoothed sum over ``√|n(n+h)| < T`` carries the weight
``(log(T/√|n(n+h)|))^{3/2+ε}``, which vanishes where a term enters; the sharp
sum over ``√|n(n+h)| < x`` has weight 1.
"""
from __future__ import annotations
from typing import Any, Mapping
from dataclasses import dataclass, field
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .errors import BasisCoverageError, DomainError
from .gamma import gamma
from .innerprod import PairingResult
from .lfun import (
    MainTermSpec, ShiftedConvolutionSpec, dirichlet_terms, spectral_main_term_f, weyl_budget,
)
from .maassdata import SpectralBasis, hecke_coefficient
from .quadrature import ContourSpec, vertical_line_integral
from .serialization import DataclassSerialize

__all__ = (
    'PerronSpec', 'PerronResult', 'SCSResult', 'scs_terms', 'smoothed_scs', 'sharp_scs',
    'perron_kernel', 'perron_integral', 'select_gap_height', 'compare_main_term',
    'compare_sharp', 'smoothed_envelope', 'sharp_envelope', 'exponent_fit',
    'sharp_perron_height', 'snap_cutoff', 'weyl_budget', 'MAX_PERRON_HEIGHT',
)

MAX_PERRON_HEIGHT = 400.
MIN_PERRON_HEIGHT = 12.
PERRON_TOL = 1e-6


@dataclass(frozen=True)
class PerronSpec(DataclassSerialize):
    """The truncated line ``a ± iT`` and the exponent c of ``X^s/s^c``
    """
    a: float
    T: float
    c: float
    step: float = 0.25
    tol: float = PERRON_TOL

    def __post_init__(self):
        if not self.a > 1:
            raise DomainError(f'Perron abscissa must exceed 1, got {self.a}')
        if not self.T > 10:
            raise DomainError(f'Perron height must exceed 10, got {self.T}')
        if not self.c >= 1:
            raise DomainError(f'Perron exponent must be >= 1, got {self.c}')

    @classmethod
    def smoothed(cls, spec: ShiftedConvolutionSpec, a: float = 1.15, T: float = 50.) -> PerronSpec:
        return cls(a=a, T=T, c=2.5 + spec.eps)

    @classmethod
    def sharp(cls, a: float, T: float) -> PerronSpec:
        return cls(a=a, T=T, c=1.)

    def contour(self) -> ContourSpec:
        return ContourSpec(beta=self.a, t_max=self.T, step=self.step, tol=self.tol)


@dataclass
class PerronResult(DataclassSerialize):
    """A Perron integral with its truncation budget

    ``value`` approximates ``(1/2πi)∫ L_h(s) X^s/s^c ds`` over the whole line;
    ``budget`` is the explicit bound on the part beyond height T.
    """
    value: complex
    quad_err: float
    budget: float
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class SCSResult(DataclassSerialize):
    """One row of a main-term comparison

    Attributes:
        cutoff: T for smoothed sums, x for sharp sums
        direct_sum: The sum itself
        perron_value: Perron reproduction, when computed
        main_term: f(T)T^{1/2}, or 0 for sharp sums
        remainder: ``direct_sum - main_term``
        budgets: ``tail`` (series or truncation tail) and ``envelope``
            (error envelope without constant)
        gap: Distance from the cutoff to the nearest r_k, when known
    """
    cutoff: float
    direct_sum: float
    main_term: float
    budgets: dict[str, float]
    perron_value: complex|None = None
    gap: float|None = None
    snapped: bool = False
    remainder: float = field(init=False)

    def __post_init__(self):
        self.remainder = self.direct_sum - self.main_term
        assert all(math.isfinite(v) for v in self.budgets.values()), self.budgets

    def _iter_ser_fields(self):
        for name in super()._iter_ser_fields():
            if name != 'remainder':
                yield name


def _coefficient(form, n: int) -> complex:
    val = form.c1 * hecke_coefficient(form, abs(n))
    return val * form.sign if n < 0 else val


def scs_terms(spec: ShiftedConvolutionSpec, cutoff: float) -> tuple[NDArray[np.int64], NDArray[np.complex128], NDArray[np.float64]]:
    """Indices with ``√|n(n+h)| < cutoff``, their ``C₁(n)C₂(n+h)`` and ``√|n(n+h)|``
    """
    spec.require_normalized()
    h = spec.h
    hi = int(math.ceil((h + math.sqrt(h * h + 4 * cutoff * cutoff)) / 2)) + 1
    ns = np.arange(-hi, hi + 1)
    ns = ns[(ns != 0) & (ns != -h)]
    norms = np.sqrt(np.abs(ns * (ns + h)).astype(float))
    keep = norms < cutoff
    ns, norms = ns[keep], norms[keep]
    coeffs = np.array(
        [_coefficient(spec.Phi1, int(n)) * _coefficient(spec.Phi2, int(n) + h) for n in ns],
        dtype=complex,
    )
    return ns, coeffs, norms


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-12 * max(1., abs(value.real)):
        logger.warning(f'{what} has imaginary part {value.imag:.3g}')
    return float(value.real)


def smoothed_scs(spec: ShiftedConvolutionSpec, T: float) -> float:
    """Σ_{√|n(n+h)|<T} C₁(n)C₂(n+h) (log(T/√|n(n+h)|))^{3/2+ε}
    """
    if not T > 1:
        raise DomainError(f'smoothed_scs needs T > 1, got {T}')
    _, coeffs, norms = scs_terms(spec, T)
    weights = np.log(T / norms) ** (1.5 + spec.eps)
    return _real(complex(np.sum(coeffs * weights)), f'smoothed sum at T={T}')


def sharp_scs(spec: ShiftedConvolutionSpec, x: float) -> float:
    """Σ_{√|n(n+h)|<x} C₁(n)C₂(n+h)
    """
    if not x > 1:
        raise DomainError(f'sharp_scs needs x > 1, got {x}')
    _, coeffs, _ = scs_terms(spec, x)
    return _real(complex(np.sum(coeffs)), f'sharp sum at x={x}')


def _kernel(s: NDArray[np.complex128], log_X: float, c: float) -> NDArray[np.complex128]:
    return np.exp(s * log_X - c * np.log(s))


def perron_kernel(cutoff: float, pspec: PerronSpec) -> PerronResult:
    """(1/2πi)∫ X^s/s^c ds on the truncated line, for the identity
    ``(log X)^{c-1}/Γ(c)`` (X > 1) or 0 (X < 1)
    """
    log_X = math.log(cutoff)
    res = vertical_line_integral(lambda s: _kernel(s, log_X, pspec.c), pspec.contour())
    budget = float(cutoff ** pspec.a * _tail_factor(pspec, log_X))
    return PerronResult(value=res.value, quad_err=res.err, budget=budget, params={'cutoff': cutoff})


def _tail_factor(pspec: PerronSpec, log_ratio: float|NDArray) -> float|NDArray:
    """Bound on |(1/2πi)∫_{|t|>T} Y^s/s^c ds| divided by Y^a, ``Y = e^{log_ratio}``"""
    T = pspec.T
    if pspec.c > 1:
        return T ** (1 - pspec.c) / (math.pi * (pspec.c - 1))
    # integrating by parts once against Y^{it}
    return np.minimum(1., 1 / (math.pi * T * np.maximum(np.abs(log_ratio), 1e-300)))


def perron_integral(spec: ShiftedConvolutionSpec, pspec: PerronSpec, cutoff: float, N_max: int|None = None) -> PerronResult:
    """(1/2πi)∫ L_h(s) X^s/s^c ds on ``a ± iT`` with L_h from its Dirichlet series

    The budget sums the termwise truncation bounds
    ``|C₁(n)C₂(n+h)| (X/√|n(n+h)|)^a · tail(T)``, the same for every n when
    c > 1 and ``min(1, 1/(πT|log(X/√|n(n+h)|)|))`` when c = 1.
    """
    if not cutoff > 0:
        raise DomainError(f'cutoff must be positive, got {cutoff}')
    if N_max is None:
        N_max = min(int(4 * cutoff) + 8 * spec.h + 50, _available(spec))
    terms = dirichlet_terms(spec, N_max)
    log_X = math.log(cutoff)
    logger.info(f'Perron integral h={spec.h} X={cutoff:g} a={pspec.a} T={pspec.T:g} c={pspec.c:g} N={N_max}')

    def integrand(s: NDArray[np.complex128]) -> NDArray[np.complex128]:
        return terms.evaluate(s, spec.delta) * _kernel(s, log_X, pspec.c)

    res = vertical_line_integral(integrand, pspec.contour())
    log_ratio = log_X - terms.log_norm
    budget = float(np.sum(np.abs(terms.coeffs) * np.exp(pspec.a * log_ratio) * _tail_factor(pspec, log_ratio)))
    return PerronResult(
        value=res.value, quad_err=res.err, budget=budget,
        params={'h': spec.h, 'cutoff': cutoff, 'N_max': N_max, 'levels': res.levels, 'step': res.step},
    )


def _available(spec: ShiftedConvolutionSpec) -> int:
    return min(spec.Phi1.max_index, spec.Phi2.max_index - spec.h)


def _min_gap(t: float, rs: NDArray[np.float64]) -> float:
    return float(np.min(np.abs(rs - t))) if rs.size else math.inf


def select_gap_height(basis: SpectralBasis, T_target: float) -> float:
    """The height in ``[T, T+1]`` farthest from every loaded r_k

    Ties go to the leftmost candidate; a window free of r_k gives its
    midpoint.

    Raises:
        BasisCoverageError: the basis stops below ``T_target + 1``
    """
    lo, hi = float(T_target), float(T_target) + 1
    basis.require_cover(lo, hi)
    rs = np.sort(basis.r_values)
    inside = rs[(rs >= lo) & (rs <= hi)]
    if inside.size == 0:
        best = lo + 0.5
    else:
        candidates = [lo, hi]
        candidates += [0.5 * (a + b) for a, b in zip(rs[:-1], rs[1:]) if lo <= 0.5 * (a + b) <= hi]
        candidates.sort()
        gaps = [_min_gap(t, rs) for t in candidates]
        top = max(gaps)
        best = next(t for t, g in zip(candidates, gaps) if g >= top)
    gap = _min_gap(best, rs)
    if gap < 1 / (4 * best):
        logger.warning(f'gap height {best:.6f} is only {gap:.3g} from the spectrum (< 1/(4T))')
    return best


def smoothed_envelope(h: int, T: float, eps: float) -> float:
    """h^{1-ε}T^ε + h^{1+ε}T^{-2-2ε}"""
    return h ** (1 - eps) * T ** eps + h ** (1 + eps) * T ** (-2 - 2 * eps)


def sharp_envelope(h: int, x: float, eps: float, theta: float) -> float:
    """h^{2θ/3+ε}x^{2(1+θ)/3+ε} + h^{½+ε}x^{½+2θ+ε} + h^{1+ε}x^ε"""
    return (
        h ** (2 * theta / 3 + eps) * x ** (2 * (1 + theta) / 3 + eps)
        + h ** (0.5 + eps) * x ** (0.5 + 2 * theta + eps)
        + h ** (1 + eps) * x ** eps
    )


def compare_main_term(
    spec: ShiftedConvolutionSpec,
    T_grid: list[float],
    basis: SpectralBasis,
    triples: Mapping[int, PairingResult],
    K_max: int|None = None,
    snap: bool = True,
    pspec: PerronSpec|None = None,
) -> list[SCSResult]:
    """Smoothed sum against f(T)T^{1/2} at every grid height

    Heights are moved to :func:`select_gap_height` where the basis covers
    the window and kept (with a warning) where it does not. With *pspec*
    the Perron integral at each height is added, scaled by Γ(5/2+ε) so that
    it estimates the smoothed sum.
    """
    heights: list[tuple[float, bool]] = []
    for T in T_grid:
        if snap:
            try:
                heights.append((select_gap_height(basis, T), True))
                continue
            except BasisCoverageError as exc:
                logger.warning(f'T={T}: {exc}; comparing at the unsnapped height')
        heights.append((float(T), False))
    mts = MainTermSpec(T_grid=tuple(sorted(t for t, _ in heights)), K_max=K_max)
    main = spectral_main_term_f(spec, mts, basis, triples)
    f = dict(main.pairs())
    tail = main.tail
    gam = gamma(2.5 + spec.eps).real
    rs = basis.r_values
    out = []
    for T, snapped in heights:
        perron = None
        if pspec is not None:
            perron = gam * perron_integral(spec, pspec, T).value
        out.append(SCSResult(
            cutoff=T,
            direct_sum=smoothed_scs(spec, T),
            main_term=f[T] * math.sqrt(T),
            budgets={'tail': tail * math.sqrt(T), 'envelope': smoothed_envelope(spec.h, T, spec.eps)},
            perron_value=perron,
            gap=_min_gap(T, rs),
            snapped=snapped,
        ))
        logger.debug(f'compare T={T:.6f}: remainder {out[-1].remainder:.6g}')
    return out


def compare_sharp(spec: ShiftedConvolutionSpec, xs: list[float], a: float = 1.15, with_perron: bool = True) -> list[SCSResult]:
    """Sharp sums at ``⌊x⌋ + 1/3`` with the Perron reproduction at the height of :func:`sharp_perron_height`
    """
    out = []
    for x in xs:
        xs_ = snap_cutoff(x)
        perron = None
        budget = 0.
        if with_perron:
            T = sharp_perron_height(spec.h, xs_, spec.theta, spec.eps)
            res = perron_integral(spec, PerronSpec.sharp(a, T), xs_)
            perron, budget = res.value, res.budget + res.quad_err
        out.append(SCSResult(
            cutoff=xs_,
            direct_sum=sharp_scs(spec, xs_),
            main_term=0.,
            budgets={'tail': budget, 'envelope': sharp_envelope(spec.h, xs_, spec.eps, spec.theta)},
            perron_value=perron,
            snapped=xs_ != x,
        ))
    return out


def exponent_fit(x: NDArray|list[float], y: NDArray|list[float]) -> tuple[float, float]:
    """Least-squares fit ``|y| ≈ C·x^α`` in log-log scale, skipping zeros

    Returns:
        ``(α, C)``
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2:
        raise DomainError('exponent_fit needs at least two nonzero points')
    slope, intercept = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope), float(math.exp(intercept))


def sharp_perron_height(h: int, x: float, theta: float, eps: float) -> float:
    """T = h^{-(2θ/3+ε)} x^{1/3+4θ/3}, kept inside [12, 400]"""
    T = h ** (-(2 * theta / 3 + eps)) * x ** (1 / 3 + 4 * theta / 3)
    clipped = min(MAX_PERRON_HEIGHT, max(MIN_PERRON_HEIGHT, T))
    if clipped != T:
        logger.debug(f'sharp Perron height {T:.4g} clipped to {clipped:g}')
    return clipped


def snap_cutoff(x: float) -> float:
    """⌊x⌋ + 1/3"""
    return math.floor(x) + 1 / 3
