"""Shifted convolution L-functions

``L_h(s) = Σ_{n ≠ 0, -h} C₁(n) C₂(n+h) |n|^{-s/2} |n+h|^{-s/2+iδ}`` with
``δ = r₁ - r₂``, its kernel-twisted companion ``L_h^#``, the continuation to
``Re s > 0.1`` through ``⟨P_h(·, s), Φ̄₁Φ₂⟩``, the residues at ``½ ± ir_k`` and
the spectral main term ``f(T)`` of the smoothed sum.
"""
from __future__ import annotations
from typing import Literal, Mapping
from dataclasses import dataclass, field
import functools
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .automorphic import TruncatedDomain
from .errors import (
    BudgetOverflowError, DomainError, KernelEvaluationError, LabError,
    MissingTripleProductError, PoleProximityError, UnnormalizedFormError,
)
from .gamma import beta, gamma, log_gamma
from .hypergeom import gauss_2f1, gauss_2f1_boundary
from .innerprod import (
    GeometricSpec, PairingResult, SpectralSpec, geometric_side, spectral_side,
)
from .maassdata import MaassForm, SpectralBasis, fourier_coefficient, hecke_array
from .picard import PicardSpec, picard_F
from .serialization import DataclassSerialize
from .types import DEFAULT_EPS, THETA, Sign, as_point, sign_value

__all__ = (
    'ShiftedConvolutionSpec', 'ResidueDatum', 'MainTermSpec', 'MainTermResult', 'LValue',
    'DirichletTerms', 'dirichlet_terms', 'default_dirichlet_n_max', 'lh_dirichlet',
    'lh_dirichlet_many', 'lh_sharp', 'lh_continued', 'continuation_factor',
    'poincare_pole_residue', 'residue_at_pole', 'residue_at_pole_equal',
    'spectral_main_term_f', 'weyl_budget', 'o_band',
)

DEFAULT_N_MAX = 4000
O_CONSTANT = 10.
POLE_RADIUS = 0.02
CONTINUATION_FLOOR = 0.1
DIRICHLET_ABOVE = 1.1
CHUNK = 256

type LRoute = Literal['auto', 'dirichlet', 'spectral', 'geometric']
type SharpMethod = Literal['auto', 'product', 'termwise']


@dataclass(frozen=True)
class ShiftedConvolutionSpec(DataclassSerialize):
    """The pair (Φ₁, Φ₂) with a shift h

    Attributes:
        h: The shift, a positive integer
        Phi1: First form, coefficients C₁(n)
        Phi2: Second form, coefficients C₂(n+h)
        eps: The ε of the smoothed weight ``(log(T/√|n(n+h)|))^{3/2+ε}``
        theta: Ramanujan-Petersson exponent, 7/64 or 0
        o_constant: Constant of the error band of :func:`lh_continued`
    """
    h: int
    Phi1: MaassForm
    Phi2: MaassForm
    eps: float = DEFAULT_EPS
    theta: float = THETA
    o_constant: float = O_CONSTANT

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 1:
            raise DomainError(f'shift h must be a positive integer, got {self.h}')
        object.__setattr__(self, 'h', int(self.h))
        if not 0 < self.eps < 0.5:
            raise DomainError(f'eps must lie in (0, 0.5), got {self.eps}')
        if self.theta not in (THETA, 0.):
            raise DomainError(f'theta must be {THETA} or 0, got {self.theta}')
        if not self.o_constant > 0:
            raise DomainError(f'o_constant must be positive, got {self.o_constant}')

    @property
    def r1(self) -> float:
        return self.Phi1.r

    @property
    def r2(self) -> float:
        return self.Phi2.r

    @property
    def delta(self) -> float:
        return self.Phi1.r - self.Phi2.r

    @property
    def equal_parameters(self) -> bool:
        return self.delta == 0

    def require_normalized(self) -> None:
        for form in (self.Phi1, self.Phi2):
            if form.c1 is None:
                raise UnnormalizedFormError(f'form {form.label()} has no c1; normalize it first')


class LValue(PairingResult):
    """An L-function value with its error band"""


@dataclass(frozen=True)
class ResidueDatum(DataclassSerialize):
    k: int
    sign: Sign
    pole: complex
    value: complex
    err: float = 0.

    def __post_init__(self):
        assert self.pole.real == 0.5, self.pole
        assert np.isfinite(self.value), self.value


@dataclass(frozen=True)
class MainTermSpec(DataclassSerialize):
    """Heights T at which f(T) is tabulated and the basis depth K_max"""
    T_grid: tuple[float, ...]
    K_max: int|None = None

    def __post_init__(self):
        grid = tuple(float(T) for T in self.T_grid)
        object.__setattr__(self, 'T_grid', grid)
        if not grid:
            raise DomainError('T_grid is empty')
        if any(not T > 1 for T in grid):
            raise DomainError(f'every T must exceed 1, got {grid}')
        if list(grid) != sorted(grid):
            raise DomainError('T_grid must be sorted ascending')
        if self.K_max is not None and self.K_max < 1:
            raise DomainError(f'K_max must be positive, got {self.K_max}')


@dataclass(frozen=True)
class MainTermResult(DataclassSerialize):
    """f(T) on a grid with the per-form term sizes and the series tail

    ``term_magnitudes[k-1]`` is the largest ``|Γ(c)(T^{ir}R⁺/ρ⁺^c + T^{-ir}R⁻/ρ⁻^c)|``
    over the grid.
    """
    T_grid: tuple[float, ...]
    values: tuple[float, ...]
    term_magnitudes: tuple[float, ...]
    tail: float
    K_max: int
    params: dict = field(default_factory=dict)

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.T_grid, self.values))


@dataclass(frozen=True, eq=False)
class DirichletTerms:
    """The coefficients of L_h up to ``|n| <= N``

    Attributes:
        ns: Indices, ``1..N`` then ``-1..-N`` without ``-h``
        coeffs: ``C₁(n) C₂(n+h)``
        log_norm: ``½ log|n(n+h)|``
        log_shift: ``log|n+h|``
    """
    N: int
    ns: NDArray[np.int64]
    coeffs: NDArray[np.complex128]
    log_norm: NDArray[np.float64]
    log_shift: NDArray[np.float64]

    def evaluate(self, s: NDArray[np.complex128], delta: float) -> NDArray[np.complex128]:
        """Σ coeffs·exp(-s·log_norm + iδ·log_shift) for every s, shape ``(len(s), len(ns))`` summed"""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        twisted = self.coeffs * np.exp(1j * delta * self.log_shift)
        out = np.empty(s.shape, dtype=complex)
        for start in range(0, s.size, CHUNK):
            block = s[start:start + CHUNK]
            out[start:start + CHUNK] = np.exp(-np.outer(block, self.log_norm)) @ twisted
        return out


def _available(spec: ShiftedConvolutionSpec) -> int:
    return min(spec.Phi1.max_index, spec.Phi2.max_index - spec.h)


def default_dirichlet_n_max(spec: ShiftedConvolutionSpec) -> int:
    """All the coefficient data, up to :data:`DEFAULT_N_MAX`"""
    return max(1, min(DEFAULT_N_MAX, _available(spec)))


@functools.lru_cache(maxsize=32)
def dirichlet_terms(spec: ShiftedConvolutionSpec, N: int) -> DirichletTerms:
    """Coefficients of L_h for ``|n| <= N``

    Raises:
        UnnormalizedFormError: a form has no c1
        DomainError: *N* exceeds the coefficient data
    """
    spec.require_normalized()
    h = spec.h
    if N < 1:
        raise DomainError(f'N_max must be positive, got {N}')
    if N > _available(spec):
        raise DomainError(f'N_max={N} exceeds the coefficient data (at most {_available(spec)})')
    k = np.arange(1, N + 1)
    ns = np.concatenate([k, -k])
    ns = ns[ns != -h]
    shifted = ns + h
    lam1 = hecke_array(spec.Phi1, N)
    lam2 = hecke_array(spec.Phi2, N + h)
    sign1 = np.where(ns < 0, spec.Phi1.sign, 1)
    sign2 = np.where(shifted < 0, spec.Phi2.sign, 1)
    coeffs = (
        spec.Phi1.c1 * spec.Phi2.c1
        * sign1 * lam1[np.abs(ns) - 1] * sign2 * lam2[np.abs(shifted) - 1]
    ).astype(complex)
    log_shift = np.log(np.abs(shifted))
    log_norm = 0.5 * (np.log(np.abs(ns)) + log_shift)
    return DirichletTerms(N=N, ns=ns, coeffs=coeffs, log_norm=log_norm, log_shift=log_shift)


def _envelope_tail(spec: ShiftedConvolutionSpec, N: int, sigma: float, scale: float) -> float:
    expo = sigma - 1 - 2 * spec.theta
    if expo <= 0:
        return math.inf
    c = abs(spec.Phi1.c1 * spec.Phi2.c1)
    return 2 * scale * c * math.log(N) ** 2 * N ** (-expo) / expo


def _series(
    spec: ShiftedConvolutionSpec, s: complex, terms: DirichletTerms, vals: NDArray[np.complex128],
    scale: float, **params,
) -> LValue:
    N = terms.N
    blocks = np.zeros(N, dtype=complex)
    np.add.at(blocks, np.abs(terms.ns) - 1, vals)
    partial = np.cumsum(blocks)
    value = complex(partial[-1])
    excursion = float(np.max(np.abs(partial[N // 2:] - value)))
    envelope = _envelope_tail(spec, N, s.real, scale)
    err = envelope if math.isfinite(envelope) else excursion
    if not math.isfinite(envelope):
        logger.debug(f'L_h at {s=}: no absolutely convergent envelope, reporting the partial-sum excursion')
    return LValue(
        value=value, err=err,
        params={'h': spec.h, 's': s, 'N_max': N, 'excursion': excursion, 'envelope_tail': envelope, **params},
    )


def lh_dirichlet(spec: ShiftedConvolutionSpec, s: complex, N_max: int|None = None) -> LValue:
    """Truncated Dirichlet series of L_h with the twist ``|n+h|^{iδ}``

    The reported error is the λ-envelope tail ``Σ_{|n|>N} d(n)d(n+h)|n|^{2θ-σ}``
    where it converges and the largest excursion of the partial sums over
    the last dyadic block otherwise.

    Raises:
        DomainError: ``Re s <= 1``
    """
    s = as_point(s, 's')
    if not s.real > 1:
        raise DomainError(f'the Dirichlet series needs Re(s) > 1, got {s}')
    N = N_max if N_max is not None else default_dirichlet_n_max(spec)
    terms = dirichlet_terms(spec, N)
    vals = terms.coeffs * np.exp(-s * terms.log_norm + 1j * spec.delta * terms.log_shift)
    return _series(spec, s, terms, vals, 1.)


def lh_dirichlet_many(spec: ShiftedConvolutionSpec, s: NDArray, N_max: int|None = None) -> NDArray[np.complex128]:
    """Values of the truncated series at many points, without error estimates"""
    N = N_max if N_max is not None else default_dirichlet_n_max(spec)
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 1):
        raise DomainError('the Dirichlet series needs Re(s) > 1')
    return dirichlet_terms(spec, N).evaluate(s.ravel(), spec.delta).reshape(s.shape)


def _termwise_kernel(spec: ShiftedConvolutionSpec, s: complex, ns: NDArray[np.int64]) -> NDArray[np.complex128]:
    """2^{s/2-1} ℱ₊(-s/2; n/(n+h)) for every n"""
    h, d = spec.h, spec.delta
    p = s / 2 + 1j * spec.r2
    q = s / 2 - 1j * spec.r1
    pre = 2 ** (s / 2 - 1) * beta(p, q)
    z = h / (ns + h)
    out = np.empty(ns.shape, dtype=complex)
    cut = z > 1
    plain = np.flatnonzero(~cut)
    try:
        out[plain] = gauss_2f1(-1j * d, p, p + q, z[plain])
    except LabError:
        for j in plain:
            try:
                gauss_2f1(-1j * d, p, p + q, z[j])
            except LabError as exc:
                raise KernelEvaluationError(int(ns[j]), str(exc)) from exc
        raise
    # -h < n < 0: the argument h/(n+h) > 1 is read from the upper side
    for j in np.flatnonzero(cut):
        try:
            out[j] = gauss_2f1_boundary(-1j * d, p, p + q, float(z[j]), side=1)
        except LabError as exc:
            raise KernelEvaluationError(int(ns[j]), str(exc)) from exc
    return pre * out


def lh_sharp(
    spec: ShiftedConvolutionSpec, s: complex, N_max: int|None = None, method: SharpMethod = 'auto',
) -> LValue:
    """L_h^#(s), the Dirichlet series twisted by the kernel ``2^{s/2-1}ℱ₊(-s/2)``

    With ``r₁ = r₂`` the kernel is the constant ℱ_{r,2}(s) and the ``'product'``
    method multiplies :func:`lh_dirichlet` by :func:`picard_F`; ``'termwise'``
    evaluates the kernel at every ``a = n/(n+h)``.

    Raises:
        KernelEvaluationError: the kernel failed at some n
    """
    s = as_point(s, 's')
    if not s.real > 1:
        raise DomainError(f'L_h^# needs Re(s) > 1, got {s}')
    if method == 'auto':
        method = 'product' if spec.equal_parameters else 'termwise'
    if method == 'product':
        if not spec.equal_parameters:
            raise DomainError('the product form of L_h^# needs r1 = r2')
        picard = picard_F(PicardSpec(b=spec.r1, a=2., s=s))
        L = lh_dirichlet(spec, s, N_max)
        return LValue(picard * L.value, abs(picard) * L.err, {**L.params, 'method': method, 'picard': picard})
    if method != 'termwise':
        raise DomainError(f'unknown L_h^# method: {method!r}')
    N = N_max if N_max is not None else default_dirichlet_n_max(spec)
    terms = dirichlet_terms(spec, N)
    kernel = _termwise_kernel(spec, s, terms.ns)
    vals = terms.coeffs * np.exp(-s * terms.log_norm + 1j * spec.delta * terms.log_shift) * kernel
    scale = float(np.max(np.abs(kernel[np.abs(terms.ns) == N])))
    logger.debug(f'L_h^# termwise at {s=}: {terms.ns.size} kernel evaluations')
    return _series(spec, s, terms, vals, scale, method=method)


def continuation_factor(spec: ShiftedConvolutionSpec, s: complex) -> complex:
    """``8π^s Γ(s-iδ) / (Γ(s/2)² Γ(s/2+ir₂) Γ(s/2-ir₁))``, the factor turning
    ⟨P_h(·, s), Φ̄₁Φ₂⟩ into L_h(s)

    Equals ``2^{2+s/2}π^s / (Γ(s/2)² ℱ̂(s))`` with ``ℱ̂(s) = 2^{s/2-1}B(s/2+ir₂, s/2-ir₁)``.
    """
    s = as_point(s, 's')
    log_val = (
        3 * math.log(2) + s * math.log(math.pi) + log_gamma(s - 1j * spec.delta)
        - 2 * log_gamma(s / 2) - log_gamma(s / 2 + 1j * spec.r2) - log_gamma(s / 2 - 1j * spec.r1)
    )
    return complex(np.exp(log_val))


def o_band(spec: ShiftedConvolutionSpec, s: complex) -> float:
    """The error band ``o_constant·h^{1-σ+ε}`` of the continued L_h"""
    return spec.o_constant * spec.h ** (1 - complex(s).real + spec.eps)


def _check_pole_proximity(s: complex, basis: SpectralBasis, radius: float, strict: bool) -> None:
    for k, phi in enumerate(basis, start=1):
        for sv in (1, -1):
            rho = 0.5 + 1j * sv * phi.r
            if abs(s - rho) <= radius:
                msg = f's={s} is within {radius} of the pole ½{"+" if sv > 0 else "-"}i·{phi.r:.6f} (k={k})'
                if strict:
                    raise PoleProximityError(msg)
                logger.warning(msg)


def lh_continued(
    spec: ShiftedConvolutionSpec,
    s: complex,
    basis: SpectralBasis|None = None,
    sspec: SpectralSpec = SpectralSpec(),
    gspec: GeometricSpec = GeometricSpec(),
    route: LRoute = 'auto',
    triples: Mapping[int, PairingResult]|None = None,
    eisen: Mapping[float, PairingResult]|None = None,
    dom: TruncatedDomain = TruncatedDomain(),
    N_max: int|None = None,
    allow_near_pole: bool = False,
    max_err: float|None = None,
) -> LValue:
    """L_h(s) for ``Re s > 0.1``

    ``'auto'`` uses the Dirichlet series above ``Re s = 1.1`` and the
    spectral side of ⟨P_h(·, s), Φ̄₁Φ₂⟩ below; ``'geometric'`` forces the
    geometric side (``Re s > 1`` only). The inner-product routes add the
    band :func:`o_band` for the terms the relation leaves uncomputed.

    Raises:
        PoleProximityError: *s* is within 0.02 of some ``½ ± ir_k`` (a warning
            instead with *allow_near_pole*)
        BudgetOverflowError: the error exceeds *max_err*
    """
    s = as_point(s, 's')
    if not s.real > CONTINUATION_FLOOR:
        raise DomainError(f'L_h is only continued to Re(s) > {CONTINUATION_FLOOR}, got {s}')
    if route == 'auto':
        route = 'dirichlet' if s.real > DIRICHLET_ABOVE else 'spectral'
    if route == 'dirichlet':
        res = lh_dirichlet(spec, s, N_max)
    elif route in ('spectral', 'geometric'):
        if route == 'spectral':
            if basis is None:
                raise DomainError('the spectral route needs a basis')
            _check_pole_proximity(s, basis, POLE_RADIUS, strict=not allow_near_pole)
            pairing = spectral_side(spec.h, s, spec.Phi1, spec.Phi2, basis, sspec, triples, eisen, dom)
        else:
            pairing = geometric_side(spec.h, s, spec.Phi1, spec.Phi2, gspec)
        pre = continuation_factor(spec, s)
        band = o_band(spec, s)
        res = LValue(
            value=pre * pairing.value,
            err=abs(pre) * pairing.err + band,
            params={**pairing.params, 'route': route, 'factor': pre, 'o_band': band},
        )
    else:
        raise DomainError(f'unknown route: {route!r}')
    if max_err is not None and res.err > max_err:
        raise BudgetOverflowError(f'L_h at {s=}: error {res.err:.3g} exceeds the budget {max_err:.3g}')
    return res


def poincare_pole_residue(h: int, phi: MaassForm, sign: Sign) -> complex:
    """Residue of ⟨P_h(·, s), φ⟩ at ``s = ½ ± ir``: ``½(πh)^{∓ir} Γ(±ir) c(h)``
    """
    sv = sign_value(sign)
    r = phi.r
    log_val = -math.log(2) - 1j * sv * r * math.log(math.pi * h) + log_gamma(1j * sv * r)
    return complex(np.exp(log_val)) * fourier_coefficient(phi, h).conjugate()


def _triple(triples: Mapping[int, PairingResult], k: int) -> PairingResult:
    if k not in triples:
        raise MissingTripleProductError(k)
    return triples[k]


def residue_at_pole(
    spec: ShiftedConvolutionSpec, k: int, sign: Sign, basis: SpectralBasis,
    triples: Mapping[int, PairingResult],
) -> ResidueDatum:
    """Residue of L_h at ``ρ = ½ ± ir_k``

    ``4√π h^{∓ir_k} Γ(±ir_k) Γ(ρ-iδ) c_k(h) ⟨φ_k, Φ̄₁Φ₂⟩ / (Γ(ρ/2)² Γ(ρ/2-ir₁) Γ(ρ/2+ir₂))``

    Raises:
        MissingTripleProductError: ``⟨φ_k, Φ̄₁Φ₂⟩`` is not in *triples*
    """
    sv = sign_value(sign)
    phi = basis[k]
    trip = _triple(triples, k)
    rho = 0.5 + 1j * sv * phi.r
    log_val = (
        math.log(4) + 0.5 * math.log(math.pi) - 1j * sv * phi.r * math.log(spec.h)
        + log_gamma(1j * sv * phi.r) + log_gamma(rho - 1j * spec.delta)
        - 2 * log_gamma(rho / 2) - log_gamma(rho / 2 - 1j * spec.r1) - log_gamma(rho / 2 + 1j * spec.r2)
    )
    factor = complex(np.exp(log_val)) * fourier_coefficient(phi, spec.h).conjugate()
    return ResidueDatum(k=k, sign=sign, pole=rho, value=factor * trip.value, err=abs(factor) * trip.err)


def residue_at_pole_equal(
    spec: ShiftedConvolutionSpec, k: int, sign: Sign, basis: SpectralBasis,
    triples: Mapping[int, PairingResult],
) -> ResidueDatum:
    """The ``r₁ = r₂ = r`` residue in its duplicated form

    ``2^{3/2±ir_k} h^{∓ir_k} Γ(±ir_k) Γ(¾±½ir_k) c_k(h) ⟨φ_k, |Φ|²⟩
    / (Γ(¼±½ir_k) Γ(¼±½ir_k+ir) Γ(¼±½ir_k-ir))``
    """
    if not spec.equal_parameters:
        raise DomainError('the duplicated residue form needs r1 = r2')
    sv = sign_value(sign)
    phi = basis[k]
    trip = _triple(triples, k)
    ir_k = 1j * sv * phi.r
    ir = 1j * spec.r1
    quarter = 0.25 + 0.5 * ir_k
    log_val = (
        (1.5 + ir_k) * math.log(2) - ir_k * math.log(spec.h)
        + log_gamma(ir_k) + log_gamma(0.75 + 0.5 * ir_k)
        - log_gamma(quarter) - log_gamma(quarter + ir) - log_gamma(quarter - ir)
    )
    factor = complex(np.exp(log_val)) * fourier_coefficient(phi, spec.h).conjugate()
    return ResidueDatum(
        k=k, sign=sign, pole=0.5 + ir_k, value=factor * trip.value, err=abs(factor) * trip.err,
    )


def weyl_budget(r_last: float, magnitude: float, c: float) -> float:
    """Tail of a spectral series past ``r_last``

    Terms are bounded by ``magnitude·(r/r_last)^{-c}`` and counted with the
    Weyl density ``r/6``.
    """
    if c <= 2:
        return math.inf
    return magnitude * r_last ** 2 / (6 * (c - 2))


def spectral_main_term_f(
    spec: ShiftedConvolutionSpec,
    mts: MainTermSpec,
    basis: SpectralBasis,
    triples: Mapping[int, PairingResult],
    recombine: bool = False,
) -> MainTermResult:
    """f(T) = Γ(5/2+ε) Σ_k Re(T^{ir_k}R_k⁺/(½+ir_k)^{5/2+ε} + T^{-ir_k}R_k⁻/(½-ir_k)^{5/2+ε})

    *R_k^±* are the residues of L_h; with *recombine* the phases are grouped
    as ``(T/h)^{±ir_k}`` against the residues stripped of ``h^{∓ir_k}``.
    """
    c = 2.5 + spec.eps
    K = min(mts.K_max or basis.count, basis.count)
    Ts = np.asarray(mts.T_grid)
    log_T = np.log(Ts / spec.h) if recombine else np.log(Ts)
    total = np.zeros(Ts.shape, dtype=complex)
    mags = []
    gam = gamma(c).real
    for k in range(1, K + 1):
        r = basis[k].r
        pair = np.zeros(Ts.shape, dtype=complex)
        for sign in ('+', '-'):
            sv = sign_value(sign)
            res = residue_at_pole(spec, k, sign, basis, triples).value
            if recombine:
                res *= spec.h ** (1j * sv * r)
            rho = 0.5 + 1j * sv * r
            pair += np.exp(1j * sv * r * log_T - c * np.log(rho)) * res
        total += pair
        mags.append(gam * float(np.max(np.abs(pair))))
    values = gam * total.real
    tail = weyl_budget(basis[K].r, max(mags[-3:]), c)
    logger.debug(f'f(T) for h={spec.h}: K={K}, last term {mags[-1]:.3g}, tail {tail:.3g}')
    return MainTermResult(
        T_grid=mts.T_grid,
        values=tuple(float(v) for v in values),
        term_magnitudes=tuple(mags),
        tail=tail,
        K_max=K,
        params={'c': c, 'recombine': recombine, 'max_imag': float(gam * np.max(np.abs(total.imag)))},
    )
