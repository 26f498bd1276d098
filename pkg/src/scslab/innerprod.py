"""Both sides of the spectral identity for ⟨P_h(·, s), Φ̄₁Φ₂⟩

The geometric side unfolds the Poincaré series against the Fourier expansions
of Φ₁ and Φ₂; the spectral side expands Φ̄₁Φ₂ in the Maass basis plus the
Eisenstein continuum. Inner products are taken with the measure dx dy/y² and
are linear in the first slot.
"""
from __future__ import annotations
from typing import Any, Mapping, Iterable
from dataclasses import dataclass, field
import functools
import math

import numpy as np
from numpy.typing import NDArray
from loguru import logger

from .automorphic import (
    TruncatedDomain, domain_integral, eval_eisenstein, form_on_nodes, form_on_top,
)
from .bessel import bessel_k_imag_order
from .errors import DomainError, MissingTripleProductError, UnnormalizedFormError
from .gamma import log_gamma
from .maassdata import (
    MaassForm, SpectralBasis, eisenstein_coefficient, fourier_coefficient, hecke_array,
    weyl_count,
)
from .quadrature import QuadratureSpec, IntegralResult, line_trapezoid, line_trapezoid_batch
from .serialization import DataclassSerialize
from .types import THETA, as_point

__all__ = (
    'GeometricSpec', 'SpectralSpec', 'PairingResult', 'poincare_inner_discrete',
    'poincare_inner_eisenstein', 'mellin_oracle', 'triple_product', 'triple_products',
    'eisenstein_pairing', 'eisenstein_pairing_pair', 'eisenstein_pairing_at',
    'rankin_selberg_closed_form', 'bessel_integral', 'geometric_side',
    'spectral_side', 'br_weight', 'default_n_max', 'u_grid',
)

GEOMETRIC_TOL = 5e-2
W_STEP = 0.1


@dataclass(frozen=True)
class GeometricSpec(DataclassSerialize):
    """Truncation of the geometric side

    Attributes:
        N_max: Largest ``|n|`` summed; ``None`` picks :func:`default_n_max`
        quad: Per-term quadrature tolerance
        tail_tol: Target relative tail used by the default ``N_max``
    """
    N_max: int|None = None
    quad: QuadratureSpec = QuadratureSpec(tol=1e-10)
    tail_tol: float = GEOMETRIC_TOL

    def __post_init__(self):
        if self.N_max is not None and self.N_max < 1:
            raise DomainError(f'N_max must be positive, got {self.N_max}')


@dataclass(frozen=True)
class SpectralSpec(DataclassSerialize):
    """Truncation of the spectral side

    Attributes:
        K_max: Number of basis forms used; ``None`` uses the whole basis
        include_continuous: Add the Eisenstein integral
        u_max: Truncation of the Eisenstein integral
        du: Step of the Eisenstein integral
    """
    K_max: int|None = None
    include_continuous: bool = True
    u_max: float = 30.
    du: float = 0.25

    def __post_init__(self):
        if self.K_max is not None and self.K_max < 1:
            raise DomainError(f'K_max must be positive, got {self.K_max}')
        if self.include_continuous and self.u_max < 10:
            raise DomainError(f'u_max must be >= 10 with the continuous part on, got {self.u_max}')
        if not self.du > 0:
            raise DomainError(f'du must be positive, got {self.du}')


@dataclass
class PairingResult(DataclassSerialize):
    """A computed pairing with its combined error estimate
    """
    value: complex
    err: float
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.value = complex(self.value)
        self.err = float(self.err)
        assert self.err >= 0 and math.isfinite(self.err), self.err

    @classmethod
    def from_integral(cls, res: IntegralResult, **params) -> PairingResult:
        return cls(
            value=res.value, err=res.err,
            params={'quad_err': res.quad_err, 'trunc_err': res.trunc_err, **params},
        )

    def conjugate(self) -> PairingResult:
        return PairingResult(self.value.conjugate(), self.err, dict(self.params))


def poincare_inner_discrete(h: int, s: complex, form: MaassForm) -> complex:
    """⟨P_h(·, s), φ⟩ = 2π√h C(h) (4πh)^{-s} Γ(s-½+ir)Γ(s-½-ir)/Γ(s)

    Raises:
        GammaPoleError: *s* sits on a pole of the numerator gammas
    """
    s = as_point(s, 's')
    r = form.r
    log_val = (
        math.log(2 * math.pi * math.sqrt(h)) - s * math.log(4 * math.pi * h)
        + log_gamma(s - 0.5 + 1j * r) + log_gamma(s - 0.5 - 1j * r) - log_gamma(s)
    )
    return fourier_coefficient(form, h).conjugate() * complex(np.exp(log_val))


def poincare_inner_eisenstein(h: int, s: complex, u: float) -> complex:
    """⟨P_h(·, s), E(·, ½+iu)⟩, zero at u = 0 where E(·, ½) vanishes
    """
    s = as_point(s, 's')
    if u == 0:
        return 0j
    c = eisenstein_coefficient(h, 0.5 + 1j * u).conjugate()
    log_val = (
        math.log(2 * math.pi * math.sqrt(h)) - s * math.log(4 * math.pi * h)
        + log_gamma(s - 0.5 + 1j * u) + log_gamma(s - 0.5 - 1j * u) - log_gamma(s)
    )
    return c * complex(np.exp(log_val))


def mellin_oracle(h: int, s: complex, form: MaassForm, tol: float = 1e-10) -> IntegralResult:
    """C(h) ∫₀^∞ y^{s-3/2} e^{-2πhy} K_{ir}(2πhy) dy by quadrature in log y

    The defining integral of :func:`poincare_inner_discrete`; needs Re s > ½.
    """
    s = as_point(s, 's')
    sig = s.real - 0.5
    if not sig > 0:
        raise DomainError(f'the Mellin integral needs Re(s) > 1/2, got {s}')
    a = 2 * math.pi * h
    # the value is of size e^{-πr/2} against an integrand of size one
    w_lo = (math.log(tol) - 5 - 0.5 * math.pi * form.r) / sig
    w_hi = math.log((-math.log(tol) + 10 + math.pi * form.r) / 2)

    def integrand(w: NDArray[np.float64]) -> NDArray[np.complex128]:
        ew = np.exp(w)
        k = bessel_k_imag_order(form.r, ew, scaled=True)
        return np.exp(sig * w + 1j * s.imag * w - ew) * k

    res = line_trapezoid(integrand, w_lo, w_hi, W_STEP, tol)
    pre = fourier_coefficient(form, h).conjugate() * a ** (0.5 - s) * math.exp(-0.5 * math.pi * form.r)
    return res.scaled(pre)


def _bessel_family(
    m: NDArray[np.int64], n: NDArray[np.int64], h: int, s: complex,
    r1: float, r2: float, tol: float,
) -> tuple[NDArray[np.complex128], NDArray[np.float64]]:
    """Scaled ∫ y^s e^{-2πhy} K̃_{ir1}(2π|m|y) K̃_{ir2}(2π|n|y) dy/y for each pair

    Substituting ``y = e^w/|m|`` makes the first K-factor common to all pairs.
    """
    am = np.abs(m).astype(float)
    ratio = np.abs(n) / am
    log_am = np.log(am)
    w_lo = (math.log(tol) - 5) / s.real
    w_hi = math.log((-math.log(tol) + 10) / (2 * math.pi))

    def integrand(w: NDArray[np.float64]) -> NDArray[np.complex128]:
        ew = np.exp(w)
        k1 = bessel_k_imag_order(r1, 2 * math.pi * ew, scaled=True)
        k2 = bessel_k_imag_order(r2, 2 * math.pi * ratio[:, None] * ew[None, :], scaled=True)
        expo = s * (w[None, :] - log_am[:, None]) - 2 * math.pi * h * ew[None, :] / am[:, None]
        return np.exp(expo) * k1[None, :] * k2

    vals, qerr, trunc = line_trapezoid_batch(integrand, w_lo, w_hi, W_STEP, tol)
    return vals, qerr + trunc


def bessel_integral(
    m: int, n: int, h: int, s: complex, r1: float, r2: float, tol: float = 1e-10,
) -> IntegralResult:
    """∫₀^∞ y^s e^{-2πhy} K_{ir1}(2π|m|y) K_{ir2}(2π|n|y) dy/y
    """
    s = as_point(s, 's')
    if m == 0 or n == 0:
        raise DomainError('bessel_integral needs m, n != 0')
    vals, errs = _bessel_family(np.array([m]), np.array([n]), h, s, r1, r2, tol)
    damp = math.exp(-0.5 * math.pi * (r1 + r2))
    return IntegralResult(value=complex(vals[0]) * damp, quad_err=float(errs[0]) * damp)


def _envelope_tail(N: int, sigma: float, scale: float) -> float:
    """Σ_{n>N} d(n)² n^{2θ-σ}-type tail, scaled by the size of the N-th term"""
    expo = sigma - 1 - 2 * THETA
    if expo <= 0:
        return math.inf
    return 2 * scale * N ** sigma * math.log(N) ** 2 * N ** (-expo) / expo


def default_n_max(h: int, s: complex, tail_tol: float = GEOMETRIC_TOL) -> int:
    """Smallest N with (N/h)^{-(2σ-1-2θ-0.1)} < tail_tol, and at least 4h
    """
    sigma = complex(s).real
    expo = 2 * sigma - 1 - 2 * THETA - 0.1
    if expo <= 0:
        raise DomainError(f'no admissible geometric truncation at Re(s)={sigma}')
    return max(4 * h, int(math.ceil(h * tail_tol ** (-1 / expo))))


def geometric_side(
    h: int,
    s: complex,
    Phi1: MaassForm,
    Phi2: MaassForm,
    spec: GeometricSpec = GeometricSpec(),
) -> PairingResult:
    """Σ_{n ≠ 0, -h} C₁(n) C₂(n+h) ∫₀^∞ y^s e^{-2πhy} K_{i𝔯₁}(2π|n|y) K_{i𝔯₂}(2π|n+h|y) dy/y

    The reported tail is the largest excursion of the partial sums (ordered
    by |n|) over the last dyadic block; the λ-envelope bound is recorded in
    ``params['envelope_tail']``.
    """
    s = as_point(s, 's')
    if not s.real > 1:
        raise DomainError(f'the geometric side needs Re(s) > 1, got {s}')
    for form in (Phi1, Phi2):
        if form.c1 is None:
            raise UnnormalizedFormError(f'form {form.label()} has no c1; normalize it first')
    N = spec.N_max if spec.N_max is not None else default_n_max(h, s, spec.tail_tol)
    available = min(Phi1.max_index, Phi2.max_index) - h
    if N > available:
        logger.warning(f'geometric side: N_max={N} exceeds the coefficient data, using {available}')
        N = available
    if N < 4 * h:
        raise DomainError(f'geometric truncation N_max={N} is below 4h={4 * h}')
    k = np.arange(1, N + 1)
    ns = np.concatenate([k, -k])
    ns = ns[ns != -h]
    lam1 = hecke_array(Phi1, N)
    lam2 = hecke_array(Phi2, N + h)
    sign1 = np.where(ns < 0, Phi1.sign, 1)
    shifted = ns + h
    sign2 = np.where(shifted < 0, Phi2.sign, 1)
    lam_prod = sign1 * lam1[np.abs(ns) - 1] * sign2 * lam2[np.abs(shifted) - 1]
    damp = (
        Phi1.c1 * math.exp(-0.5 * math.pi * Phi1.r) * Phi2.c1 * math.exp(-0.5 * math.pi * Phi2.r)
    )
    logger.info(f'geometric side: {h=} {s=} N_max={N} ({ns.size} terms)')
    vals, errs = _bessel_family(ns, shifted, h, s, Phi1.r, Phi2.r, spec.quad.tol)
    terms = damp * lam_prod * vals
    term_errs = abs(damp) * np.abs(lam_prod) * errs

    blocks = np.zeros(N, dtype=complex)
    np.add.at(blocks, np.abs(ns) - 1, terms)
    partial = np.cumsum(blocks)
    value = complex(partial[-1])
    tail = float(np.max(np.abs(partial[N // 2:] - value)))
    scale = float(np.max(np.abs(vals[np.abs(ns) == N]))) * abs(damp)
    envelope = _envelope_tail(N, s.real, scale)
    quad_err = float(np.sum(term_errs))
    return PairingResult(
        value=value,
        err=quad_err + tail,
        params={'h': h, 's': s, 'N_max': N, 'tail': tail, 'envelope_tail': envelope, 'quad_err': quad_err},
    )


def _product_on_nodes(Phi1: MaassForm, Phi2: MaassForm, dom: TruncatedDomain, top: bool) -> NDArray:
    """Φ₁·conj(Φ₂), the conjugate of Φ̄₁Φ₂, on the domain nodes"""
    if top:
        return form_on_top(Phi1, dom) * np.conj(form_on_top(Phi2, dom))
    return form_on_nodes(Phi1, dom) * np.conj(form_on_nodes(Phi2, dom))


def triple_product(
    phi_k: MaassForm, Phi1: MaassForm, Phi2: MaassForm, dom: TruncatedDomain = TruncatedDomain(),
) -> PairingResult:
    """⟨φ_k, Φ̄₁Φ₂⟩ = ∫ φ_k Φ₁ Φ̄₂ dμ over the truncated fundamental domain
    """
    def integrand(d: TruncatedDomain, top: bool) -> NDArray:
        own = form_on_top(phi_k, d) if top else form_on_nodes(phi_k, d)
        return own * _product_on_nodes(Phi1, Phi2, d, top)

    res = domain_integral(integrand, dom, decay=6 * math.pi)
    return PairingResult.from_integral(res, r=phi_k.r, parity=phi_k.parity)


def triple_products(
    basis: SpectralBasis | Iterable[MaassForm],
    Phi1: MaassForm,
    Phi2: MaassForm,
    dom: TruncatedDomain = TruncatedDomain(),
) -> dict[int, PairingResult]:
    out = {}
    for k, phi in enumerate(basis, start=1):
        logger.info(f'triple product k={k} r={phi.r:.6f}')
        out[k] = triple_product(phi, Phi1, Phi2, dom)
        if phi.parity != Phi1.parity and Phi1.parity == Phi2.parity and abs(out[k].value) > out[k].err:
            logger.warning(f'odd-parity triple product k={k} is not negligible: {out[k].value:.3g}')
    return out


@functools.lru_cache(maxsize=4)
def _eisenstein_on_nodes(s: complex, dom: TruncatedDomain) -> NDArray[np.complex128]:
    return eval_eisenstein(dom.nodes().z, s, dom.tol)


@functools.lru_cache(maxsize=4)
def _eisenstein_on_top(s: complex, dom: TruncatedDomain) -> NDArray[np.complex128]:
    n = dom.nodes()
    return eval_eisenstein(n.top_x + 1j * n.Y, s, dom.tol)


def _eisenstein_values(s: complex, d: TruncatedDomain, top: bool) -> NDArray:
    return _eisenstein_on_top(s, d) if top else _eisenstein_on_nodes(s, d)


def eisenstein_pairing_at(
    s: complex, Phi1: MaassForm, Phi2: MaassForm, dom: TruncatedDomain = TruncatedDomain(),
) -> PairingResult:
    """∫ E(z, s) Φ₁ Φ̄₂ dμ for any admissible s
    """
    s = as_point(s, 's')

    def integrand(d: TruncatedDomain, top: bool) -> NDArray:
        return _eisenstein_values(s, d, top) * _product_on_nodes(Phi1, Phi2, d, top)

    res = domain_integral(integrand, dom, decay=4 * math.pi)
    return PairingResult.from_integral(res, s=s)


def eisenstein_pairing(
    u: float, Phi1: MaassForm, Phi2: MaassForm, dom: TruncatedDomain = TruncatedDomain(),
) -> PairingResult:
    """⟨E(·, ½+iu), Φ̄₁Φ₂⟩; zero at u = 0 where E(·, ½) vanishes identically
    """
    if u == 0:
        return PairingResult(0j, 0., {'u': 0.})
    res = eisenstein_pairing_at(0.5 + 1j * u, Phi1, Phi2, dom)
    res.params['u'] = u
    return res


def eisenstein_pairing_pair(
    u: float, Phi1: MaassForm, Phi2: MaassForm, dom: TruncatedDomain = TruncatedDomain(),
) -> tuple[PairingResult, PairingResult]:
    """The pairings at ``u`` and ``-u`` from one evaluation of E(·, ½+iu)

    Uses E(z, ½-iu) = conj(E(z, ½+iu)).
    """
    plus = eisenstein_pairing(u, Phi1, Phi2, dom)
    if u == 0:
        return plus, plus
    s = 0.5 + 1j * u

    def integrand(d: TruncatedDomain, top: bool) -> NDArray:
        return _eisenstein_values(s, d, top) * np.conj(_product_on_nodes(Phi1, Phi2, d, top))

    res = domain_integral(integrand, dom, decay=4 * math.pi)
    minus = PairingResult.from_integral(res, u=-u).conjugate()
    return plus, minus


def rankin_selberg_closed_form(s0: float, form: MaassForm, n_max: int|None = None) -> PairingResult:
    """The unfolded value of ⟨E(·, s0), |φ|²⟩ at real s0 > 1

    ``π^{-s0}/4 · Γ(s0/2)² Γ(s0/2+ir) Γ(s0/2-ir)/Γ(s0) · Σ_{m≥1} |C(m)|² m^{-s0}``,
    the Dirichlet series truncated at *n_max* with an envelope tail.
    """
    if not s0 > 1:
        raise DomainError(f'the Rankin-Selberg series needs s0 > 1, got {s0}')
    N = n_max or form.max_index
    lam = hecke_array(form, N)
    m = np.arange(1, N + 1, dtype=float)
    c1sq = abs(form.c1) ** 2
    series = c1sq * float(np.sum(lam ** 2 * m ** -s0))
    log_gam = (
        -s0 * math.log(math.pi) - math.log(4) + 2 * log_gamma(0.5 * s0)
        + log_gamma(0.5 * s0 + 1j * form.r) + log_gamma(0.5 * s0 - 1j * form.r) - log_gamma(s0)
    )
    gam = complex(np.exp(log_gam)).real
    expo = s0 - 1 - 2 * THETA
    if expo <= 0:
        raise DomainError(f'no tail bound for the Rankin-Selberg series at s0={s0}')
    tail = c1sq * math.log(N) ** 3 * N ** -expo / expo
    return PairingResult(
        value=gam * series, err=abs(gam) * tail, params={'s0': s0, 'n_max': N},
    )


def br_weight(phi_k: MaassForm, Phi: MaassForm, dom: TruncatedDomain = TruncatedDomain(),
              triple: PairingResult|None = None) -> float:
    """b_k = |⟨φ_k, |Φ|²⟩|² e^{π r_k}
    """
    if triple is None:
        triple = triple_product(phi_k, Phi, Phi, dom)
    return abs(triple.value) ** 2 * math.exp(math.pi * phi_k.r)


def u_grid(spec: SpectralSpec) -> NDArray[np.float64]:
    """Positive nodes of the Eisenstein integral; u = 0 contributes nothing"""
    n = int(round(spec.u_max / spec.du))
    return spec.du * np.arange(1, n + 1)


def _weyl_density(T: float) -> float:
    if T <= 2:
        return 1.
    return max(T / 12, (weyl_count(T + 0.5) - weyl_count(T - 0.5)))


def spectral_side(
    h: int,
    s: complex,
    Phi1: MaassForm,
    Phi2: MaassForm,
    basis: SpectralBasis,
    spec: SpectralSpec = SpectralSpec(),
    triples: Mapping[int, PairingResult]|None = None,
    eisen: Mapping[float, PairingResult]|None = None,
    dom: TruncatedDomain = TruncatedDomain(),
) -> PairingResult:
    """𝒟(s) + 𝒞(s) with the truncation errors of both parts

    Arguments:
        triples: Precomputed ⟨φ_k, Φ̄₁Φ₂⟩ keyed by basis index; computed on
            demand when omitted
        eisen: Precomputed ⟨E(·, ½+iu), Φ̄₁Φ₂⟩ keyed by u (both signs)

    Raises:
        MissingTripleProductError: *triples* lacks an index ≤ K_max
    """
    s = as_point(s, 's')
    K = min(spec.K_max or basis.count, basis.count)
    if triples is None:
        triples = triple_products(basis.truncated(K), Phi1, Phi2, dom)
    discrete = 0j
    pair_err = 0.
    mags: list[float] = []
    for k in range(1, K + 1):
        if k not in triples:
            raise MissingTripleProductError(k)
        phi = basis[k]
        if s.real <= 1 and min(abs(s - (0.5 + 1j * phi.r)), abs(s - (0.5 - 1j * phi.r))) < 0.02:
            logger.warning(f'spectral side: s={s} is within 0.02 of a pole at ½±i{phi.r:.4f}')
        p = poincare_inner_discrete(h, s, phi)
        term = p * triples[k].value
        discrete += term
        pair_err += abs(p) * triples[k].err
        mags.append(abs(term))
    r_last = basis[K].r
    # odd terms may vanish by parity, so look at the last few
    basis_err = max(mags[-3:]) * _weyl_density(r_last) / math.pi
    if r_last < abs(s.imag):
        logger.warning(f'basis ends at r={r_last:.3f} below |Im s|={abs(s.imag):g}; truncation estimate is rough')
        basis_err *= 1 + abs(s.imag) - r_last

    continuous = 0j
    cont_err = 0.
    if spec.include_continuous:
        us = u_grid(spec)
        vals = np.empty(2 * us.size, dtype=complex)
        errs = np.empty(2 * us.size)
        for j, u in enumerate(us):
            if eisen is not None and u in eisen and -u in eisen:
                plus, minus = eisen[u], eisen[-u]
            else:
                plus, minus = eisenstein_pairing_pair(u, Phi1, Phi2, dom)
            pp = poincare_inner_eisenstein(h, s, u)
            pm = poincare_inner_eisenstein(h, s, -u)
            vals[2 * j], vals[2 * j + 1] = pp * plus.value, pm * minus.value
            errs[2 * j], errs[2 * j + 1] = abs(pp) * plus.err, abs(pm) * minus.err
        pre = spec.du / (4 * math.pi)
        continuous = pre * complex(np.sum(vals))
        coarse = 2 * pre * complex(np.sum(vals[2::4]) + np.sum(vals[3::4]))
        tail = float(np.abs(vals[-2]) + np.abs(vals[-1])) / (4 * math.pi * math.pi)
        cont_err = abs(continuous - coarse) + tail + pre * float(np.sum(errs))

    value = discrete + continuous
    err = pair_err + basis_err + cont_err
    logger.debug(f'spectral side {h=} {s=}: discrete={discrete:.6g} continuous={continuous:.6g} err={err:.3g}')
    return PairingResult(
        value=value,
        err=err,
        params={
            'h': h, 's': s, 'K_max': K, 'discrete': discrete, 'continuous': continuous,
            'basis_err': basis_err, 'continuous_err': cont_err, 'pairing_err': pair_err,
        },
    )
