"""Identity suites run by ``scslab verify``

Every identity compares two independent evaluations of the same quantity
and reports the achieved residual against the tolerance of its group.
Numerical failures become failed rows; data errors propagate.
"""
from __future__ import annotations
from typing import Callable, Iterable, Literal
from dataclasses import dataclass
import math

import numpy as np
from numpy.typing import NDArray
from scipy.special import loggamma
from loguru import logger

from .automorphic import automorphy_residual
from .config import TolerancePolicy
from .errors import ConvergenceError, DomainError
from .gamma import gamma
from .hypergeom import barnes_2f1, default_barnes_contour, gauss_2f1
from .innerprod import (
    PairingResult, SpectralSpec, eisenstein_pairing_at, geometric_side, rankin_selberg_closed_form,
    spectral_side, u_grid,
)
from .kernels import (
    KernelArgs, bessel_mellin_lhs, bessel_mellin_rhs, connection_grid, connection_residual,
    k_product_lhs, k_product_rhs, kernel_F_plus, m_ratio_residual, mellin_exp_bessel,
    resolve_connection_prefactor,
)
from .bessel import bessel_k
from .lfun import ShiftedConvolutionSpec, lh_continued, residue_at_pole, residue_at_pole_equal
from .maassdata import SpectralBasis, check_weyl, hecke_residual
from .pairings import PairingCache
from .picard import PicardSpec, picard_F
from .quadrature import line_trapezoid
from .report import CheckResult
from .scs import PerronSpec, perron_integral, smoothed_scs
from .zeta import zeta

__all__ = (
    'Identity', 'core_identities', 'data_identities', 'unfolding_identities',
    'reproduction_identities', 'run_identities', 'barnes_draws', 'unfolding_pairs',
)

type ToleranceGroup = Literal['specfun', 'identities', 'contour', 'innerprod', 'scs']
type Computation = Callable[[float], tuple[float, str]]

K_PRODUCT_CASES = (
    (1.5j, 0.5j, 1.2, 0.7),
    (3j, 1j, 2.0, 3.5),
    (4j, 2.5j, 0.8, 1.6),
)
BESSEL_MELLIN_CASES = ((1., 2., 1.5), (0.5, 1.5, 2.), (1., 3., 1.2 + 0.7j))
BESSEL_MELLIN_R = (2.3, 1.1)
RESIDUE_OFFSETS = (0.02, 0.01, 0.005)
RESIDUE_REL = 5e-4
PERRON_FIT_GRID = (30., 50., 80.)
PERRON_FIT_LIMIT = 10.
PICARD_S = (0.6, 2., 2 + 3j, 0.5 + 7j)
WEYL_T = 10.
PICARD_LARGE_B = 9.5337
BARNES_DRAWS = 20
BARNES_SEED = 2017
INVERSION_DRAW = (0.7 + 0.3j, 1.1 + 0j, 2.3 - 0.5j, -4.5 + 0.5j)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class Identity:
    """A named check; *compute* receives the tolerance and returns ``(residual, detail)``"""
    name: str
    group: ToleranceGroup
    compute: Computation

    def run(self, tol: TolerancePolicy) -> CheckResult:
        t = getattr(tol, self.group)
        try:
            residual, detail = self.compute(t)
        except (ConvergenceError, DomainError) as exc:
            logger.warning(f'{self.name}: {exc}')
            return CheckResult(self.name, math.inf, t, f'{type(exc).__name__}: {exc}')
        res = CheckResult(self.name, residual, t, detail)
        if res.passed:
            logger.success(f'{self.name}: residual {residual:.3g}')
        else:
            logger.warning(f'{self.name}: residual {residual:.3g} above {t:g}')
        return res


def _gamma_reflection(tol: float) -> tuple[float, str]:
    z = 0.3 + 2.1j
    return _rel(gamma(z) * gamma(1 - z), math.pi / np.sin(math.pi * z)), ''


def _zeta_two(tol: float) -> tuple[float, str]:
    return _rel(zeta(2.), math.pi ** 2 / 6), ''


def _picard_three_way(tol: float) -> tuple[float, str]:
    worst, where = 0., ''
    # the interval form only reaches absolute accuracy, so large b is left to the cosh form
    cases = [(b, 2., s, ('cosh', 'interval')) for b in (0., 1.) for s in PICARD_S]
    cases += [(PICARD_LARGE_B, 2., s, ('cosh',)) for s in PICARD_S]
    cases += [(b, 0., 0.6, ('cosh', 'interval')) for b in (0., 1.)]
    for b, a, s, methods in cases:
        spec = PicardSpec(b=b, a=a, s=s)
        closed = picard_F(spec, method='closed')
        for m in methods:
            res = _rel(closed, picard_F(spec, method=m))
            if res > worst:
                worst, where = res, f'b={b} a={a} s={s} {m}'
    return worst, where


def barnes_draws(count: int = BARNES_DRAWS, seed: int = BARNES_SEED) -> list[tuple[complex, complex, complex, complex]]:
    """Random (α, β, γ, z) with Re α, Re β > 0, |z| < 0.9 and |arg(-z)| <= 2.4
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a, b = rng.uniform(0.3, 1.5, 2) + 1j * rng.uniform(-1., 1., 2)
        c = rng.uniform(1.5, 3.) + 1j * rng.uniform(-1., 1.)
        z = -rng.uniform(0.1, 0.9) * np.exp(1j * rng.uniform(-2.4, 2.4))
        out.append((complex(a), complex(b), complex(c), complex(z)))
    return out


def _barnes_against_series(draws: list[tuple[complex, complex, complex, complex]]) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        worst, where = 0., ''
        for a, b, c, z in draws:
            series = gauss_2f1(a, b, c, z)
            barnes = barnes_2f1(a, b, c, z, default_barnes_contour(a, b, z, tol * 1e-2))
            res = _rel(series, barnes)
            if res > worst:
                worst, where = res, f'z={z:.4g}'
        return worst, f'{len(draws)} draws, worst at {where}'

    return compute


def _kernel_connection(tol: float) -> tuple[float, str]:
    k = resolve_connection_prefactor(tol)
    worst = max(connection_residual(args, k) for args in connection_grid())
    return worst, f'prefactor 2^(-{k}w)'


def _kernel_m_ratio(tol: float) -> tuple[float, str]:
    return max(m_ratio_residual(args) for args in connection_grid()), ''


def _kernel_equal(tol: float) -> tuple[float, str]:
    r = 9.53
    worst = 0.
    for w in (-0.6, -0.5 + 0.3j, -1.2 - 2j):
        p, q = -w + 1j * r, -w - 1j * r
        args = KernelArgs(w=w, a=0.5, r1=r, r2=r)
        oracle = np.exp(loggamma(p) + loggamma(q) - loggamma(p + q))
        worst = max(worst, _rel(kernel_F_plus(args), oracle))
    return worst, 'against scipy loggamma'


def _k_product(tol: float) -> tuple[float, str]:
    worst = 0.
    for a, b, x, y in K_PRODUCT_CASES:
        rhs = k_product_rhs(a, b, x, y, tol=min(tol * 1e-2, 1e-12))
        worst = max(worst, _rel(k_product_lhs(a, b, x, y), rhs.value))
    return worst, ''


def _bessel_mellin(tol: float) -> tuple[float, str]:
    r1, r2 = BESSEL_MELLIN_R
    worst = 0.
    for m, n, s in BESSEL_MELLIN_CASES:
        lhs = bessel_mellin_lhs(m, n, s, r1, r2, tol=tol * 1e-2)
        rhs = bessel_mellin_rhs(m, n, s, r1, r2, tol=tol * 1e-2)
        worst = max(worst, _rel(lhs.value, rhs.value))
    return worst, f'r1={r1} r2={r2}'


def _mellin_exp_bessel(tol: float) -> tuple[float, str]:
    nu, a, b, s = 0.7j, 1., 2.5, 1.8

    def integrand(t: NDArray[np.float64]) -> NDArray[np.complex128]:
        y = np.exp(t)
        return bessel_k(nu, b * y) * np.exp(s * t - a * y)

    direct = line_trapezoid(integrand, -(-math.log(tol * 1e-2) + 5) / s, math.log(60.), 0.1, tol * 1e-2)
    return _rel(mellin_exp_bessel(nu, a, b, s), direct.value), ''


def core_identities() -> list[Identity]:
    """Identities that need no data files"""
    return [
        Identity('gamma reflection', 'specfun', _gamma_reflection),
        Identity('zeta(2)', 'specfun', _zeta_two),
        Identity('Picard closed/cosh/interval', 'identities', _picard_three_way),
        Identity('2F1 series vs Barnes', 'contour', _barnes_against_series(barnes_draws())),
        Identity('2F1 inversion vs Barnes', 'contour', _barnes_against_series([INVERSION_DRAW])),
        Identity('kernel connection formula', 'identities', _kernel_connection),
        Identity('kernel M-/M+ ratio', 'identities', _kernel_m_ratio),
        Identity('kernel equal-parameter beta', 'specfun', _kernel_equal),
        Identity('K-product lemma', 'identities', _k_product),
        Identity('Bessel-Mellin identity', 'contour', _bessel_mellin),
        Identity('Mellin transform e^(-ay)K(by)', 'contour', _mellin_exp_bessel),
    ]


def _automorphy(basis: SpectralBasis) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        worst = max(automorphy_residual(f) for f in basis)
        return worst, f'{basis.count} forms'
    return compute


def _residue_duality(basis: SpectralBasis, h: int) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        phi = basis[1]
        spec = ShiftedConvolutionSpec(h=h, Phi1=phi, Phi2=phi)
        K = min(8, basis.count)
        # the triple product is a common factor of both forms
        unit = {k: PairingResult(1., 0.) for k in range(1, K + 1)}
        worst = 0.
        for k in range(1, K + 1):
            for sign in ('+', '-'):
                a = residue_at_pole(spec, k, sign, basis, unit).value
                b = residue_at_pole_equal(spec, k, sign, basis, unit).value
                worst = max(worst, _rel(a, b))
        return worst, f'k <= {K}'
    return compute


def _hecke_closure(basis: SpectralBasis) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        worst, label = 0., ''
        for f in basis:
            res = hecke_residual(f)
            if res >= worst:
                worst, label = res, f.label()
        return worst, f'worst {label}'
    return compute


def _weyl_first_form(basis: SpectralBasis, T: float = WEYL_T) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        count, weyl, _ = check_weyl(basis, T)
        detail = f'N({T:g})={count}, Weyl main terms {weyl:.3g}'
        return (0. if count == 1 else math.inf), detail
    return compute


def data_identities(basis: SpectralBasis, h: int = 1) -> list[Identity]:
    """Identities on the loaded (normalized) basis"""
    return [
        Identity('automorphy screen', 'innerprod', _automorphy(basis)),
        Identity('residue duality', 'specfun', _residue_duality(basis, h)),
        Identity('Hecke closure', 'identities', _hecke_closure(basis)),
        Identity(f'Weyl count N({WEYL_T:g}) = 1', 'identities', _weyl_first_form(basis)),
    ]


def _unfolding(basis: SpectralBasis, h: int, s: complex, pair: tuple[int, int], cache: PairingCache) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        Phi1, Phi2 = basis[pair[0]], basis[pair[1]]
        geo = geometric_side(h, s, Phi1, Phi2)
        triples = cache.triples_sync(basis)
        eisen = cache.eisen_sync(u_grid(SpectralSpec()))
        spec_side = spectral_side(h, s, Phi1, Phi2, basis, triples=triples, eisen=eisen)
        budget = geo.err + spec_side.err
        rel_budget = budget / abs(geo.value)
        diff = abs(geo.value - spec_side.value)
        detail = f'|diff|={diff:.3g} budget={budget:.3g}'
        if rel_budget > tol:
            return math.inf, f'{detail}; relative budget {rel_budget:.3g} too large'
        return _within_budget(diff, budget, tol), detail
    return compute


def unfolding_pairs(basis: SpectralBasis) -> list[tuple[int, int]]:
    """The diagonal pair, (1, 2), and a mixed-parity pair when (1, 2) is not one"""
    pairs = [(1, 1)]
    if basis.count < 2:
        return pairs
    pairs.append((1, 2))
    mixed = next((k for k in range(2, basis.count + 1) if basis[k].parity != basis[1].parity), None)
    if mixed is not None and mixed != 2:
        pairs.append((1, mixed))
    return pairs


def unfolding_identities(basis: SpectralBasis, h_values: Iterable[int] = (1, 2, 5),
                         cache_dir=None) -> list[Identity]:
    """Geometric side against spectral side for the pairs of :func:`unfolding_pairs` (slow)

    The residual is scaled so that the check passes exactly when the two
    sides agree within the sum of their error budgets.
    """
    out = []
    for i, j in unfolding_pairs(basis):
        cache = PairingCache(basis[i], basis[j], directory=cache_dir)
        for h in h_values:
            for s in (1.5, 1.5 + 5j, 1.5 + 10j):
                name = f'unfolding (φ{i}, φ{j}) h={h} s={s}'
                out.append(Identity(name, 'innerprod', _unfolding(basis, h, s, (i, j), cache)))
    return out


def _within_budget(diff: float, budget: float, tol: float) -> float:
    """Residual scaled so that it meets *tol* exactly when ``diff <= budget``"""
    if budget <= 0:
        return math.inf if diff > 0 else 0.
    return diff / budget * tol


def _rankin_selberg(basis: SpectralBasis, s0: float) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        phi = basis[1]
        direct = eisenstein_pairing_at(s0, phi, phi)
        closed = rankin_selberg_closed_form(s0, phi)
        return _rel(direct.value, closed.value), f'quadrature err {direct.err:.3g}'
    return compute


def _limit_at_zero(offsets: tuple[float, ...], values: list[complex]) -> complex:
    """Value at 0 of the interpolating polynomial through ``(offsets[i], values[i])`` (Neville)"""
    p = list(values)
    n = len(p)
    for m in range(1, n):
        for i in range(n - m):
            lo, hi = offsets[i], offsets[i + m]
            p[i] = (lo * p[i + 1] - hi * p[i]) / (lo - hi)
    return p[0]


def _residue_limit(basis: SpectralBasis, h: int, k: int, cache: PairingCache) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        phi = basis[1]
        spec = ShiftedConvolutionSpec(h=h, Phi1=phi, Phi2=phi)
        triples = cache.triples_sync(basis)
        eisen = cache.eisen_sync(u_grid(SpectralSpec()))
        target = residue_at_pole(spec, k, '+', basis, triples).value
        rho = 0.5 + 1j * basis[k].r
        approx = []
        for d in RESIDUE_OFFSETS:
            val = lh_continued(
                spec, rho + d, basis, route='spectral', triples=triples, eisen=eisen,
                allow_near_pole=True,
            ).value
            approx.append(d * val)
        # (s - ρ)L_h(s) is analytic at ρ
        limit = _limit_at_zero(RESIDUE_OFFSETS, approx)
        rel = _rel(limit, target)
        return _within_budget(rel, RESIDUE_REL, tol), f'residue {target:.6g}, relative {rel:.2g}'
    return compute


def _perron_reproduction(basis: SpectralBasis, h: int, Ts: tuple[float, ...]) -> Computation:
    def compute(tol: float) -> tuple[float, str]:
        phi = basis[1]
        spec = ShiftedConvolutionSpec(h=h, Phi1=phi, Phi2=phi)
        # measured in units of the Hecke-normalized sum
        scale = abs(phi.c1) ** 2
        ratios = []
        for T in Ts:
            pspec = PerronSpec.smoothed(spec, T=T)
            res = perron_integral(spec, pspec, T)
            gam = gamma(pspec.c).real
            diff = abs(gam * res.value - smoothed_scs(spec, T))
            ratios.append(diff / (scale * T ** (-spec.eps / 20)))
            logger.debug(f'Perron reproduction T={T:g}: |diff|={diff:.3g} budget={gam * (res.budget + res.quad_err):.3g}')
        C = max(ratios)
        logger.info(f'Perron reproduction: fitted C={C:.3g} in C·T^(-ε/20) over T in {Ts}')
        return C / PERRON_FIT_LIMIT * tol, f'C={C:.3g} (limit {PERRON_FIT_LIMIT:g})'
    return compute


def reproduction_identities(basis: SpectralBasis, h: int = 1, cache_dir=None) -> list[Identity]:
    """Rankin-Selberg oracle, residue limits for k in (1, 2) and the smoothed Perron reproduction (slow)"""
    phi = basis[1]
    cache = PairingCache(phi, phi, directory=cache_dir)
    out = [Identity('Rankin-Selberg at s0=1.5', 'innerprod', _rankin_selberg(basis, 1.5))]
    for k in range(1, min(2, basis.count) + 1):
        out.append(Identity(f'residue limit k={k}', 'innerprod', _residue_limit(basis, h, k, cache)))
    out.append(Identity(
        'smoothed Perron reproduction C·T^(-ε/20)', 'scs', _perron_reproduction(basis, h, PERRON_FIT_GRID),
    ))
    return out


def run_identities(identities: Iterable[Identity], tol: TolerancePolicy) -> list[CheckResult]:
    return [ident.run(tol) for ident in identities]
