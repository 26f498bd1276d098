"""Pointwise evaluation of Maass forms and Eisenstein series, and integrals
over the truncated fundamental domain of SL(2, ℤ).

Both expansions are evaluated on arrays of points at once. The K-Bessel
factors depend on ``y`` only, so they are computed once per distinct ``y``
and shared by every point on the same horocycle; the domain nodes are laid out
to make most of them share their ``y``.
"""
from __future__ import annotations
from typing import Callable, Literal, Self
from dataclasses import dataclass, replace
import functools
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from loguru import logger

from .bessel import bessel_k
from .errors import (
    AutomorphyScreenError, DomainError, QuadratureError, UnnormalizedFormError,
)
from .gamma import log_gamma
from .maassdata import MaassForm, eisenstein_coefficient, hecke_array
from .quadrature import IntegralResult
from .serialization import DataclassSerialize
from .types import as_point
from .zeta import zeta

__all__ = (
    'TruncatedDomain', 'DomainNodes', 'eval_maass_form', 'eval_eisenstein',
    'eisenstein_constant_term', 'fourier_cutoff', 'pullback', 'domain_integral',
    'form_on_nodes', 'form_on_top', 'normalize_c1', 'c1_from_l1ad', 'petersson_norm',
    'automorphy_residual', 'automorphy_screen', 'screen_points',
)

MIN_HEIGHT = 0.05
DEFAULT_TOL = 1e-12
SCREEN_THRESHOLD = 1e-5

type NormalizeMethod = Literal['auto', 'l1ad', 'quadrature']


def fourier_cutoff(y: NDArray[np.float64], tol: float, r: float = 0., growth: float = 0.) -> NDArray[np.int64]:
    """Number of Fourier terms M(y) so that the K-Bessel tail is below *tol*

    ``M(y) = ceil((log(1/tol) + 5 + πr/2 + growth)/(2πy))``. The ``πr/2``
    term accounts for c(1) being of size e^{πr/2} for a normalized form.
    """
    num = -math.log(tol) + 5 + 0.5 * math.pi * abs(r) + growth
    return np.ceil(num / (2 * math.pi * np.asarray(y))).astype(np.int64)


def pullback(z: complex) -> complex:
    """Map *z* into the standard fundamental domain with translations and inversions
    """
    z = as_point(z, 'z')
    if z.imag <= 0:
        raise DomainError(f'z must lie in the upper half-plane, got {z}')
    for _ in range(1000):
        z = complex(z.real - math.floor(z.real + 0.5), z.imag)
        if abs(z) >= 1 - 1e-15:
            return z
        z = -1 / z
    raise DomainError(f'pullback of {z} did not terminate')


def _as_points(z: ArrayLike) -> NDArray[np.complex128]:
    arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if not np.all(np.isfinite(arr)):
        raise DomainError('evaluation points must be finite')
    if np.any(arr.imag <= 0):
        raise DomainError('evaluation points must lie in the upper half-plane')
    return arr


def _check_height(y: NDArray[np.float64]) -> None:
    low = float(np.min(y))
    if low <= MIN_HEIGHT:
        raise DomainError(
            f'y={low:g} is too small for the Fourier truncation budget (need y > {MIN_HEIGHT})'
        )


def _bessel_table(
    nu: complex, uy: NDArray[np.float64], cutoff: NDArray[np.int64],
) -> list[NDArray[np.complex128]]:
    """Scaled K_ν(2πm·y) for m = 1..max(cutoff), zero where m > M(y)
    """
    out = []
    for m in range(1, int(cutoff.max()) + 1):
        col = np.zeros(uy.shape, dtype=complex)
        live = cutoff >= m
        if np.any(live):
            col[live] = bessel_k(nu, 2 * math.pi * m * uy[live], scaled=True)
        out.append(col)
    return out


def eval_maass_form(form: MaassForm, z: ArrayLike, tol: float = DEFAULT_TOL, use_pullback: bool = False):
    """φ(z) = Σ_{m≠0} C(m) y^{1/2} K_{ir}(2π|m|y) e(mx)

    Even forms pair ±m into ``2cos(2πmx)``, odd forms into ``2i·sin(2πmx)``.

    Arguments:
        z: Point or array of points in the upper half-plane
        use_pullback: Reduce each point to the fundamental domain first

    Raises:
        UnnormalizedFormError: *form* has no c1
        DomainError: ``Im z <= 0.05`` (without pullback)
    """
    if form.c1 is None:
        raise UnnormalizedFormError(f'form {form.label()} has no c1; normalize it first')
    pts = _as_points(z)
    if use_pullback:
        pts = np.array([pullback(p) for p in pts])
    x, y = pts.real, pts.imag
    _check_height(y)
    uy, inv = np.unique(y, return_inverse=True)
    cutoff = fourier_cutoff(uy, tol, form.r)
    table = _bessel_table(1j * form.r, uy, cutoff)
    lam = hecke_array(form, len(table))
    total = np.zeros(pts.shape, dtype=complex)
    trig = np.cos if form.parity == 'even' else np.sin
    for m, col in enumerate(table, start=1):
        total += lam[m - 1] * col.real[inv] * trig(2 * math.pi * m * x)
    pair = 2. if form.parity == 'even' else 2j
    # the scaled K carries e^{πr/2}, c1 carries its inverse
    pre = form.c1 * pair * math.exp(-0.5 * math.pi * form.r)
    out = pre * np.sqrt(y) * total
    if np.ndim(z) == 0:
        return complex(out[0])
    return out.reshape(np.shape(z))


def eisenstein_constant_term(y: ArrayLike, s: complex):
    """y^s + φ(s) y^{1-s} with φ(s) = √π Γ(s-½) ζ(2s-1) / (Γ(s) ζ(2s))
    """
    s = as_point(s, 's')
    phi = (
        np.exp(0.5 * math.log(math.pi) + log_gamma(s - 0.5) - log_gamma(s))
        * zeta(2 * s - 1) / zeta(2 * s)
    )
    y = np.asarray(y, dtype=float)
    logy = np.log(y)
    return np.exp(s * logy) + phi * np.exp((1 - s) * logy)


def eval_eisenstein(z: ArrayLike, s: complex, tol: float = DEFAULT_TOL):
    """E(z, s) from its Fourier expansion

    Raises:
        DomainError: ``s = 1``, ``s = 1/2`` or ``Im z <= 0.05``
    """
    s = as_point(s, 's')
    if s == 1 or s == 0.5:
        raise DomainError(f'E(z, s) is not evaluated at the excluded point s={s}')
    pts = _as_points(z)
    x, y = pts.real, pts.imag
    _check_height(y)
    uy, inv = np.unique(y, return_inverse=True)
    nu = s - 0.5
    growth = 2 * abs(nu.real) * math.log1p(-math.log(tol))
    cutoff = fourier_cutoff(uy, tol, nu.imag, growth)
    table = _bessel_table(nu, uy, cutoff)
    zeta_2s = zeta(2 * s)
    damp = math.exp(-0.5 * math.pi * abs(nu.imag))
    total = np.zeros(pts.shape, dtype=complex)
    for ell, col in enumerate(table, start=1):
        c = eisenstein_coefficient(ell, s, zeta_2s) * damp
        total += c * col[inv] * np.cos(2 * math.pi * ell * x)
    out = eisenstein_constant_term(y, s) + 2 * np.sqrt(y) * total
    if np.ndim(z) == 0:
        return complex(out[0])
    return out.reshape(np.shape(z))


@dataclass(frozen=True)
class DomainNodes:
    """Quadrature nodes on the truncated fundamental domain

    ``weights`` include the invariant measure ``dx dy / y²``. ``top`` holds
    the x-nodes and weights on the cutoff line ``y = Y``, used for the tail
    estimate.
    """
    z: NDArray[np.complex128]
    weights: NDArray[np.float64]
    top_x: NDArray[np.float64]
    top_w: NDArray[np.float64]
    Y: float


@functools.cache
def _gauss_panels(lo: float, hi: float, panels: int, order: int) -> tuple[NDArray, NDArray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * nodes).ravel(), (half * weights).ravel()


@dataclass(frozen=True)
class TruncatedDomain(DataclassSerialize):
    """The fundamental domain cut at height Y

    The rectangle ``[-½, ½] × [1, Y]`` is a tensor Gauss-Legendre grid, so its
    nodes share y-values; the region between the unit circle and ``y = 1``
    uses an order-*order* rule along each x-node.

    Attributes:
        Y: Cusp cutoff, at least 5
        panels_x: Gauss-Legendre panels in x
        panels_y: Gauss-Legendre panels in y on ``[1, Y]``
        order: Nodes per panel
        tol: Truncation tolerance of the Fourier sums
    """
    Y: float = 10.
    panels_x: int = 12
    panels_y: int = 12
    order: int = 20
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.Y >= 5:
            raise DomainError(f'cusp cutoff Y must be >= 5, got {self.Y}')
        if self.panels_x < 8 or self.panels_y < 8:
            raise DomainError('panel counts must be >= 8')

    def refined(self) -> Self:
        return replace(self, panels_x=2 * self.panels_x, panels_y=2 * self.panels_y)

    def with_cutoff(self, Y: float) -> Self:
        return replace(self, Y=Y)

    def nodes(self) -> DomainNodes:
        return _domain_nodes(self)


@functools.cache
def _domain_nodes(dom: TruncatedDomain) -> DomainNodes:
    xs, wx = _gauss_panels(-0.5, 0.5, dom.panels_x, dom.order)
    ys, wy = _gauss_panels(1., dom.Y, dom.panels_y, dom.order)
    rect_z = (xs[:, None] + 1j * ys[None, :]).ravel()
    rect_w = (wx[:, None] * (wy / ys ** 2)[None, :]).ravel()

    t, wt = _gauss_panels(0., 1., 1, dom.order)
    lo = np.sqrt(1 - xs ** 2)
    height = 1 - lo
    low_y = lo[:, None] + height[:, None] * t[None, :]
    low_z = (xs[:, None] + 1j * low_y).ravel()
    low_w = (wx[:, None] * height[:, None] * wt[None, :] / low_y ** 2).ravel()
    return DomainNodes(
        z=np.concatenate([rect_z, low_z]),
        weights=np.concatenate([rect_w, low_w]),
        top_x=xs,
        top_w=wx,
        Y=dom.Y,
    )


@functools.lru_cache(maxsize=64)
def form_on_nodes(form: MaassForm, dom: TruncatedDomain) -> NDArray[np.complex128]:
    """φ evaluated on every node of *dom*, cached per (form, domain)
    """
    logger.debug(f'evaluating {form.label()} on {dom}')
    return eval_maass_form(form, dom.nodes().z, dom.tol)


@functools.lru_cache(maxsize=64)
def form_on_top(form: MaassForm, dom: TruncatedDomain) -> NDArray[np.complex128]:
    n = dom.nodes()
    return eval_maass_form(form, n.top_x + 1j * n.Y, dom.tol)


type NodeIntegrand = Callable[[TruncatedDomain, bool], NDArray]


def domain_integral(
    integrand: NodeIntegrand,
    dom: TruncatedDomain,
    decay: float = 2 * math.pi,
) -> IntegralResult:
    """∫ over the truncated domain of a function given on its nodes

    Arguments:
        integrand: Called as ``integrand(domain, top)``; returns the values on
            ``domain.nodes()`` or, with ``top``, on the line ``y = Y``
        decay: Exponential decay rate of the integrand in y, used for the tail
            beyond Y

    Returns:
        The refined-grid value, with ``quad_err`` the change under panel
        doubling and ``trunc_err`` the tail beyond Y
    """
    fine_dom = dom.refined()
    coarse = complex(np.sum(integrand(dom, False) * dom.nodes().weights))
    fine_nodes = fine_dom.nodes()
    fine = complex(np.sum(integrand(fine_dom, False) * fine_nodes.weights))
    top = np.abs(integrand(dom, True))
    tail = float(np.sum(top * dom.nodes().top_w)) / (dom.Y ** 2 * decay)
    return IntegralResult(
        value=fine,
        quad_err=abs(fine - coarse),
        trunc_err=tail,
        levels=1,
        evaluations=fine_nodes.z.size + dom.nodes().z.size,
    )


def petersson_norm(form: MaassForm, dom: TruncatedDomain = TruncatedDomain()) -> IntegralResult:
    """⟨φ, φ⟩ over the truncated domain
    """
    def integrand(d: TruncatedDomain, top: bool) -> NDArray:
        vals = form_on_top(form, d) if top else form_on_nodes(form, d)
        return np.abs(vals) ** 2

    return domain_integral(integrand, dom, decay=4 * math.pi)


def c1_from_l1ad(r: float, l1ad: float) -> float:
    """|c(1)| for ⟨φ, φ⟩ = 1 with measure dx dy/y²: |c(1)|² = 2cosh(πr)/L(1, Ad φ)
    """
    if not l1ad > 0:
        raise DomainError(f'L(1, Ad) must be positive, got {l1ad}')
    log_cosh = math.pi * r + math.log1p(math.exp(-2 * math.pi * r)) - math.log(2)
    return math.exp(0.5 * (math.log(2) + log_cosh - math.log(l1ad)))


def normalize_c1(
    form: MaassForm,
    dom: TruncatedDomain = TruncatedDomain(),
    tol: float = 1e-8,
    method: NormalizeMethod = 'auto',
) -> MaassForm:
    """Return a copy of *form* with c(1) real, positive and ⟨φ, φ⟩ = 1

    ``'l1ad'`` uses the supplied L(1, Ad φ); ``'quadrature'`` integrates
    ``|φ|²`` over the truncated domain; ``'auto'`` prefers the former.

    Raises:
        QuadratureError: the norm's error estimate exceeds *tol* (relative)
    """
    if method == 'auto':
        method = 'l1ad' if form.l1ad is not None else 'quadrature'
    if method == 'l1ad':
        if form.l1ad is None:
            raise DomainError(f'{form.label()} has no l1ad value')
        c1 = c1_from_l1ad(form.r, form.l1ad)
        logger.debug(f'{form.label()}: c1={c1:.12g} from L(1, Ad)={form.l1ad}')
        return form.with_c1(c1)
    if method != 'quadrature':
        raise DomainError(f'unknown normalization method: {method!r}')
    # provisional c1 keeps φ of size one
    trial = form.with_c1(c1_from_l1ad(form.r, 1.))
    norm = petersson_norm(trial, dom)
    if norm.err > tol * abs(norm.value):
        raise QuadratureError(
            f'norm of {form.label()} reached only {norm.err / abs(norm.value):.3g} relative',
            achieved=norm.err,
        )
    c1 = trial.c1.real / math.sqrt(norm.value.real)
    logger.info(f'{form.label()}: c1={c1:.12g} by quadrature (err {norm.err:.2g})')
    return form.with_c1(c1)


def screen_points(count: int = 20) -> NDArray[np.complex128]:
    """Deterministic sample points in and near the fundamental domain
    """
    j = np.arange(count)
    x = -0.45 + 0.9 * j / max(count - 1, 1)
    y = 0.75 + 0.5 * ((7 * j) % count) / max(count - 1, 1)
    return x + 1j * y


def automorphy_residual(form: MaassForm, points: ArrayLike|None = None, tol: float = DEFAULT_TOL) -> float:
    """max |φ(-1/z) - φ(z)| relative to max |φ(z)| over *points*

    Unnormalized forms get a provisional c(1) (the ratio does not depend on it).
    """
    if form.c1 is None:
        form = form.with_c1(1.)
    pts = screen_points() if points is None else _as_points(points)
    direct = eval_maass_form(form, pts, tol)
    inverted = eval_maass_form(form, -1 / pts, tol)
    return float(np.max(np.abs(inverted - direct)) / np.max(np.abs(direct)))


def automorphy_screen(form: MaassForm, threshold: float = SCREEN_THRESHOLD, points: ArrayLike|None = None) -> float:
    """Raise :class:`AutomorphyScreenError` unless the residual is below *threshold*
    """
    res = automorphy_residual(form, points)
    if not res < threshold:
        raise AutomorphyScreenError(
            f'{form.source or form.label()}: automorphy residual {res:.3g} >= {threshold:g}'
        )
    logger.debug(f'{form.label()} passed the automorphy screen ({res:.2g})')
    return res
