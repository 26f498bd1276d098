import math

import numpy as np
import pytest

from scslab.errors import BasisCoverageError, DomainError
from scslab.gamma import gamma
from scslab.innerprod import PairingResult
from scslab.lfun import MainTermSpec, ShiftedConvolutionSpec, spectral_main_term_f
from scslab.maassdata import SpectralBasis, fourier_coefficient
from scslab.scs import (
    PerronSpec, SCSResult, compare_main_term, compare_sharp, exponent_fit, perron_integral,
    perron_kernel, select_gap_height, sharp_envelope, sharp_perron_height, sharp_scs,
    smoothed_envelope, smoothed_scs, snap_cutoff, scs_terms,
)
from scslab.types import THETA


@pytest.fixture
def equal_spec(form):
    return ShiftedConvolutionSpec(h=2, Phi1=form, Phi2=form)


def brute_force(spec, cutoff, weight):
    total = 0.
    for n in range(-int(cutoff) - spec.h - 2, int(cutoff) + 2):
        if n in (0, -spec.h):
            continue
        norm = math.sqrt(abs(n * (n + spec.h)))
        if norm < cutoff:
            c = fourier_coefficient(spec.Phi1, n) * fourier_coefficient(spec.Phi2, n + spec.h)
            total += c.real * weight(norm)
    return total


def test_scs_terms(equal_spec):
    ns, coeffs, norms = scs_terms(equal_spec, 10.)
    assert 0 not in ns and -2 not in ns
    assert -1 in ns
    assert np.all(norms < 10.)
    assert ns.shape == coeffs.shape == norms.shape
    # the largest admissible n has n(n+2) < 100
    assert ns.max() == 9
    assert ns.min() == -11


def test_smoothed_sum(equal_spec):
    T = 30.
    pw = 1.5 + equal_spec.eps
    expected = brute_force(equal_spec, T, lambda norm: math.log(T / norm) ** pw)
    assert smoothed_scs(equal_spec, T) == pytest.approx(expected, rel=1e-10, abs=1e-10)
    with pytest.raises(DomainError):
        smoothed_scs(equal_spec, 1.)


def test_sharp_sum(equal_spec):
    expected = brute_force(equal_spec, 25.5, lambda norm: 1.)
    assert sharp_scs(equal_spec, 25.5) == pytest.approx(expected, rel=1e-10, abs=1e-10)
    with pytest.raises(DomainError):
        sharp_scs(equal_spec, 0.5)


@pytest.mark.parametrize('X', [5., 0.5])
def test_perron_kernel(X, equal_spec):
    pspec = PerronSpec.smoothed(equal_spec)
    res = perron_kernel(X, pspec)
    c = pspec.c
    exact = math.log(X) ** (c - 1) / gamma(c).real if X > 1 else 0.
    assert abs(res.value - exact) <= res.budget + 10 * res.quad_err


def test_perron_spec_validation():
    with pytest.raises(DomainError):
        PerronSpec(a=1., T=50., c=2.5)
    with pytest.raises(DomainError):
        PerronSpec(a=1.2, T=5., c=2.5)
    with pytest.raises(DomainError):
        PerronSpec(a=1.2, T=50., c=0.5)
    assert PerronSpec.sharp(1.15, 40.).c == 1.


def test_perron_reproduces_smoothed_sum(equal_spec):
    T = 20.
    pspec = PerronSpec.smoothed(equal_spec)
    res = perron_integral(equal_spec, pspec, T)
    gam = gamma(pspec.c).real
    direct = smoothed_scs(equal_spec, T)
    assert abs(gam * res.value - direct) <= gam * (res.budget + 10 * res.quad_err)
    assert res.params['N_max'] == 4 * 20 + 16 + 50


def test_perron_cutoff_must_be_positive(equal_spec):
    with pytest.raises(DomainError):
        perron_integral(equal_spec, PerronSpec.smoothed(equal_spec), 0.)


def test_snap_and_heights():
    assert snap_cutoff(7.9) == 7 + 1 / 3
    assert snap_cutoff(12.) == 12 + 1 / 3
    assert sharp_perron_height(1, 10., THETA, 0.1) == 12.
    assert sharp_perron_height(1, 1e9, THETA, 0.1) == 400.
    T = sharp_perron_height(1, 1e5, THETA, 0.1)
    assert T == pytest.approx(1e5 ** (1 / 3 + 4 * THETA / 3))
    assert 12 < T < 400


def test_envelopes():
    assert smoothed_envelope(1, 100., 0.1) == pytest.approx(100 ** 0.1 + 100 ** -2.2)
    assert sharp_envelope(1, 100., 0., 0.) == pytest.approx(100 ** (2 / 3) + 10 + 1)


def test_exponent_fit():
    x = np.array([10., 20., 40., 80.])
    alpha, C = exponent_fit(x, -3 * x ** 0.5)
    assert alpha == pytest.approx(0.5)
    assert C == pytest.approx(3.)
    alpha, _ = exponent_fit([1., 2., 4.], [0., 2., 4.])
    assert alpha == pytest.approx(1.)
    with pytest.raises(DomainError):
        exponent_fit([1., 2.], [0., 1.])


def test_gap_height(make_form):
    basis = SpectralBasis.from_iter(make_form(r=r) for r in (10.2, 10.6, 12.))
    assert select_gap_height(basis, 10.) == 11.
    with pytest.raises(BasisCoverageError):
        select_gap_height(basis, 11.5)
    sparse = SpectralBasis.from_iter(make_form(r=r) for r in (5., 20.))
    assert select_gap_height(sparse, 10.) == 10.5


def test_gap_height_ties_go_left(make_form):
    basis = SpectralBasis.from_iter(make_form(r=r) for r in (10.5, 14.))
    # 10 and 11 are both 0.5 from the only r inside the window
    assert select_gap_height(basis, 10.) == 10.


def test_compare_sharp_without_perron(equal_spec):
    rows = compare_sharp(equal_spec, [7.9, 12.], with_perron=False)
    assert [row.cutoff for row in rows] == [7 + 1 / 3, 12 + 1 / 3]
    assert all(row.snapped for row in rows)
    for row in rows:
        assert row.main_term == 0
        assert row.remainder == row.direct_sum == sharp_scs(equal_spec, row.cutoff)
        assert row.perron_value is None


def test_compare_main_term(equal_spec, basis):
    triples = {k: PairingResult(1e-3 * k, 1e-9) for k in range(1, 4)}
    rows = compare_main_term(equal_spec, [20., 30.], basis, triples)
    # the basis stops below 21, so no height can be snapped
    assert not any(row.snapped for row in rows)
    f = spectral_main_term_f(equal_spec, MainTermSpec(T_grid=(20., 30.)), basis, triples)
    for row, value in zip(rows, f.values):
        assert row.main_term == pytest.approx(value * math.sqrt(row.cutoff))
        assert row.direct_sum == smoothed_scs(equal_spec, row.cutoff)
        assert row.remainder == pytest.approx(row.direct_sum - row.main_term)
        assert row.gap == pytest.approx(row.cutoff - basis[3].r)
        assert set(row.budgets) == {'tail', 'envelope'}


def test_scs_result_budgets_must_be_finite():
    with pytest.raises(AssertionError):
        SCSResult(cutoff=10., direct_sum=1., main_term=0., budgets={'tail': math.inf})
