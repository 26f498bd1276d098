import math

import pytest

from scslab.config import TolerancePolicy
from scslab.errors import ConvergenceError, DataError, DomainError
from scslab import verify
from scslab.gamma import gamma
from scslab.innerprod import PairingResult
from scslab.maassdata import MaassForm, SpectralBasis
from scslab.scs import PerronResult
from scslab.verify import (
    Identity, core_identities, data_identities, reproduction_identities, run_identities,
    unfolding_identities, unfolding_pairs,
)

GROUPS = {'specfun', 'identities', 'contour', 'innerprod', 'scs'}


def test_identity_uses_its_group_tolerance():
    tol = TolerancePolicy()
    res = Identity('tiny', 'contour', lambda t: (t / 2, 'half')).run(tol)
    assert res.tol == tol.contour
    assert res.passed
    res = Identity('large', 'specfun', lambda t: (2 * t, 'double')).run(tol)
    assert not res.passed
    assert res.detail == 'double'


@pytest.mark.parametrize('exc', [ConvergenceError('no luck'), DomainError('outside')])
def test_numerical_failures_become_rows(exc):
    def compute(tol):
        raise exc

    res = Identity('broken', 'identities', compute).run(TolerancePolicy())
    assert res.residual == math.inf
    assert not res.passed
    assert res.detail.startswith(type(exc).__name__)


def test_data_errors_propagate():
    def compute(tol):
        raise DataError('bad file')

    with pytest.raises(DataError):
        Identity('data', 'innerprod', compute).run(TolerancePolicy())


def test_core_identities():
    identities = core_identities()
    assert len(identities) == 11
    assert len({i.name for i in identities}) == 11
    assert {i.group for i in identities} <= GROUPS


def test_cheap_core_identities_pass():
    picked = [i for i in core_identities() if i.name in ('gamma reflection', 'zeta(2)')]
    results = run_identities(picked, TolerancePolicy())
    assert len(results) == 2
    assert all(r.passed for r in results)


def test_data_identities(basis):
    identities = data_identities(basis, h=2)
    assert [i.name for i in identities] == [
        'automorphy screen', 'residue duality', 'Hecke closure', 'Weyl count N(10) = 1',
    ]
    results = run_identities(identities[1:], TolerancePolicy())
    assert all(r.passed for r in results)
    assert results[0].detail == 'k <= 3'
    assert results[2].detail.startswith('N(10)=1')


def test_hecke_closure_flags_composite_mismatch(make_form):
    form = make_form()
    coeffs = dict(form.coeffs)
    coeffs[6] = coeffs[2] * coeffs[3] + 0.1
    broken = MaassForm(r=form.r, parity=form.parity, coeffs=coeffs, c1=1.)
    hecke = data_identities(SpectralBasis.from_iter([broken]))[2]
    res = hecke.run(TolerancePolicy())
    assert not res.passed
    assert res.residual == pytest.approx(0.1)
    assert res.detail == f'worst {broken.label()}'


@pytest.mark.parametrize('rs', [(9.53, 9.8), (12.17,), (8.1, 9.53, 12.17)])
def test_weyl_count_rejects_wrong_bottom(make_form, rs):
    basis = SpectralBasis.from_iter(make_form(r=r) for r in rs)
    res = data_identities(basis)[3].run(TolerancePolicy())
    assert not res.passed


def test_kernel_equal_meets_specfun_tolerance():
    identity = next(i for i in core_identities() if i.name == 'kernel equal-parameter beta')
    res = identity.run(TolerancePolicy())
    assert res.tol == TolerancePolicy().specfun
    assert res.passed


@pytest.fixture
def even_even_odd(make_form):
    return SpectralBasis.from_iter([
        make_form(r=9.533695),
        make_form(r=12.173008, angle=math.sqrt(2)),
        make_form(r=13.779751, parity='odd', angle=math.sqrt(3)),
    ])


def test_unfolding_pairs(basis, even_even_odd, make_form):
    assert unfolding_pairs(basis) == [(1, 1), (1, 2)]
    assert unfolding_pairs(even_even_odd) == [(1, 1), (1, 2), (1, 3)]
    assert unfolding_pairs(SpectralBasis.from_iter([make_form()])) == [(1, 1)]


class FakeCache:
    def __init__(self, *forms, directory=None):
        self.forms = forms

    def triples_sync(self, basis, k_max=None):
        return {}

    def eisen_sync(self, us):
        return {}


@pytest.mark.parametrize('offset, passed', [(5e-4, True), (1., False)])
def test_unfolding_identities_pair_both_forms(even_even_odd, monkeypatch, offset, passed):
    calls = []

    def geometric(h, s, Phi1, Phi2):
        calls.append((Phi1.label(), Phi2.label()))
        return PairingResult(1 + Phi2.r, 1e-3)

    def spectral(h, s, Phi1, Phi2, basis, **kw):
        return PairingResult(1 + Phi2.r + offset, 1e-3)

    monkeypatch.setattr(verify, 'geometric_side', geometric)
    monkeypatch.setattr(verify, 'spectral_side', spectral)
    monkeypatch.setattr(verify, 'PairingCache', FakeCache)
    identities = unfolding_identities(even_even_odd, h_values=(1,))
    assert len(identities) == 9
    assert identities[-1].name == 'unfolding (φ1, φ3) h=1 s=(1.5+10j)'
    results = run_identities(identities, TolerancePolicy())
    assert all(r.passed == passed for r in results)
    labels = [f.label() for f in even_even_odd]
    assert set(calls) == {(labels[0], labels[k]) for k in range(3)}


@pytest.mark.parametrize('cubic, passed', [(0., True), (5e3, False)])
def test_residue_limit_is_extrapolated(basis, monkeypatch, cubic, passed):
    residue = 2. + 0.5j
    rho = 0.5 + 1j * basis[1].r

    def continued(spec, s, basis, **kw):
        d = s - rho
        # a linear fit through the two nearest offsets misses by 50·d₁d₂
        return PairingResult((residue + d + 50 * d ** 2 + cubic * d ** 3) / d, 0.)

    monkeypatch.setattr(verify, 'PairingCache', FakeCache)
    monkeypatch.setattr(verify, 'lh_continued', continued)
    monkeypatch.setattr(verify, 'residue_at_pole', lambda *a, **kw: PairingResult(residue, 0.))
    identity = next(i for i in reproduction_identities(basis) if i.name == 'residue limit k=1')
    res = identity.run(TolerancePolicy())
    assert res.passed == passed


@pytest.mark.parametrize('C, passed', [(5., True), (20., False)])
def test_perron_reproduction_fits_constant(make_form, monkeypatch, C, passed):
    phi = make_form().with_c1(2.)
    basis = SpectralBasis.from_iter([phi])
    seen = []

    def perron(spec, pspec, T):
        seen.append(T)
        value = abs(phi.c1) ** 2 * C * T ** (-spec.eps / 20) / gamma(pspec.c).real
        return PerronResult(value, 0., 0.)

    monkeypatch.setattr(verify, 'PairingCache', FakeCache)
    monkeypatch.setattr(verify, 'perron_integral', perron)
    monkeypatch.setattr(verify, 'smoothed_scs', lambda spec, T: 0.)
    identity = reproduction_identities(basis)[-1]
    res = identity.run(TolerancePolicy())
    assert seen == [30., 50., 80.]
    assert res.passed == passed
    assert res.detail.startswith(f'C={C:.3g}')
