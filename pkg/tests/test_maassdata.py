import math

import pytest

from scslab.config import BUNDLED_DATA
from scslab.errors import (
    BasisCoverageError, DataError, DomainError, MaassParseError, MissingPrimeError,
    UnnormalizedFormError,
)
from scslab.maassdata import (
    MaassForm, SpectralBasis, check_weyl, coefficient_screen, eisenstein_coefficient,
    fourier_coefficient, hecke_array, hecke_coefficient, hecke_residual, load_basis,
    parse_maass_file, serialize_maass_file, weyl_count,
)
from scslab.serialization import dumps, loads

SAMPLE = """maass-form v1
# first even form
level 1
parity even
r 13.77975135189073
l1ad 0.5
coeff 2 1.549304477941
coeff 3 0.246899772454
coeff 5 0.737060385348
"""


def test_parse_sample():
    form = parse_maass_file(SAMPLE, 'sample.maass')
    assert form.r == 13.77975135189073
    assert form.parity == 'even'
    assert form.l1ad == 0.5
    assert form.c1 is None
    assert form.coeffs[1] == 1.
    assert form.source == 'sample.maass'
    assert form.max_index == 6
    assert form.label() == 'even:13.779751'


def test_parse_bytes_and_c1():
    text = SAMPLE.replace('l1ad 0.5', 'c1 0.25 -0.5')
    form = parse_maass_file(text.encode())
    assert form.c1 == 0.25 - 0.5j


@pytest.mark.parametrize('text, lineno, field', [
    ('maass v2\nr 1\n', 1, 'header'),
    ('maass-form v1\nparity even\nr 1\nfoo 3\n', 4, 'foo'),
    ('maass-form v1\nparity even\nr 1\nr 2\n', 4, 'r'),
    ('maass-form v1\nparity sideways\nr 1\n', 2, 'parity'),
    ('maass-form v1\nparity even\nr abc\n', 3, 'r'),
    ('maass-form v1\nparity even\nr nan\n', 3, 'r'),
    ('maass-form v1\nparity even\nr 1\ncoeff 2\n', 4, 'coeff'),
    ('maass-form v1\nparity even\nr 1\ncoeff 2 0.5\ncoeff 2 0.6\n', 5, 'coeff'),
    ('maass-form v1\nparity even\nr 1\ncoeff 0 0.5\n', 4, 'coeff'),
    ('maass-form v1\nlevel 4\nparity even\nr 1\n', 2, 'level'),
    ('maass-form v1\nparity even\nr -3\n', 3, 'r'),
])
def test_parse_errors_carry_location(text, lineno, field):
    with pytest.raises(MaassParseError) as exc_info:
        parse_maass_file(text, 'bad.maass')
    err = exc_info.value
    assert err.lineno == lineno
    assert err.field == field
    assert str(err).startswith(f'bad.maass:{lineno}: ')


def test_parse_missing_key():
    with pytest.raises(MaassParseError) as exc_info:
        parse_maass_file('maass-form v1\nparity even\n')
    assert exc_info.value.field == 'r'
    with pytest.raises(MaassParseError):
        parse_maass_file(b'maass-form v1\n\xff\xfe')


def test_serialize_then_parse(form):
    form = form.with_c1(0.75 + 0.1j)
    again = parse_maass_file(serialize_maass_file(form))
    assert again.r == form.r
    assert again.c1 == form.c1
    assert again.coeffs == form.coeffs
    assert again.content_hash == form.content_hash


def test_hecke_multiplicativity(form):
    lam = form.coeffs
    assert hecke_coefficient(form, 6) == pytest.approx(lam[2] * lam[3])
    assert hecke_coefficient(form, 4) == pytest.approx(lam[2] ** 2 - 1)
    assert hecke_coefficient(form, 8) == pytest.approx(lam[2] ** 3 - 2 * lam[2])
    assert hecke_coefficient(form, 1) == 1.
    arr = hecke_array(form, 12)
    assert arr.shape == (12,)
    assert arr[11] == pytest.approx(hecke_coefficient(form, 12))


def test_missing_prime(form):
    with pytest.raises(MissingPrimeError) as exc_info:
        hecke_coefficient(form, 601 * 2)
    assert exc_info.value.p == 601
    assert form.max_index == 600
    with pytest.raises(DomainError):
        hecke_coefficient(form, 0)


def test_fourier_coefficients(form, odd_form):
    assert fourier_coefficient(form, -6) == fourier_coefficient(form, 6)
    assert fourier_coefficient(odd_form, -6) == -fourier_coefficient(odd_form, 6)
    with pytest.raises(UnnormalizedFormError):
        fourier_coefficient(MaassForm(r=5., parity='even', coeffs={2: 0.1}), 2)


def test_envelope_screen_and_hecke_residual(form):
    assert coefficient_screen(form) == []
    assert hecke_residual(form) == 0.
    bad = MaassForm(r=5., parity='even', coeffs={2: 3.5, 3: 0.1, 6: 0.2})
    assert coefficient_screen(bad) == [2]
    assert hecke_residual(bad) == pytest.approx(abs(0.2 - 0.35))


def test_basis_orders_and_dedups(make_form):
    a = make_form(r=12.)
    b = make_form(r=9.)
    c = make_form(r=12. + 1e-12)
    basis = SpectralBasis.from_iter([a, b, c])
    assert basis.count == 2
    assert basis[1] is b
    assert basis[2] is a
    with pytest.raises(IndexError):
        basis[0]
    assert basis.truncated(1).count == 1
    assert basis.max_r() == 12.


def test_basis_cover(basis):
    basis.require_cover(10., 13.)
    with pytest.raises(BasisCoverageError):
        basis.require_cover(13., 14.)


def test_weyl_law():
    assert weyl_count(1.) == 0.
    # two spectral parameters lie below 12.2
    assert abs(weyl_count(12.2) - 2) < 2
    count, weyl, slack = check_weyl(SpectralBasis(()), 20.)
    assert count == 0
    assert slack == pytest.approx(20 / math.log(20))


def test_load_basis(tmp_path, make_form):
    for i, r in enumerate((9.5, 12.1)):
        (tmp_path / f'f{i}.maass').write_text(serialize_maass_file(make_form(r=r, n_max=50)))
    basis = load_basis(tmp_path)
    assert basis.count == 2
    assert basis[1].source.endswith('f0.maass')
    with pytest.raises(DataError):
        load_basis(tmp_path / 'missing')


def test_load_basis_reports_bad_file(tmp_path):
    (tmp_path / 'a.maass').write_text('maass-form v1\nparity even\nr x\n')
    with pytest.raises(MaassParseError) as exc_info:
        load_basis(tmp_path)
    assert exc_info.value.lineno == 3


def test_form_json_serialization(form):
    again = loads(dumps(form.with_c1(1.5)))
    assert isinstance(again, MaassForm)
    assert again.coeffs == form.coeffs
    assert again.c1 == 1.5


def test_eisenstein_coefficient():
    # c(1, s) = 2π^s / (Γ(s) ζ(2s)); at s = 1: 2π / ζ(2) = 12/π
    assert eisenstein_coefficient(1, 1.).real == pytest.approx(12 / math.pi, rel=1e-12)
    assert eisenstein_coefficient(-3, 0.5 + 2j) == eisenstein_coefficient(3, 0.5 + 2j)
    with pytest.raises(DomainError):
        eisenstein_coefficient(0, 2.)
    s = 0.5 + 4j
    ratio = eisenstein_coefficient(2, s) / eisenstein_coefficient(1, s)
    assert ratio == pytest.approx((1 + 2 ** (1 - 2 * s)) * 2 ** (s - 0.5), rel=1e-12)


def test_bundled_forms():
    basis = load_basis(BUNDLED_DATA)
    parities = [f.parity for f in basis]
    assert parities.count('even') >= 8
    assert parities.count('odd') >= 4
    # published spectral parameters of the first odd and the first even form
    assert basis[1].r == pytest.approx(9.53369526135, abs=1e-10)
    assert basis[1].parity == 'odd'
    assert basis[3].r == pytest.approx(13.77975135189, abs=1e-10)
    assert basis[3].parity == 'even'
    assert basis[3].coeffs[2] == pytest.approx(1.549304477941, abs=1e-11)
    for form in basis:
        assert form.max_index >= 1000
        assert form.l1ad is not None
        assert hecke_residual(form) < 1e-10
        assert not coefficient_screen(form)
    count, weyl, slack = check_weyl(basis, basis.max_r())
    assert abs(count - weyl) <= slack
    assert check_weyl(basis, 10.)[0] == 1
