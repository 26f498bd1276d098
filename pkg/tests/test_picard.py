import math

import mpmath
import pytest

from scslab.errors import DomainError, SecantPoleError
from scslab.picard import PicardSpec, picard_F, picard_F_result, picard_closed_a0, picard_closed_a2


def test_closed_form_a2_against_mpmath():
    b, s = 9.5337, 2 + 3j
    expected = complex(
        mpmath.mpf(2) ** (s / 2 - 1) * mpmath.gamma(s / 2 + 1j * b) * mpmath.gamma(s / 2 - 1j * b)
        / mpmath.gamma(s)
    )
    assert abs(picard_closed_a2(b, s) - expected) < 1e-11 * abs(expected)


def test_elementary_value():
    # ∫₀^∞ du/(1 + cosh u) = 1
    assert picard_F(PicardSpec(b=0., a=2., s=2.)) == pytest.approx(1., rel=1e-14)
    assert picard_F(PicardSpec(b=0., a=2., s=2.), method='cosh') == pytest.approx(1., rel=1e-9)


@pytest.mark.parametrize('b', [0., 1.])
@pytest.mark.parametrize('s', [0.6, 2., 2 + 3j, 0.5 + 7j])
@pytest.mark.parametrize('method', ['cosh', 'interval'])
def test_a2_quadrature_matches_closed_form(b, s, method):
    spec = PicardSpec(b=b, a=2., s=s)
    closed = picard_F(spec, method='closed')
    assert abs(picard_F(spec, method=method) - closed) < 1e-8 * abs(closed)


@pytest.mark.parametrize('s', [2., 0.5 + 7j])
def test_large_b_cosh_line(s):
    spec = PicardSpec(b=9.5337, a=2., s=s)
    closed = picard_F(spec, method='closed')
    assert abs(closed) < 1e-8
    assert abs(picard_F(spec, method='cosh') - closed) < 1e-8 * abs(closed)


@pytest.mark.parametrize('b', [0., 1.])
def test_a0_against_closed_form(b):
    spec = PicardSpec(b=b, a=0., s=0.6)
    closed = picard_closed_a0(b, 0.6)
    for method in ('cosh', 'interval'):
        res = picard_F_result(spec, method=method)
        assert abs(res.value - closed) < 1e-8 * abs(closed)


def test_intermediate_offset_between_methods():
    spec = PicardSpec(b=1.3, a=0.7, s=1.5 + 0.5j)
    cosh = picard_F(spec, method='cosh')
    interval = picard_F(spec, method='interval')
    assert abs(cosh - interval) < 1e-8 * abs(cosh)


def test_symmetric_in_b():
    assert picard_F(PicardSpec(b=-2., a=2., s=1.7)) == picard_F(PicardSpec(b=2., a=2., s=1.7))


def test_a0_closed_form_relation():
    b, s = 1.5, 0.8
    ratio = math.cosh(math.pi * b) / math.cos(math.pi * s / 2)
    assert picard_closed_a0(b, s) == pytest.approx(ratio * picard_closed_a2(b, s), rel=1e-12)


def test_errors():
    with pytest.raises(SecantPoleError):
        picard_closed_a0(1., 1.)
    with pytest.raises(DomainError):
        PicardSpec(b=1., a=-0.5, s=2.)
    with pytest.raises(DomainError):
        PicardSpec(b=1., a=2., s=-0.5)
    with pytest.raises(DomainError):
        picard_F(PicardSpec(b=1., a=0.7, s=2.), method='closed')
    with pytest.raises(DomainError):
        picard_F(PicardSpec(b=1., a=0., s=1.5), method='cosh')
