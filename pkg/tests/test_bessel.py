import math

import mpmath
import numpy as np
import pytest
from scipy.special import kv

from scslab.bessel import bessel_k, bessel_k_imag_order, log_bessel_k
from scslab.errors import DomainError


@pytest.mark.parametrize('r, x', [
    (0.5, 0.3), (9.5337, 2.), (9.5337, 12.), (20., 5.), (3., 40.), (13.78, 0.05),
])
def test_imaginary_order_against_mpmath(r, x):
    # compare e^{πr/2}K_{ir}(x), which is of order one below the turning point
    expected = float(mpmath.besselk(1j * r, x).real) * math.exp(0.5 * math.pi * r)
    got = bessel_k_imag_order(r, x, scaled=True)
    assert got == pytest.approx(expected, rel=1e-9, abs=1e-11)


def test_imaginary_order_is_even_in_r():
    x = np.array([0.5, 3., 9.])
    np.testing.assert_array_equal(bessel_k_imag_order(-4.2, x), bessel_k_imag_order(4.2, x))


def test_scaled_relation():
    r, x = 7.5, 4.
    assert bessel_k_imag_order(r, x, scaled=True) == pytest.approx(
        math.exp(0.5 * math.pi * r) * bessel_k_imag_order(r, x), rel=1e-14,
    )


@pytest.mark.parametrize('nu, x', [(0., 1.), (1., 2.5), (2.5, 0.7), (0.5, 10.)])
def test_real_order_against_scipy(nu, x):
    assert bessel_k(nu, x).real == pytest.approx(kv(nu, x), rel=1e-11)


def test_complex_argument():
    nu, z = 0.3j, 1 + 0.5j
    expected = complex(mpmath.besselk(nu, z))
    assert abs(bessel_k(nu, z) - expected) < 1e-10 * abs(expected)


def test_half_order_closed_form():
    x = np.linspace(0.2, 20., 9)
    np.testing.assert_allclose(
        bessel_k(0.5, x).real, np.sqrt(math.pi / (2 * x)) * np.exp(-x), rtol=1e-12,
    )


def test_log_form_survives_underflow():
    # K_{ir}(x) ~ e^{-πr/2} underflows for r = 600 but the log scale does not
    mant, scale = log_bessel_k(600j, 300.)
    value = math.log(abs(mant[0])) + scale[0]
    assert math.isfinite(value)
    assert value < -800


def test_shape_and_domain():
    x = np.array([[0.5, 1.], [2., 4.]])
    assert bessel_k_imag_order(3., x).shape == (2, 2)
    assert isinstance(bessel_k_imag_order(3., 1.), float)
    with pytest.raises(DomainError):
        bessel_k_imag_order(3., 0.)
    with pytest.raises(DomainError):
        bessel_k(1., -1.)
