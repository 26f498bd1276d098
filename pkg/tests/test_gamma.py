import math

import mpmath
import numpy as np
import pytest

from scslab.errors import GammaPoleError, ZetaPoleError
from scslab.gamma import beta, gamma, is_gamma_pole, log_gamma, rgamma
from scslab.zeta import divisor_sigma, zeta, zeta_array

POINTS = [0.7 + 0.1j, 3.2 - 5j, 0.5 + 40j, 12.5 + 3j, -2.3 + 0.4j, -7.5 + 30j, 0.25 - 0.5j]


@pytest.mark.parametrize('z', POINTS)
def test_gamma_against_mpmath(z):
    expected = complex(mpmath.gamma(z))
    assert abs(gamma(z) - expected) <= 1e-11 * abs(expected)


def test_log_gamma_large_imaginary_part():
    # Γ(½+100i) is of size e^{-157}; the log form keeps full relative accuracy
    z = 0.5 + 100j
    expected = complex(mpmath.loggamma(z))
    assert log_gamma(z).real == pytest.approx(expected.real, rel=1e-13)
    assert abs(np.exp(log_gamma(z)) / complex(mpmath.gamma(z)) - 1) < 1e-10


def test_log_gamma_grid_against_mpmath():
    xs, ys = np.meshgrid(np.linspace(0.5, 8., 7), np.linspace(-30., 30., 13))
    z = (xs + 1j * ys).ravel()
    got = log_gamma(z)
    expected = np.array([complex(mpmath.loggamma(complex(w))) for w in z])
    # same branch as the continuous log Γ, and full double accuracy
    assert np.max(np.abs(got - expected)) < 1e-12


def test_gamma_array_shape():
    out = gamma(np.array([[1., 2.], [3., 4.]]))
    assert out.shape == (2, 2)
    np.testing.assert_allclose(out.real, [[1., 1.], [2., 6.]], rtol=1e-13)


def test_gamma_poles():
    with pytest.raises(GammaPoleError):
        gamma(-3)
    with pytest.raises(GammaPoleError):
        log_gamma(np.array([1., 0.]))
    assert rgamma(-3) == 0
    out = rgamma(np.array([-2., 1., 0.5]))
    assert out[0] == 0
    assert out[1] == pytest.approx(1.)
    assert out[2] == pytest.approx(1 / math.sqrt(math.pi))
    assert list(is_gamma_pole([0, -1, 0.5, -1 + 1e-9j])) == [True, True, False, False]


def test_reflection_formula():
    for z in (0.3 + 0.2j, 0.1 - 7j, 0.45 + 25j):
        lhs = gamma(z) * gamma(1 - z)
        rhs = math.pi / np.sin(math.pi * z)
        assert abs(lhs - rhs) <= 1e-11 * abs(rhs)


def test_beta():
    assert beta(2, 3) == pytest.approx(1 / 12, rel=1e-13)
    a, b = 0.5 + 1j, 0.5 - 1j
    assert abs(beta(a, b) - complex(mpmath.beta(a, b))) < 1e-11 * abs(complex(mpmath.beta(a, b)))
    # a + b on a pole of Γ
    assert beta(0.5, -1.5) == 0


def test_zeta_special_values():
    assert zeta(2).real == pytest.approx(math.pi ** 2 / 6, rel=1e-13)
    assert zeta(-1).real == pytest.approx(-1 / 12, rel=1e-10)
    assert zeta(0).real == pytest.approx(-0.5, rel=1e-10)
    assert abs(zeta(0.5 + 14.134725141734693j)) < 1e-8


@pytest.mark.parametrize('s', [1.5 + 20j, 3 - 7j, 0.5 + 100j, -0.5 + 3j])
def test_zeta_against_mpmath(s):
    expected = complex(mpmath.zeta(s))
    assert abs(zeta(s) - expected) <= 1e-10 * abs(expected)


def test_zeta_pole_and_array():
    with pytest.raises(ZetaPoleError):
        zeta(1)
    out = zeta_array(np.array([2., 4.]))
    np.testing.assert_allclose(out.real, [math.pi ** 2 / 6, math.pi ** 4 / 90], rtol=1e-13)


def test_divisor_sigma():
    assert divisor_sigma(1, 12) == 28
    assert divisor_sigma(0, 36) == 9
    assert divisor_sigma(-1, 6) == pytest.approx(2.)
    with pytest.raises(ValueError):
        divisor_sigma(1, 0)
