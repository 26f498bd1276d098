import mpmath
import numpy as np
import pytest
from scipy.special import hyp2f1

from scslab.errors import DomainError, LinePlacementError, ParameterPoleError
from scslab.hypergeom import barnes_2f1, default_barnes_contour, gauss_2f1, gauss_2f1_boundary
from scslab.quadrature import ContourSpec
from scslab.verify import barnes_draws


@pytest.mark.parametrize('z', [0.3, -0.7, 0.9, -3.5, -20.])
def test_real_parameters_against_scipy(z):
    assert gauss_2f1(0.5, 1.2, 2.3, z).real == pytest.approx(hyp2f1(0.5, 1.2, 2.3, z), rel=1e-11)


@pytest.mark.parametrize('z', [0.4, -2.5 + 1j, 0.95 + 0.1j, 5 + 2j, 1.2 - 0.3j, 0.8 + 0.1j])
def test_complex_parameters_against_mpmath(z):
    a, b, c = 1 + 0.5j, -0.3j, 2.2 + 1j
    expected = complex(mpmath.hyp2f1(a, b, c, z))
    assert abs(gauss_2f1(a, b, c, z) - expected) < 1e-9 * abs(expected)


def test_array_argument():
    z = np.array([[0.1, -0.5], [-4., 0.6 + 0.2j]])
    out = gauss_2f1(0.5, 1.2, 2.3, z)
    assert out.shape == (2, 2)
    for idx in np.ndindex(z.shape):
        assert out[idx] == pytest.approx(complex(mpmath.hyp2f1(0.5, 1.2, 2.3, z[idx])), rel=1e-11)


def test_polynomial_case():
    # a = -3 terminates the series, for any z
    expected = complex(mpmath.hyp2f1(-3, 2, 1.5, 7.))
    assert gauss_2f1(-3, 2, 1.5, 7.) == pytest.approx(expected, rel=1e-12)


def test_parameter_pole():
    with pytest.raises(ParameterPoleError):
        gauss_2f1(0.5, 0.5, -2, 0.3)


@pytest.mark.parametrize('side', [1, -1])
def test_boundary_values_on_the_cut(side):
    a, b, c, x = 0.3 + 0.2j, 1.1, 2.5, 2.5
    expected = complex(mpmath.hyp2f1(a, b, c, mpmath.mpc(x, side * 1e-20)))
    assert abs(gauss_2f1_boundary(a, b, c, x, side) - expected) < 1e-9 * abs(expected)


def test_boundary_sides_differ():
    a, b, c, x = 0.3 + 0.2j, 1.1, 2.5, 2.5
    assert abs(gauss_2f1_boundary(a, b, c, x, 1) - gauss_2f1_boundary(a, b, c, x, -1)) > 1e-3


def test_boundary_below_one_is_plain_value():
    assert gauss_2f1_boundary(0.5, 1.2, 2.3, 0.5) == gauss_2f1(0.5, 1.2, 2.3, 0.5)


@pytest.mark.parametrize('alpha, beta, gamma, z', barnes_draws())
def test_barnes_against_series(alpha, beta, gamma, z):
    contour = default_barnes_contour(alpha, beta, z, tol=1e-10)
    expected = gauss_2f1(alpha, beta, gamma, z)
    assert abs(barnes_2f1(alpha, beta, gamma, z, contour) - expected) < 1e-6 * abs(expected)


def test_barnes_draws_are_admissible():
    draws = barnes_draws()
    assert len(draws) == 20
    assert draws == barnes_draws()
    for alpha, beta, gamma, z in draws:
        assert min(alpha.real, beta.real) > 0
        assert abs(z) < 0.9
        assert abs(np.angle(-z)) <= 2.4
        expected = complex(mpmath.hyp2f1(alpha, beta, gamma, z))
        assert abs(gauss_2f1(alpha, beta, gamma, z) - expected) < 1e-10 * abs(expected)


def test_barnes_covers_the_gap_between_regions():
    # neither |z| nor |1-z| is small and Re z >= 1/2
    alpha, beta, gamma, z = 0.8, 1.3, 2.1, 0.5 + 1.2j
    contour = default_barnes_contour(alpha, beta, z, tol=1e-10)
    expected = complex(mpmath.hyp2f1(alpha, beta, gamma, z))
    assert abs(barnes_2f1(alpha, beta, gamma, z, contour) - expected) < 1e-7 * abs(expected)


def test_barnes_line_placement():
    with pytest.raises(LinePlacementError):
        barnes_2f1(0.7, 1.1, 2.3, -0.6, ContourSpec(beta=0.1))
    with pytest.raises(LinePlacementError):
        barnes_2f1(0.3, 1.1, 2.3, -0.6, ContourSpec(beta=-0.5))
    with pytest.raises(DomainError):
        barnes_2f1(0.7, 1.1, 2.3, 0.5, ContourSpec(beta=-0.3))
