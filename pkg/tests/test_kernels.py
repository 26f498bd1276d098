import cmath
import math

import mpmath
import pytest

from scslab.errors import DomainError, PoleProximityError
from scslab.gamma import gamma
from scslab.kernels import (
    KernelArgs, bessel_mellin_lhs, bessel_mellin_rhs, connection_grid, connection_phase,
    connection_residual, k_product_lhs, k_product_rhs, kernel_E, kernel_F_plus,
    kernel_functions, m_ratio_residual, mellin_exp_bessel, resolve_connection_prefactor,
)

R1, R2 = 9.53, 12.17


def test_connection_holds_on_the_grid():
    grid = connection_grid()
    assert len(grid) == 27
    assert {args.regime for args in grid} == {'negative', 'unit', 'large'}
    worst = max(connection_residual(args) for args in grid)
    assert worst < 1e-8
    assert resolve_connection_prefactor() == 0


@pytest.mark.parametrize('side', [1, -1])
def test_connection_from_either_side(side):
    for a in (-2., 3.):
        args = KernelArgs(w=-0.55 + 0.2j, a=a, r1=R1, r2=R2, side=side)
        assert connection_residual(args) < 1e-8


def test_equal_parameters_have_no_extra_term():
    args = KernelArgs(w=-0.6, a=0.4, r1=R1, r2=R1)
    assert kernel_E(args) == 0
    values = kernel_functions(args)
    assert abs(values.F_plus - values.M_plus) < 1e-9 * abs(values.F_plus)


@pytest.mark.parametrize('a', [-1.5, 0.5, 2.5])
def test_m_ratio(a):
    assert m_ratio_residual(KernelArgs(w=-0.6 + 0.1j, a=a, r1=R1, r2=R2)) < 1e-10


def test_connection_phase():
    assert connection_phase(KernelArgs(w=-0.6, a=0.3, r1=R1, r2=R2)) == 1
    args = KernelArgs(w=-0.6 + 0.2j, a=-0.3, r1=R1, r2=R2, side=-1)
    expected = cmath.exp(-1j * math.pi * (args.w + 1j * R2))
    assert abs(connection_phase(args) - expected) < 1e-14 * abs(expected)


def test_kernel_args_validation():
    for bad in ({'a': 1.}, {'a': 0.}, {'a': math.inf}, {'side': 0}):
        kw = {'w': -0.6, 'a': 0.5, 'r1': R1, 'r2': R2, **bad}
        with pytest.raises(DomainError):
            KernelArgs(**kw)
    assert KernelArgs(w=-0.6, a=-2., r1=R1, r2=R2).regime == 'negative'
    assert KernelArgs(w=-0.6, a=0.7, r1=R1, r2=R2).regime == 'unit'
    assert KernelArgs(w=-0.6, a=4., r1=R1, r2=R2).regime == 'large'


def test_kernel_pole():
    with pytest.raises(PoleProximityError):
        kernel_F_plus(KernelArgs(w=1j * R2, a=0.5, r1=R1, r2=R2))


@pytest.mark.parametrize('a, b, x, y', [
    (0.4, 0.4, 1.3, 0.8),
    (1.2j, 0.4, 1.3, 0.8),
    (3j, -2j, 0.5, 2.),
])
def test_k_product_formula(a, b, x, y):
    lhs = k_product_lhs(a, b, x, y)
    rhs = k_product_rhs(a, b, x, y).value
    assert abs(lhs - rhs) < 1e-8 * abs(lhs)
    with pytest.raises(DomainError):
        k_product_rhs(a, b, 0., y)


def test_mellin_exp_bessel_half_order():
    # K_{1/2}(z) = √(π/2z) e^{-z} makes the integral a gamma function
    expected = math.sqrt(math.pi / 5) * gamma(1.3).real / 3.5 ** 1.3
    assert abs(mellin_exp_bessel(0.5, 1., 2.5, 1.8) - expected) < 1e-11 * expected


def test_mellin_exp_bessel_against_mpmath():
    nu, a, b, s = 2j, 1., 0.5, 1.5 + 1j
    expected = complex(mpmath.quad(
        lambda y: mpmath.exp(-a * y) * mpmath.besselk(nu, b * y) * mpmath.power(y, s - 1), [0, 1, 10, mpmath.inf],
    ))
    got = mellin_exp_bessel(nu, a, b, s)
    assert abs(got - expected) < 1e-8 * abs(expected)
    with pytest.raises(DomainError):
        mellin_exp_bessel(1.5, 1., 1., 1.)


@pytest.mark.slow
@pytest.mark.parametrize('r1, r2', [(2., 2.), (2., 3.)])
def test_bessel_mellin_forms_agree(r1, r2):
    m, n, s = 1., 2., 1.5
    lhs = bessel_mellin_lhs(m, n, s, r1, r2).value
    rhs = bessel_mellin_rhs(m, n, s, r1, r2).value
    assert abs(lhs - rhs) < 1e-6 * abs(lhs)
