import math

import numpy as np
import pytest

from scslab.errors import DomainError, NonFiniteIntegrandError
from scslab.quadrature import (
    ContourSpec, IntegralResult, QuadratureSpec, gauss_legendre_panels, integrate,
    line_trapezoid, line_trapezoid_batch, tanh_sinh, vertical_line_integral,
)


def test_tanh_sinh_smooth():
    res = tanh_sinh(np.sin, 0., math.pi)
    assert res.value == pytest.approx(2., rel=1e-12)
    assert res.err < 1e-8


def test_tanh_sinh_endpoint_singularity():
    # x^{-1/2} evaluated from the distance to 0, where x itself rounds to 0
    res = tanh_sinh(lambda x, d_lo, d_hi: d_lo ** -0.5, 0., 1., with_distances=True)
    assert res.value == pytest.approx(2., rel=1e-10)


def test_tanh_sinh_rejects_empty_interval():
    with pytest.raises(DomainError):
        tanh_sinh(np.exp, 1., 1.)


def test_gauss_legendre_panels():
    res = gauss_legendre_panels(np.exp, 0., 1.)
    assert res.value == pytest.approx(math.e - 1, rel=1e-13)
    res = gauss_legendre_panels(np.exp, 0., 1., edges=np.array([0., 0.1, 0.5, 1.]))
    assert res.value == pytest.approx(math.e - 1, rel=1e-13)


def test_integrate_dispatch():
    for scheme in ('tanh-sinh', 'gauss-legendre-panels'):
        res = integrate(np.cos, 0., 1., QuadratureSpec(scheme=scheme))
        assert res.value == pytest.approx(math.sin(1.), rel=1e-10)


def test_line_trapezoid_gaussian():
    res = line_trapezoid(lambda x: np.exp(-x * x), -10., 10., 0.5, 1e-12)
    assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert res.trunc_err < 1e-20
    assert res.levels >= 1


def test_line_trapezoid_batch_matches_single():
    def f(x):
        return np.array([np.exp(-x * x), np.exp(-2 * x * x)])

    values, quad_errs, trunc_errs = line_trapezoid_batch(f, -10., 10., 0.5, 1e-12)
    np.testing.assert_allclose(values.real, [math.sqrt(math.pi), math.sqrt(math.pi / 2)], rtol=1e-13)
    assert quad_errs.shape == trunc_errs.shape == (2,)


def test_vertical_line_integral():
    # (1/2πi)∫ e^{w²} dw over Re w = c is 1/(2√π) for every c
    res = vertical_line_integral(lambda w: np.exp(w * w), ContourSpec(beta=0.5, t_max=10., tol=1e-10))
    assert res.value == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-10)


def test_non_finite_integrand_reports_ordinate():
    with pytest.raises(NonFiniteIntegrandError) as exc_info:
        line_trapezoid(lambda x: np.where(x == 0, np.nan, 1.), -1., 1., 0.5, 1e-8)
    assert exc_info.value.ordinate == 0.


def test_integral_result_arithmetic():
    a = IntegralResult(value=1 + 1j, quad_err=1e-3, trunc_err=1e-4, step=0.1, evaluations=10)
    b = IntegralResult(value=2., quad_err=2e-3, step=0.05, evaluations=5)
    assert a.err == pytest.approx(1.1e-3)
    c = a + b
    assert c.value == 3 + 1j
    assert c.err == pytest.approx(3.1e-3)
    assert c.step == 0.05
    assert c.evaluations == 15
    d = a.scaled(-2j)
    assert d.value == (1 + 1j) * -2j
    assert d.quad_err == pytest.approx(2e-3)
    assert d.trunc_err == pytest.approx(2e-4)


@pytest.mark.parametrize('kw', [
    {'scheme': 'simpson'},
    {'tol': 0.},
    {'panels': 0},
    {'cutoff': -1.},
])
def test_quadrature_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)


def test_contour_spec_step_limit():
    ContourSpec(beta=1., step=0.25)
    with pytest.raises(DomainError):
        ContourSpec(beta=1., step=0.3)
