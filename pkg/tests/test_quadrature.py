import math

import numpy as np
import pytest

from spherecone.quadrature import (
    QuadratureFailure,
    circle_integral,
    dyadic_shells,
    periodic_trapezoid,
    polar_integral,
)


def test_trapezoid_exact_for_trig_polynomials():
    assert periodic_trapezoid(lambda p: np.cos(p) ** 2) == pytest.approx(math.pi, rel=1e-14)
    assert periodic_trapezoid(lambda p: np.sin(5 * p)) == pytest.approx(0.0, abs=1e-14)


def test_trapezoid_bessel_oracle():
    # int_0^{2pi} exp(cos p) dp = 2 pi I0(1), I0(1) from mpmath
    i0 = 1.266065877752008335598245
    assert periodic_trapezoid(lambda p: np.exp(np.cos(p))) == pytest.approx(2 * math.pi * i0, rel=1e-14)


def test_trapezoid_reports_non_finite():
    with np.errstate(divide="ignore"), pytest.raises(QuadratureFailure):
        periodic_trapezoid(lambda p: 1.0 / np.where(p > 1, 0.0, 1.0))


def test_circle_integral_off_centre():
    # x^2 over the circle of radius 2 centred at (1, 0): int (1 + 2 cos)^2 2 dp
    val = circle_integral(lambda x, y: x**2, 2.0, center=(1.0, 0.0))
    assert val == pytest.approx(2 * (2 * math.pi + 4 * math.pi), rel=1e-13)


def test_dyadic_shells_cover_range():
    shells = dyadic_shells(0.0, math.inf)
    assert shells[0][0] == 0.0 and math.isinf(shells[-1][1])
    assert all(a[1] == b[0] for a, b in zip(shells, shells[1:]))
    inner = dyadic_shells(1e-3, 3.0)
    assert all(b / a <= 4 for a, b in inner)


def test_polar_gaussian():
    res = polar_integral(lambda x, y: np.exp(-(x**2 + y**2)), math.inf)
    assert res.converged
    assert res.value == pytest.approx(math.pi, rel=1e-12)
    assert res.tail_fraction < 1e-12


def test_polar_divergence_is_reported():
    res = polar_integral(lambda x, y: np.ones_like(x), math.inf)
    assert not res.converged
