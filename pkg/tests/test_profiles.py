import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherecone import profiles as pf
from spherecone.errors import InfeasibleError, TailDivergenceError, ValidationError


def test_central_diff4_is_fourth_order():
    errs = []
    for n in (101, 201):
        x = np.linspace(0, 1, n)
        d = pf.central_diff4(np.sin(3 * x), x[1] - x[0], 1)
        errs.append(np.max(np.abs(d[2:-2] - 3 * np.cos(3 * x[2:-2]))))
    assert errs[0] / errs[1] > 12  # ~16 for fourth order


def test_gaussian_bell_totals():
    area, total = pf.revolution_totals(pf.gaussian_bell())
    assert area == pytest.approx(math.pi, abs=1e-10)
    assert total == pytest.approx(2 * math.pi, abs=1e-10)


def test_sphere_totals():
    t = pf.revolution_totals(pf.round_sphere())
    assert t.closed
    assert t.area == pytest.approx(4 * math.pi, abs=1e-8)
    assert t.total_curvature == pytest.approx(4 * math.pi, abs=1e-8)


@pytest.mark.parametrize("maker", [pf.gaussian_bell, pf.round_sphere])
def test_revolution_gauss_bonnet(maker):
    t = pf.revolution_totals(maker())
    assert t.curvature_quadrature == pytest.approx(t.total_curvature, abs=1e-8)


def test_cone_tip_is_rejected():
    with pytest.raises(ValidationError, match="cone tip is not smooth"):
        pf.revolution_totals(pf.cone(0.5))


def test_unsettled_tail_raises():
    p = pf.sample_profile(
        lambda r: np.sin(r) + 0.1 * r**2 * np.sin(r),
        2.0,
        lambda r: np.cos(r) + 0.2 * r * np.sin(r) + 0.1 * r**2 * np.cos(r),
    )
    with pytest.raises(TailDivergenceError):
        pf.revolution_totals(p)


def test_flat_plane_tail_is_large():
    t = pf.revolution_totals(pf.flat_plane())
    assert t.tail_area_fraction == pytest.approx(0.19, abs=1e-12)


def test_smoothing_certificate_default():
    p = pf.smooth_cone_profile(0.5, 0.1)
    cert = pf.smoothing_certificate(p)
    assert cert["min_curvature"] >= 1 - 1e-6
    assert cert["boundary_value_error"] <= 1e-9
    assert cert["boundary_slope_error"] <= 1e-9
    assert cert["boundary_second_derivative_error"] <= 1e-9
    assert cert["slope_at_origin"] == pytest.approx(1.0, abs=1e-12)
    assert cert["warp_slope_monotone"] and cert["warp_concave"]
    assert abs(cert["area_change"]) <= 2 * math.pi * 0.1**2
    # matching radius has the closed form 2 delta s / (1 + s)
    assert p.R == pytest.approx(2 * 0.1 * 0.5 / 1.5, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.98), st.floats(1e-3, 0.7))
def test_smoothing_certificate_everywhere(s, delta):
    cert = pf.smoothing_certificate(pf.smooth_cone_profile(s, delta))
    assert cert["min_curvature"] >= 1 - 1e-6
    assert cert["boundary_value_error"] <= 1e-9
    assert cert["boundary_slope_error"] <= 1e-9
    assert abs(cert["area_change"]) <= 2 * math.pi * delta**2


def test_smoothing_near_smooth_cone_approaches_sine():
    p = pf.smooth_cone_profile(0.999, 0.1)
    assert np.max(np.abs(p.f - np.sin(p.r))) < 1e-4


@pytest.mark.parametrize("s, delta", [(0.0, 0.1), (1.0, 0.1), (0.5, 0.0), (0.5, math.pi / 4)])
def test_smoothing_preconditions(s, delta):
    with pytest.raises(ValidationError):
        pf.smooth_cone_profile(s, delta)


def test_infeasible_is_a_validation_error():
    assert issubclass(InfeasibleError, ValidationError)
