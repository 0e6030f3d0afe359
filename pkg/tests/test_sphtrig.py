import math
import re

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from spherecone.errors import DegeneracyError, ValidationError
from spherecone.sphtrig import (
    SphericalTriangle,
    angles_from_sides,
    arc_length,
    area_excess,
    chart_triangle_area,
    chart_vertices,
    solve_sas,
    third_side,
)

# mpmath at 40 digits: equilateral triangle with side 0.1
EQUI_ANGLE_01 = 1.048642733498272949
EQUI_EXCESS_01 = 0.004335546905025609
# right triangle D: |px| = 0.2, angle at x = pi/2, |xy| = pi - 0.2
D_ANGLE_P = 2.346127783832200295
D_ANGLE_Y = 0.795464869757592943


@st.composite
def triangles(draw, lo=1e-3, hi=math.pi - 1e-3):
    a = draw(st.floats(lo, hi))
    b = draw(st.floats(lo, hi))
    c = draw(st.floats(lo, hi))
    assume(a < b + c - 1e-6 and b < a + c - 1e-6 and c < a + b - 1e-6 and a + b + c < 2 * math.pi - 1e-6)
    return SphericalTriangle(a, b, c)


def test_octant():
    t = SphericalTriangle(math.pi / 2, math.pi / 2, math.pi / 2)
    assert np.allclose(t.angles, [math.pi / 2] * 3, atol=1e-15)
    assert t.area == pytest.approx(math.pi / 2, abs=1e-15)


def test_small_equilateral_against_oracle():
    t = SphericalTriangle(0.1, 0.1, 0.1)
    for ang in t.angles:
        assert ang == pytest.approx(EQUI_ANGLE_01, abs=1e-13)
        assert ang == pytest.approx(math.pi / 3 + EQUI_EXCESS_01 / 3, abs=1e-13)
    assert area_excess(t) == pytest.approx(EQUI_EXCESS_01, rel=1e-10)


def test_triangle_D_angles():
    eps = 0.2
    t = solve_sas(eps, math.pi / 2, math.pi - eps)
    # corners: 0 opposite a = pi - eps is p, 1 opposite b = eps is y, 2 is x
    ap, ay, ax = t.angles
    assert ax == pytest.approx(math.pi / 2, abs=1e-13)
    assert ap == pytest.approx(D_ANGLE_P, abs=1e-12)
    assert ay == pytest.approx(D_ANGLE_Y, abs=1e-12)
    assert ay < math.pi / 2 < ap
    assert math.cos(t.c) == pytest.approx(-math.cos(eps) ** 2, abs=1e-15)


@pytest.mark.parametrize("theta", [0.1, 1.0, 2.5, 3.0])
def test_sas_polar_sides(theta):
    t = solve_sas(math.pi / 2, theta, math.pi / 2)
    assert t.c == pytest.approx(theta, abs=1e-14)
    # lune sector of angle theta between two quarter meridians
    assert t.area == pytest.approx(theta, abs=1e-13)


def test_sas_flat_angle_is_degenerate():
    with pytest.raises(DegeneracyError):
        solve_sas(0.3, math.pi, 0.3)


@pytest.mark.parametrize(
    "sides, fragment",
    [
        ((1.0, 0.2, 0.3), "a < b + c"),
        ((0.2, 1.0, 0.3), "b < a + c"),
        ((0.2, 0.3, 1.0), "c < a + b"),
        ((3.0, 3.0, 0.5), "2*pi"),
        ((0.0, 0.3, 0.3), "outside (0, pi)"),
        ((math.nan, 0.3, 0.3), "finite"),
    ],
)
def test_invalid_triangles_name_the_inequality(sides, fragment):
    with pytest.raises(ValidationError, match=re.escape(fragment)):
        SphericalTriangle(*sides)


@settings(max_examples=200, deadline=None)
@given(triangles())
def test_law_of_cosines_holds(t):
    alpha, beta, gamma = angles_from_sides(t)
    a, b, c = t.sides
    assert math.cos(a) == pytest.approx(math.cos(b) * math.cos(c) + math.sin(b) * math.sin(c) * math.cos(alpha), abs=1e-12)
    assert all(0 < x < math.pi for x in (alpha, beta, gamma))


@settings(max_examples=200, deadline=None)
@given(triangles(lo=1e-2))
def test_sas_round_trip(t):
    alpha, beta, gamma = t.angles
    # rebuild each side from the other two and the included angle
    assert third_side(t.b, gamma, t.a) == pytest.approx(t.c, abs=1e-10)
    assert third_side(t.c, alpha, t.b) == pytest.approx(t.a, abs=1e-10)
    assert third_side(t.a, beta, t.c) == pytest.approx(t.b, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(triangles())
def test_excess_positive_and_matches_angle_sum(t):
    e = area_excess(t)
    assert e > 0
    assert e == pytest.approx(sum(t.angles) - math.pi, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-5, 1e-2), st.floats(0.6, 1.0), st.floats(0.6, 1.0))
def test_excess_tends_to_heron_area(scale, u, v):
    assume(abs(u - v) < 1 - 1e-3 and u + v > 1 + 1e-3)
    a, b, c = scale, scale * u, scale * v
    s = 0.5 * (a + b + c)
    heron = math.sqrt(s * (s - a) * (s - b) * (s - c))
    assert area_excess(SphericalTriangle(a, b, c)) / heron == pytest.approx(1.0, rel=1e-2)


@settings(max_examples=100, deadline=None)
@given(triangles(lo=1e-2))
def test_chart_realizes_triangle(t):
    P = chart_vertices(t)
    assert np.allclose(np.linalg.norm(P, axis=1), 1.0)
    # side i is opposite corner i
    got = [arc_length(P[1], P[2]), arc_length(P[0], P[2]), arc_length(P[0], P[1])]
    assert np.allclose(got, t.sides, atol=1e-10)
    assert np.linalg.det(P) > 0  # counter-clockwise
    assert chart_triangle_area(P[0], P[1], P[2]) == pytest.approx(t.area, abs=1e-10)
