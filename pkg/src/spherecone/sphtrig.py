"""Trigonometry of geodesic triangles on the unit sphere.

Side ``i`` of a triangle is opposite corner ``i``; the angle at corner ``i``
is also indexed ``i``.  Angles are computed with the half-angle formulas,
which stay accurate for very thin and very small triangles, and checked
against the spherical law of cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, ValidationError

COS_LAW_TOL = 1e-12


@dataclass(frozen=True)
class SphericalTriangle:
    """Curvature-1 geodesic triangle given by its side lengths (radians)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValidationError(f"side {name}={v!r} is not a finite number")
            if not 0.0 < v < math.pi:
                raise ValidationError(f"side {name}={v!r} outside (0, pi)")
        a, b, c = self.a, self.b, self.c
        if not a < b + c:
            raise ValidationError(f"triangle inequality a < b + c violated ({a} >= {b} + {c})")
        if not b < a + c:
            raise ValidationError(f"triangle inequality b < a + c violated ({b} >= {a} + {c})")
        if not c < a + b:
            raise ValidationError(f"triangle inequality c < a + b violated ({c} >= {a} + {b})")
        if not a + b + c < 2 * math.pi:
            raise ValidationError(f"perimeter a + b + c = {a + b + c} not below 2*pi")

    @property
    def sides(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def angles(self) -> tuple[float, float, float]:
        return angles_from_sides(self)

    @property
    def area(self) -> float:
        return area_excess(self)


def _half_angle(opp, s1, s2, s):
    # tan(A/2) = sqrt(sin(s-b) sin(s-c) / (sin s sin(s-a)))
    num = math.sin(s - s1) * math.sin(s - s2)
    den = math.sin(s) * math.sin(s - opp)
    return 2.0 * math.atan2(math.sqrt(max(num, 0.0)), math.sqrt(max(den, 0.0)))


def angles_from_sides(t: SphericalTriangle) -> tuple[float, float, float]:
    """Corner angles of ``t``, in the same order as its sides.

    Raises
    ------
    ValidationError
        If the law of cosines cannot be satisfied to ``1e-12``; this only
        happens for triangles that are degenerate to working precision.
    """
    a, b, c = t.sides
    s = 0.5 * (a + b + c)
    alpha = _half_angle(a, b, c, s)
    beta = _half_angle(b, a, c, s)
    gamma = _half_angle(c, a, b, s)
    for opp, s1, s2, ang in ((a, b, c, alpha), (b, a, c, beta), (c, a, b, gamma)):
        lhs = math.cos(opp)
        rhs = math.cos(s1) * math.cos(s2) + math.sin(s1) * math.sin(s2) * math.cos(ang)
        if abs(lhs - rhs) > COS_LAW_TOL:
            raise ValidationError(
                f"law of cosines residual {abs(lhs - rhs):.3e} for side {opp}; triangle is numerically degenerate"
            )
    return alpha, beta, gamma


def third_side(b: float, gamma: float, a: float) -> float:
    """Side opposite the included angle ``gamma`` between sides ``b`` and ``a``.

    Uses the haversine form of the law of cosines, which keeps full
    relative precision for short results.
    """
    hav = math.sin(0.5 * (a - b)) ** 2 + math.sin(a) * math.sin(b) * math.sin(0.5 * gamma) ** 2
    hav = min(max(hav, 0.0), 1.0)
    return 2.0 * math.asin(math.sqrt(hav))


def solve_sas(b: float, gamma: float, a: float) -> SphericalTriangle:
    """Triangle with sides ``b`` and ``a`` enclosing the angle ``gamma``.

    The result is ``SphericalTriangle(a, b, c)``: the returned corner 2 carries
    ``gamma`` and ``c`` is the computed third side.
    """
    for name, v in (("b", b), ("a", a)):
        if not 0.0 < v < math.pi:
            raise ValidationError(f"side {name}={v!r} outside (0, pi)")
    if not 0.0 < gamma <= math.pi:
        raise ValidationError(f"included angle {gamma!r} outside (0, pi)")
    c = third_side(b, gamma, a)
    tol = 1e-12
    if c <= tol or c >= math.pi - tol or c >= a + b - tol or a >= b + c - tol or b >= a + c - tol:
        raise DegeneracyError(f"solve_sas({b}, {gamma}, {a}) gives degenerate third side c={c}")
    try:
        return SphericalTriangle(a, b, c)
    except ValidationError as exc:
        raise DegeneracyError(str(exc)) from exc


def area_excess(t: SphericalTriangle) -> float:
    """Area of ``t``, i.e. its angle excess ``alpha + beta + gamma - pi``.

    Evaluated with L'Huilier's formula, which equals the excess exactly but
    does not cancel catastrophically for small triangles.
    """
    a, b, c = t.sides
    s = 0.5 * (a + b + c)
    prod = (
        math.tan(0.5 * s)
        * math.tan(0.5 * (s - a))
        * math.tan(0.5 * (s - b))
        * math.tan(0.5 * (s - c))
    )
    return 4.0 * math.atan(math.sqrt(max(prod, 0.0)))


def chart_vertices(t: SphericalTriangle) -> np.ndarray:
    """Unit vectors realizing ``t`` on the round sphere, counter-clockwise.

    Row ``i`` is corner ``i``.  Corner 0 sits at the north pole and corner 1
    on the meridian through the x-axis.
    """
    alpha = angles_from_sides(t)[0]
    b, c = t.b, t.c
    return np.array(
        [
            [0.0, 0.0, 1.0],
            [math.sin(c), 0.0, math.cos(c)],
            [math.sin(b) * math.cos(alpha), math.sin(b) * math.sin(alpha), math.cos(b)],
        ]
    )


def arc_length(p, q):
    """Great-circle distance between unit vectors (broadcasts over rows)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cross = np.linalg.norm(np.cross(p, q), axis=-1)
    dot = np.sum(p * q, axis=-1)
    return np.arctan2(cross, dot)


def chart_triangle_area(p, q, r):
    """Area of the spherical triangle with unit-vector corners (vectorized).

    Van Oosterom--Strackee formula.
    """
    p, q, r = (np.asarray(x, dtype=float) for x in (p, q, r))
    det = np.einsum("...i,...i->...", p, np.cross(q, r))
    den = 1.0 + np.einsum("...i,...i->...", p, q) + np.einsum("...i,...i->...", q, r) + np.einsum(
        "...i,...i->...", r, p
    )
    return np.abs(2.0 * np.arctan2(det, den))
