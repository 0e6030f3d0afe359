"""Rotationally symmetric (warped) metrics ``dr^2 + f(r)^2 dphi^2``.

The Gaussian curvature of such a metric is ``-f''/f``.  Besides sampling
and integrating profiles, this module builds the smoothing of a spherical
cone tip: inside a small disc the cone profile ``s*sin(r)`` is replaced by
``s*sin(h(r))`` where ``h`` bends from slope ``1/s`` down to slope 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import InfeasibleError, TailDivergenceError, ValidationError

MAX_SPACING_FRACTION = 1e-4
TAIL_SLOPE_TOL = 1e-6

Fn = Callable[[np.ndarray], np.ndarray]


def central_diff4(y: np.ndarray, dx: float, order: int = 1) -> np.ndarray:
    """Fourth-order centered differences on a uniform grid.

    The two points at each end fall back to second-order one-sided
    stencils.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    if order == 1:
        out[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * dx)
        out[:2] = (-3 * y[0:2] + 4 * y[1:3] - y[2:4]) / (2 * dx)
        out[-2:] = (3 * y[-2:] - 4 * y[-3:-1] + y[-4:-2]) / (2 * dx)
    elif order == 2:
        out[2:-2] = (-y[4:] + 16 * y[3:-1] - 30 * y[2:-2] + 16 * y[1:-3] - y[:-4]) / (12 * dx * dx)
        out[:2] = (2 * y[0:2] - 5 * y[1:3] + 4 * y[2:4] - y[3:5]) / (dx * dx)
        out[-2:] = (2 * y[-2:] - 5 * y[-3:-1] + 4 * y[-4:-2] - y[-5:-3]) / (dx * dx)
    else:
        raise ValueError("order must be 1 or 2")
    return out


@dataclass(frozen=True, eq=False)
class WarpedProfile:
    """Sampled warp function on ``[0, R]`` with first and second derivatives.

    ``fn``/``dfn``/``d2fn`` keep the analytic callables when the profile was
    built from formulas; quadratures prefer them over the samples.
    """

    R: float
    r: np.ndarray
    f: np.ndarray
    df: np.ndarray
    d2f: np.ndarray
    meta: dict = field(default_factory=dict)
    fn: Optional[Fn] = None
    dfn: Optional[Fn] = None
    d2fn: Optional[Fn] = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValidationError(f"profile radius R={self.R} must be positive")
        n = len(self.r)
        if n < 5 or not (len(self.f) == len(self.df) == len(self.d2f) == n):
            raise ValidationError("profile sample arrays must share a length of at least 5")
        spacing = self.r[1] - self.r[0]
        if spacing > MAX_SPACING_FRACTION * self.R * (1 + 1e-9):
            raise ValidationError(f"sample spacing {spacing:.3g} exceeds 1e-4 * R")

    @property
    def spacing(self) -> float:
        return float(self.r[1] - self.r[0])

    def curvature(self) -> np.ndarray:
        """``-f''/f`` on the samples in ``(0, R]``."""
        return -self.d2f[1:] / self.f[1:]

    def validate(self, slope_tol: float = 1e-9):
        """Check ``f(0) = 0``, ``f'(0) = 1``, ``f > 0`` and finite curvature."""
        if abs(self.f[0]) > 1e-12:
            raise ValidationError(f"profile has f(0) = {self.f[0]:.3e}, expected 0")
        if abs(self.df[0] - 1.0) > slope_tol:
            raise ValidationError(
                f"profile has f'(0) = {self.df[0]:.12g}, expected 1 (cone tip is not smooth)"
            )
        if np.any(self.f[1:] <= 0):
            bad = self.r[1:][self.f[1:] <= 0][0]
            raise ValidationError(f"profile is not positive on (0, R]: f({bad:.6g}) <= 0")
        if not np.all(np.isfinite(self.curvature())):
            raise ValidationError("profile curvature -f''/f is not finite on (0, R]")
        return self


def sample_profile(
    fn: Fn,
    R: float,
    dfn: Optional[Fn] = None,
    d2fn: Optional[Fn] = None,
    meta: Optional[dict] = None,
    n: Optional[int] = None,
) -> WarpedProfile:
    """Sample ``fn`` uniformly on ``[0, R]``; missing derivatives by finite differences."""
    if n is None:
        n = int(math.ceil(1.0 / MAX_SPACING_FRACTION)) + 1
    r = np.linspace(0.0, R, n)
    dx = r[1] - r[0]
    f = np.asarray(fn(r), dtype=float)
    df = np.asarray(dfn(r), dtype=float) if dfn is not None else central_diff4(f, dx, 1)
    d2f = np.asarray(d2fn(r), dtype=float) if d2fn is not None else central_diff4(f, dx, 2)
    return WarpedProfile(R, r, f, df, d2f, dict(meta or {}), fn, dfn, d2fn)


def _integrate(fn: Optional[Fn], samples: np.ndarray, r: np.ndarray, a: float, b: float) -> float:
    if fn is not None:
        val, _ = integrate.quad(lambda x: float(fn(np.asarray(x))), a, b, epsabs=1e-14, epsrel=1e-13, limit=500)
        return val
    mask = (r >= a - 1e-15) & (r <= b + 1e-15)
    return float(integrate.simpson(samples[mask], x=r[mask]))


@dataclass(frozen=True)
class RevolutionTotals:
    area: float
    total_curvature: float
    curvature_quadrature: float
    closed: bool
    tail_slope_change: float
    tail_area_fraction: float

    def __iter__(self):
        yield self.area
        yield self.total_curvature


def revolution_totals(p: WarpedProfile, tail_tol: float = TAIL_SLOPE_TOL) -> RevolutionTotals:
    """Area and total curvature of the surface of revolution of ``p``.

    Total curvature is the boundary term ``2*pi*(f'(0) - f'(R))``; it is
    cross-checked against the direct integral of curvature times the area
    element, ``2*pi * int (-f''/f) f dr``.

    A profile whose value drops to zero at ``R`` closes up into a sphere and
    needs no tail check.  Otherwise ``f'`` must have settled over
    ``[0.9 R, R]``.

    Unpacks as ``area, total_curvature``.
    """
    p.validate()
    fmax = float(np.max(p.f))
    closed = bool(p.f[-1] <= 1e-4 * fmax and p.df[-1] < -1e-3)
    dfR = float(p.dfn(np.asarray(p.R))) if p.dfn is not None else float(p.df[-1])
    df0 = float(p.df[0])
    i90 = int(np.searchsorted(p.r, 0.9 * p.R))
    df90 = float(p.dfn(np.asarray(p.r[i90]))) if p.dfn is not None else float(p.df[i90])
    slope_change = abs(dfR - df90)
    if not closed and slope_change > tail_tol:
        raise TailDivergenceError(
            f"f' has not settled at R={p.R}: |f'(R) - f'(0.9R)| = {slope_change:.3e} > {tail_tol:.1e}"
        )
    area = 2 * math.pi * _integrate(p.fn, p.f, p.r, 0.0, p.R)
    tail_area = 2 * math.pi * _integrate(p.fn, p.f, p.r, float(p.r[i90]), p.R)
    total = 2 * math.pi * (df0 - dfR)
    neg_d2 = None if p.d2fn is None else (lambda x: -p.d2fn(x))
    curv_quad = 2 * math.pi * _integrate(neg_d2, -p.d2f, p.r, 0.0, p.R)
    return RevolutionTotals(
        area=area,
        total_curvature=total,
        curvature_quadrature=curv_quad,
        closed=closed,
        tail_slope_change=slope_change,
        tail_area_fraction=tail_area / area if area > 0 else 0.0,
    )


# -- cone smoothing ---------------------------------------------------------
#
# h''(r) = -(1/s - 1)/rho * bump(r/rho), bump(t) = 140 t^3 (1-t)^3 with unit
# mass, so h' falls from 1/s to exactly 1 at the matching radius rho and
# h'' vanishes to second order at both ends.


def _bump(t):
    return 140.0 * t**3 * (1.0 - t) ** 3


def _bump_cdf(t):
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


def _bump_cdf_integral(t):
    return t**5 * (7.0 - 14.0 * t + 10.0 * t**2 - 2.5 * t**3)


@dataclass(frozen=True)
class _SmoothingWarp:
    s: float
    rho: float

    @property
    def k(self):
        return 1.0 / self.s - 1.0

    def h(self, r):
        t = np.clip(np.asarray(r, dtype=float) / self.rho, 0.0, 1.0)
        return np.asarray(r) / self.s - self.k * self.rho * _bump_cdf_integral(t)

    def dh(self, r):
        t = np.clip(np.asarray(r, dtype=float) / self.rho, 0.0, 1.0)
        return 1.0 / self.s - self.k * _bump_cdf(t)

    def d2h(self, r):
        t = np.clip(np.asarray(r, dtype=float) / self.rho, 0.0, 1.0)
        return -self.k / self.rho * _bump(t)

    def f(self, r):
        return self.s * np.sin(self.h(r))

    def df(self, r):
        return self.s * np.cos(self.h(r)) * self.dh(r)

    def d2f(self, r):
        h = self.h(r)
        return self.s * (np.cos(h) * self.d2h(r) - np.sin(h) * self.dh(r) ** 2)


def smooth_cone_profile(s: float, delta: float) -> WarpedProfile:
    """Smooth the tip of a spherical cone of cone parameter ``s``.

    The cone ``dr^2 + s^2 sin^2(r) dphi^2`` has total angle ``2*pi*s``.  The
    returned profile ``f = s*sin(h(r))`` on ``[0, rho]`` is smooth at the
    origin (``f'(0) = 1``), has curvature ``h'^2 - cot(h) h'' >= 1`` and at
    ``r = rho`` agrees with the cone at cone radius ``delta`` to second
    order: ``f = s sin(delta)``, ``f' = s cos(delta)``, ``f'' = -s sin(delta)``.

    The matching radius ``rho`` solves ``h(rho) = delta`` by bisection.
    """
    if not 0.0 < s < 1.0:
        raise ValidationError(f"cone parameter s={s} outside (0, 1)")
    if not 0.0 < delta < math.pi / 4:
        raise ValidationError(f"smoothing radius delta={delta} outside (0, pi/4)")

    def mismatch(rho):
        return float(_SmoothingWarp(s, rho).h(rho)) - delta

    try:
        rho = optimize.bisect(mismatch, delta * 1e-9, delta, xtol=1e-12 * delta, rtol=1e-15)
    except ValueError as exc:
        raise InfeasibleError(
            f"no matching radius for s={s}, delta={delta}; try a larger delta"
        ) from exc
    warp = _SmoothingWarp(s, rho)
    # h is evaluated to a few ulps of delta
    if abs(mismatch(rho)) > max(1e-12, 1e-10 * delta):
        raise InfeasibleError(
            f"matching radius for s={s}, delta={delta} only resolved to {abs(mismatch(rho)):.2e}; try a larger delta"
        )
    meta = {"kind": "smoothed-cone", "s": s, "delta": delta, "matching_radius": rho}
    prof = sample_profile(warp.f, rho, warp.df, warp.d2f, meta=meta)
    return prof.validate()


def smoothing_certificate(p: WarpedProfile) -> dict:
    """Checks for a profile built by :func:`smooth_cone_profile`."""
    s, delta = p.meta["s"], p.meta["delta"]
    rho = p.R
    warp = _SmoothingWarp(s, rho)
    curv = p.curvature()
    cone_f, cone_df, cone_d2f = s * math.sin(delta), s * math.cos(delta), -s * math.sin(delta)
    smoothed_area = 2 * math.pi * _integrate(p.fn, p.f, p.r, 0.0, rho)
    cone_area = 2 * math.pi * s * (1.0 - math.cos(delta))
    dh = warp.dh(p.r)
    return {
        "min_curvature": float(np.min(curv)),
        "boundary_value_error": abs(float(p.f[-1]) - cone_f),
        "boundary_slope_error": abs(float(p.df[-1]) - cone_df),
        "boundary_second_derivative_error": abs(float(p.d2f[-1]) - cone_d2f),
        "slope_at_origin": float(p.df[0]),
        "warp_slope_monotone": bool(np.all(np.diff(dh) <= 1e-12)),
        "warp_concave": bool(np.all(warp.d2h(p.r) <= 0.0)),
        "smoothed_area": smoothed_area,
        "cone_area": cone_area,
        "area_change": smoothed_area - cone_area,
        "matching_radius": rho,
    }


# -- catalog of complete plane profiles ---------------------------------------


def gaussian_bell(R: float = 8.0) -> WarpedProfile:
    """``f(r) = r exp(-r^2)``: a complete plane of finite area pi."""
    return sample_profile(
        lambda r: r * np.exp(-r * r),
        R,
        lambda r: (1 - 2 * r * r) * np.exp(-r * r),
        lambda r: (4 * r**3 - 6 * r) * np.exp(-r * r),
        meta={"kind": "gaussian-bell"},
    )


def round_sphere(R: float = math.pi - 1e-6) -> WarpedProfile:
    return sample_profile(np.sin, R, np.cos, lambda r: -np.sin(r), meta={"kind": "sphere"})


def flat_plane(R: float = 10.0) -> WarpedProfile:
    return sample_profile(
        lambda r: np.asarray(r, dtype=float),
        R,
        lambda r: np.ones_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        meta={"kind": "flat"},
    )


def cone(s: float, R: float = math.pi / 2) -> WarpedProfile:
    return sample_profile(
        lambda r: s * np.sin(r), R, lambda r: s * np.cos(r), lambda r: -s * np.sin(r), meta={"kind": "cone", "s": s}
    )


PROFILE_CATALOG = {
    "gaussian-bell": gaussian_bell,
    "sphere": round_sphere,
    "flat": flat_plane,
}
