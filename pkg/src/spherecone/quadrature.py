"""Adaptive quadrature over discs and circles in polar coordinates.

Radial integrals are split into dyadic shells, each integrated with
QUADPACK's adaptive Gauss--Kronrod rule (``scipy.integrate.quad``).  The
angular integral of a smooth periodic integrand is done with the
trapezoidal rule, doubling the number of nodes until two successive values
agree; for smooth integrands this converges geometrically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


class QuadratureFailure(Exception):
    pass


def periodic_trapezoid(g, rtol=1e-12, atol=1e-300, n0=16, max_n=1 << 15):
    """Integral of a ``2*pi``-periodic vectorized function over one period.

    Once 512 nodes are in use, a change below ``max(1e3 * rtol, 1e-12)``
    relative is accepted as the rounding floor (integrands like
    ``exp(-1/(1 - t^2))`` amplify rounding in ``t``).  Changes below
    ``1e-15`` of ``int |g|`` count as converged, so cancelling integrands
    with value zero terminate.
    """
    n = n0
    phi = np.arange(n) * (2 * math.pi / n)
    vals = np.asarray(g(phi), dtype=float)
    total = vals.sum() * (2 * math.pi / n)
    mag = np.abs(vals).sum() * (2 * math.pi / n)
    while n < max_n:
        phi = (np.arange(n) + 0.5) * (2 * math.pi / n)
        vals = np.asarray(g(phi), dtype=float)
        extra = vals.sum() * (2 * math.pi / n)
        mag = 0.5 * (mag + np.abs(vals).sum() * (2 * math.pi / n))
        new = 0.5 * (total + extra)
        n *= 2
        if not np.isfinite(new):
            raise QuadratureFailure("non-finite angular integrand")
        diff = abs(new - total)
        if diff <= max(rtol * abs(new), atol, 1e-15 * mag):
            return new
        if n >= 512 and diff <= max(1e3 * rtol, 1e-12) * abs(new):
            return new
        total = new
    raise QuadratureFailure(f"angular rule did not converge with {max_n} nodes")


def circle_integral(f: Integrand, r: float, center=(0.0, 0.0), rtol=1e-12) -> float:
    """``int f ds`` over the Euclidean circle of radius ``r`` (arc-length measure)."""
    cx, cy = center
    return r * periodic_trapezoid(lambda p: f(cx + r * np.cos(p), cy + r * np.sin(p)), rtol=rtol)


@dataclass
class PolarResult:
    """Disc integral with per-shell contributions.

    ``tail`` is the contribution of the outermost shell; ``converged`` is
    false when some shell failed (e.g. a non-integrable singularity or an
    infinite integral).
    """

    value: float
    error: float
    shells: list = field(default_factory=list)
    converged: bool = True
    message: str = ""
    inner_tail: float = 0.0

    @property
    def tail(self) -> float:
        return self.shells[-1][2] if self.shells else 0.0

    @property
    def tail_fraction(self) -> float:
        return abs(self.tail) / abs(self.value) if self.value else 0.0

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "converged": self.converged,
            "tail_shell": [self.shells[-1][0], self.shells[-1][1], self.tail] if self.shells else None,
            "inner_tail": self.inner_tail,
            "message": self.message,
        }


def dyadic_shells(r_min: float, R: float, first: float = 1.0) -> list[tuple[float, float]]:
    """Radial panels ``[r_min, first], [first, 2 first], ...`` ending at ``R``.

    ``R`` may be infinite; the last finite edge is ``1024 * first``.  A
    positive ``r_min`` far below ``first`` gets geometric panels of ratio 2.
    """
    edges = [r_min]
    b = first
    while b < min(R, 1024.0 * first):
        if b > r_min:
            edges.append(b)
        b *= 2
    edges.append(R)
    if r_min > 0:
        while math.isfinite(edges[1]) and edges[1] > 4 * edges[0]:
            edges.insert(1, edges[1] / 2)
    return list(zip(edges[:-1], edges[1:]))


def polar_integral(
    f: Integrand,
    R: float,
    r_min: float = 0.0,
    center=(0.0, 0.0),
    rtol: float = 1e-10,
    first_shell: float = 1.0,
) -> PolarResult:
    """``int_{r_min <= |z - center| <= R} f dA`` in polar coordinates.

    ``R`` may be ``inf``; the last shell then reaches to infinity.  Failure
    to converge is reported in the result, not raised.
    """
    cx, cy = center

    def radial(r):
        if r == 0.0:
            return 0.0
        return r * periodic_trapezoid(lambda p: f(cx + r * np.cos(p), cy + r * np.sin(p)), rtol=rtol * 1e-2)

    shells = []
    total = 0.0
    err = 0.0
    ok = True
    msg = ""
    for a, b in dyadic_shells(r_min, R, first_shell):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, e = integrate.quad(radial, a, b, epsabs=0.0, epsrel=rtol, limit=200)
            except (integrate.IntegrationWarning, QuadratureFailure, OverflowError, ZeroDivisionError) as exc:
                ok = False
                msg = f"shell [{a}, {b}]: {exc}".strip()
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        val, e = integrate.quad(radial, a, b, epsabs=0.0, epsrel=rtol, limit=200)
                except QuadratureFailure:
                    val, e = math.inf, math.inf
        if not math.isfinite(val):
            ok = False
        shells.append((a, b, val))
        total += val
        err += e
    return PolarResult(total, err, shells, ok, msg)


def line_integral(g: Callable[[float], float], a: float, b: float, rtol: float = 1e-12) -> tuple[float, float]:
    return integrate.quad(g, a, b, epsabs=0.0, epsrel=rtol, limit=200)
