"""Verification suites: each binds a construction to one quantitative claim.

A :class:`VerificationReport` stores every computed value next to its
target, tolerance and relation, so the verdict can be recomputed from the
report alone (:func:`recompute_verdict`).  Reports serialize
deterministically; the wall-clock runtime is kept out of the document
unless asked for.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import complex as cx
from . import geodesics as geo
from . import profiles as pf
from .errors import PlacementError, ValidationError

TWO_PI = 2.0 * math.pi

DEFAULT_TOLERANCES = {
    "identity": 1e-9,
    "diameter_margin": 0.05,
    "growth_relative": 1e-2,
    "curvature_total": 1e-6,
    "curvature_min": 1e-6,
    "boundary_match": 1e-9,
    "area_finite_tail": 1e-8,
}

RELATIONS = ("abs", "rel", "ge", "le")


def resolve_tolerances(overrides: Optional[dict] = None) -> dict:
    """Defaults updated by ``overrides``; unknown keys are rejected."""
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise ValidationError(f"unknown tolerance {k!r}; known: {', '.join(sorted(tol))}")
        v = float(v)
        if not v >= 0:
            raise ValidationError(f"tolerance {k} must be non-negative, got {v}")
        tol[k] = v
    return tol


def load_anchors() -> dict:
    text = resources.files("spherecone").joinpath("data/anchors.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class Check:
    """One computed-vs-target comparison.

    ``abs``: ``|computed - target| <= tolerance``; ``rel``: same, scaled by
    ``|target|``; ``ge``: ``computed >= target - tolerance``; ``le``:
    ``computed <= target + tolerance``.
    """

    name: str
    computed: float
    target: float
    tolerance: float
    relation: str = "abs"

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def margin(self) -> float:
        c, t, tol = self.computed, self.target, self.tolerance
        if self.relation == "abs":
            return tol - abs(c - t)
        if self.relation == "rel":
            return tol * abs(t) - abs(c - t)
        if self.relation == "ge":
            return c - (t - tol)
        return (t + tol) - c

    @property
    def passed(self) -> bool:
        return bool(self.margin >= 0)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "computed": self.computed,
            "target": self.target,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    claim_id: str
    config: dict
    tolerances: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    applicable: bool = True
    runtime: float = 0.0

    @property
    def anchor(self) -> dict:
        return load_anchors().get(self.claim_id, {})

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "not-applicable"
        return "pass" if all(c.passed for c in self.checks) else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_document(self, include_runtime: bool = False) -> dict:
        doc = {
            "tool": "spherecone",
            "version": __version__,
            "claim_id": self.claim_id,
            "anchor": self.anchor,
            "config": self.config,
            "tolerances": self.tolerances,
            "checks": [c.as_dict() for c in self.checks],
            "values": self.values,
            "tables": self.tables,
            "notes": self.notes,
            "verdict": self.verdict,
        }
        if include_runtime:
            doc["runtime_seconds"] = round(self.runtime, 3)
        return _clean(doc)

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_document(include_runtime), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def summary(self) -> str:
        lines = [f"{self.claim_id}: {self.verdict.upper()}"]
        for c in self.checks:
            flag = "ok " if c.passed else "FAIL"
            lines.append(
                f"  [{flag}] {c.name}: computed {c.computed:.10g}, target {c.target:.10g} "
                f"({c.relation}, tol {c.tolerance:g}, margin {c.margin:.3g})"
            )
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def recompute_verdict(doc: dict) -> str:
    """Verdict from a report document's stored checks alone."""
    if doc.get("verdict") == "not-applicable":
        return "not-applicable"
    ok = True
    for c in doc["checks"]:
        chk = Check(c["name"], float(c["computed"]), float(c["target"]), float(c["tolerance"]), c["relation"])
        ok &= chk.passed
    return "pass" if ok else "fail"


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _depths(depths, max_depth=None, min_count=1):
    depths = [int(d) for d in depths]
    if len(depths) < min_count or any(b <= a for a, b in zip(depths, depths[1:])) or depths[0] < 0:
        raise ValidationError(f"depths {depths} must be non-negative, strictly increasing, at least {min_count}")
    if max_depth is not None and depths[-1] > max_depth:
        raise ValidationError(f"largest depth {depths[-1]} exceeds {max_depth}")
    return depths


def _count_above_2pi(c: cx.SurfaceComplex) -> int:
    return int(np.sum(c.cone_angles() > TWO_PI + cx.SMOOTH_TOL))


# -- suites ---------------------------------------------------------------------


def verify_prop_diameter(
    eps: float = 0.2, depths: Sequence[int] = (3, 4, 5), tolerances=None, max_nodes: int = geo.MAX_NODES
) -> VerificationReport:
    """Diameter of the triangle double is at least ``2 pi - 4 eps``."""
    if not 0 < eps < math.pi / 4:
        raise ValidationError(f"eps {eps} outside the validated range (0, pi/4)")
    depths = _depths(depths, max_depth=6, min_count=3)
    tol = resolve_tolerances(tolerances)
    with _Timer() as tm:
        c = cx.build_triangle_double(eps)
        est = geo.diameter_estimate(c, depths, max_nodes=max_nodes)
    bound = TWO_PI - 4 * eps
    rep = VerificationReport(
        "prop-diameter", {"eps": eps, "depths": depths}, tol, runtime=tm.elapsed
    )
    rep.checks.append(
        Check("diameter_lower_bound", est.extrapolated_diameter - est.error_band, bound, tol["diameter_margin"], "ge")
    )
    rep.checks.append(Check("cone_angles_above_2pi", _count_above_2pi(c), 1, 0.0, "abs"))
    rep.values = {
        "extrapolated_diameter": est.extrapolated_diameter,
        "error_band": est.error_band,
        "graph_diameter": est.graph_diameter,
        "bound_2pi_minus_4eps": bound,
        "pair": [str(p) for p in est.pair],
        "cone_angles": {e.name: e.angle for e in c.cone_report().singular},
    }
    rep.tables["diameter_by_depth"] = [{"depth": d, "distance": v} for d, v in est.pair_estimate.values_by_depth]
    return rep


def verify_prop_area(N: float = 10.0, tolerances=None) -> VerificationReport:
    """The join double of size ``N`` has area ``2N`` and cone angles ``pi, pi, 2N``."""
    if not (N > 0 and math.isfinite(N)):
        raise ValidationError(f"N = {N} must be positive and finite")
    tol = resolve_tolerances(tolerances)
    eps = tol["identity"]
    with _Timer() as tm:
        c = cx.build_join_double(N)
        rep_c = c.cone_report()
        a = cx.area(c)
        gb = cx.gauss_bonnet_check(c)
    labelled = {c.vertex_of(x) for x in ("p", "a", "b")}
    others = sum(1 for e in rep_c.entries if e.vertex not in labelled and not e.smooth)
    rep = VerificationReport("prop-area", {"N": N}, tol, runtime=tm.elapsed)
    rep.checks += [
        Check("area", a, 2 * N, eps),
        Check("angle_p", rep_c.angle("p"), 2 * N, eps),
        Check("angle_a", rep_c.angle("a"), math.pi, eps),
        Check("angle_b", rep_c.angle("b"), math.pi, eps),
        Check("other_singular_vertices", others, 0, 0.0),
        Check("gauss_bonnet_residual", gb, 0.0, eps),
        Check("cone_angles_above_2pi", _count_above_2pi(c), 1, 0.0, "le"),
    ]
    rep.values = {"area": a, "cone_angles": {e.name: e.angle for e in rep_c.singular}, "sectors": c.meta["sectors"]}
    if abs(2 * N - TWO_PI) <= cx.SMOOTH_TOL:
        rep.notes.append("2N = 2pi: the apex p is a smooth point")
    return rep


def cap_constants(radius: float = math.pi / 10) -> tuple[float, float]:
    """Boundary length and area of a round spherical cap."""
    return TWO_PI * math.sin(radius), TWO_PI * (1.0 - math.cos(radius))


def verify_corollary(
    eps_q: float = 0.01, N: float = 614.0, depths: Sequence[int] = (1, 2, 3), tolerances=None
) -> VerificationReport:
    """Isoperimetric-type inequality fails to bound the area ratio.

    A cap of radius ``pi/10`` is placed at the equator midpoint of the first
    copy; the placement is validated through geodesic distances to every
    labeled vertex.  The displayed inequality ``l0^2 <= eps*A0*(A - A0)`` is
    the pass condition.
    """
    if not eps_q > 0:
        raise ValidationError(f"eps_q {eps_q} must be positive")
    if not N > 0:
        raise ValidationError(f"N = {N} must be positive")
    depths = _depths(depths, max_depth=6, min_count=3)
    tol = resolve_tolerances(tolerances)
    radius = math.pi / 10
    l0, A0 = cap_constants(radius)
    with _Timer() as tm:
        c = cx.build_join_double(N)
        A = cx.area(c)
        center = cx.join_double_equator_point(c, 0.5)
        labels = sorted(c.labels)
        per_label = {x: [] for x in labels}
        for d in depths:
            m = geo.refine(c, d)
            dist = m.distances_from(m.resolve(center))[0]
            for x in labels:
                per_label[x].append(float(dist[m.label_node(x)]))
        ests = {x: geo.extrapolate_linear(depths, per_label[x]) for x in labels}
    for x, e in ests.items():
        if not e.lower_bound > radius:
            raise PlacementError(
                f"cap centre is within {e.lower_bound:.4f} of cone point {x}; needs more than pi/10 = {radius:.4f}"
            )
    rhs = eps_q * A0 * (A - A0)
    A_needed = A0 + l0**2 / (eps_q * A0)
    rep = VerificationReport("corollary", {"eps_q": eps_q, "N": N, "depths": depths}, tol, runtime=tm.elapsed)
    rep.checks.append(Check("l0_squared_le_rhs", l0**2, rhs, 0.0, "le"))
    rep.values = {
        "l0": l0,
        "A0": A0,
        "A": A,
        "l0_squared": l0**2,
        "rhs": rhs,
        "margin": rhs - l0**2,
        "A_required": A_needed,
        "N_required": A_needed / 2,
        "proof_sufficient_condition_A": A0 + l0 / math.sqrt(eps_q),
        "cap_center": [center[0], list(center[1])],
        "cap_clearance": {x: e.lower_bound for x, e in ests.items()},
    }
    rep.tables["cap_clearance"] = [
        {"vertex": x, "extrapolated": e.extrapolated, "band": e.error_band, "lower_bound": e.lower_bound}
        for x, e in ests.items()
    ]
    rep.notes.append(
        "pass condition is the displayed inequality; the proof prose calls (∫_Γ e^u)^2 the right hand side "
        "although the display puts it on the left"
    )
    rep.notes.append("proof_sufficient_condition_A is the proof's A ≥ A0 + l0/sqrt(eps), recorded for comparison")
    return rep


def verify_theorem_complete(profile_id: str = "gaussian-bell", tolerances=None) -> VerificationReport:
    """Complete finite-area plane of curvature bounded below has total curvature 2 pi."""
    if profile_id not in pf.PROFILE_CATALOG:
        raise ValidationError(f"unknown profile {profile_id!r}; known: {', '.join(sorted(pf.PROFILE_CATALOG))}")
    tol = resolve_tolerances(tolerances)
    with _Timer() as tm:
        p = pf.PROFILE_CATALOG[profile_id]()
        totals = pf.revolution_totals(p)
    if totals.closed:
        raise ValidationError(f"profile {profile_id!r} is not a complete plane profile: f returns to 0 at r = {p.R:.6g}")
    rep = VerificationReport("theorem-complete", {"profile": profile_id, "R": p.R}, tol, runtime=tm.elapsed)
    rep.values = {
        "area": totals.area,
        "total_curvature": totals.total_curvature,
        "curvature_quadrature": totals.curvature_quadrature,
        "tail_slope_change": totals.tail_slope_change,
        "tail_area_fraction": totals.tail_area_fraction,
    }
    if totals.tail_area_fraction > tol["area_finite_tail"]:
        rep.applicable = False
        rep.notes.append(
            f"area has not converged (last tenth of the profile holds {totals.tail_area_fraction:.2%} of it); "
            "the finite-area hypothesis is unmet"
        )
        return rep
    t = tol["curvature_total"]
    rep.checks += [
        Check("total_curvature", totals.total_curvature, TWO_PI, t),
        Check("curvature_quadrature", totals.curvature_quadrature, TWO_PI, t),
        Check("tail_slope_change", totals.tail_slope_change, 0.0, pf.TAIL_SLOPE_TOL, "le"),
    ]
    rep.notes.append("curvature sign: K = -f''/f, total curvature counted positive for the sphere")
    return rep


GROWTH_DEFAULTS = {
    "join-double": {"vertex": "p", "radii": (0.2, 0.3, 0.4, 0.5, 0.6, 0.7), "depths": (4, 5)},
    "triangle-double": {"vertex": "p", "radii": (0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18), "depths": (6, 7)},
    "octahedron": {"vertex": "z+", "radii": (0.3, 0.5, 0.7, 0.9, 1.1), "depths": (4, 5)},
}


def build_construction(kind: str, params: Optional[dict] = None) -> cx.SurfaceComplex:
    params = dict(params or {})
    if kind == "join-double":
        return cx.build_join_double(float(params.pop("N", 10.0)), **params)
    if kind == "triangle-double":
        return cx.build_triangle_double(float(params.pop("eps", 0.2)), **params)
    if kind == "octahedron":
        if params:
            raise ValidationError(f"octahedron takes no parameters, got {sorted(params)}")
        return cx.build_octahedron()
    raise ValidationError(f"unknown construction {kind!r}; expected join-double, triangle-double or octahedron")


def verify_angle_growth(
    construction: str = "join-double",
    params: Optional[dict] = None,
    vertex: Optional[str] = None,
    radii: Optional[Sequence[float]] = None,
    depths: Optional[Sequence[int]] = None,
    tolerances=None,
    max_nodes: int = geo.MAX_NODES,
) -> VerificationReport:
    """Cone angle from ball growth, and the curvature identity ``theta = K(X) - 2 pi``."""
    if construction not in GROWTH_DEFAULTS:
        raise ValidationError(f"unknown construction {construction!r}")
    d = GROWTH_DEFAULTS[construction]
    vertex = vertex or d["vertex"]
    radii = tuple(float(r) for r in (radii if radii is not None else d["radii"]))
    depths = _depths(depths if depths is not None else d["depths"], max_depth=geo.MAX_DEPTH)
    tol = resolve_tolerances(tolerances)
    with _Timer() as tm:
        c = build_construction(construction, params)
        if vertex not in c.labels:
            raise ValidationError(f"{construction} has no vertex labeled {vertex!r}; labels: {sorted(c.labels)}")
        theta = c.cone_report().angle(vertex)
        K = cx.total_curvature(c, exclude=[vertex])
        g = geo.growth_extrapolated(c, vertex, radii, depths, max_nodes=max_nodes)
    cfg = {"construction": construction, "params": dict(params or {}), "vertex": vertex, "radii": list(radii), "depths": depths}
    rep = VerificationReport("angle-growth", cfg, tol, runtime=tm.elapsed)
    rel = tol["growth_relative"]
    rep.checks += [
        Check("boundary_ratio_limit", g.boundary_limit, theta, rel, "rel"),
        Check("area_ratio_limit", g.area_limit, theta, rel, "rel"),
        Check("growth_ratios_agree", abs(g.boundary_limit - g.area_limit), 0.0, g.boundary_band + g.area_band, "le"),
        Check("theta_equals_K_minus_2pi", K - TWO_PI, theta, tol["identity"]),
    ]
    rep.values = {
        "theta": theta,
        "theta_degrees": math.degrees(theta),
        "K_total": K,
        "boundary_limit": g.boundary_limit,
        "boundary_band": g.boundary_band,
        "area_limit": g.area_limit,
        "area_band": g.area_band,
    }
    rep.tables["growth"] = g.as_rows()
    return rep


def verify_smoothing(s: float = 0.5, delta: float = 0.1, tolerances=None) -> VerificationReport:
    """Smoothed cone tip: curvature stays at least 1, boundary matches, area barely moves."""
    tol = resolve_tolerances(tolerances)
    with _Timer() as tm:
        p = pf.smooth_cone_profile(s, delta)
        cert = pf.smoothing_certificate(p)
    b = tol["boundary_match"]
    rep = VerificationReport("smoothing", {"s": s, "delta": delta}, tol, runtime=tm.elapsed)
    rep.checks += [
        Check("min_curvature", cert["min_curvature"], 1.0, tol["curvature_min"], "ge"),
        Check("boundary_value_error", cert["boundary_value_error"], 0.0, b, "le"),
        Check("boundary_slope_error", cert["boundary_slope_error"], 0.0, b, "le"),
        Check("slope_at_origin", cert["slope_at_origin"], 1.0, b),
        Check("area_change", abs(cert["area_change"]), 2 * math.pi * delta**2, 0.0, "le"),
    ]
    rep.values = dict(cert)
    if delta < 1e-4:
        rep.notes.append(f"warning: delta = {delta:g} is a stress case; area change is near rounding level")
    return rep


SUITES = {
    "prop-diameter": verify_prop_diameter,
    "prop-area": verify_prop_area,
    "corollary": verify_corollary,
    "theorem-complete": verify_theorem_complete,
    "angle-growth": verify_angle_growth,
    "smoothing": verify_smoothing,
}


def run_all(tolerances=None) -> list[VerificationReport]:
    """Every suite with its default parameters."""
    return [fn(tolerances=tolerances) for fn in SUITES.values()]
