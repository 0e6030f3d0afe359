"""Closed piecewise-spherical surfaces glued from geodesic triangles.

Edges of a triangle are indexed by the opposite corner, so edge ``e`` runs
between corners ``(e + 1) % 3`` and ``(e + 2) % 3``.  All triangles are
taken counter-clockwise and every gluing reverses orientation: gluing
``(ti, ei)`` to ``(tj, ej)`` identifies corner ``(ei + 1) % 3`` of ``ti``
with corner ``(ej + 2) % 3`` of ``tj`` and corner ``(ei + 2) % 3`` with
``(ej + 1) % 3``.  Surfaces built this way are automatically orientable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import (
    DanglingEdgeError,
    DisconnectedError,
    EulerCharacteristicError,
    GluingError,
    LengthMismatchError,
    SchemaError,
    ValidationError,
    VersionError,
)
from .sphtrig import SphericalTriangle, angles_from_sides, area_excess, solve_sas

TWO_PI = 2.0 * math.pi
LENGTH_TOL = 1e-12
SMOOTH_TOL = 1e-9
DOCUMENT_VERSION = 1

Side = tuple[int, int]


def glued_corners(ei: int, ej: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Corner pairs ``(corner of ti, corner of tj)`` identified by a gluing."""
    return ((ei + 1) % 3, (ej + 2) % 3), ((ei + 2) % 3, (ej + 1) % 3)


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _union(parent, i, j):
    ri, rj = _find(parent, i), _find(parent, j)
    if ri != rj:
        if ri < rj:
            parent[rj] = ri
        else:
            parent[ri] = rj


@dataclass(frozen=True)
class ConeEntry:
    vertex: int
    label: Optional[str]
    angle: float

    @property
    def atom(self) -> float:
        """Curvature concentrated at the vertex, ``2*pi - angle``."""
        return TWO_PI - self.angle

    @property
    def smooth(self) -> bool:
        return abs(self.angle - TWO_PI) <= SMOOTH_TOL

    @property
    def name(self) -> str:
        return self.label if self.label is not None else f"v{self.vertex}"


@dataclass(frozen=True)
class ConeReport:
    entries: tuple[ConeEntry, ...]

    @property
    def singular(self) -> tuple[ConeEntry, ...]:
        return tuple(e for e in self.entries if not e.smooth)

    def angle(self, label: str) -> float:
        for e in self.entries:
            if e.label == label:
                return e.angle
        raise KeyError(label)

    @property
    def atom_sum(self) -> float:
        return math.fsum(e.atom for e in self.entries)

    def as_rows(self):
        return [
            {"vertex": e.name, "angle": e.angle, "angle_deg": math.degrees(e.angle), "atom": e.atom, "smooth": e.smooth}
            for e in self.entries
        ]


@dataclass(frozen=True, eq=False)
class SurfaceComplex:
    """A validated closed surface; build it with :func:`assemble`."""

    triangles: tuple[SphericalTriangle, ...]
    gluings: tuple[tuple[Side, Side], ...]
    labels: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    # corner (t, k) -> vertex index, shape (F, 3)
    corner_vertex: np.ndarray = field(default=None, repr=False)
    angles: np.ndarray = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, SurfaceComplex):
            return NotImplemented
        return (
            self.triangles == other.triangles
            and self.gluings == other.gluings
            and self.labels == other.labels
            and self.meta == other.meta
        )

    __hash__ = None

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_vertices(self) -> int:
        return int(self.corner_vertex.max()) + 1

    @property
    def n_edges(self) -> int:
        return len(self.gluings)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def vertex_of(self, label: str) -> int:
        try:
            t, k = self.labels[label]
        except KeyError:
            raise ValidationError(f"unknown vertex label {label!r}; known: {sorted(self.labels)}") from None
        return int(self.corner_vertex[t, k])

    def vertex_labels(self) -> dict[int, str]:
        out = {}
        for name in sorted(self.labels):
            out.setdefault(self.vertex_of(name), name)
        return out

    def cone_angles(self) -> np.ndarray:
        """Total angle around each vertex class."""
        theta = np.zeros(self.n_vertices)
        np.add.at(theta, self.corner_vertex.ravel(), self.angles.ravel())
        return theta

    def cone_report(self) -> ConeReport:
        names = self.vertex_labels()
        theta = self.cone_angles()
        return ConeReport(tuple(ConeEntry(v, names.get(v), float(theta[v])) for v in range(self.n_vertices)))

    def corners_of(self, vertex: int) -> list[tuple[int, int]]:
        ts, ks = np.nonzero(self.corner_vertex == vertex)
        return list(zip(ts.tolist(), ks.tolist()))


def assemble(
    triangles: Iterable[SphericalTriangle],
    gluings: Iterable[tuple[Side, Side]],
    labels: Optional[dict] = None,
    meta: Optional[dict] = None,
) -> SurfaceComplex:
    """Validate a gluing pattern and compute vertex classes.

    Raises
    ------
    DanglingEdgeError
        Some edge is not glued.
    LengthMismatchError
        Glued edges differ in length by more than ``1e-12``.
    DisconnectedError
        The triangles fall into several components.
    EulerCharacteristicError
        ``V - E + F != 2``.
    GluingError
        Malformed pairs: self-gluing, repeated edges, bad indices.
    """
    tris = tuple(triangles)
    if not tris:
        raise ValidationError("a surface needs at least one triangle")
    for i, t in enumerate(tris):
        if not isinstance(t, SphericalTriangle):
            raise ValidationError(f"triangles[{i}] is not a SphericalTriangle")
    F = len(tris)
    glue = []
    seen: dict[Side, int] = {}
    for gi, pair in enumerate(gluings):
        (ti, ei), (tj, ej) = ((int(pair[0][0]), int(pair[0][1])), (int(pair[1][0]), int(pair[1][1])))
        for t, e in ((ti, ei), (tj, ej)):
            if not (0 <= t < F and 0 <= e < 3):
                raise GluingError(f"gluing {gi}: side ({t}, {e}) does not exist")
        if (ti, ei) == (tj, ej):
            raise GluingError(f"gluing {gi}: edge ({ti}, {ei}) glued to itself")
        for side in ((ti, ei), (tj, ej)):
            if side in seen:
                raise GluingError(f"gluing {gi}: edge {side} already used by gluing {seen[side]}")
            seen[side] = gi
        li, lj = tris[ti].sides[ei], tris[tj].sides[ej]
        if abs(li - lj) > LENGTH_TOL:
            raise LengthMismatchError(
                f"gluing {gi}: edge ({ti}, {ei}) has length {li!r} but ({tj}, {ej}) has {lj!r}"
            )
        glue.append(((ti, ei), (tj, ej)))
    missing = [(t, e) for t in range(F) for e in range(3) if (t, e) not in seen]
    if missing:
        raise DanglingEdgeError(f"{len(missing)} edge(s) not glued, first {missing[0]}")

    parent = list(range(3 * F))
    tparent = list(range(F))
    for (ti, ei), (tj, ej) in glue:
        for ci, cj in glued_corners(ei, ej):
            _union(parent, 3 * ti + ci, 3 * tj + cj)
        _union(tparent, ti, tj)
    if len({_find(tparent, t) for t in range(F)}) != 1:
        raise DisconnectedError("triangles form more than one connected component")
    roots = [_find(parent, i) for i in range(3 * F)]
    index: dict[int, int] = {}
    corner_vertex = np.empty(3 * F, dtype=np.int64)
    for i, r in enumerate(roots):
        corner_vertex[i] = index.setdefault(r, len(index))
    corner_vertex = corner_vertex.reshape(F, 3)
    V, E = len(index), len(glue)
    if V - E + F != 2:
        raise EulerCharacteristicError(f"V - E + F = {V} - {E} + {F} = {V - E + F}, expected 2 (sphere)")
    angles = np.array([angles_from_sides(t) for t in tris])
    labels = dict(labels or {})
    for name, (t, k) in labels.items():
        if not (0 <= t < F and 0 <= k < 3):
            raise ValidationError(f"label {name!r} points at missing corner ({t}, {k})")
    labels = {str(k): (int(v[0]), int(v[1])) for k, v in labels.items()}
    return SurfaceComplex(tris, tuple(glue), labels, dict(meta or {}), corner_vertex, angles)


def area(c: SurfaceComplex) -> float:
    """Total area: the sum of the angle excesses of the triangles."""
    return math.fsum(area_excess(t) for t in c.triangles)


def gauss_bonnet_check(c: SurfaceComplex) -> float:
    """``sum(2*pi - theta_v) + area - 4*pi``; zero up to rounding for any closed complex."""
    atoms = math.fsum(TWO_PI - th for th in c.cone_angles())
    return atoms + area(c) - 2 * TWO_PI


def total_curvature(c: SurfaceComplex, exclude: Iterable[str] = ()) -> float:
    """Smooth curvature (the area, since K = 1) plus vertex atoms.

    Vertices whose label is in ``exclude`` contribute no atom.
    """
    skip = {c.vertex_of(x) for x in exclude}
    theta = c.cone_angles()
    atoms = math.fsum(TWO_PI - theta[v] for v in range(c.n_vertices) if v not in skip)
    return area(c) + atoms


# -- constructions ---------------------------------------------------------


def complex_from_faces(
    faces, edge_length, labels: Optional[dict] = None, meta: Optional[dict] = None
) -> SurfaceComplex:
    """Glue consistently oriented faces given as vertex-id triples.

    ``edge_length(u, v)`` returns the length of the edge between vertex ids.
    Labels map names to vertex ids.
    """
    faces = [tuple(int(x) for x in f) for f in faces]
    tris = []
    directed: dict[tuple[int, int], Side] = {}
    for ti, (u0, u1, u2) in enumerate(faces):
        corners = (u0, u1, u2)
        sides = []
        for e in range(3):
            u, v = corners[(e + 1) % 3], corners[(e + 2) % 3]
            sides.append(edge_length(u, v))
            if (u, v) in directed:
                raise GluingError(f"directed edge ({u}, {v}) used twice; faces are not consistently oriented")
            directed[(u, v)] = (ti, e)
        tris.append(SphericalTriangle(*sides))
    gluings = []
    for (u, v), side in sorted(directed.items()):
        if u < v:
            if (v, u) not in directed:
                raise DanglingEdgeError(f"edge ({u}, {v}) has no partner")
            gluings.append((side, directed[(v, u)]))
    corner_of = {}
    for ti, f in enumerate(faces):
        for k, vid in enumerate(f):
            corner_of.setdefault(vid, (ti, k))
    lab = {name: corner_of[vid] for name, vid in (labels or {}).items()}
    return assemble(tris, gluings, lab, meta)


OCTAHEDRON_LABELS = {"x+": 0, "x-": 1, "y+": 2, "y-": 3, "z+": 4, "z-": 5}


def build_octahedron() -> SurfaceComplex:
    """The round sphere cut into eight octants (every edge ``pi/2``)."""
    faces = []
    for sx in (0, 1):
        for sy in (0, 1):
            for sz in (0, 1):
                f = (sx, 2 + sy, 4 + sz)
                # (+x, +y, +z) is counter-clockwise seen from outside
                if (sx + sy + sz) % 2:
                    f = (f[0], f[2], f[1])
                faces.append(f)
    return complex_from_faces(
        faces, lambda u, v: math.pi / 2, labels=OCTAHEDRON_LABELS, meta={"kind": "octahedron"}
    )


def build_join_double(N: float, max_sector: float = math.pi / 3) -> SurfaceComplex:
    """Double of the spherical join of a point ``p`` and a segment of length ``N``.

    Each copy of the join is a fan of sector triangles ``(p, a_i, a_{i+1})``
    with legs ``pi/2`` and base ``N/k``.  The double has cone angles ``pi``
    at the segment ends ``a``, ``b`` and ``2N`` at ``p``, and area ``2N``.
    """
    if not (math.isfinite(N) and N > 0):
        raise ValidationError(f"segment length N={N} must be positive")
    if not 0 < max_sector <= math.pi / 3 + 1e-15:
        raise ValidationError(f"max_sector={max_sector} outside (0, pi/3]")
    k = max(1, math.ceil(N / max_sector - 1e-12))
    width = N / k
    half = math.pi / 2
    sector = SphericalTriangle(width, half, half)
    tris = [sector] * (2 * k)
    # triangles 0..k-1: (p, a_i, a_{i+1}); k..2k-1: mirrors (p, a_{i+1}, a_i)
    gluings = []
    for i in range(k - 1):
        gluings.append(((i, 1), (i + 1, 2)))
        gluings.append(((k + i, 2), (k + i + 1, 1)))
    for i in range(k):
        gluings.append(((i, 0), (k + i, 0)))
    gluings.append(((0, 2), (k, 1)))
    gluings.append(((k - 1, 1), (2 * k - 1, 2)))
    labels = {"p": (0, 0), "a": (0, 1), "b": (k - 1, 2)}
    meta = {"kind": "join-double", "N": N, "max_sector": max_sector, "sectors": k}
    return assemble(tris, gluings, labels, meta)


def join_double_equator_point(c: SurfaceComplex, fraction: float = 0.5) -> tuple[int, tuple[float, float, float]]:
    """Locate the point at ``fraction`` of the segment in the first copy.

    Returns ``(triangle, weights)`` with weights on the triangle's corners,
    parametrized by arc length along the base edge.
    """
    if c.meta.get("kind") != "join-double":
        raise ValidationError("equator points are defined for join-double surfaces only")
    k = c.meta["sectors"]
    pos = fraction * k
    i = min(int(math.floor(pos)), k - 1)
    return i, (0.0, 1.0 - (pos - i), pos - i)


def build_triangle_double(eps: float) -> SurfaceComplex:
    """Double of the kite ``Z = D u D'`` built from the right triangle ``D = pxy``.

    ``|px| = eps``, the angle at ``x`` is ``pi/2`` and ``|xy| = pi - eps``;
    ``D'`` is the mirror image of ``D`` across ``px``.
    """
    if not 0 < eps < math.pi / 2:
        raise ValidationError(f"eps={eps} outside (0, pi/2)")
    # solve_sas puts the right angle at corner 2 (x), between |xy| and |px|
    py = solve_sas(eps, math.pi / 2, math.pi - eps).c
    D = SphericalTriangle(math.pi - eps, py, eps)  # (p, x, y)
    Dp = SphericalTriangle(math.pi - eps, eps, py)  # (p, y', x)
    M = SphericalTriangle(math.pi - eps, eps, py)  # (p, y, x)
    Mp = SphericalTriangle(math.pi - eps, py, eps)  # (p, x, y')
    gluings = [
        ((0, 2), (1, 1)),  # px inside Z
        ((2, 1), (3, 2)),  # px inside the mirror copy
        ((0, 0), (2, 0)),  # xy
        ((0, 1), (2, 2)),  # py
        ((1, 0), (3, 0)),  # y'x
        ((1, 2), (3, 1)),  # py'
    ]
    labels = {"p": (0, 0), "x": (0, 1), "y": (0, 2), "y'": (1, 1)}
    meta = {"kind": "triangle-double", "eps": eps}
    return assemble([D, Dp, M, Mp], gluings, labels, meta)


def random_complex(rng: np.random.Generator, n_points: int = 12, lo: float = 0.4, hi: float = 0.6) -> SurfaceComplex:
    """Random triangulated sphere with random edge lengths in ``[lo, hi]``.

    Combinatorics come from the convex hull of random points; any lengths
    with ``hi < 2*lo`` give valid spherical triangles, so cone angles vary
    freely.
    """
    from scipy.spatial import ConvexHull

    if not (0 < lo <= hi < 2 * lo and 3 * hi < TWO_PI):
        raise ValidationError("edge length range does not guarantee valid triangles")
    pts = rng.normal(size=(n_points, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    hull = ConvexHull(pts)
    faces = []
    for f, eq in zip(hull.simplices, hull.equations):
        a, b, c = pts[f]
        if np.dot(np.cross(b - a, c - a), eq[:3]) < 0:
            f = f[[0, 2, 1]]
        faces.append(tuple(int(x) for x in f))
    lengths: dict[tuple[int, int], float] = {}

    def edge_length(u, v):
        key = (min(u, v), max(u, v))
        if key not in lengths:
            lengths[key] = float(rng.uniform(lo, hi))
        return lengths[key]

    return complex_from_faces(faces, edge_length, meta={"kind": "random"})


# -- documents ---------------------------------------------------------------


def _num(x: float) -> str:
    # 17 significant digits: at least 15, and round-trips every double
    return f"{float(x):.17g}"


def to_document(c: SurfaceComplex) -> dict:
    return {
        "version": DOCUMENT_VERSION,
        "meta": c.meta,
        "triangles": [[_num(s) for s in t.sides] for t in c.triangles],
        "gluings": [[[ti, ei], [tj, ej]] for (ti, ei), (tj, ej) in c.gluings],
        "labels": {k: [t, kk] for k, (t, kk) in sorted(c.labels.items())},
    }


def serialize(c: SurfaceComplex) -> str:
    """Versioned JSON document with sorted keys (stable for hashing)."""
    return json.dumps(to_document(c), sort_keys=True, indent=1) + "\n"


def _expect(cond, path, msg):
    if not cond:
        raise SchemaError(path, msg)


def _int(x, path):
    _expect(isinstance(x, int) and not isinstance(x, bool), path, f"expected integer, got {x!r}")
    return x


def from_document(doc) -> SurfaceComplex:
    _expect(isinstance(doc, dict), "$", "document must be an object")
    _expect("version" in doc, "$.version", "missing")
    if doc["version"] != DOCUMENT_VERSION:
        raise VersionError("$.version", f"unsupported version {doc['version']!r} (supported: {DOCUMENT_VERSION})")
    allowed = {"version", "meta", "triangles", "gluings", "labels"}
    extra = sorted(set(doc) - allowed)
    _expect(not extra, f"$.{extra[0]}" if extra else "$", "unknown field")
    for key in ("triangles", "gluings"):
        _expect(key in doc, f"$.{key}", "missing")
        _expect(isinstance(doc[key], list), f"$.{key}", "expected array")
    tris = []
    for i, t in enumerate(doc["triangles"]):
        path = f"$.triangles[{i}]"
        _expect(isinstance(t, list) and len(t) == 3, path, "expected [a, b, c]")
        sides = []
        for j, s in enumerate(t):
            _expect(isinstance(s, str), f"{path}[{j}]", f"expected decimal string, got {s!r}")
            try:
                sides.append(float(s))
            except ValueError:
                raise SchemaError(f"{path}[{j}]", f"not a decimal number: {s!r}") from None
        try:
            tris.append(SphericalTriangle(*sides))
        except ValidationError as exc:
            raise SchemaError(path, str(exc)) from None
    gluings = []
    for i, g in enumerate(doc["gluings"]):
        path = f"$.gluings[{i}]"
        _expect(isinstance(g, list) and len(g) == 2, path, "expected [[ti, ei], [tj, ej]]")
        pair = []
        for j, side in enumerate(g):
            _expect(isinstance(side, list) and len(side) == 2, f"{path}[{j}]", "expected [triangle, edge]")
            pair.append((_int(side[0], f"{path}[{j}][0]"), _int(side[1], f"{path}[{j}][1]")))
        gluings.append(tuple(pair))
    labels = {}
    raw_labels = doc.get("labels", {})
    _expect(isinstance(raw_labels, dict), "$.labels", "expected object")
    for name, ref in raw_labels.items():
        path = f"$.labels.{name}"
        _expect(isinstance(ref, list) and len(ref) == 2, path, "expected [triangle, corner]")
        labels[name] = (_int(ref[0], f"{path}[0]"), _int(ref[1], f"{path}[1]"))
    meta = doc.get("meta", {})
    _expect(isinstance(meta, dict), "$.meta", "expected object")
    return assemble(tris, gluings, labels, meta)


def deserialize(text: str) -> SurfaceComplex:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"not valid JSON: {exc}") from None
    return from_document(doc)
