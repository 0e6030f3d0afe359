"""Intrinsic distances on piecewise-spherical surfaces via refined graphs.

Every triangle is placed on the unit sphere (its chart) and subdivided by
repeatedly splitting at geodesic edge midpoints, ``d`` times.  The lattice
point with weights ``(i, j, k)``, ``i + j + k = 2**d``, on the three corners
is a mesh node; nodes on glued edges are identified.  Arcs are great-circle
chords inside one chart, so every graph path is a real path on the surface
and graph distances bound intrinsic distances from above.

Arcs join every node to every node on the boundary of its triangle
(shortest paths cross edges at subdivision points, which makes the graph
distance converge linearly in the subdivision scale) and interior nodes to
interior nodes at most three lattice steps apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .complex import SurfaceComplex
from .errors import ResourceError, ValidationError
from .sphtrig import arc_length, chart_triangle_area, chart_vertices

MAX_DEPTH = 8
MAX_NODES = 5_000_000
MAX_ARCS = 60_000_000
ENRICH_STEPS = 3

PointSpec = Union[str, int, tuple]


def subdivision_positions(corners: np.ndarray, n: int) -> np.ndarray:
    """Recursive geodesic-midpoint subdivision of a spherical triangle.

    ``corners`` has shape ``(..., 3, 3)`` (three unit vectors per triangle)
    and ``n`` is a power of two.  Returns ``(..., n + 1, n + 1, 3)`` where
    entry ``[i, j]`` is the lattice point with weights ``(i, j, n - i - j)``;
    entries with ``i + j > n`` are undefined.  Positions of coarser lattices
    are reproduced bit for bit at finer ones.
    """
    corners = np.asarray(corners, dtype=float)
    lead = corners.shape[:-2]
    pos = np.full(lead + (n + 1, n + 1, 3), np.nan)
    pos[..., n, 0, :] = corners[..., 0, :]
    pos[..., 0, n, :] = corners[..., 1, :]
    pos[..., 0, 0, :] = corners[..., 2, :]
    s = n
    with np.errstate(invalid="ignore", divide="ignore"):
        while s > 1:
            h = s // 2
            m = n // s
            sub = pos[..., ::s, ::s, :]  # (..., m+1, m+1, 3)
            # along i: (a, b) -> (a+1, b)
            mid = sub[..., :-1, :, :] + sub[..., 1:, :, :]
            mid /= np.linalg.norm(mid, axis=-1, keepdims=True)
            pos[..., h : n : s, 0 : n + 1 : s, :] = mid
            # along j
            mid = sub[..., :, :-1, :] + sub[..., :, 1:, :]
            mid /= np.linalg.norm(mid, axis=-1, keepdims=True)
            pos[..., 0 : n + 1 : s, h : n : s, :] = mid
            # diagonal: (a+1, b) -> (a, b+1)
            mid = sub[..., 1:, :-1, :] + sub[..., :-1, 1:, :]
            mid /= np.linalg.norm(mid, axis=-1, keepdims=True)
            pos[..., h : n : s, h : n : s, :] = mid[..., :m, :m, :]
            s = h
    return pos


@dataclass(frozen=True)
class _Lattice:
    """Index bookkeeping for the lattice of one subdivided triangle."""

    n: int
    ij: np.ndarray  # (m, 2) lattice coordinates of local nodes
    index: np.ndarray  # (n+1, n+1) -> local id or -1
    boundary: np.ndarray  # local ids with a zero weight
    interior: np.ndarray
    cells: np.ndarray  # (4**d, 3) local ids

    @classmethod
    def build(cls, n: int) -> "_Lattice":
        ij = np.array([(i, j) for i in range(n + 1) for j in range(n + 1 - i)], dtype=np.int64)
        index = -np.ones((n + 1, n + 1), dtype=np.int64)
        index[ij[:, 0], ij[:, 1]] = np.arange(len(ij))
        k = n - ij[:, 0] - ij[:, 1]
        on_b = (ij[:, 0] == 0) | (ij[:, 1] == 0) | (k == 0)
        cells = []
        for i in range(n):
            for j in range(n - i):
                cells.append((index[i, j], index[i + 1, j], index[i, j + 1]))
                if i + j <= n - 2:
                    cells.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
        return cls(
            n,
            ij,
            index,
            np.nonzero(on_b)[0],
            np.nonzero(~on_b)[0],
            np.array(cells, dtype=np.int64).reshape(-1, 3),
        )

    def weights(self) -> np.ndarray:
        k = self.n - self.ij[:, 0] - self.ij[:, 1]
        return np.column_stack([self.ij, k])

    def arc_template(self) -> tuple[np.ndarray, np.ndarray]:
        """Unordered local pairs: node-boundary, plus short interior chords."""
        m = len(self.ij)
        is_b = np.zeros(m, dtype=bool)
        is_b[self.boundary] = True
        u = np.repeat(np.arange(m), len(self.boundary))
        v = np.tile(self.boundary, m)
        keep = (u != v) & (~is_b[u] | (u < v))
        u, v = u[keep], v[keep]
        inner = self.interior
        if len(inner) > 1:
            # equilateral-lattice distance in units of one step
            a = self.ij[inner].astype(float)
            x = a[:, 0] + 0.5 * a[:, 1]
            y = a[:, 1] * (math.sqrt(3) / 2)
            from scipy.spatial import cKDTree

            pairs = cKDTree(np.column_stack([x, y])).query_pairs(ENRICH_STEPS + 1e-9, output_type="ndarray")
            if len(pairs):
                u = np.concatenate([u, inner[pairs[:, 0]]])
                v = np.concatenate([v, inner[pairs[:, 1]]])
        return u, v


@dataclass(frozen=True, eq=False)
class GeodesicMesh:
    """Weighted graph approximating the intrinsic metric of a complex."""

    complex: SurfaceComplex
    depth: int
    lattice: _Lattice = field(repr=False)
    positions: np.ndarray = field(repr=False)  # (F, m, 3) chart positions
    node_of: np.ndarray = field(repr=False)  # (F, m) global node ids
    graph: csr_matrix = field(repr=False)
    n_nodes: int = 0

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def n_arcs(self) -> int:
        return int(self.graph.nnz)

    @property
    def scale(self) -> float:
        """Subdivision scale: longest triangle side divided by ``2**depth``."""
        return max(max(t.sides) for t in self.complex.triangles) / self.n

    def label_node(self, label: str) -> int:
        t, k = self.complex.labels.get(label, (None, None))
        if t is None:
            raise ValidationError(f"unknown label {label!r}; known: {sorted(self.complex.labels)}")
        w = [0, 0, 0]
        w[k] = self.n
        return int(self.node_of[t, self.lattice.index[w[0], w[1]]])

    def point_node(self, t: int, weights: Sequence[float]) -> int:
        """Node at barycentric ``weights`` of triangle ``t``; must be a lattice point."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (3,) or np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
            raise ValidationError(f"weights {weights!r} are not barycentric")
        lw = w * self.n
        rw = np.rint(lw)
        if np.max(np.abs(lw - rw)) > 1e-9:
            raise ValidationError(f"point {weights!r} of triangle {t} is not a node at depth {self.depth}")
        return int(self.node_of[t, self.lattice.index[int(rw[0]), int(rw[1])]])

    def resolve(self, spec: PointSpec) -> int:
        if isinstance(spec, str):
            return self.label_node(spec)
        if isinstance(spec, (int, np.integer)):
            if not 0 <= spec < self.n_nodes:
                raise ValidationError(f"node {spec} out of range")
            return int(spec)
        t, w = spec
        return self.point_node(int(t), w)

    def node_location(self, node: int) -> tuple[int, tuple[float, float, float]]:
        """One ``(triangle, barycentric weights)`` location of a node."""
        ts, ls = np.nonzero(self.node_of == node)
        t, l = int(ts[0]), int(ls[0])
        w = self.lattice.weights()[l] / self.n
        return t, tuple(float(x) for x in w)

    def distances_from(self, sources) -> np.ndarray:
        src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        return dijkstra(self.graph, directed=False, indices=src)

    def cell_areas(self) -> np.ndarray:
        c = self.lattice.cells
        P = self.positions
        return chart_triangle_area(P[:, c[:, 0]], P[:, c[:, 1]], P[:, c[:, 2]])


def refine(c: SurfaceComplex, depth: int, max_nodes: int = MAX_NODES, max_arcs: int = MAX_ARCS) -> GeodesicMesh:
    """Subdivide every triangle ``depth`` times and build the distance graph.

    Raises
    ------
    ResourceError
        If the node or arc budget would be exceeded.
    """
    if not (isinstance(depth, (int, np.integer)) and 0 <= depth <= MAX_DEPTH):
        raise ValidationError(f"depth {depth!r} outside 0..{MAX_DEPTH}")
    n = 2**depth
    F = c.n_triangles
    m = (n + 1) * (n + 2) // 2
    if F * m > max_nodes:
        raise ResourceError(f"depth {depth} needs {F * m} nodes, budget is {max_nodes}")
    est_arcs = F * (m * 3 * n + 20 * m)
    if est_arcs > max_arcs:
        raise ResourceError(f"depth {depth} needs about {est_arcs} arcs, budget is {max_arcs}")
    lat = _Lattice.build(n)
    corners = np.stack([chart_vertices(t) for t in c.triangles])
    grid = subdivision_positions(corners, n)
    positions = grid[:, lat.ij[:, 0], lat.ij[:, 1], :]

    # identify nodes across glued edges
    w = lat.weights()
    src, dst = [], []
    q = np.arange(n + 1)
    for (ti, ei), (tj, ej) in c.gluings:
        wi = np.zeros((n + 1, 3), dtype=np.int64)
        wi[:, (ei + 2) % 3] = q
        wi[:, (ei + 1) % 3] = n - q
        wj = np.zeros((n + 1, 3), dtype=np.int64)
        wj[:, (ej + 1) % 3] = q
        wj[:, (ej + 2) % 3] = n - q
        src.append(ti * m + lat.index[wi[:, 0], wi[:, 1]])
        dst.append(tj * m + lat.index[wj[:, 0], wj[:, 1]])
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    ident = coo_matrix((np.ones(len(src)), (src, dst)), shape=(F * m, F * m))
    n_nodes, labels = connected_components(ident, directed=False)
    node_of = labels.reshape(F, m).astype(np.int64)
    del w

    tu, tv = lat.arc_template()
    us, vs, ws = [], [], []
    for t in range(F):
        P = positions[t]
        us.append(node_of[t, tu])
        vs.append(node_of[t, tv])
        ws.append(arc_length(P[tu], P[tv]))
    u = np.concatenate(us)
    v = np.concatenate(vs)
    wt = np.concatenate(ws)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keep = lo != hi
    lo, hi, wt = lo[keep], hi[keep], wt[keep]
    key = lo * n_nodes + hi
    order = np.lexsort((wt, key))
    key, wt = key[order], wt[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    key, wt = key[first], wt[first]
    if np.any(wt <= 0):
        raise ValidationError("zero-length arc: coincident mesh nodes")
    graph = csr_matrix((wt, (key // n_nodes, key % n_nodes)), shape=(n_nodes, n_nodes))
    mesh = GeodesicMesh(c, int(depth), lat, positions, node_of, graph, int(n_nodes))
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise ValidationError("refined graph is disconnected")
    return mesh


def distance(m: GeodesicMesh, a: PointSpec, b: PointSpec) -> float:
    """Graph distance between two points (labels, node ids or lattice points).

    Always at least the intrinsic distance.  Computed from the smaller node
    id so that ``distance(a, b) == distance(b, a)`` bit for bit.
    """
    ia, ib = m.resolve(a), m.resolve(b)
    if ia > ib:
        ia, ib = ib, ia
    return float(m.distances_from(ia)[0, ib])


@dataclass(frozen=True)
class DistanceEstimate:
    values_by_depth: tuple[tuple[int, float], ...]
    extrapolated: float
    error_band: float
    slope: float = 0.0
    fit_residual: float = 0.0

    @property
    def lower_bound(self) -> float:
        return self.extrapolated - self.error_band

    @property
    def finest(self) -> float:
        return self.values_by_depth[-1][1]

    def as_dict(self) -> dict:
        return {
            "values_by_depth": [[d, v] for d, v in self.values_by_depth],
            "extrapolated": self.extrapolated,
            "error_band": self.error_band,
            "slope": self.slope,
            "fit_residual": self.fit_residual,
        }


def extrapolate_linear(depths: Sequence[int], values: Sequence[float], use_last: int = 3) -> DistanceEstimate:
    """Fit ``v = v* + C h`` with ``h = 2**-depth`` over the finest depths.

    The band is the largest of the worst fit residual, the last decrement
    and the extrapolation step itself (smallest observed value minus the
    estimate).  Graph distances drop in steps rather than smoothly, so a
    fit through a plateau can overshoot by about the size of its own
    correction.  The estimate is capped at the smallest observed value,
    since graph values approach the limit from above.
    """
    depths = [int(d) for d in depths]
    if len(depths) < 2 or any(b <= a for a, b in zip(depths, depths[1:])):
        raise ValidationError(f"depths {depths} must be strictly increasing, at least two")
    vals = np.asarray(values, dtype=float)
    h = np.array([2.0**-d for d in depths])
    k = min(use_last, len(depths))
    A = np.column_stack([np.ones(k), h[-k:]])
    coef, *_ = np.linalg.lstsq(A, vals[-k:], rcond=None)
    resid = float(np.max(np.abs(A @ coef - vals[-k:])))
    est = min(float(coef[0]), float(np.min(vals)))
    decrement = float(vals[-2] - vals[-1])
    band = max(resid, abs(decrement), float(np.min(vals)) - est)
    return DistanceEstimate(
        tuple(zip(depths, (float(x) for x in vals))), est, band, float(coef[1]), resid
    )


def _check_depths(depths):
    depths = [int(d) for d in depths]
    if len(depths) < 3:
        raise ValidationError(f"need at least three depths, got {depths}")
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ValidationError(f"depths {depths} must be strictly increasing")
    return depths


def distance_extrapolated(
    c: SurfaceComplex, a: PointSpec, b: PointSpec, depths: Sequence[int], max_nodes: int = MAX_NODES
) -> DistanceEstimate:
    depths = _check_depths(depths)
    vals = [distance(refine(c, d, max_nodes=max_nodes), a, b) for d in depths]
    return extrapolate_linear(depths, vals)


@dataclass(frozen=True)
class DiameterEstimate:
    graph_diameter: float
    extrapolated_diameter: float
    error_band: float
    pair: tuple
    pair_estimate: DistanceEstimate
    sources: tuple

    def __iter__(self):
        yield self.graph_diameter
        yield self.extrapolated_diameter

    def as_dict(self) -> dict:
        return {
            "graph_diameter": self.graph_diameter,
            "extrapolated_diameter": self.extrapolated_diameter,
            "error_band": self.error_band,
            "pair": [list(p) if isinstance(p, tuple) else p for p in self.pair],
            "pair_estimate": self.pair_estimate.as_dict(),
            "n_sources": len(self.sources),
        }


def _coarse_points(mesh: GeodesicMesh) -> list[tuple[int, tuple]]:
    """Canonical location of every node, as (triangle, lattice weights)."""
    F, m = mesh.node_of.shape
    first_t = np.full(mesh.n_nodes, -1)
    first_l = np.full(mesh.n_nodes, -1)
    flat = mesh.node_of.ravel()
    order = np.arange(F * m)[::-1]
    first_t[flat[order]] = order // m
    first_l[flat[order]] = order % m
    W = mesh.lattice.weights()
    return [(int(first_t[v]), tuple(int(x) for x in W[first_l[v]])) for v in range(mesh.n_nodes)]


def diameter_estimate(
    c: SurfaceComplex,
    depths: Union[int, Sequence[int]],
    sample_count: int = 16,
    seed: int = 0,
    max_nodes: int = MAX_NODES,
) -> DiameterEstimate:
    """Diameter from graph eccentricities of sampled sources.

    Sources always include the labeled vertices; the rest are drawn with
    ``seed`` from the nodes of the coarsest depth.  The maximizing pair is
    searched among coarsest-depth nodes at the finest depth and its distance
    extrapolated across ``depths``.  ``graph_diameter`` is the largest
    eccentricity over all nodes at the finest depth.
    """
    if isinstance(depths, (int, np.integer)):
        depths = [int(depths)]
    depths = [int(d) for d in depths]
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise ValidationError(f"depths {depths} must be strictly increasing")
    labels = sorted(c.labels)
    if sample_count < len(labels):
        raise ValidationError(f"sample_count {sample_count} below the {len(labels)} labeled vertices")
    meshes = [refine(c, d, max_nodes=max_nodes) for d in depths]
    coarse = meshes[0]
    points = _coarse_points(coarse)
    n0 = coarse.n
    label_nodes = sorted({coarse.label_node(x) for x in labels})
    others = np.setdiff1d(np.arange(coarse.n_nodes), label_nodes)
    rng = np.random.default_rng(seed)
    extra = rng.choice(others, size=min(sample_count - len(label_nodes), len(others)), replace=False)
    src_coarse = sorted(label_nodes) + sorted(int(x) for x in extra)

    def to_spec(v):
        t, w = points[v]
        return (t, tuple(x / n0 for x in w))

    src_specs = [to_spec(v) for v in src_coarse]
    tgt_specs = [to_spec(v) for v in range(coarse.n_nodes)]
    fine = meshes[-1]
    src_f = [fine.resolve(s) for s in src_specs]
    tgt_f = np.array([fine.resolve(s) for s in tgt_specs])
    D = fine.distances_from(src_f)
    graph_diam = float(np.max(D))
    sub = D[:, tgt_f]
    si, ti = np.unravel_index(int(np.argmax(sub)), sub.shape)
    pair = (src_specs[si], tgt_specs[ti])
    vals = [distance(mm, pair[0], pair[1]) for mm in meshes]
    if len(depths) >= 2:
        est = extrapolate_linear(depths, vals)
    else:
        est = DistanceEstimate(((depths[0], vals[0]),), vals[0], float("inf"))
    names = {coarse.label_node(x): x for x in reversed(labels)}
    pretty = tuple(names.get(src_coarse[si], src_specs[si]) if k == 0 else s for k, s in enumerate(pair))
    if ti < coarse.n_nodes and ti in names:
        pretty = (pretty[0], names[ti])
    return DiameterEstimate(graph_diam, est.extrapolated, est.error_band, pretty, est, tuple(src_specs))


# -- ball growth ---------------------------------------------------------------


def _field(m: GeodesicMesh, v: PointSpec, r: float) -> np.ndarray:
    src = m.resolve(v)
    d = m.distances_from(src)[0]
    ecc = float(np.max(d))
    if not r > 0:
        raise ValidationError(f"radius {r} must be positive")
    if r >= 0.5 * ecc:
        raise ValidationError(f"radius {r} too large: must be below half the eccentricity {0.5 * ecc:.6g}")
    return d


def ball_area(m: GeodesicMesh, v: PointSpec, r: float, method: str = "interpolated") -> float:
    """Area of the ball of radius ``r`` around ``v`` in the graph distance field.

    ``method="corners"`` counts a cell fully when all three corners lie
    within ``r`` and by ``(corners inside)/3`` when only some do; its error
    is first order in the subdivision scale and oscillates with ``r``.
    ``method="interpolated"`` (default) clips each crossed cell along the
    same segment that :func:`boundary_length` uses, which converges at
    second order.
    """
    d = _field(m, v, r)
    cells = m.lattice.cells
    vals = d[m.node_of[:, cells]].reshape(-1, 3)
    inside = vals <= r
    cnt = inside.sum(axis=1)
    areas = m.cell_areas().reshape(-1)
    if method == "corners":
        return float(np.sum(cnt / 3.0 * areas))
    if method != "interpolated":
        raise ValidationError(f"unknown ball area method {method!r}")
    total = float(np.sum(areas[cnt == 3]))
    P = m.positions[:, cells].reshape(-1, 3, 3)
    for k, lone_inside in ((1, True), (2, False)):
        sel = cnt == k
        if not np.any(sel):
            continue
        vv, PP, ins = vals[sel], P[sel], inside[sel]
        # the corner on its own side of the level set
        lone = np.argmax(ins == lone_inside, axis=1)
        rows = np.arange(len(vv))
        a = lone
        b = (lone + 1) % 3
        c = (lone + 2) % 3
        pa, pb, pc = PP[rows, a], PP[rows, b], PP[rows, c]
        da, db, dc = vv[rows, a], vv[rows, b], vv[rows, c]
        x = _slerp(pa, pb, (r - da) / (db - da))
        y = _slerp(pa, pc, (r - da) / (dc - da))
        corner_piece = chart_triangle_area(pa, x, y)
        if lone_inside:
            total += float(np.sum(corner_piece))
        else:
            total += float(np.sum(areas[sel] - corner_piece))
    return total


def boundary_length(m: GeodesicMesh, v: PointSpec, r: float) -> float:
    """Length of the level set ``{distance = r}`` of the graph distance field.

    The field is interpolated linearly along cell edges; in each cell that
    the level set crosses, the two crossing points are joined by a chart
    geodesic.
    """
    d = _field(m, v, r)
    cells = m.lattice.cells
    vals = d[m.node_of[:, cells]].reshape(-1, 3)
    P = m.positions[:, cells].reshape(-1, 3, 3)
    inside = vals <= r
    cnt = inside.sum(axis=1)
    cross = (cnt == 1) | (cnt == 2)
    vals, P, inside = vals[cross], P[cross], inside[cross]
    pts = []
    for a, b in ((0, 1), (1, 2), (2, 0)):
        da, db = vals[:, a], vals[:, b]
        hit = inside[:, a] != inside[:, b]
        t = np.where(hit, (r - da) / np.where(hit, db - da, 1.0), 0.0)
        x = _slerp(P[:, a], P[:, b], t)
        pts.append((hit, x))
    # exactly two edges are hit per crossing cell
    hits = np.stack([h for h, _ in pts], axis=1)
    xs = np.stack([x for _, x in pts], axis=1)
    order = np.argsort(~hits, axis=1, kind="stable")[:, :2]
    rows = np.arange(len(xs))
    p0 = xs[rows, order[:, 0]]
    p1 = xs[rows, order[:, 1]]
    return float(np.sum(arc_length(p0, p1)))


def _slerp(p, q, t):
    omega = arc_length(p, q)
    t = np.asarray(t)[..., None]
    om = omega[..., None]
    so = np.sin(om)
    safe = so > 1e-15
    a = np.where(safe, np.sin((1 - t) * om) / np.where(safe, so, 1.0), 1 - t)
    b = np.where(safe, np.sin(t * om) / np.where(safe, so, 1.0), t)
    return a * p + b * q


@dataclass(frozen=True)
class GrowthTable:
    """Ball growth around a vertex with ``r -> 0`` extrapolation."""

    radii: tuple[float, ...]
    boundary_ratio: tuple[float, ...]  # L(r)/r
    area_ratio: tuple[float, ...]  # 2 A(r)/r^2
    boundary_limit: float
    boundary_band: float
    area_limit: float
    area_band: float

    def as_rows(self):
        return [
            {"r": r, "boundary_over_r": b, "two_area_over_r2": a}
            for r, b, a in zip(self.radii, self.boundary_ratio, self.area_ratio)
        ]


def extrapolate_to_zero(radii, values) -> tuple[float, float]:
    """Limit of ``values`` as ``r -> 0`` from an even polynomial fit.

    Ball growth around a point expands in even powers of ``r`` (for a
    spherical cone of angle ``theta``: ``theta*sin(r)/r`` and
    ``2*theta*(1 - cos r)/r^2``), so the fit uses ``1, r^2`` and, with four
    or more radii, ``r^4``.  The band is the worst residual plus the shift
    of the intercept when the largest radius is dropped.
    """
    r = np.asarray(radii, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(r) < 3:
        raise ValidationError("need at least three radii to extrapolate")
    order = np.argsort(r)
    r, y = r[order], y[order]

    def fit(rr, yy):
        deg = min(2, len(rr) - 2)
        A = np.column_stack([rr ** (2 * k) for k in range(deg + 1)])
        coef, *_ = np.linalg.lstsq(A, yy, rcond=None)
        return coef, float(np.max(np.abs(A @ coef - yy)))

    coef, resid = fit(r, y)
    alt, _ = fit(r[:-1], y[:-1])
    return float(coef[0]), resid + abs(float(coef[0]) - float(alt[0]))


def growth_table(
    m: GeodesicMesh, v: PointSpec, radii: Sequence[float], area_method: str = "interpolated"
) -> GrowthTable:
    radii = tuple(float(r) for r in radii)
    b = tuple(boundary_length(m, v, r) / r for r in radii)
    a = tuple(2.0 * ball_area(m, v, r, method=area_method) / (r * r) for r in radii)
    bl, bb = extrapolate_to_zero(radii, b)
    al, ab = extrapolate_to_zero(radii, a)
    return GrowthTable(radii, b, a, bl, bb, al, ab)


def growth_extrapolated(
    c: SurfaceComplex,
    v: PointSpec,
    radii: Sequence[float],
    depths: Sequence[int],
    area_method: str = "interpolated",
    max_nodes: int = MAX_NODES,
) -> GrowthTable:
    """Ball growth ratios extrapolated in both the mesh scale and ``r``.

    For each radius the two finest depths are combined assuming a
    second-order error, ``(4 q_fine - q_coarse) / 3``; the result is then
    extrapolated to ``r -> 0`` with :func:`extrapolate_to_zero`.  With a
    single depth no mesh extrapolation is done.
    """
    depths = [int(d) for d in depths]
    tables = [growth_table(refine(c, d, max_nodes=max_nodes), v, radii, area_method) for d in depths]
    if len(tables) == 1:
        return tables[0]
    fine, coarse = tables[-1], tables[-2]
    b = tuple((4 * f - q) / 3 for f, q in zip(fine.boundary_ratio, coarse.boundary_ratio))
    a = tuple((4 * f - q) / 3 for f, q in zip(fine.area_ratio, coarse.area_ratio))
    bl, bb = extrapolate_to_zero(fine.radii, b)
    al, ab = extrapolate_to_zero(fine.radii, a)
    # the mesh correction itself is part of the uncertainty
    bb += abs(bl - fine.boundary_limit) / 3
    ab += abs(al - fine.area_limit) / 3
    return GrowthTable(fine.radii, b, a, bl, bb, al, ab)
