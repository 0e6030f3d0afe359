import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spherecone import complex as cx
from spherecone import geodesics as geo
from spherecone.errors import ResourceError, ValidationError
from spherecone.sphtrig import arc_length


@pytest.fixture(scope="module")
def octahedron():
    return cx.build_octahedron()


@pytest.fixture(scope="module")
def oct_meshes(octahedron):
    return {d: geo.refine(octahedron, d) for d in (2, 3, 4)}


@pytest.fixture(scope="module")
def join10():
    return cx.build_join_double(10.0)


def test_depth_zero_octahedron(octahedron):
    m = geo.refine(octahedron, 0)
    assert m.n_nodes == 6
    assert m.n_arcs == 12
    assert np.allclose(m.graph.data, math.pi / 2, atol=1e-15)


def test_node_count_before_identification(join10):
    m = geo.refine(join10, 3)
    assert m.node_of.shape == (join10.n_triangles, 9 * 10 // 2)
    assert len(m.lattice.cells) == 4**3
    assert m.n_nodes < m.node_of.size


def _edge_run(m, t, start, stop):
    """Lattice nodes of triangle t walking from corner ``start`` to corner ``stop``."""
    n = m.n
    w = np.zeros((n + 1, 3), dtype=int)
    w[:, start] = n - np.arange(n + 1)
    w[:, stop] = np.arange(n + 1)
    loc = m.lattice.index[w[:, 0], w[:, 1]]
    pos = m.positions[t, loc]
    return m.node_of[t, loc], arc_length(pos[:-1], pos[1:])


def test_glued_edges_agree(join10):
    m = geo.refine(join10, 3)
    for (ti, ei), (tj, ej) in join10.gluings:
        # corner ei+1 of ti meets corner ej+2 of tj
        nodes_i, steps_i = _edge_run(m, ti, (ei + 1) % 3, (ei + 2) % 3)
        nodes_j, steps_j = _edge_run(m, tj, (ej + 2) % 3, (ej + 1) % 3)
        assert np.array_equal(nodes_i, nodes_j)
        assert np.allclose(steps_i, steps_j, atol=1e-12)


def test_arc_weights_are_chart_distances(octahedron):
    m = geo.refine(octahedron, 2)
    assert np.all(m.graph.data > 0)
    # arcs never exceed the longest coarse side
    assert np.max(m.graph.data) <= math.pi / 2 + 1e-12


def test_antipodes_extrapolate_to_pi(octahedron):
    est = geo.distance_extrapolated(octahedron, "z+", "z-", (2, 3, 4))
    assert est.extrapolated == pytest.approx(math.pi, abs=1e-3)
    assert est.extrapolated <= min(v for _, v in est.values_by_depth)
    assert est.error_band >= 0


def test_apex_to_equator_is_quarter_circle(join10):
    est = geo.distance_extrapolated(join10, "p", (0, (0.0, 0.5, 0.5)), (2, 3, 4))
    assert est.extrapolated == pytest.approx(math.pi / 2, abs=1e-3)


def test_constant_sequence_band():
    est = geo.extrapolate_linear([2, 3, 4], [1.5, 1.5, 1.5])
    assert est.extrapolated == pytest.approx(1.5, abs=1e-15)
    assert est.error_band == pytest.approx(est.fit_residual, abs=1e-15)


@pytest.mark.parametrize("depths", [(3, 2, 4), (2, 3), (2, 2, 3)])
def test_bad_depth_sequences(octahedron, depths):
    with pytest.raises(ValidationError):
        geo.distance_extrapolated(octahedron, "z+", "z-", depths)


def test_refine_limits(octahedron):
    with pytest.raises(ResourceError):
        geo.refine(octahedron, 4, max_nodes=100)
    with pytest.raises(ValidationError):
        geo.refine(octahedron, 9)
    with pytest.raises(ValidationError):
        geo.refine(octahedron, 2).label_node("north")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_distance_symmetric_and_monotone(oct_meshes, a, b):
    coarse = oct_meshes[2]
    pa, pb = coarse.node_location(a % coarse.n_nodes), coarse.node_location(b % coarse.n_nodes)
    vals = []
    for d in (2, 3, 4):
        m = oct_meshes[d]
        assert geo.distance(m, pa, pb) == geo.distance(m, pb, pa)
        vals.append(geo.distance(m, pa, pb))
    assert vals[1] <= vals[0] + 1e-12
    assert vals[2] <= vals[1] + 1e-12


def test_distance_is_upper_bound(oct_meshes):
    m = oct_meshes[3]
    d = geo.distance(m, "x+", "y+")
    assert d >= math.pi / 2 - 1e-15


@pytest.mark.parametrize(
    "c, expected",
    [(cx.build_octahedron(), math.pi), (cx.build_join_double(math.pi), math.pi)],
    ids=["octahedron", "join-double-pi"],
)
def test_round_sphere_diameters(c, expected):
    est = geo.diameter_estimate(c, (3, 4, 5))
    assert est.extrapolated_diameter == pytest.approx(expected, abs=5e-3)
    assert est.graph_diameter >= est.extrapolated_diameter - 1e-12


def test_diameter_sources_include_labels(octahedron):
    est = geo.diameter_estimate(octahedron, (2, 3, 4), sample_count=8)
    assert len(est.sources) == 8
    with pytest.raises(ValidationError):
        geo.diameter_estimate(octahedron, (2, 3, 4), sample_count=3)


@pytest.mark.parametrize("method", ["interpolated", "corners"])
def test_cap_area_and_length(octahedron, method):
    m = geo.refine(octahedron, 5)
    r = 0.3
    assert geo.ball_area(m, "z+", r, method=method) == pytest.approx(2 * math.pi * (1 - math.cos(r)), rel=2e-2)
    assert geo.boundary_length(m, "z+", r) == pytest.approx(2 * math.pi * math.sin(r), rel=2e-2)


def test_interpolated_area_converges_monotonically(octahedron):
    cap = 2 * math.pi * (1 - math.cos(0.3))
    errs = [abs(geo.ball_area(geo.refine(octahedron, d), "z+", 0.3) / cap - 1) for d in (3, 4, 5)]
    assert errs[0] > errs[1] > errs[2]


def test_cone_tip_growth(join10):
    m = geo.refine(join10, 4)
    r = 0.3
    assert geo.ball_area(m, "p", r) == pytest.approx(10 * (1 - math.cos(r)) * 2, rel=2e-2)
    assert geo.boundary_length(m, "p", r) == pytest.approx(20 * math.sin(r), rel=2e-2)


def test_ball_shrinks_to_nothing(oct_meshes):
    m = oct_meshes[3]
    areas = [geo.ball_area(m, "z+", r) for r in (0.4, 0.2, 0.1, 1e-6)]
    assert areas == sorted(areas, reverse=True)
    assert areas[-1] < 1e-10


def test_radius_too_large(oct_meshes):
    with pytest.raises(ValidationError):
        geo.ball_area(oct_meshes[2], "z+", 2.0)
    with pytest.raises(ValidationError):
        geo.boundary_length(oct_meshes[2], "z+", 2.0)


@pytest.mark.parametrize("theta", [math.pi, 2 * math.pi, 20.0])
def test_extrapolate_to_zero_on_exact_cone(theta):
    r = np.linspace(0.1, 0.7, 6)
    limit, band = geo.extrapolate_to_zero(r, theta * np.sin(r) / r)
    assert limit == pytest.approx(theta, rel=1e-6)
    assert band < 1e-4 * theta
    limit, _ = geo.extrapolate_to_zero(r, 2 * theta * (1 - np.cos(r)) / r**2)
    assert limit == pytest.approx(theta, rel=1e-6)
