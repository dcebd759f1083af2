from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppchaos import geodesy
from fppchaos.distributions import PRESETS, atomic, shifted_exponential, uniform
from fppchaos.field import DynamicalField, Edge, Region, WeightConfig
from fppchaos.oracle import box_paths

HALVES = atomic({1: 0.5, 2: 0.5})


def square(direct: float, detour: float = 1.0) -> WeightConfig:
    """Unit square from (0,0) to (1,0); edge 0 is the direct edge."""
    reg = Region.box((2, 2), target=(1, 0))
    direct_id = reg.edge_id(Edge((0, 0), 0))
    w = np.full(reg.n_edges, float(detour))
    w[direct_id] = direct
    return WeightConfig(reg, w, float(direct).is_integer() and float(detour).is_integer())


def brute_force(config: WeightConfig):
    """``T`` and ``pi`` from every simple origin-target path."""
    P = box_paths(config.region)
    lengths = P @ config.weights
    T = lengths.min()
    tight = P[np.abs(lengths - T) <= 1e-12 * max(1.0, T)]
    return T, np.nonzero(np.all(tight > 0, axis=0))[0], tight


def random_config(seed: int, shape=(3, 3), dist=HALVES, target=None) -> WeightConfig:
    f = DynamicalField(seed, dist, Region.box(shape, target=target))
    return f.config_slice(0.0)


# -- shortest_path examples ----------------------------------------------------


def test_unit_weights_give_l1_distance():
    reg = Region.around((3, 0), padding=2)
    T, path, _ = geodesy.shortest_path(WeightConfig.constant(reg, 1))
    assert T == 3 and len(path) == 3


@pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
def test_constant_weights_scale(c):
    reg = Region.around((4, 3), padding=2)
    T, path, _ = geodesy.shortest_path(WeightConfig.constant(reg, c))
    assert T == pytest.approx(c * 7, rel=1e-15)


def test_detour_beats_heavy_direct_edge():
    reg = Region.box((3, 2), target=(1, 0))
    w = np.ones(reg.n_edges)
    w[reg.edge_id(Edge((0, 0), 0))] = 5
    cfg = WeightConfig(reg, w, True)
    T, path, _ = geodesy.shortest_path(cfg)
    assert T == 3 and len(path) == 3
    assert T == brute_force(cfg)[0]


def test_witness_path_is_a_connected_walk():
    cfg = random_config(5, shape=(6, 5), dist=uniform(0, 1))
    res = geodesy.geodesic(cfg)
    reg = cfg.region
    verts = res.path_vertices
    assert verts[0] == reg.vertex_index(reg.origin) and verts[-1] == reg.vertex_index(reg.target)
    for a, b, e in zip(verts, verts[1:], res.witness_path):
        assert reg.edge_between(int(a), int(b)) == e


def test_tie_break_is_lexicographic():
    # all staircases tie; the smallest predecessor rule prefers the lower row first
    reg = Region.box((3, 3))
    res = geodesy.geodesic(WeightConfig.constant(reg, 1))
    coords = [tuple(c) for c in reg.vertex_coords(res.path_vertices)]
    assert coords == [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)] or coords == [
        (0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]
    again = geodesy.geodesic(WeightConfig.constant(reg, 1))
    np.testing.assert_array_equal(res.witness_path, again.witness_path)


def test_endpoint_errors():
    cfg = WeightConfig.constant(Region.box((3, 3)), 1)
    with pytest.raises(ValueError):
        geodesy.shortest_path(cfg, (0, 0), (5, 5))


def test_boundary_flag():
    reg = Region.around((4, 0), padding=1)
    w = np.full(reg.n_edges, 10.0)
    # cheap lane along the lowest row forces the geodesic onto the boundary
    for x in range(-1, 5):
        for e in (Edge((x, -1), 0),):
            w[reg.edge_id(e)] = 0.01
    w[reg.edge_id(Edge((0, -1), 1))] = 0.01
    w[reg.edge_id(Edge((4, -1), 1))] = 0.01
    _, _, touched = geodesy.shortest_path(WeightConfig(reg, w))
    assert touched
    _, _, touched = geodesy.shortest_path(WeightConfig.constant(Region.around((4, 0), 3), 1))
    assert not touched


# -- replacement values ------------------------------------------------------------


def test_replacement_values_unit_square():
    cfg = square(1)
    reg = cfg.region
    rv = geodesy.replacement_values(cfg, Edge((0, 0), 0))
    assert (rv.A, rv.B) == (3, 0)
    rv = geodesy.replacement_values(cfg, reg.edge_id(Edge.between((0, 1), (1, 1))))
    assert (rv.A, rv.B) == (1, 2)


def test_replacement_values_reject_bad_edge():
    with pytest.raises(ValueError):
        geodesy.replacement_values(square(1), 99)


@pytest.mark.parametrize("dist", [HALVES, uniform(0, 1), shifted_exponential(1.0),
                                  atomic({0: 0.3, 1: 0.7})], ids=lambda d: d.spec)
def test_bulk_replacement_matches_per_edge_deletion(dist):
    for seed in range(15):
        cfg = DynamicalField(seed, dist, Region.around((5, 2), padding=2)).config_slice(0.3)
        an = geodesy.analyze(cfg)
        A, B = geodesy.replacement_table_naive(cfg)
        np.testing.assert_allclose(an.A, A, rtol=1e-12, atol=0)
        # bulk B may differ where B + w >= T; the identity is what matters
        w = cfg.weights
        np.testing.assert_allclose(np.minimum(an.A, an.B + w), an.T, rtol=1e-12)
        near = B + w < an.T * (1 + 1e-9)
        np.testing.assert_allclose(an.B[near], B[near], rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), x=st.sampled_from([0.0, 1.0, 2.0, 3.0, 7.0]),
       eid=st.integers(0, 11))
def test_replacement_identity_integer(seed, x, eid):
    cfg = random_config(seed)
    rv = geodesy.replacement_values(cfg, eid)
    T_x, _, _ = geodesy.shortest_path(cfg.replaced(eid, x))
    assert T_x == min(rv.A, rv.B + x)
    assert rv.A >= geodesy.passage_time(cfg) and rv.B + cfg.weights[eid] >= geodesy.passage_time(cfg)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), x=st.floats(0, 3), eid=st.integers(0, 23))
def test_replacement_identity_continuous(seed, x, eid):
    cfg = random_config(seed, shape=(4, 4), dist=uniform(0, 1))
    an = geodesy.analyze(cfg)
    T_x, _, _ = geodesy.shortest_path(cfg.replaced(eid, x))
    assert T_x == pytest.approx(min(an.A[eid], an.B[eid] + x), rel=1e-12)


# -- geodesic intersection -------------------------------------------------------


def test_pi_unique_direct_edge():
    cfg = square(1)
    res = geodesy.geodesic(cfg)
    assert res.T == 1
    assert res.pi_edges() == {Edge((0, 0), 0)}


def test_pi_empty_with_two_geodesics():
    cfg = square(3)
    res = geodesy.geodesic(cfg)
    assert res.T == 3 and len(res.pi) == 0
    assert len(geodesy.enumerate_all_geodesics(cfg)) == 2


def test_pi_straight_segment_on_unit_weights():
    # 5x5 box around the segment; the straight path is the only geodesic
    reg = Region((-1, -2), (3, 2), (0, 0), (2, 0))
    assert reg.n_edges == 40
    cfg = WeightConfig.constant(reg, 1)
    res = geodesy.geodesic(cfg)
    paths = geodesy.enumerate_all_geodesics(cfg)
    assert len(paths) == 1
    assert res.pi_edges() == {Edge((0, 0), 0), Edge((1, 0), 0)}
    _, pi_bf, _ = brute_force(cfg)
    assert set(pi_bf.tolist()) == set(res.pi.tolist())


def test_enumeration_examples():
    cfg = square(1)
    paths = geodesy.enumerate_all_geodesics(cfg)
    assert paths == [geodesy.geodesic(cfg).witness_path.tolist()]
    reg = Region.box((2, 2))
    assert len(geodesy.enumerate_all_geodesics(WeightConfig.constant(reg, 1))) == 2
    with pytest.raises(geodesy.RegionTooLarge):
        geodesy.enumerate_all_geodesics(WeightConfig.constant(Region.box((5, 6)), 1))


@pytest.mark.parametrize("dist", [HALVES, atomic({0: 0.3, 1: 0.7}), atomic({1: 0.2, 2: 0.5, 4: 0.3}),
                                  uniform(0, 1)], ids=lambda d: d.spec)
def test_pi_matches_brute_force(dist):
    for seed in range(25):
        shape = [(3, 3), (3, 4), (4, 3), (2, 5)][seed % 4]
        cfg = random_config(seed, shape=shape, dist=dist)
        res = geodesy.geodesic(cfg)
        T_bf, pi_bf, tight = brute_force(cfg)
        assert res.T == pytest.approx(T_bf, rel=1e-12)
        np.testing.assert_array_equal(res.pi, pi_bf)
        enum = geodesy.enumerate_all_geodesics(cfg)
        assert sorted(map(sorted, enum)) == sorted(sorted(np.nonzero(r)[0].tolist()) for r in tight)


@pytest.mark.parametrize("dist", [HALVES, uniform(0, 1), shifted_exponential(1.0)], ids=lambda d: d.spec)
def test_result_invariants(dist):
    for seed in range(20):
        cfg = DynamicalField(seed, dist, Region.around((6, 3), padding=3)).config_slice(0.5)
        res = geodesy.geodesic(cfg)
        assert cfg.path_weight(res.witness_path) == pytest.approx(res.T, rel=1e-12)
        assert set(res.pi.tolist()) <= set(res.witness_path.tolist())
        assert res.T >= dist.r * len(res.witness_path) - 1e-12
        if dist.is_integer_atomic:
            assert cfg.path_weight(res.witness_path) == res.T


def test_integer_sums_are_exact():
    cfg = random_config(3, shape=(6, 6))
    T, path, _ = geodesy.shortest_path(cfg)
    assert T == int(T) == int(sum(int(w) for w in cfg.weights[path]))


def test_monotone_in_each_weight():
    rs = np.random.default_rng(0)
    dist = uniform(0, 1)
    cfg0 = DynamicalField(1, dist, Region.around((5, 0), padding=3)).config_slice(0.0)
    T0 = geodesy.passage_time(cfg0)
    for _ in range(1000):
        e = int(rs.integers(cfg0.region.n_edges))
        up = cfg0.replaced(e, cfg0.weights[e] + float(rs.exponential()))
        assert geodesy.passage_time(up) >= T0


def test_zero_weight_atoms():
    dist = atomic({0: 0.3, 1: 0.7})
    for seed in range(30):
        cfg = DynamicalField(seed, dist, Region.around((4, 1), padding=2)).config_slice(0.0)
        an = geodesy.analyze(cfg)
        assert cfg.path_weight(an.result.witness_path) == an.T
        A, _ = geodesy.replacement_table_naive(cfg)
        np.testing.assert_array_equal(an.A, A)


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_geodesic_length_is_linear(preset):
    dist = PRESETS[preset]
    ratios = []
    for n in (16, 32, 64, 128):
        lengths = [len(geodesy.shortest_path(DynamicalField(s, dist, Region.around((n, 0)))
                                             .config_slice(0.0))[1]) for s in range(12)]
        ratios.append(np.mean(lengths) / n)
    assert all(0.9 <= r <= 3.0 for r in ratios), ratios
