import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vaoi_ring.core import SystemParams, make_streams
from vaoi_ring.network import (
    BinomialShift,
    avg_vaoi_node,
    network_avg_approx,
    network_avg_exact,
    network_constant,
    node_indices,
    node_vaoi_from_cs,
    per_node_averages,
    relative_error,
    shifted_time_average,
    write_nodes_csv,
)


def literal_network_average(cs, N, pg):
    """Double sum over nodes and slots, pre-history cs[t < 0] = cs[0]."""
    T = len(cs)
    total = 0.0
    for n in range(-N // 2, N // 2 + 1):
        node = 0.0
        for t in range(T):
            node += abs(n) * pg + cs[max(t - abs(n), 0)]
        total += node / T
    return total / (N + 1)


@pytest.mark.parametrize(
    "N, pg, expected",
    [(64, 0.3, 4224 / 260 * 0.3), (0, 0.3, 0.0), (2, 0.5, 1 / 3)],
)
def test_network_constant(N, pg, expected):
    assert network_constant(SystemParams(n_ring_nodes_minus_one=N, p_generate=pg)) == pytest.approx(expected, abs=1e-12)


def test_network_constant_is_mean_hop_distance_times_pg():
    for N in range(0, 40, 2):
        p = SystemParams(n_ring_nodes_minus_one=N, p_generate=0.7)
        mean_hops = sum(abs(n) for n in node_indices(p)) / (N + 1)
        assert network_constant(p) == pytest.approx(mean_hops * 0.7, abs=1e-12)


def test_paper_constant_value():
    assert network_constant(SystemParams()) == pytest.approx(4.873846153846154, abs=1e-12)


def test_exact_matches_literal_double_sum():
    rng = np.random.default_rng(3)
    cs = rng.integers(0, 9, size=40)
    p = SystemParams(n_ring_nodes_minus_one=4, p_generate=0.3)
    assert network_avg_exact(cs, p) == pytest.approx(literal_network_average(cs, 4, 0.3), abs=1e-12)
    assert network_avg_exact(cs.astype(float), p) == pytest.approx(literal_network_average(cs, 4, 0.3), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    cs=st.lists(st.integers(0, 30), min_size=1, max_size=60),
    half=st.integers(0, 8),
    pg=st.floats(0, 1),
)
def test_exact_matches_literal_property(cs, half, pg):
    p = SystemParams(n_ring_nodes_minus_one=2 * half, p_generate=pg)
    assert network_avg_exact(np.array(cs), p) == pytest.approx(literal_network_average(cs, 2 * half, pg), abs=1e-9)


def test_exact_on_batches_matches_rows():
    rng = np.random.default_rng(4)
    cs = rng.integers(0, 9, size=(5, 30))
    p = SystemParams(n_ring_nodes_minus_one=6)
    batch = network_avg_exact(cs, p)
    assert np.allclose(batch, [network_avg_exact(row, p) for row in cs], atol=1e-12)


def test_exact_with_single_satellite_is_time_average():
    cs = np.array([3, 1, 4, 1, 5])
    assert network_avg_exact(cs, SystemParams(n_ring_nodes_minus_one=0)) == pytest.approx(2.8)


def test_constant_trace():
    p = SystemParams()
    cs = np.full(500, 7)
    assert network_avg_exact(cs, p) == pytest.approx(network_constant(p) + 7, abs=1e-9)
    assert network_avg_approx(7.0, p) == pytest.approx(network_constant(p) + 7, abs=1e-12)


def test_approx_examples():
    p = SystemParams()
    assert network_avg_approx(0.0, p) == pytest.approx(4.873846153846154)
    assert network_avg_approx(2.5, SystemParams(n_ring_nodes_minus_one=0)) == 2.5


def test_shifted_time_average_uses_warm_start():
    cs = np.array([2, 4, 6, 8])
    assert shifted_time_average(cs, 0) == 5.0
    assert shifted_time_average(cs, 1) == (2 + 2 + 4 + 6) / 4
    assert shifted_time_average(cs, 10) == 2.0


def test_compensated_float_sum():
    cs = np.array([1e16, 1.0, -1e16, 1.0] * 5)
    assert shifted_time_average(cs, 0) == pytest.approx(10 / 20)


def test_avg_vaoi_node():
    p = SystemParams()
    assert avg_vaoi_node(3.0, 0, p) == 3.0
    assert avg_vaoi_node(3.0, -32, p) == pytest.approx(3.0 + 9.6)
    assert avg_vaoi_node(3.0, 32, p.replace(p_generate=0.0)) == 3.0
    with pytest.raises(ValueError):
        avg_vaoi_node(3.0, 33, p)


def test_node_vaoi_zero_hops_unchanged():
    cs = np.array([0, 1, 1, 0, 2])
    inc = np.array([0, 1, 0, 0, 1])
    assert np.array_equal(node_vaoi_from_cs(cs, 0, inc), cs)


def test_node_vaoi_without_new_versions_is_shifted_cs():
    cs = np.array([0, 1, 2, 0, 1, 0])
    out = node_vaoi_from_cs(cs, -3, np.zeros(6, dtype=int))
    assert out.tolist() == [0, 0, 0, 0, 1, 2]


def test_node_vaoi_two_recent_versions():
    cs = np.array([1, 2, 3, 4, 5, 6])
    inc = np.array([0, 0, 0, 0, 1, 1])
    out = node_vaoi_from_cs(cs, 2, inc)
    assert out[5] == cs[3] + 2


@settings(max_examples=60, deadline=None)
@given(data=st.data(), T=st.integers(1, 50), hops=st.integers(0, 10))
def test_node_vaoi_from_version_counters(data, T, hops):
    """Reconstruction equals V_S(t) - V_0(t - |n|) for any consistent counters."""
    inc = np.array(data.draw(st.lists(st.integers(0, 1), min_size=T, max_size=T)))
    inc[0] = 0
    v_src = np.cumsum(inc) + data.draw(st.integers(0, 5))
    # any non-decreasing CS counter that never overtakes the source
    lag = data.draw(st.lists(st.integers(0, 3), min_size=T, max_size=T))
    v_cs = np.minimum.accumulate((v_src - np.array(lag))[::-1])[::-1]
    cs = v_src - v_cs
    for n in (hops, -hops):
        expected = v_src - v_cs[np.maximum(np.arange(T) - hops, 0)]
        assert np.array_equal(node_vaoi_from_cs(cs, n, inc), expected)


def test_binomial_shift():
    z = BinomialShift(5, 0.3)
    assert z.mean == pytest.approx(1.5)
    assert list(z.support) == [0, 1, 2, 3, 4, 5]
    assert math.fsum(z.pmf(k) for k in z.support) == pytest.approx(1.0)
    assert math.fsum(k * z.pmf(k) for k in z.support) == pytest.approx(z.mean)
    assert z.pmf(6) == 0.0


@pytest.mark.parametrize("m", [1, 4, 16, 32])
def test_version_count_estimator_within_three_se(m):
    pg, n = 0.3, 10**5
    z = make_streams(99, m).version.random(n + m) < pg
    window = np.convolve(z, np.ones(m, dtype=int), mode="valid")[:n]
    # windows overlap; SE from non-overlapping blocks of width m
    blocks = window[::m]
    se = blocks.std(ddof=1) / math.sqrt(blocks.size)
    assert abs(window.mean() - m * pg) < 3 * se


def test_per_node_rows_symmetric_and_csv(tmp_path):
    p = SystemParams(n_ring_nodes_minus_one=6, p_generate=0.2)
    cs = np.random.default_rng(0).integers(0, 5, size=(3, 40))
    rows = per_node_averages(cs, p)
    assert [r[0] for r in rows] == list(range(-3, 4))
    by_n = {n: (e, a) for n, e, a in rows}
    for n in range(1, 4):
        assert by_n[n] == by_n[-n]
    mean_exact = np.mean([e for _, e, _ in rows])
    assert mean_exact == pytest.approx(np.mean(network_avg_exact(cs, p)))
    write_nodes_csv(tmp_path / "nodes.csv", rows)
    with open(tmp_path / "nodes.csv") as fh:
        assert next(csv.reader(fh)) == ["n", "avg_vaoi_exact", "avg_vaoi_approx"]


def test_relative_error():
    assert relative_error(10.0, 9.0) == pytest.approx(0.1)
