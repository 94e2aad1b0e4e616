import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vaoi_ring.core import ParamError, State, SystemParams, make_streams
from vaoi_ring.policies import (
    PolicyTable,
    act,
    from_actions,
    greedy_policy,
    idle_policy,
    read_policy_csv,
    rs_policy,
    write_policy_csv,
)

P = SystemParams(battery_capacity=20, vaoi_cap=30)


def test_greedy_entries():
    g = greedy_policy(P)
    assert g[State(0, 10)] == 0
    assert g[State(1, 0)] == 1
    assert g[State(20, 30)] == 1
    assert g.deterministic


def test_rs_entries():
    assert rs_policy(P, 0.3)[State(5, 2)] == 0.3
    assert rs_policy(P, 0.3)[State(0, 2)] == 0.0
    assert not rs_policy(P, 0.3).deterministic
    assert rs_policy(P, 0.0) == idle_policy(P)
    assert np.all(rs_policy(P, 0.0).transmit_probability == 0)


def test_rs_one_is_greedy():
    assert rs_policy(P, 1.0) == greedy_policy(P)


@pytest.mark.parametrize("alpha", [-0.1, 1.01])
def test_rs_rejects_alpha(alpha):
    with pytest.raises(ParamError):
        rs_policy(P, alpha)


def test_table_validation():
    with pytest.raises(ParamError):
        PolicyTable(P, np.zeros((3, 3)))
    with pytest.raises(ParamError):
        PolicyTable(P, np.full((21, 31), 2.0))
    t = PolicyTable(P, np.ones((21, 31)))
    assert np.all(t.transmit_probability[0] == 0)
    with pytest.raises(ValueError):
        t.transmit_probability[1, 1] = 0.5


def test_act_deterministic():
    table = np.zeros((21, 31))
    table[3, 7] = 1
    policy = from_actions(P, table)
    s = make_streams(0)
    assert act(policy, State(3, 7), s) == 1
    assert act(policy, State(3, 6), s) == 0


def test_act_fraction():
    policy = rs_policy(P, 0.5)
    s = make_streams(4)
    n = 10**5
    frac = sum(act(policy, State(4, 4), s) for _ in range(n)) / n
    assert abs(frac - 0.5) < 0.01


@settings(max_examples=50, deadline=None)
@given(
    table=st.lists(st.floats(0, 1), min_size=6 * 5, max_size=6 * 5),
    vaoi=st.integers(0, 4),
    seed=st.integers(0, 1000),
)
def test_act_never_transmits_on_empty_battery(table, vaoi, seed):
    p = SystemParams(battery_capacity=5, vaoi_cap=4)
    raw = np.array(table).reshape(6, 5)
    raw[0] = 1.0
    policy = PolicyTable(p, raw)
    s = make_streams(seed)
    assert all(act(policy, State(0, vaoi), s) == 0 for _ in range(20))


def test_act_consumes_one_draw_per_call():
    s1, s2 = make_streams(8), make_streams(8)
    act(greedy_policy(P), State(0, 0), s1)
    s2.policy.random()
    assert s1.policy.random() == s2.policy.random()


def test_act_rejects_state_outside_space():
    with pytest.raises(ParamError):
        act(greedy_policy(P), State(21, 0), make_streams(0))


@pytest.mark.parametrize("policy", [greedy_policy(P), rs_policy(P, 0.3)])
def test_csv_round_trip(tmp_path, policy):
    path = tmp_path / "policy.csv"
    write_policy_csv(path, policy)
    header = path.read_text().splitlines()[0]
    assert header == ("b,delta,action" if policy.deterministic else "b,delta,action,probability")
    assert read_policy_csv(path, P) == policy
