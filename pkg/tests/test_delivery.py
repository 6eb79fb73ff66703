import io
import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtcc.analytics import finite_delay
from mtcc.channel import DegenerateChannel, LinearNetwork, sample_network
from mtcc.content import SystemConfig, build_piece_table, distinct_demands
from mtcc.delivery import (
    Block,
    TransmissionSchedule,
    block_size,
    coding_delay_of_schedule,
    design_zf_vector,
    dump_schedule,
    plan_delivery,
    schedule_delivery,
    schedule_tdma,
)
from mtcc.gf import field
from mtcc.placement import place_centralized, place_decentralized, place_hybrid

from oracles import single_transmitter_delay

F16 = field(16)


def table_for(K, N, M, F, seed, users=None, placement=place_decentralized):
    c = SystemConfig(K=K, L=1, N=N, M=M, F=F)
    cache = placement(c, seed) if placement is not place_centralized else placement(c)
    return build_piece_table(cache, distinct_demands(K), users), cache


def test_block_size():
    assert block_size(4, 1, 2) == (2, 1, 1)
    assert block_size(4, 2, 2) == (3, 2, 2)
    assert block_size(4, 3, 1) == (3, 1, 3)
    assert block_size(4, 5, 3) == (4, 3, 1)  # full multicast regime


# -- zero forcing ----------------------------------------------------------


def test_zf_without_constraints_is_first_basis_vector():
    net = sample_network(3, 1, F16, 0)
    psi = design_zf_vector(net, (0, 1), (0, 1))
    assert psi.tolist() == [1]


def test_zf_nulls_the_excluded_user():
    net = sample_network(3, 2, F16, 1)
    psi = design_zf_vector(net, (0, 1, 2), (0, 2))
    assert F16.dot(net.H[1], psi) == 0
    assert F16.dot(net.H[0], psi) != 0 and F16.dot(net.H[2], psi) != 0


def test_zf_too_many_constraints():
    net = sample_network(3, 2, F16, 1)
    with pytest.raises(ValueError):
        design_zf_vector(net, (0, 1, 2), (0,))


def test_zf_degenerate_channel_detected():
    # user 1's row is a multiple of user 0's: nulling user 0 also silences user 1
    H = np.array([[1, 2], [3, int(F16.mul(3, 2))], [5, 7]])
    net = LinearNetwork(H, F16)
    with pytest.raises(DegenerateChannel):
        design_zf_vector(net, (0, 1, 2), (1, 2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_zf_orthogonality(L, seed):
    K = L + 2
    net = sample_network(K, L, F16, seed)
    rng = np.random.default_rng(seed)
    T = tuple(sorted(rng.choice(K, size=L + 1, replace=False).tolist()))
    U = T[:2]
    try:
        psi = design_zf_vector(net, T, U)
    except DegenerateChannel:
        return
    for k in T:
        assert (F16.dot(net.H[k], psi) == 0) == (k not in U)


# -- schedule structure ------------------------------------------------------


def test_full_cache_empty_schedule():
    table, _ = table_for(3, 3, 3, 20, 0)
    s = schedule_delivery(table, None, L=2)
    assert s.blocks == () and s.total_slots == 0
    assert coding_delay_of_schedule(s).coding_delay_slots == 0


def test_no_cache_zero_forcing_to_everyone():
    table, _ = table_for(2, 2, 0, 100, 0)
    s = schedule_delivery(table, None, L=2)
    assert s.total_slots == 100
    assert [(b.alpha, b.users, b.omega) for b in s.blocks] == [(1, (0, 1), 1)]


def test_no_cache_more_users_than_transmitters():
    table, _ = table_for(5, 5, 0, 30, 0)
    assert schedule_delivery(table, None, L=1).total_slots == 150
    assert schedule_delivery(table, None, L=5).total_slots == 30
    assert schedule_delivery(table, None, L=6).total_slots == 30


def test_delay_report_arithmetic():
    b = Block(alpha=2, users=(0, 1, 2), omega=3, n_split=1, length=7, groups=())
    s = TransmissionSchedule((b,), 2, 0, {})
    rep = coding_delay_of_schedule(s, resample_events=4)
    assert rep.coding_delay_slots == 21
    assert rep.block_lengths == {(2, (0, 1, 2)): 7}
    assert rep.resample_events == 4


def test_blocks_ordered_and_sized():
    table, _ = table_for(4, 4, 2, 64, 3)
    for L in (1, 2, 3):
        blocks = plan_delivery(table, L)
        alphas = [b.alpha for b in blocks]
        assert alphas == sorted(alphas, reverse=True)
        for b in blocks:
            size, omega, n_split = block_size(4, L, b.alpha)
            assert len(b.users) == size and b.omega == omega and b.n_split == n_split
            assert len(b.groups) == comb(size, b.alpha)
        for a in set(alphas):
            Ts = [b.users for b in blocks if b.alpha == a]
            assert Ts == sorted(Ts)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 4), st.integers(1, 64), st.integers(0, 10**6))
def test_minifiles_partition_every_piece(K, L, m, F, seed):
    table, _ = table_for(K, 4, m, F, seed)
    blocks = plan_delivery(table, L)
    seen = {key: [] for key in table.pieces}
    for b in blocks:
        for g in b.groups:
            assert set(g.members) <= set(b.users)
            for r, mf in zip(g.members, g.minifiles):
                if mf is None:
                    continue
                assert mf.requester == r and r not in mf.cached_by
                assert len(mf.symbols) <= b.length
                seen[(r, mf.cached_by)].append(mf.symbols)
    for key, idx in table.pieces.items():
        got = np.sort(np.concatenate(seen[key]))
        assert np.array_equal(got, idx)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 4), st.integers(1, 64), st.integers(0, 10**6))
def test_counting_identity(K, L, m, F, seed):
    table, _ = table_for(K, 4, m, F, seed)
    assert schedule_delivery(table, None, L=L).total_slots == finite_delay(table, L)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 4), st.integers(1, 64), st.integers(0, 10**6))
def test_single_transmitter_matches_oracle(K, m, F, seed):
    table, cache = table_for(K, 4, m, F, seed)
    assert schedule_delivery(table, None, L=1).total_slots == single_transmitter_delay(cache.cached, distinct_demands(K))


def test_large_file_delay_near_limit():
    c = SystemConfig(K=3, L=2, N=3, M=1, F=100_000)
    table = build_piece_table(place_decentralized(c, 0), distinct_demands(3))
    assert abs(schedule_delivery(table, None, L=2).total_slots / c.F - 22 / 27) < 0.05 * 22 / 27


def test_delay_nonincreasing_in_cache_size():
    means = []
    for M in (0, 1, 2, 3, 4):
        c = SystemConfig(K=4, L=2, N=4, M=M, F=2000)
        d = [schedule_delivery(build_piece_table(place_decentralized(c, s), distinct_demands(4)), None, L=2).total_slots
             for s in range(20)]
        means.append((np.mean(d), np.std(d, ddof=1) / np.sqrt(len(d))))
    for (m0, s0), (m1, s1) in zip(means, means[1:]):
        assert m1 <= m0 + 3 * np.hypot(s0, s1)


def test_delay_nonincreasing_in_transmitters_large_files():
    # at small F, padding short fragments can outweigh the multiplexing gain
    c = SystemConfig(K=4, L=1, N=4, M=2, F=20_000)
    tables = [build_piece_table(place_decentralized(c, s), distinct_demands(4)) for s in range(10)]
    stats = []
    for L in (1, 2, 3, 4, 5):
        d = [schedule_delivery(t, None, L=L).total_slots for t in tables]
        stats.append((np.mean(d), np.std(d, ddof=1) / np.sqrt(len(d))))
    for (m0, s0), (m1, s1) in zip(stats, stats[1:]):
        assert m1 <= m0 + 3 * np.hypot(s0, s1)


def test_centralized_delay_exact_when_divisible():
    # K=4, t=2, L=1: C(4,2)=6 labels, F=60 -> 10 symbols per subfile
    table, _ = table_for(4, 4, 2, 60, 0, placement=place_centralized)
    assert schedule_delivery(table, None, L=1).total_slots == 4 * 30 / 3


# -- tdma --------------------------------------------------------------------


def dumped(schedule):
    buf = io.StringIO()
    dump_schedule(schedule, buf)
    return buf.getvalue()


def test_tdma_with_empty_group_matches_joint():
    c = SystemConfig(K=4, L=2, N=4, M=2, F=40)
    cache = place_hybrid(c, 0, 5)
    full = build_piece_table(cache, distinct_demands(4))
    none = build_piece_table(cache, distinct_demands(4), users=[])
    joint = schedule_delivery(full, None, L=2)
    assert dumped(schedule_tdma(none, full, None, L=2)) == dumped(joint)
    assert dumped(schedule_tdma(full, none, None, L=2)) == dumped(joint)


def test_tdma_is_sum_of_groups():
    c = SystemConfig(K=8, L=1, N=8, M=4, F=1000)
    cache = place_hybrid(c, 4, 2)
    a = build_piece_table(cache, distinct_demands(8), range(4))
    b = build_piece_table(cache, distinct_demands(8), range(4, 8))
    s = schedule_tdma(a, b, None, L=1)
    assert s.total_slots == schedule_delivery(a, None, L=1).total_slots + schedule_delivery(b, None, L=1).total_slots
    assert all(set(bl.users) <= {0, 1, 2, 3} for bl in s.blocks[:len(plan_delivery(a, 1))])


def test_tdma_large_file_limit():
    c = SystemConfig(K=8, L=1, N=8, M=4, F=40_000)
    cache = place_hybrid(c, 4, 0)
    a = build_piece_table(cache, distinct_demands(8), range(4))
    b = build_piece_table(cache, distinct_demands(8), range(4, 8))
    d = schedule_tdma(a, b, None, L=1).total_slots / c.F
    assert abs(d - (2 / 3 + 15 / 16)) < 0.02


def test_requires_L_without_network():
    table, _ = table_for(2, 2, 1, 10, 0)
    with pytest.raises(ValueError):
        schedule_delivery(table, None)


# -- dump --------------------------------------------------------------------


def test_dump_schedule_json_lines():
    table, _ = table_for(3, 3, 1, 30, 1)
    s = schedule_delivery(table, None, L=2)
    buf = io.StringIO()
    dump_schedule(s, buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert len(lines) == len(s.blocks)
    assert set(lines[0]) == {"alpha", "T", "omega", "blocklen"}
    assert sum(x["omega"] * x["blocklen"] for x in lines) == s.total_slots
