import numpy as np
import pytest

from mtcc.channel import sample_network, transmit
from mtcc.content import SystemConfig, build_piece_table, distinct_demands, random_library
from mtcc.decoder import decode_user, received_streams, verify_all, zf_leakage
from mtcc.delivery import schedule_delivery
from mtcc.placement import place_centralized, place_decentralized


def pipeline(K, L, N, M, F, seed, placement="decentralized", field_bits=16, demands=None):
    cfg = SystemConfig(K=K, L=L, N=N, M=M, F=F, field_bits=field_bits)
    cache = place_centralized(cfg) if placement == "centralized" else place_decentralized(cfg, [seed, 0])
    demands = demands or distinct_demands(K)
    library = random_library(cfg, [seed, 1])
    net = sample_network(K, L, cfg.field(), [seed, 2])
    table = build_piece_table(cache, demands)
    schedule = schedule_delivery(table, net, library, seed=seed)
    stream = received_streams(net, schedule)
    results = {k: decode_user(k, stream[k], cache, library, schedule, net) for k in range(K)}
    return library, demands, schedule, net, results


def test_full_cache_needs_no_stream():
    library, demands, schedule, _, res = pipeline(3, 2, 3, 3, 50, 0)
    assert schedule.total_slots == 0
    assert verify_all(library, demands, {k: r.symbols for k, r in res.items()}).all_ok


def test_single_user_scalar_channel():
    library, demands, schedule, net, res = pipeline(1, 1, 1, 0, 40, 3)
    assert schedule.total_slots == 40
    assert np.array_equal(res[0].symbols, library.files[0])
    assert res[0].systems == 1 and not res[0].failed_blocks


@pytest.mark.parametrize("seed", range(5))
def test_end_to_end_K4_L2(seed):
    library, demands, schedule, net, res = pipeline(4, 2, 4, 2, 1000, seed)
    report = verify_all(library, demands, {k: r.symbols for k, r in res.items()})
    assert report.all_ok
    assert all(r.recovered.all() for r in res.values())


def test_three_users_two_transmitters_many_trials():
    ok = 0
    for seed in range(100):
        library, demands, _, _, res = pipeline(3, 2, 3, 1, 300, seed)
        ok += verify_all(library, demands, {k: r.symbols for k, r in res.items()}).all_ok
    assert ok >= 99


def test_repeated_demands_and_small_field():
    library, demands, _, _, res = pipeline(3, 2, 4, 2, 60, 11, field_bits=8, demands=(1, 1, 3))
    assert verify_all(library, demands, {k: r.symbols for k, r in res.items()}).all_ok


def test_centralized_decodes():
    library, demands, _, _, res = pipeline(6, 2, 6, 3, 200, 4, placement="centralized")
    assert verify_all(library, demands, {k: r.symbols for k, r in res.items()}).all_ok


def test_verify_flags_corruption():
    cfg = SystemConfig(K=3, L=1, N=3, M=0, F=10)
    library = random_library(cfg, 0)
    decoded = {k: library.files[k].copy() for k in range(3)}
    decoded[1][4] ^= 1
    rep = verify_all(library, (0, 1, 2), decoded)
    assert rep.per_user == {0: True, 1: False, 2: True}
    assert not rep.all_ok


@pytest.mark.parametrize("K,L", [(3, 2), (4, 3), (5, 2)])
def test_zero_forcing_holds_on_schedule(K, L):
    _, _, schedule, net, _ = pipeline(K, L, K, 1, 40, 7)
    assert zf_leakage(schedule, net) == 0


def test_completeness_counts():
    library, demands, schedule, net, res = pipeline(4, 3, 4, 2, 500, 8)
    for k, r in res.items():
        assert r.recovered.sum() == library.file_size


def test_decoder_only_reads_own_cache():
    # decoding with another user's cache must fail loudly, not silently succeed
    cfg = SystemConfig(K=3, L=2, N=3, M=1, F=90)
    cache = place_decentralized(cfg, 0)
    library = random_library(cfg, 1)
    net = sample_network(3, 2, cfg.field(), 2)
    schedule = schedule_delivery(build_piece_table(cache, (0, 1, 2)), net, library)
    stream = transmit(net, schedule.slots)
    swapped = type(cache)(cache.cached[[1, 0, 2]])
    with pytest.raises(LookupError):
        decode_user(0, stream[0], swapped, library, schedule, net)


def test_stream_requires_materialized_schedule():
    cfg = SystemConfig(K=2, L=1, N=2, M=0, F=5)
    table = build_piece_table(place_decentralized(cfg, 0), (0, 1))
    net = sample_network(2, 1, cfg.field(), 0)
    with pytest.raises(ValueError):
        received_streams(net, schedule_delivery(table, net))
