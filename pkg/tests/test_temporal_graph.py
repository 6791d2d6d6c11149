import io
import warnings
from collections import defaultdict, deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icmi.errors import ConfigError, DataError
from icmi.synthetic import scan_records
from icmi.temporal_graph import (
    ScanRecord,
    Snapshot,
    TemporalNetwork,
    build_network,
    detect_gatherings,
    duration_histogram,
    load_interactions,
    split_density,
    temporal_density,
    write_histogram,
    write_interactions,
    write_network_stats,
)

HEADER = "timestamp,user_a,user_b,rssi\n"


def csv_source(*rows):
    return io.StringIO(HEADER + "".join(",".join(map(str, r)) + "\n" for r in rows))


# -- oracles -----------------------------------------------------------------

def rle_oracle(slots, scan_interval):
    """Durations of maximal runs of consecutive slots, by walking the sorted list."""
    runs = []
    for s in sorted(set(slots)):
        if runs and s == runs[-1][1] + 1:
            runs[-1][1] = s
        else:
            runs.append([s, s])
    return [(b - a + 1) * scan_interval for a, b in runs]


def bfs_components(edges):
    adj = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, comps = set(), []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, queue = set(), deque([start])
        while queue:
            x = queue.popleft()
            if x in comp:
                continue
            comp.add(x)
            queue.extend(adj[x] - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def gathering_oracle(contacts, scan_interval):
    by_slot = defaultdict(list)
    for s, i, k in contacts:
        by_slot[s].append((i, k))
    per_slot = {s: [c for c in bfs_components(e) if len(c) >= 3] for s, e in by_slot.items()}
    out = []
    active = {}
    for s in sorted(per_slot):
        nxt = {}
        for m in per_slot[s]:
            if m in active and active[m][1] == s - 1:
                nxt[m] = [active[m][0], s]
            else:
                nxt[m] = [s, s]
        for m, (a, b) in active.items():
            if m not in nxt or nxt[m][0] != a:
                out.append((m, (b - a + 1) * scan_interval))
        active = nxt
    out.extend((m, (b - a + 1) * scan_interval) for m, (a, b) in active.items())
    return sorted(out, key=lambda g: (sorted(g[0]), g[1]))


# -- ingestion ---------------------------------------------------------------

def test_load_keeps_record_at_threshold():
    recs = load_interactions(csv_source((300, 5, 7, -85), (300, 5, 8, -90)), rssi_threshold=-90)
    assert recs == [ScanRecord(300, 5, 7, -85), ScanRecord(300, 5, 8, -90)]


def test_load_drops_weak_signal():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert load_interactions(csv_source((300, 5, 7, -95)), -90) == []


def test_load_drops_out_of_study_device():
    recs = load_interactions(csv_source((300, 5, -1, -60), (600, 5, 7, -60)), -90)
    assert recs == [ScanRecord(600, 5, 7, -60)]


def test_load_preserves_order_and_drops_self_loops():
    recs = load_interactions(csv_source((900, 1, 2, -50), (300, 3, 3, -50), (0, 2, 4, -50)))
    assert [r.timestamp for r in recs] == [900, 0]


def test_load_malformed_row_names_line():
    with pytest.raises(DataError, match="line 3"):
        load_interactions(csv_source((300, 5, 7, -85), (300, "x", 7, -85)))


def test_load_wrong_field_count():
    with pytest.raises(DataError, match="line 2"):
        load_interactions(io.StringIO(HEADER + "1,2,3\n"))


def test_load_bad_header():
    with pytest.raises(DataError, match="line 1"):
        load_interactions(io.StringIO("a,b,c,d\n1,2,3,4\n"))


def test_load_empty_warns():
    with pytest.warns(UserWarning):
        assert load_interactions(io.StringIO("")) == []


def test_round_trip_file(tmp_path):
    recs = [ScanRecord(0, 1, 2, -50), ScanRecord(300, 2, 3, -70)]
    write_interactions(recs, tmp_path / "scan.csv")
    assert load_interactions(tmp_path / "scan.csv") == recs


# -- network construction ----------------------------------------------------

def test_consecutive_scans_merge():
    recs = [ScanRecord(t, 5, 7, -60) for t in (0, 300, 600)]
    net = build_network(recs, scan_interval=300)
    assert net[0].duration.tolist() == rle_oracle([0, 1, 2], 300) == [900]


def test_gap_splits_encounter():
    recs = [ScanRecord(t, 5, 7, -60) for t in (0, 900)]
    net = build_network(recs, scan_interval=300)
    assert sorted(net[0].duration.tolist()) == rle_oracle([0, 3], 300) == [300, 300]


def test_empty_window_gets_empty_snapshot():
    recs = [ScanRecord(0, 1, 2, -60), ScanRecord(2 * 86400, 1, 2, -60)]
    net = build_network(recs)
    assert [s.window for s in net] == [0, 1, 2]
    assert len(net[1]) == 0 and net[1].active_nodes == set()


def test_ids_remapped_dense():
    recs = [ScanRecord(0, 100, 7, -60), ScanRecord(0, 7, 55, -60)]
    net = build_network(recs)
    assert net.node_count == 3
    assert net.node_ids.tolist() == [7, 55, 100]
    pairs = set(zip(net[0].node_i.tolist(), net[0].node_k.tolist()))
    assert pairs == {(0, 2), (0, 1)}


def test_both_directions_count_once():
    recs = [ScanRecord(0, 1, 2, -60), ScanRecord(10, 2, 1, -60)]
    net = build_network(recs)
    assert net[0].duration.tolist() == [300]


def test_window_must_be_multiple_of_scan():
    with pytest.raises(ConfigError):
        build_network([ScanRecord(0, 1, 2, -60)], window_length=1000, scan_interval=300)


def test_empty_records_give_empty_network():
    net = build_network([])
    assert len(net) == 0 and net.node_count == 0


def test_runs_split_at_window_boundary():
    recs = [ScanRecord(t, 1, 2, -60) for t in (86400 - 300, 86400)]
    net = build_network(recs)
    assert net[0].duration.tolist() == [300] and net[1].duration.tolist() == [300]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 4), st.integers(0, 4)), max_size=60))
def test_build_network_matches_rle_oracle(raw):
    recs = [ScanRecord(s * 300, a, b, -60) for s, a, b in raw if a != b]
    if not recs:
        return
    net = build_network(recs, window_length=300 * 100, scan_interval=300, gatherings=False)
    by_pair = defaultdict(list)
    for r in recs:
        by_pair[(min(r.user_a, r.user_b), max(r.user_a, r.user_b))].append(r.timestamp // 300)
    expected = sorted(
        (net.node_ids.tolist().index(p[0]), net.node_ids.tolist().index(p[1]), d)
        for p, slots in by_pair.items() for d in rle_oracle(slots, 300)
    )
    got = sorted(zip(net[0].node_i.tolist(), net[0].node_k.tolist(), net[0].duration.tolist()))
    assert got == expected
    assert all(d % 300 == 0 and d > 0 for d in net[0].duration.tolist())


def test_build_is_deterministic():
    recs = scan_records(seed=4)
    a, b = build_network(recs), build_network(list(recs))
    for sa, sb in zip(a, b):
        np.testing.assert_array_equal(sa.node_i, sb.node_i)
        np.testing.assert_array_equal(sa.duration, sb.duration)
        assert sa.gatherings == sb.gatherings


# -- gatherings --------------------------------------------------------------

def test_chain_forms_gathering():
    recs = [ScanRecord(0, 1, 2, -60), ScanRecord(0, 2, 3, -60)]
    net = build_network(recs)
    gs = detect_gatherings(net[0], 300)
    assert [(set(net.node_ids[list(g.members)].tolist()), g.duration) for g in gs] == [({1, 2, 3}, 300)]
    assert net[0].in_gathering.all()


def test_pair_alone_is_not_gathering():
    net = build_network([ScanRecord(0, 1, 2, -60)])
    assert detect_gatherings(net[0], 300) == []
    assert not net[0].in_gathering.any()


def test_stable_triad_merges_across_slots():
    recs = [ScanRecord(s * 300, a, b, -60) for s in range(4) for a, b in ((1, 2), (2, 3), (1, 3))]
    net = build_network(recs)
    gs = net[0].gatherings
    assert len(gs) == 1 and gs[0].duration == 1200
    # pairwise edges are kept for statistics but flagged
    assert sorted(net[0].duration.tolist()) == [1200, 1200, 1200]
    assert net[0].in_gathering.all()


def test_partial_gathering_splits_pair_runs():
    # pair (1,2) meets for 3 slots; node 3 joins only in the middle slot
    recs = [ScanRecord(s * 300, 1, 2, -60) for s in range(3)] + [ScanRecord(300, 2, 3, -60)]
    net = build_network(recs)
    snap = net[0]
    rows = sorted(zip(snap.node_i.tolist(), snap.node_k.tolist(), snap.duration.tolist(),
                      snap.in_gathering.tolist()))
    assert rows == [(0, 1, 300, False), (0, 1, 300, False), (0, 1, 300, True), (1, 2, 300, True)]
    assert sum(snap.duration[~snap.in_gathering]) + 300 * 2 == 1200


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 7), st.integers(0, 7)), max_size=50))
def test_gatherings_match_bfs_oracle(raw):
    recs = [ScanRecord(s * 300, a, b, -60) for s, a, b in raw if a != b]
    if not recs:
        return
    net = build_network(recs, window_length=86400, scan_interval=300)
    snap = net[0]
    got = sorted(((g.members, g.duration) for g in detect_gatherings(snap, 300)),
                 key=lambda g: (sorted(g[0]), g[1]))
    assert got == gathering_oracle(snap.contacts.tolist(), 300)
    # no node sits in two gatherings in the same slot
    for slot in set(snap.contacts[:, 0].tolist()):
        live = [g.members for g in snap.gatherings
                if g.start <= slot < g.start + g.duration // 300]
        members = [m for g in live for m in g]
        assert len(members) == len(set(members))


def test_detect_requires_contacts():
    with pytest.raises(ValueError):
        detect_gatherings(Snapshot(window=0), 300)


# -- density transforms ------------------------------------------------------

def day_with(n_enc, window=0, n_nodes=30, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    while len(rows) < n_enc:
        i, k = rng.choice(n_nodes, 2, replace=False)
        rows.append((int(i), int(k), int(rng.integers(1, 10)) * 300))
    return Snapshot.from_encounters(window, rows)


def test_split_even_day():
    net = TemporalNetwork([day_with(10)], 30)
    out = split_density(net, 2, seed=1)
    assert [len(s) for s in out] == [5, 5]
    assert [s.window for s in out] == [0, 1]


def test_split_odd_day_within_one():
    net = TemporalNetwork([day_with(11)], 30)
    sizes = [len(s) for s in split_density(net, 2, seed=1)]
    assert sorted(sizes) == [5, 6]


def test_split_identity():
    net = TemporalNetwork([day_with(7)], 30)
    assert split_density(net, 1, seed=0) is net


def test_split_rejects_zero():
    with pytest.raises(ConfigError):
        split_density(TemporalNetwork([day_with(3)], 30), 0)


@settings(max_examples=40, deadline=None)
@given(sizes=st.lists(st.integers(0, 25), min_size=1, max_size=5), k=st.integers(1, 4), seed=st.integers(0, 99))
def test_split_preserves_multiset_and_density(sizes, k, seed):
    snaps = [day_with(n, window=w, seed=w) for w, n in enumerate(sizes)]
    net = TemporalNetwork(snaps, 30)
    out = split_density(net, k, seed=seed)
    assert len(out) == k * len(net)
    before = sorted(e for s in net for e in zip(s.node_i.tolist(), s.node_k.tolist(), s.duration.tolist()))
    after = sorted(e for s in out for e in zip(s.node_i.tolist(), s.node_k.tolist(), s.duration.tolist()))
    assert before == after
    for j, s in enumerate(out):
        assert temporal_density(s, 30) <= temporal_density(net[j // k], 30)
    again = split_density(net, k, seed=seed)
    assert all(np.array_equal(a.node_i, b.node_i) for a, b in zip(out, again))


def test_density_examples():
    s = Snapshot.from_encounters(0, [(1, 2, 300), (2, 3, 300)])
    assert temporal_density(s, 3) == pytest.approx(2 / 3)
    assert temporal_density(Snapshot(window=0), 3) == 0.0
    full = Snapshot.from_encounters(0, [(0, 1, 300), (0, 2, 300), (1, 2, 300), (1, 2, 600)])
    assert temporal_density(full, 3) == 1.0


def test_density_needs_two_nodes():
    with pytest.raises(ConfigError):
        temporal_density(Snapshot(window=0), 1)


def test_histogram_single_meeting():
    net = TemporalNetwork([Snapshot.from_encounters(0, [(0, 1, 300)])], 2)
    h = duration_histogram(net, 5)
    assert h.avg_daily_count.sum() == 1.0 and h.avg_daily_count[0] == 1.0


def test_histogram_averages_over_days():
    net = TemporalNetwork([Snapshot.from_encounters(0, [(0, 1, 300)]), Snapshot(window=1)], 2)
    h = duration_histogram(net, 5)
    assert h.avg_daily_count.max() == 0.5


def test_histogram_right_skewed_on_campus_data():
    from icmi.synthetic import cns_like_network, SyntheticSpec
    net = cns_like_network(SyntheticSpec(n_nodes=100, n_days=3), seed=2)
    h = duration_histogram(net, 10)
    assert h.avg_daily_count[0] == h.avg_daily_count.max()
    assert h.avg_daily_count[:3].sum() > h.avg_daily_count[3:].sum()


def test_stats_writers(tmp_path):
    net = build_network(scan_records(seed=1))
    write_network_stats(net, tmp_path / "s.csv")
    write_histogram(duration_histogram(net, 4), tmp_path / "h.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "window,density,encounters,active_nodes"
    assert len(lines) == len(net) + 1
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "bin_low_s,bin_high_s,avg_daily_count"


def test_scan_records_pipeline_drops_noise():
    recs = scan_records(seed=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        buf = io.StringIO()
        buf.write(HEADER)
        buf.writelines(",".join(map(str, r)) + "\n" for r in recs)
        buf.seek(0)
        kept = load_interactions(buf)
    assert all(r.user_b >= 0 and r.rssi >= -90 for r in kept)
    assert len(kept) < len(recs)
