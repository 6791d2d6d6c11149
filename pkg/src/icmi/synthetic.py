"""
Synthetic stand-ins for a campus proximity dataset.

The generator mimics the qualitative structure of university Bluetooth
contact data: people belong to study groups of ~25, most contacts are
within the group, each day has its own activity level (quiet weekends,
ordinary days, a few very busy days), and meeting lengths are heavy-tailed
(many short meetings, a few very long ones). Each group also holds
occasional gatherings.

Nothing here is fitted to real data.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .temporal_graph import Gathering, ScanRecord, Snapshot, TemporalNetwork


@dataclass(frozen=True)
class SyntheticSpec:
    n_nodes: int = 700
    n_days: int = 28
    group_size: int = 25
    # expected distinct within-group / cross-group partners per person on an ordinary day
    within_degree: float = 20.0
    between_degree: float = 5.0
    # day activity multipliers and their probabilities
    day_levels: tuple = (0.4, 1.0, 2.0)
    day_level_probs: tuple = (0.25, 0.64, 0.11)
    scan_interval: int = 20
    # meeting length in scans ~ L**-duration_exponent on [1, max_scans]
    duration_exponent: float = 1.6
    max_scans: int = 1440
    gatherings_per_group: float = 0.3
    gathering_size: tuple = (3, 8)
    gathering_scans: tuple = (30, 270)


def _sample_scans(rng, size, spec: SyntheticSpec) -> np.ndarray:
    support = np.arange(1, spec.max_scans + 1)
    pmf = support ** -spec.duration_exponent
    cdf = np.cumsum(pmf / pmf.sum())
    return support[np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(support) - 1)]


def _pairs_within(rng, groups, p):
    out = []
    for g in groups:
        iu, ju = np.triu_indices(len(g), 1)
        keep = rng.random(len(iu)) < p
        out.append(np.stack([g[iu[keep]], g[ju[keep]]], 1))
    return np.concatenate(out) if out else np.zeros((0, 2), dtype=np.int64)


def cns_like_network(spec: SyntheticSpec = SyntheticSpec(), seed=0) -> TemporalNetwork:
    """Generate a seeded campus-like temporal network (see module docstring)."""
    rng = np.random.default_rng(seed)
    n = spec.n_nodes
    perm = rng.permutation(n)
    groups = [np.sort(perm[i:i + spec.group_size]) for i in range(0, n, spec.group_size)]
    mean_group = n / len(groups)

    snapshots = []
    for day in range(spec.n_days):
        level = rng.choice(spec.day_levels, p=spec.day_level_probs)
        p_in = min(1.0, level * spec.within_degree / max(mean_group - 1, 1))
        pairs = _pairs_within(rng, groups, p_in)

        n_out = rng.poisson(level * spec.between_degree * n / 2)
        a = rng.integers(0, n, n_out)
        b = rng.integers(0, n, n_out)
        cross = np.stack([np.minimum(a, b), np.maximum(a, b)], 1)[a != b]
        pairs = np.unique(np.concatenate([pairs, cross]), axis=0)

        durations = _sample_scans(rng, len(pairs), spec) * spec.scan_interval
        flags = np.zeros(len(pairs), dtype=bool)

        gatherings = []
        g_pairs, g_durs = [], []
        n_g = rng.poisson(level * spec.gatherings_per_group, len(groups))
        for gi, count in enumerate(n_g):
            for _ in range(count):
                lo, hi = spec.gathering_size
                size = min(int(rng.integers(lo, hi + 1)), len(groups[gi]))
                if size < 3:
                    continue
                members = np.sort(rng.choice(groups[gi], size, replace=False))
                scans = int(rng.integers(spec.gathering_scans[0], spec.gathering_scans[1] + 1))
                dur = scans * spec.scan_interval
                gatherings.append(Gathering(frozenset(members.tolist()), dur, day))
                for u, v in combinations(members.tolist(), 2):
                    g_pairs.append((u, v))
                    g_durs.append(dur)

        node_i = np.concatenate([pairs[:, 0], np.array([p[0] for p in g_pairs], dtype=np.int64)])
        node_k = np.concatenate([pairs[:, 1], np.array([p[1] for p in g_pairs], dtype=np.int64)])
        snapshots.append(
            Snapshot(
                window=day,
                node_i=node_i,
                node_k=node_k,
                duration=np.concatenate([durations, np.array(g_durs, dtype=np.int64)]),
                in_gathering=np.concatenate([flags, np.ones(len(g_pairs), dtype=bool)]),
                gatherings=gatherings,
            )
        )
    return TemporalNetwork(snapshots, n, spec.scan_interval, 86400)


def scan_records(
    n_nodes: int = 30,
    n_days: int = 3,
    scan_interval: int = 300,
    contacts_per_day: int = 40,
    seed=0,
) -> list[ScanRecord]:
    """
    Small raw scan log in the ingestion format, for demos and round-trip tests.

    Includes sub-threshold readings and out-of-study devices that ingestion
    should drop.
    """
    rng = np.random.default_rng(seed)
    slots_per_day = 86400 // scan_interval
    records = []
    for day in range(n_days):
        for _ in range(contacts_per_day):
            a, b = rng.choice(n_nodes, 2, replace=False)
            start = int(rng.integers(0, slots_per_day - 12))
            length = int(rng.integers(1, 12))
            for s in range(start, start + length):
                ts = (day * slots_per_day + s) * scan_interval + int(rng.integers(0, scan_interval))
                records.append(ScanRecord(ts, int(a), int(b), int(rng.integers(-89, -40))))
        for _ in range(contacts_per_day // 4):
            ts = day * 86400 + int(rng.integers(0, 86400))
            a = int(rng.integers(0, n_nodes))
            if rng.random() < 0.5:
                records.append(ScanRecord(ts, a, -1, int(rng.integers(-80, -40))))
            else:
                records.append(ScanRecord(ts, a, (a + 1) % n_nodes, int(rng.integers(-110, -91))))
    records.sort(key=lambda r: r.timestamp)
    return records
