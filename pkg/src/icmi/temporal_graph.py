"""
Temporal contact networks built from proximity scans.

Scan records (timestamp, user_a, user_b, rssi) are thresholded on signal
strength, binned into fixed windows (one day by default) and collapsed into
duration-weighted encounters: per pair, every maximal run of consecutive scan
slots becomes one encounter lasting ``run_length * scan_interval`` seconds.

Within each scan slot the co-occurring contacts form a graph; connected
components with three or more members are gatherings. Consecutive slots with
the same member set merge into one gathering. Pairwise contacts that fall
inside a gathering slot are kept as encounters (they still count for density
and duration statistics) but carry ``in_gathering=True`` so the contagion
layer scores them through the gathering rule only.
"""

from __future__ import annotations

import csv
import io
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConfigError, DataError

RSSI_THRESHOLD = -90
SCAN_INTERVAL = 300
WINDOW_LENGTH = 86400
CSV_HEADER = ("timestamp", "user_a", "user_b", "rssi")


class ScanRecord(NamedTuple):
    timestamp: int
    user_a: int
    user_b: int
    rssi: int


@dataclass(frozen=True)
class Encounter:
    node_i: int
    node_k: int
    duration: int
    window: int
    in_gathering: bool = False


@dataclass(frozen=True)
class Gathering:
    members: frozenset
    duration: int
    window: int
    start: int = 0  # first scan slot, absolute


@dataclass
class Snapshot:
    """
    One window of the temporal network.

    Encounters are stored column-wise (``node_i < node_k`` elementwise). The
    optional ``contacts`` array holds the raw (slot, i, k) co-occurrences the
    encounters were built from; it is dropped by transforms that destroy the
    intra-window time axis.
    """

    window: int
    node_i: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    node_k: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    duration: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    in_gathering: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    gatherings: list = field(default_factory=list)
    contacts: np.ndarray | None = None

    def __post_init__(self):
        self.node_i = np.asarray(self.node_i, dtype=np.int64)
        self.node_k = np.asarray(self.node_k, dtype=np.int64)
        self.duration = np.asarray(self.duration, dtype=np.int64)
        if len(self.in_gathering) != len(self.node_i):
            self.in_gathering = np.zeros(len(self.node_i), dtype=bool)
        self.in_gathering = np.asarray(self.in_gathering, dtype=bool)

    def __len__(self):
        return len(self.node_i)

    @property
    def encounters(self) -> list[Encounter]:
        return [
            Encounter(int(i), int(k), int(d), self.window, bool(g))
            for i, k, d, g in zip(self.node_i, self.node_k, self.duration, self.in_gathering)
        ]

    @property
    def active_nodes(self) -> set[int]:
        nodes = set(np.concatenate([self.node_i, self.node_k]).tolist())
        for g in self.gatherings:
            nodes.update(g.members)
        return nodes

    @classmethod
    def from_encounters(cls, window: int, encounters: Iterable, gatherings=()) -> "Snapshot":
        """Build from ``Encounter`` objects or ``(i, k, duration)`` tuples."""
        rows = []
        for e in encounters:
            if isinstance(e, Encounter):
                rows.append((e.node_i, e.node_k, e.duration, e.in_gathering))
            else:
                i, k, d = e[:3]
                rows.append((i, k, d, bool(e[3]) if len(e) > 3 else False))
        for i, k, d, _ in rows:
            if i == k:
                raise ValueError(f"self-encounter on node {i}")
            if d <= 0:
                raise ValueError(f"encounter duration must be positive, got {d}")
        arr = np.array([(min(i, k), max(i, k), d, g) for i, k, d, g in rows], dtype=np.int64)
        arr = arr.reshape(-1, 4)
        return cls(
            window=window,
            node_i=arr[:, 0],
            node_k=arr[:, 1],
            duration=arr[:, 2],
            in_gathering=arr[:, 3].astype(bool),
            gatherings=list(gatherings),
        )


@dataclass
class TemporalNetwork:
    snapshots: list
    node_count: int
    scan_interval: int = SCAN_INTERVAL
    window_length: int = WINDOW_LENGTH
    node_ids: np.ndarray | None = None  # dense index -> original id

    def __post_init__(self):
        windows = [s.window for s in self.snapshots]
        if any(b <= a for a, b in zip(windows, windows[1:])):
            raise ValueError("snapshot windows must be strictly increasing")
        if self.node_ids is None:
            self.node_ids = np.arange(self.node_count)

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, idx):
        return self.snapshots[idx]

    @property
    def n_encounters(self) -> int:
        return sum(len(s) for s in self.snapshots)

    def all_durations(self) -> np.ndarray:
        if not self.snapshots:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([s.duration for s in self.snapshots])


def _open_source(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline=""), True
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source, False
    return iter(source), False


def load_interactions(source, rssi_threshold: int = RSSI_THRESHOLD) -> list[ScanRecord]:
    """
    Read proximity scans from a CSV with header ``timestamp,user_a,user_b,rssi``.

    ``source`` may be a path, an open text file, or an iterable of lines.
    Records with ``rssi < rssi_threshold``, a negative ``user_b`` (device
    outside the study) or ``user_a == user_b`` are dropped. Input order is
    preserved.

    Raises
    ------
    DataError
        On a malformed header or row; the message names the line number.
    """
    fh, owned = _open_source(source)
    try:
        reader = csv.reader(fh)
        records = []
        header = next(reader, None)
        if header is None:
            warnings.warn("interaction source is empty; network will be empty", stacklevel=2)
            return records
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"line 1: expected header {','.join(CSV_HEADER)!r}, got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise DataError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                ts, a, b, rssi = (int(x) for x in row)
            except ValueError:
                raise DataError(f"line {lineno}: non-integer field in {row!r}") from None
            if ts < 0 or a < 0:
                raise DataError(f"line {lineno}: negative timestamp or user_a")
            if b < 0 or a == b or rssi < rssi_threshold:
                continue
            records.append(ScanRecord(ts, a, b, rssi))
    finally:
        if owned:
            fh.close()
    if not records:
        warnings.warn("no interactions survived filtering; network will be empty", stacklevel=2)
    return records


def write_interactions(records: Iterable[ScanRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(records)


def _slot_components(slots: np.ndarray, i: np.ndarray, k: np.ndarray):
    """
    Connected components of each slot's contact graph.

    Returns ``(vertex_slot, vertex_node, vertex_label, contact_label)`` where a
    vertex is a (slot, node) pair; labels are component ids shared between the
    vertex and contact views.
    """
    ends = np.concatenate([np.stack([slots, i], 1), np.stack([slots, k], 1)])
    verts, inv = np.unique(ends, axis=0, return_inverse=True)
    inv = inv.ravel()
    m = len(slots)
    nv = len(verts)
    graph = coo_matrix((np.ones(m), (inv[:m], inv[m:])), shape=(nv, nv))
    _, labels = connected_components(graph, directed=False)
    return verts[:, 0], verts[:, 1], labels, labels[inv[:m]]


def _gatherings_from_contacts(contacts: np.ndarray, window: int, scan_interval: int):
    """Gatherings plus a per-contact flag marking contacts inside one."""
    if len(contacts) == 0:
        return [], np.zeros(0, dtype=bool)
    slots, i, k = contacts[:, 0], contacts[:, 1], contacts[:, 2]
    v_slot, v_node, v_label, c_label = _slot_components(slots, i, k)
    sizes = np.bincount(v_label)
    flagged = sizes[c_label] >= 3

    big = sizes[v_label] >= 3
    per_slot: dict[int, list[frozenset]] = {}
    if big.any():
        order = np.lexsort((v_node[big], v_label[big]))
        lab = v_label[big][order]
        nodes = v_node[big][order]
        vslot = v_slot[big][order]
        cuts = np.flatnonzero(np.diff(lab)) + 1
        for grp_nodes, grp_slot in zip(np.split(nodes, cuts), np.split(vslot, cuts)):
            per_slot.setdefault(int(grp_slot[0]), []).append(frozenset(grp_nodes.tolist()))

    gatherings = []
    open_runs: dict[frozenset, list[int]] = {}  # members -> [start, last]
    for slot in sorted(per_slot):
        for members in per_slot[slot]:
            run = open_runs.get(members)
            if run is not None and run[1] == slot - 1:
                run[1] = slot
            else:
                if run is not None:
                    gatherings.append((run[0], run[1], members))
                open_runs[members] = [slot, slot]
    gatherings.extend((s, e, m) for m, (s, e) in open_runs.items())
    gatherings.sort(key=lambda g: (g[0], sorted(g[2])))
    out = [
        Gathering(members=m, duration=(e - s + 1) * scan_interval, window=window, start=s)
        for s, e, m in gatherings
    ]
    return out, flagged


def detect_gatherings(snapshot: Snapshot, scan_interval: int = SCAN_INTERVAL) -> list[Gathering]:
    """
    Gatherings of three or more nodes in one snapshot.

    Requires the per-slot ``contacts`` kept by :func:`build_network`.
    """
    if snapshot.contacts is None:
        raise ValueError("snapshot carries no per-slot contacts; rebuild with build_network")
    gatherings, _ = _gatherings_from_contacts(snapshot.contacts, snapshot.window, scan_interval)
    return gatherings


def _runs(contacts: np.ndarray, flags: np.ndarray, scan_interval: int):
    """Run-length encode (slot, i, k) contacts into encounters."""
    if len(contacts) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, np.zeros(0, dtype=bool)
    order = np.lexsort((contacts[:, 0], contacts[:, 2], contacts[:, 1]))
    c = contacts[order]
    f = flags[order]
    brk = np.ones(len(c), dtype=bool)
    brk[1:] = (
        (c[1:, 1] != c[:-1, 1])
        | (c[1:, 2] != c[:-1, 2])
        | (c[1:, 0] - c[:-1, 0] != 1)
        | (f[1:] != f[:-1])
    )
    run_id = np.cumsum(brk) - 1
    starts = np.flatnonzero(brk)
    lengths = np.bincount(run_id)
    first = c[starts]
    # order encounters by start slot, then pair
    o = np.lexsort((first[:, 2], first[:, 1], first[:, 0]))
    return (
        first[o, 1],
        first[o, 2],
        (lengths * scan_interval)[o].astype(np.int64),
        f[starts][o],
    )


def build_network(
    records,
    window_length: int = WINDOW_LENGTH,
    scan_interval: int = SCAN_INTERVAL,
    gatherings: bool = True,
) -> TemporalNetwork:
    """
    Bin scan records into windows of duration-weighted encounters.

    Node ids are remapped to ``0..n-1`` in ascending order of the original id;
    the original ids are kept in ``network.node_ids``. Windows run from the
    first to the last populated window, with empty snapshots for gaps.
    """
    if scan_interval <= 0 or window_length <= 0:
        raise ConfigError("window_length and scan_interval must be positive")
    if window_length % scan_interval:
        raise ConfigError(
            f"window_length={window_length} is not a multiple of scan_interval={scan_interval}"
        )
    arr = np.array([tuple(r[:3]) for r in records], dtype=np.int64).reshape(-1, 3)
    if len(arr) == 0:
        return TemporalNetwork([], 0, scan_interval, window_length, np.zeros(0, dtype=np.int64))

    node_ids = np.unique(arr[:, 1:3])
    a = np.searchsorted(node_ids, arr[:, 1])
    b = np.searchsorted(node_ids, arr[:, 2])
    slot = arr[:, 0] // scan_interval
    contacts = np.unique(np.stack([slot, np.minimum(a, b), np.maximum(a, b)], 1), axis=0)

    per_window = window_length // scan_interval
    win = contacts[:, 0] // per_window
    cuts = np.flatnonzero(np.diff(win)) + 1
    by_window = {int(w[0]): c for w, c in zip(np.split(win, cuts), np.split(contacts, cuts))}

    snapshots = []
    for w in range(int(win.min()), int(win.max()) + 1):
        c = by_window.get(w)
        if c is None:
            snapshots.append(Snapshot(window=w, contacts=np.zeros((0, 3), dtype=np.int64)))
            continue
        if gatherings:
            gs, flags = _gatherings_from_contacts(c, w, scan_interval)
        else:
            gs, flags = [], np.zeros(len(c), dtype=bool)
        i, k, d, g = _runs(c, flags, scan_interval)
        snapshots.append(
            Snapshot(window=w, node_i=i, node_k=k, duration=d, in_gathering=g,
                     gatherings=gs, contacts=c)
        )
    return TemporalNetwork(snapshots, len(node_ids), scan_interval, window_length, node_ids)


def split_density(network: TemporalNetwork, k: int, seed=None) -> TemporalNetwork:
    """
    Spread each window over ``k`` pseudo-windows.

    Encounters (and gatherings) of a window are shuffled with a seeded RNG and
    dealt into ``k`` near-equal parts, so each pseudo-window holds ``1/k`` of
    the original interactions. Window ``w`` becomes windows ``w*k .. w*k+k-1``.
    """
    if int(k) != k or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k}")
    k = int(k)
    if k == 1:
        return network
    rng = np.random.default_rng(seed)
    snapshots = []
    for snap in network.snapshots:
        enc_parts = np.array_split(rng.permutation(len(snap)), k)
        g_parts = np.array_split(rng.permutation(len(snap.gatherings)), k)
        for j in range(k):
            idx = np.sort(enc_parts[j])
            snapshots.append(
                Snapshot(
                    window=snap.window * k + j,
                    node_i=snap.node_i[idx],
                    node_k=snap.node_k[idx],
                    duration=snap.duration[idx],
                    in_gathering=snap.in_gathering[idx],
                    gatherings=[snap.gatherings[g] for g in np.sort(g_parts[j])],
                )
            )
    return TemporalNetwork(
        snapshots, network.node_count, network.scan_interval,
        network.window_length // k if network.window_length % k == 0 else network.window_length,
        network.node_ids,
    )


def temporal_density(snapshot: Snapshot, node_count: int) -> float:
    """Fraction of the ``n(n-1)/2`` possible pairs that interacted in the window."""
    if node_count < 2:
        raise ConfigError("temporal density needs at least two nodes")
    if len(snapshot) == 0:
        return 0.0
    pairs = np.unique(np.stack([snapshot.node_i, snapshot.node_k], 1), axis=0)
    return len(pairs) / (node_count * (node_count - 1) / 2)


@dataclass
class DurationHistogram:
    bin_low: np.ndarray
    bin_high: np.ndarray
    avg_daily_count: np.ndarray


def duration_histogram(network: TemporalNetwork, log_bins: int = 20) -> DurationHistogram:
    """Average number of meetings per window in log-spaced duration bins."""
    if len(network) == 0:
        raise ValueError("duration histogram needs at least one snapshot")
    d = network.all_durations()
    if len(d) == 0:
        z = np.zeros(0)
        return DurationHistogram(z, z, z)
    lo, hi = float(d.min()), float(d.max())
    hi = max(hi, 2 * lo)
    edges = np.geomspace(lo, hi, log_bins + 1)
    counts, _ = np.histogram(d, bins=edges)
    return DurationHistogram(edges[:-1], edges[1:], counts / len(network))


def _fmt(x) -> str:
    return format(x, ".9g") if isinstance(x, (float, np.floating)) else str(x)


def network_stats_rows(network: TemporalNetwork):
    for snap in network:
        dens = temporal_density(snap, network.node_count) if network.node_count >= 2 else 0.0
        yield snap.window, dens, len(snap), len(snap.active_nodes)


def write_network_stats(network: TemporalNetwork, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window", "density", "encounters", "active_nodes"])
        for row in network_stats_rows(network):
            w.writerow([_fmt(x) for x in row])


def write_histogram(hist: DurationHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_low_s", "bin_high_s", "avg_daily_count"])
        for row in zip(hist.bin_low, hist.bin_high, hist.avg_daily_count):
            w.writerow([_fmt(float(x)) for x in row])
