"""
From raw proximity scans to a daily contact network
====================================================

Phones scan for each other every few minutes and log ``(timestamp, a, b, rssi)``.
Here we generate a small scan log, filter it, and fold it into one snapshot
per day: pairwise encounters with their durations, plus gatherings (three or
more people seen together in the same scan slot).
"""

import io

import numpy as np

from icmi import build_network, load_interactions, temporal_density
from icmi.synthetic import scan_records
from icmi.temporal_graph import duration_histogram

###############################################################################
# A raw log. Some readings are too weak and some partners are devices outside
# the study; ingestion drops both.
records = scan_records(n_nodes=30, n_days=3, contacts_per_day=60, seed=4)
print(len(records), "raw scan rows, e.g.", records[:3])

buf = io.StringIO()
buf.write("timestamp,user_a,user_b,rssi\n")
for r in records:
    buf.write(",".join(map(str, r)) + "\n")
buf.seek(0)
kept = load_interactions(buf, rssi_threshold=-90)
print(len(kept), "rows survive the -90 dBm cut and the out-of-study filter")

###############################################################################
# One snapshot per 24 h window. Consecutive scans of the same pair merge into
# a single encounter whose length is a multiple of the scan interval.
net = build_network(kept, window_length=86400, scan_interval=300)
for snap in net:
    g = [sorted(x.members) for x in snap.gatherings]
    print(f"day {snap.window}: {len(snap.node_i)} encounters, "
          f"{len(snap.gatherings)} gatherings {g[:2]}, "
          f"density {temporal_density(snap, net.node_count):.3f}")

###############################################################################
# Encounter lengths are heavy tailed; the log-binned daily histogram shows it.
hist = duration_histogram(net, log_bins=6)
for lo, hi, c in zip(hist.bin_low, hist.bin_high, hist.avg_daily_count):
    print(f"{lo:8.0f} - {hi:8.0f} s  {c:6.2f} per day")

durations = net.all_durations()
print("median encounter", np.median(durations), "s; longest", durations.max(), "s")
