"""
Personal risk on a typical day
==============================

Draw how many people someone meets in a day from a power law and how long
each meeting lasts, assume everyone met is infectious, and score the day with
the same exposure kernel as the community model. Ignoring short meetings
(raising ``d_min``) or lowering the personal ``p_max`` (a mask, say) both cut
the risk; the second does so roughly in proportion.
"""

import numpy as np

from icmi import ContactCountDistribution, DurationDistribution, DiseaseParams, risk_grid
from icmi.risk import low_exposure_fit
from icmi.synthetic import cns_like_network

dist_n = ContactCountDistribution()
print(f"mean contacts per day {dist_n.mean():.1f}")

dist_d = DurationDistribution.from_network(cns_like_network(seed=1))
params = DiseaseParams(d_max=3600, p_epsilon=0.0)

grid = risk_grid(dist_n, dist_d, "d_min", [0, 60, 300, 900], replicas=200, params=params, seed=0)
for v in (0, 60, 300, 900):
    print(f"d_min {v:4d} s: mean P(infected) {grid.select(v).p_infected.mean():.3f}")

grid = risk_grid(dist_n, dist_d, "p_max", [1.0, 0.75, 0.5, 0.25], replicas=200, params=params, seed=0)
for v in (1.0, 0.75, 0.5, 0.25):
    r, slope = low_exposure_fit(grid, v)
    print(f"p_max {v:4.2f}: mean P(infected) {grid.select(v).p_infected.mean():.3f}, "
          f"low-exposure slope {slope * 3600:.3f} per hour (r = {r:.3f})")
