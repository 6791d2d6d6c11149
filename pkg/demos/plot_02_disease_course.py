"""
One person's course of illness
==============================

Each infected person walks a small state machine. Personal susceptibility
``s`` sets both forks: the chance of developing symptoms, and among the
symptomatic the chance of a severe course. Young people (small ``s``) mostly
stay asymptomatic; old people (``s`` near 1) are the ones who fill hospital beds.
"""

import numpy as np

from icmi import Event, Individual, ProgressionDelays, on_exposure, step

delays = ProgressionDelays()
rng = np.random.default_rng(1)


def course(s):
    person = Individual(0, s)
    on_exposure(person, 0, rng)
    path = [(0, person.state.name)]
    for day in range(1, 60):
        before = person.state
        step(person, day, delays, rng)
        if person.state != before:
            path.append((day, person.state.name))
    return path


for s in (0.0, 0.5, 1.0):
    print(f"s = {s}:")
    for day, name in course(s):
        print(f"   day {day:2d}  {name}")

###############################################################################
# Over many people the hospital share is ``s**2``.
for s in (0.2, 0.5, 0.8):
    n = 20000
    hosp = 0
    for _ in range(n):
        p = Individual(0, s)
        on_exposure(p, 0, rng)
        _, events = step(p, 30, delays, rng)
        hosp += Event.HOSPITALIZED in events
    print(f"s = {s}: hospitalized {hosp / n:.3f}  (s^2 = {s * s:.3f})")
