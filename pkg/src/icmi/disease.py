"""
Individual disease progression.

Each infected person follows a susceptibility-driven state machine: the
infection is symptomatic with probability ``s_i``; symptomatic cases turn
severe with probability ``s_i``; severe cases are hospitalized after ``t4``
days, in the ICU with probability ``s_i``; hospitalized cases deteriorate and
die with probability ``s_i``. Everything else is a fixed delay.

Clock is in whole days. ``state_entry_day`` is the day a state was entered;
a timed transition fires on the first day ``day - state_entry_day >= delay``.

RNG draws, in order, one uniform each:

1. at exposure: symptomatic vs asymptomatic;
2. at the end of incubation (symptomatic only): severe vs light;
3. at hospital entry: ICU vs stable, then deteriorate vs recover.

A draw is taken as "yes" when ``u < s_i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import ConfigError


class HealthState(enum.IntEnum):
    SUSCEPTIBLE = 0
    ASYMPTOMATIC = 1
    PRESYMPTOMATIC = 2
    SYMPTOMATIC_LIGHT = 3
    QUARANTINED = 4
    SYMPTOMATIC_SEVERE = 5
    HOSPITALIZED_STABLE = 6
    HOSPITALIZED_ICU = 7
    RECOVERING_S = 8
    DETERIORATING_S = 9
    RECOVERING_I = 10
    DETERIORATING_I = 11
    RECOVERED = 12
    DECEASED = 13


S = HealthState
TERMINAL = frozenset({S.RECOVERED, S.DECEASED})
INFECTIOUS = frozenset({S.ASYMPTOMATIC, S.PRESYMPTOMATIC})
PRESENT = frozenset({S.SUSCEPTIBLE, S.ASYMPTOMATIC, S.PRESYMPTOMATIC, S.RECOVERED})
BED = frozenset({
    S.HOSPITALIZED_STABLE, S.HOSPITALIZED_ICU,
    S.RECOVERING_S, S.DETERIORATING_S, S.RECOVERING_I, S.DETERIORATING_I,
})

# lookup tables indexed by state value, for vectorised use
INFECTIOUS_MASK = np.array([s in INFECTIOUS for s in S])
PRESENT_MASK = np.array([s in PRESENT for s in S])
BED_MASK = np.array([s in BED for s in S])


def is_infectious(state: HealthState) -> bool:
    return state in INFECTIOUS


def is_present(state: HealthState) -> bool:
    """Whether the person still takes part in the contact network."""
    return state in PRESENT


def occupies_bed(state: HealthState) -> bool:
    return state in BED


@dataclass(frozen=True)
class ProgressionDelays:
    """
    Transition delays in days. Defaults are placeholders, not fitted values.

    ``incubation_symptomatic`` is the presymptomatic (infectious) period. The
    asymptomatic course runs ``t1`` days from infection to recovery;
    ``incubation_asymptomatic`` is carried for configuration round-trips but
    does not enter the state machine.
    """

    t1: int = 7   # asymptomatic -> recovered
    t2: int = 2   # light -> quarantined
    t3: int = 12  # quarantined -> recovered
    t4: int = 5   # severe -> hospitalized
    t5: int = 14  # recovering (ICU) -> recovered
    t6: int = 10  # deteriorating (ICU) -> deceased
    t7: int = 10  # recovering (stable) -> recovered
    t8: int = 7   # deteriorating (stable) -> deceased
    incubation_symptomatic: int = 5
    incubation_asymptomatic: int = 5

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if int(v) != v or v < 0:
                raise ConfigError(f"delay {f.name} must be a non-negative integer, got {v}")

    def max_course(self) -> int:
        """Upper bound on days from infection to a terminal state."""
        return max(
            self.t1,
            self.incubation_symptomatic + self.t2 + self.t3,
            self.incubation_symptomatic + self.t4 + max(self.t5, self.t6, self.t7, self.t8) + 1,
        )


@dataclass
class Individual:
    id: int
    susceptibility: float
    state: HealthState = S.SUSCEPTIBLE
    state_entry_day: int = 0
    infected_on: Optional[int] = None
    # outcome of the deteriorate/recover fork, drawn at hospital entry
    deteriorates: Optional[bool] = None

    def __post_init__(self):
        if not 0.0 <= self.susceptibility <= 1.0:
            raise ConfigError(f"susceptibility must lie in [0, 1], got {self.susceptibility}")


class Event(enum.Enum):
    HOSPITALIZED = "hospitalized"
    ICU = "icu"
    DEATH = "death"
    RECOVERY = "recovery"


def _draw(rng: np.random.Generator, p: float) -> bool:
    return rng.random() < p


def on_exposure(ind: Individual, day: int, rng: np.random.Generator) -> HealthState:
    """Infect a susceptible person; symptomatic branch with probability ``s_i``."""
    if ind.state != S.SUSCEPTIBLE:
        raise RuntimeError(f"on_exposure called on node {ind.id} in state {ind.state.name}")
    symptomatic = _draw(rng, ind.susceptibility)
    ind.state = S.PRESYMPTOMATIC if symptomatic else S.ASYMPTOMATIC
    ind.state_entry_day = day
    ind.infected_on = day
    return ind.state


def step(
    ind: Individual, day: int, delays: ProgressionDelays, rng: np.random.Generator
) -> tuple[HealthState, list[Event]]:
    """
    Apply every transition due on or before ``day``.

    Transitions chain within the same call when the next delay is zero; each
    new state is entered on its scheduled day, not on ``day``, so calling this
    late does not shift the timeline. Returns the resulting state and the
    events emitted on the way.
    """
    events: list[Event] = []
    while True:
        due = due_day(ind, delays)
        if due is None or day < due:
            break
        st = ind.state
        s_i = ind.susceptibility
        if st == S.ASYMPTOMATIC:
            nxt = S.RECOVERED
        elif st == S.PRESYMPTOMATIC:
            nxt = S.SYMPTOMATIC_SEVERE if _draw(rng, s_i) else S.SYMPTOMATIC_LIGHT
        elif st == S.SYMPTOMATIC_LIGHT:
            nxt = S.QUARANTINED
        elif st == S.QUARANTINED:
            nxt = S.RECOVERED
        elif st == S.SYMPTOMATIC_SEVERE:
            icu = _draw(rng, s_i)
            ind.deteriorates = _draw(rng, s_i)
            nxt = S.HOSPITALIZED_ICU if icu else S.HOSPITALIZED_STABLE
            events.append(Event.HOSPITALIZED)
            if icu:
                events.append(Event.ICU)
        elif st == S.HOSPITALIZED_STABLE:
            nxt = S.DETERIORATING_S if ind.deteriorates else S.RECOVERING_S
        elif st == S.HOSPITALIZED_ICU:
            nxt = S.DETERIORATING_I if ind.deteriorates else S.RECOVERING_I
        elif st in (S.DETERIORATING_S, S.DETERIORATING_I):
            nxt = S.DECEASED
            events.append(Event.DEATH)
        else:
            nxt = S.RECOVERED
        if nxt == S.RECOVERED:
            events.append(Event.RECOVERY)
        ind.state = nxt
        ind.state_entry_day = due
    return ind.state, events

def due_day(ind: Individual, delays: ProgressionDelays) -> Optional[int]:
    """Day of the next timed transition, or None if nothing is pending."""
    st = ind.state
    if st in TERMINAL or st == S.SUSCEPTIBLE:
        return None
    delay = {
        S.ASYMPTOMATIC: delays.t1,
        S.PRESYMPTOMATIC: delays.incubation_symptomatic,
        S.SYMPTOMATIC_LIGHT: delays.t2,
        S.QUARANTINED: delays.t3,
        S.SYMPTOMATIC_SEVERE: delays.t4,
        # fork drawn at entry; the ward stay itself lasts one day
        S.HOSPITALIZED_STABLE: 1,
        S.HOSPITALIZED_ICU: 1,
        S.RECOVERING_S: delays.t7,
        S.DETERIORATING_S: delays.t8,
        S.RECOVERING_I: delays.t5,
        S.DETERIORATING_I: delays.t6,
    }[st]
    return ind.state_entry_day + delay
