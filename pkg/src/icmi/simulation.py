"""
Monte Carlo engine over a temporal network.

One replica walks the snapshots day by day. For day ``d``:

1. every state machine with a transition due on ``d`` is advanced (ascending
   node id);
2. each present susceptible node collects its encounters with infectious
   nodes (infectious set as of the start of the day) and its gathering
   exposures;
3. the per-node daily infection probability is evaluated and exposures are
   drawn (one uniform per node at risk, ascending id), then ``on_exposure``
   is applied to the newly infected in ascending id;
4. the census is recorded.

Nodes infected on day ``d`` therefore cannot transmit before day ``d + 1``.

Replica ``r`` draws from ``SeedSequence(master_seed, spawn_key=(r,))``, so a
replica's trajectory depends only on ``(master_seed, r)`` and never on how
replicas are scheduled.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .contagion import (
    COUNT_BASED,
    DiseaseParams,
    daily_infection_probs_by_node,
    encounter_prob_array,
)
from .disease import (
    BED_MASK,
    INFECTIOUS_MASK,
    HealthState,
    Individual,
    ProgressionDelays,
    due_day,
    on_exposure,
    step,
)
from .errors import ConfigError
from .temporal_graph import Snapshot, TemporalNetwork

N_STATES = len(HealthState)
SUSCEPTIBLE = int(HealthState.SUSCEPTIBLE)

CENSUS_COLUMNS = (
    "S", "asym", "presym", "light", "quar", "severe", "hosp_stable", "icu",
    "rec_s", "det_s", "rec_i", "det_i", "recovered", "deceased",
)
REPORT_COLUMNS = CENSUS_COLUMNS + ("beds", "new_inf", "cum_inf")


@dataclass(frozen=True)
class SusceptibilitySpec:
    """
    How personal susceptibility ``s_i`` is assigned to the community.

    kind : ``"constant"``, ``"mixture"`` or ``"vector"``.
        constant -- every node gets ``value``.
        mixture -- a fraction ``young_fraction`` of nodes (chosen afresh in
        each replica) gets ``young``, the rest ``old``.
        vector -- ``values[i]`` for node ``i``.
    """

    kind: str = "constant"
    value: float = 0.2
    young_fraction: float = 0.8
    young: float = 0.0
    old: float = 1.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("constant", "mixture", "vector"):
            raise ConfigError(f"unknown susceptibility kind {self.kind!r}")
        checks = {
            "constant": [self.value],
            "mixture": [self.young_fraction, self.young, self.old],
            "vector": list(self.values or ()),
        }[self.kind]
        if self.kind == "vector" and not self.values:
            raise ConfigError("vector susceptibility needs values")
        if any(not 0.0 <= v <= 1.0 for v in checks):
            raise ConfigError("susceptibility parameters must lie in [0, 1]")

    @classmethod
    def constant(cls, value: float) -> "SusceptibilitySpec":
        return cls(kind="constant", value=value)

    @classmethod
    def mixture(cls, young_fraction: float, young: float = 0.0, old: float = 1.0):
        return cls(kind="mixture", young_fraction=young_fraction, young=young, old=old)

    @classmethod
    def vector(cls, values: Sequence[float]) -> "SusceptibilitySpec":
        return cls(kind="vector", values=tuple(float(v) for v in values))

    @classmethod
    def for_asymptomatic_fraction(cls, fraction: float) -> "SusceptibilitySpec":
        # P(asymptomatic | infected) = 1 - s_i
        return cls.constant(1.0 - fraction)

    def assign(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.value)
        if self.kind == "vector":
            if len(self.values) != n:
                raise ConfigError(f"susceptibility vector has {len(self.values)} entries, need {n}")
            return np.array(self.values, dtype=float)
        s = np.full(n, self.old)
        young = rng.permutation(n)[: int(round(self.young_fraction * n))]
        s[young] = self.young
        return s


@dataclass(frozen=True)
class ScenarioConfig:
    params: DiseaseParams = field(default_factory=DiseaseParams)
    delays: ProgressionDelays = field(default_factory=ProgressionDelays)
    susceptibility: SusceptibilitySpec = field(default_factory=SusceptibilitySpec)
    patient_zero_count: int = 1
    iterations: int = 200
    master_seed: int = 0
    # contact-free days appended after the network so late cases can resolve
    extra_days: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.patient_zero_count < 1:
            raise ConfigError("patient_zero_count must be >= 1")
        if self.extra_days < 0:
            raise ConfigError("extra_days must be >= 0")


@dataclass
class DailyReport:
    day: int
    census: np.ndarray  # counts indexed by HealthState
    beds: int
    cumulative_infected: int
    new_infections: int

    def count(self, state: HealthState) -> int:
        return int(self.census[int(state)])

    def census_map(self) -> dict:
        return {s: int(self.census[int(s)]) for s in HealthState}

    def row(self) -> list[int]:
        return [*self.census.tolist(), self.beds, self.new_infections, self.cumulative_infected]


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(replica,)))


def place_patients_zero(network: TemporalNetwork, count: int, rng: np.random.Generator):
    """Uniform sample, without replacement, of ``count`` nodes active on day 0."""
    if count < 1:
        raise ConfigError("patient zero count must be >= 1")
    if len(network) == 0:
        raise ConfigError("network has no snapshots")
    active = np.array(sorted(network[0].active_nodes), dtype=np.int64)
    if count > len(active):
        raise ConfigError(
            f"requested {count} patients zero but only {len(active)} nodes are active on day 0"
        )
    return set(rng.choice(active, size=count, replace=False).tolist())


class _DayIndex:
    """Per-snapshot arrays in the layout the exposure step needs."""

    __slots__ = ("pi", "pk", "pd", "g_member", "g_index", "g_duration")

    def __init__(self, snap: Snapshot):
        free = ~snap.in_gathering
        self.pi = snap.node_i[free]
        self.pk = snap.node_k[free]
        self.pd = snap.duration[free]
        members, index, durations = [], [], []
        for j, g in enumerate(snap.gatherings):
            m = sorted(g.members)
            members.extend(m)
            index.extend([j] * len(m))
            durations.append(g.duration)
        self.g_member = np.array(members, dtype=np.int64)
        self.g_index = np.array(index, dtype=np.int64)
        self.g_duration = np.array(durations, dtype=float)


def _index(network: TemporalNetwork) -> list[_DayIndex]:
    cached = getattr(network, "_day_index", None)
    if cached is None or len(cached) != len(network):
        cached = [_DayIndex(s) for s in network]
        network._day_index = cached
    return cached


def _exposures(day: _DayIndex, states: np.ndarray, params: DiseaseParams, n: int):
    """Per-node infection probability for one day; zero for nodes not at risk."""
    infectious = INFECTIOUS_MASK[states]
    susceptible = states == SUSCEPTIBLE

    m1 = infectious[day.pi] & susceptible[day.pk]
    m2 = infectious[day.pk] & susceptible[day.pi]
    targets = np.concatenate([day.pk[m1], day.pi[m2]])

    if params.mode == COUNT_BASED:
        sources = np.concatenate([day.pi[m1], day.pk[m2]])
        if len(day.g_member):
            inf_m = infectious[day.g_member]
            sus_m = susceptible[day.g_member]
            # every (susceptible member, infectious member) pair of a gathering
            gi = np.flatnonzero(sus_m)
            gj = np.flatnonzero(inf_m)
            same = day.g_index[gi][:, None] == day.g_index[gj][None, :]
            a, b = np.nonzero(same)
            targets = np.concatenate([targets, day.g_member[gi[a]]])
            sources = np.concatenate([sources, day.g_member[gj[b]]])
        if len(targets) == 0:
            return np.zeros(n)
        pairs = np.unique(np.stack([targets, sources], 1), axis=0)
        counts = np.bincount(pairs[:, 0], minlength=n)
        return 1.0 - (1.0 - params.p_max) ** counts

    durations = np.concatenate([day.pd[m1], day.pd[m2]]).astype(float)
    if len(day.g_member):
        n_inf = np.bincount(day.g_index, weights=infectious[day.g_member],
                            minlength=len(day.g_duration))
        hit = susceptible[day.g_member] & (n_inf[day.g_index] > 0)
        if hit.any():
            gidx = day.g_index[hit]
            targets = np.concatenate([targets, day.g_member[hit]])
            durations = np.concatenate([durations, day.g_duration[gidx] * n_inf[gidx]])
    if len(targets) == 0:
        return np.zeros(n)
    return daily_infection_probs_by_node(
        targets, encounter_prob_array(durations, params), params.p_max, n
    )


def run_once(
    network: TemporalNetwork,
    config: ScenarioConfig,
    replica_seed=None,
    rng: Optional[np.random.Generator] = None,
) -> list[DailyReport]:
    """
    Simulate one replica and return one report per day.

    Either pass ``rng`` directly or a ``replica_seed`` for
    ``np.random.default_rng``.
    """
    if len(network) == 0:
        raise ConfigError("cannot simulate on an empty network")
    if rng is None:
        rng = np.random.default_rng(replica_seed)
    n = network.node_count
    params, delays = config.params, config.delays

    s = config.susceptibility.assign(n, rng)
    zeros = place_patients_zero(network, config.patient_zero_count, rng)

    states = np.zeros(n, dtype=np.int64)
    people: dict[int, Individual] = {}
    schedule: dict[int, set] = {}

    def infect(node: int, day: int):
        ind = Individual(node, float(s[node]))
        on_exposure(ind, day, rng)
        people[node] = ind
        states[node] = ind.state
        schedule.setdefault(due_day(ind, delays), set()).add(node)

    for node in sorted(zeros):
        infect(node, 0)
    cumulative = len(zeros)

    days = _index(network)
    total_days = len(days) + config.extra_days
    reports = []
    for d in range(total_days):
        for node in sorted(schedule.pop(d, ())):
            ind = people[node]
            step(ind, d, delays, rng)
            states[node] = ind.state
            nxt = due_day(ind, delays)
            if nxt is not None:
                schedule.setdefault(nxt, set()).add(node)

        new = 0
        if d < len(days):
            prob = _exposures(days[d], states, params, n)
            at_risk = np.flatnonzero(prob > 0)
            if len(at_risk):
                hit = at_risk[rng.random(len(at_risk)) < prob[at_risk]]
                for node in hit.tolist():
                    infect(node, d)
                new = len(hit)
        cumulative += new

        census = np.bincount(states, minlength=N_STATES)
        reports.append(
            DailyReport(d, census, int(census[BED_MASK].sum()), cumulative, new)
        )
    return reports


def beds_timeseries(reports: Sequence[DailyReport]) -> list[tuple[int, int]]:
    return [(r.day, r.beds) for r in reports]


def reports_to_array(reports: Sequence[DailyReport]) -> np.ndarray:
    """Shape ``(days, len(REPORT_COLUMNS))`` integer trajectory."""
    return np.array([r.row() for r in reports], dtype=np.int64)


# process-pool workers receive the network once through the initializer
_worker_state: dict = {}


def _init_worker(network, config):
    _worker_state["network"] = network
    _worker_state["config"] = config


def _replica(index: int) -> np.ndarray:
    cfg = _worker_state["config"]
    reports = run_once(_worker_state["network"], cfg, rng=replica_rng(cfg.master_seed, index))
    return reports_to_array(reports)


def run_replicas(network: TemporalNetwork, config: ScenarioConfig, threads: int = 1) -> np.ndarray:
    """
    All replicas of an ensemble as an array ``(iterations, days, columns)``.

    ``threads > 1`` fans replicas out to worker processes; results are
    identical for any value.
    """
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    _index(network)
    indices = range(config.iterations)
    if threads == 1 or config.iterations == 1:
        _init_worker(network, config)
        try:
            out = [_replica(i) for i in indices]
        finally:
            _worker_state.clear()
    else:
        with ProcessPoolExecutor(threads, initializer=_init_worker,
                                 initargs=(network, config)) as pool:
            out = list(pool.map(_replica, indices, chunksize=max(1, config.iterations // (4 * threads))))
    return np.stack(out)


@dataclass
class EnsembleSummary:
    node_count: int
    iterations: int
    columns: tuple
    mean: np.ndarray  # (days, columns)
    sd: np.ndarray
    final_rate_mean: float
    final_rate_sd: float

    @property
    def days(self) -> int:
        return self.mean.shape[0]

    def series(self, column: str, stat: str = "mean") -> np.ndarray:
        return getattr(self, stat)[:, self.columns.index(column)]

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "iterations": self.iterations,
            "final_infection_rate": {"mean": self.final_rate_mean, "sd": self.final_rate_sd},
            "daily": {
                c: {"mean": self.mean[:, j].tolist(), "sd": self.sd[:, j].tolist()}
                for j, c in enumerate(self.columns)
            },
        }


def summarize(trajectories: np.ndarray, node_count: int) -> EnsembleSummary:
    traj = trajectories.astype(float)
    # numpy's mean uses pairwise summation
    mean = traj.mean(axis=0)
    sd = traj.std(axis=0)
    final = traj[:, -1, REPORT_COLUMNS.index("cum_inf")] / node_count
    return EnsembleSummary(
        node_count=node_count,
        iterations=traj.shape[0],
        columns=REPORT_COLUMNS,
        mean=mean,
        sd=sd,
        final_rate_mean=float(final.mean()),
        final_rate_sd=float(final.std()),
    )


def run_ensemble(network: TemporalNetwork, config: ScenarioConfig, threads: int = 1) -> EnsembleSummary:
    return summarize(run_replicas(network, config, threads), network.node_count)


def sweep_asymptomatic(
    network: TemporalNetwork, config: ScenarioConfig, fractions: Sequence[float], threads: int = 1
) -> dict:
    """
    Final infection rate (mean, sd) for each asymptomatic fraction.

    Each fraction ``f`` runs the ensemble with constant susceptibility
    ``1 - f``, which makes the expected asymptomatic share of infections
    exactly ``f``.
    """
    if not fractions:
        raise ConfigError("fraction list is empty")
    out = {}
    for f in fractions:
        if not 0.0 < f < 1.0:
            raise ConfigError(f"asymptomatic fraction must lie in (0, 1), got {f}")
        cfg = ScenarioConfig(
            params=config.params,
            delays=config.delays,
            susceptibility=SusceptibilitySpec.for_asymptomatic_fraction(f),
            patient_zero_count=config.patient_zero_count,
            iterations=config.iterations,
            master_seed=config.master_seed,
            extra_days=config.extra_days,
        )
        summary = run_ensemble(network, cfg, threads)
        out[f] = (summary.final_rate_mean, summary.final_rate_sd)
    return out


def _fmt(x) -> str:
    return format(x, ".9g")


def write_census_csv(trajectories: np.ndarray, path) -> None:
    """Per-replica, per-day census in the fixed column order."""
    header = ["replica", "day", *CENSUS_COLUMNS, "beds", "new_inf"]
    ncol = len(CENSUS_COLUMNS) + 2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r, traj in enumerate(trajectories):
            for d, row in enumerate(traj):
                w.writerow([r, d, *row[:ncol].tolist()])


def write_summary_json(summary: EnsembleSummary, path, extra: Optional[dict] = None) -> None:
    def rounded(obj):
        if isinstance(obj, float):
            return float(_fmt(obj))
        if isinstance(obj, dict):
            return {k: rounded(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [rounded(v) for v in obj]
        return obj

    payload = dict(extra or {})
    payload.update(summary.to_dict())
    with open(path, "w") as fh:
        json.dump(rounded(payload), fh, indent=1, sort_keys=True)
        fh.write("\n")
