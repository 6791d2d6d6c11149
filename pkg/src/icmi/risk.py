"""
Personal infection risk for a typical day.

A day is sampled as a number of meetings ``N`` drawn from a truncated
power-law pmf ``p(x) ∝ a * x**b`` and ``N`` i.i.d. meeting lengths drawn
from a discrete duration distribution. The day is scored with the same
exposure kernel the community simulation uses, with a personal ``p_max``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .contagion import DiseaseParams, daily_infection_prob, encounter_prob, encounter_prob_array
from .errors import ConfigError
from .temporal_graph import TemporalNetwork

# power-law fit constants for daily contact counts
FIT_A = 0.051
FIT_B = -0.635


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


@dataclass(frozen=True)
class ContactCountDistribution:
    """Daily number of distinct contacts, ``p(x) ∝ a x^b`` on ``[n_min, n_max]``."""

    a: float = FIT_A
    b: float = FIT_B
    n_min: int = 1
    n_max: int = 120

    def __post_init__(self):
        if self.n_max < self.n_min or self.n_min < 0:
            raise ConfigError(f"empty contact-count support [{self.n_min}, {self.n_max}]")
        if self.a <= 0:
            raise ConfigError("coefficient a must be positive")
        if self.n_min == 0 and self.b < 0:
            raise ConfigError("x = 0 is not in the domain of a decaying power law")

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def pmf(self) -> np.ndarray:
        x = self.support.astype(float)
        w = self.a * x ** self.b
        return w / w.sum()

    def mean(self) -> float:
        return float(self.support @ self.pmf)

    def sample(self, rng: np.random.Generator, size=None):
        cdf = np.cumsum(self.pmf)
        u = rng.random(size)
        return self.support[_inverse_cdf(cdf, np.atleast_1d(u))].reshape(np.shape(u))


@dataclass(frozen=True)
class DurationDistribution:
    values: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.ndim != 1 or v.shape != w.shape or len(v) == 0:
            raise ConfigError("duration values and weights must be equal-length, non-empty")
        if np.any(v <= 0) or np.any(w < 0) or w.sum() <= 0:
            raise ConfigError("durations must be positive and weights non-negative")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w / w.sum())

    @classmethod
    def from_durations(cls, durations, label="empirical") -> "DurationDistribution":
        values, counts = np.unique(np.asarray(durations), return_counts=True)
        return cls(values, counts, label)

    @classmethod
    def from_network(cls, network: TemporalNetwork) -> "DurationDistribution":
        d = network.all_durations()
        if len(d) == 0:
            raise ConfigError("network has no encounters to build a duration distribution from")
        return cls.from_durations(d, label="network")

    @classmethod
    def log_uniform(cls, low=300, high=14400, step=300) -> "DurationDistribution":
        """Discrete log-uniform on multiples of ``step``: weight ∝ 1/d. Not fitted to data."""
        values = np.arange(low, high + step, step, dtype=float)
        values = values[values <= high]
        return cls(values, 1.0 / values, "synthetic-log-uniform")

    def mean(self) -> float:
        return float(self.values @ self.weights)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        return self.values[_inverse_cdf(cdf, rng.random(size))]


def sample_contact_count(dist: ContactCountDistribution, rng: np.random.Generator) -> int:
    return int(dist.sample(rng))


def sample_day(
    dist_n: ContactCountDistribution, dist_d: DurationDistribution, rng: np.random.Generator
) -> np.ndarray:
    """Meeting lengths of one sampled day."""
    n = sample_contact_count(dist_n, rng)
    return dist_d.sample(rng, n)


def project_risk(
    durations: Sequence[float], d_min: float, p_max_i: float, params: DiseaseParams
) -> float:
    """Probability of infection from one day's meetings with infectious people."""
    p = params.with_(d_min=d_min)
    return daily_infection_prob((encounter_prob(d, p) for d in durations), p_max_i)


def _project_days(days, params: DiseaseParams, d_min: float, p_max_i: float) -> np.ndarray:
    p = params.with_(d_min=d_min)
    out = np.empty(len(days))
    for j, d in enumerate(days):
        out[j] = 1.0 - np.prod(1.0 - encounter_prob_array(d, p) * p_max_i)
    return out


@dataclass
class RiskGridResult:
    sweep_param: str
    sweep_value: np.ndarray
    replica: np.ndarray
    n_meetings: np.ndarray
    total_exposure: np.ndarray
    p_infected: np.ndarray

    def __len__(self):
        return len(self.replica)

    def select(self, value: float) -> "RiskGridResult":
        m = self.sweep_value == value
        return RiskGridResult(self.sweep_param, self.sweep_value[m], self.replica[m],
                              self.n_meetings[m], self.total_exposure[m], self.p_infected[m])


def risk_grid(
    dist_n: ContactCountDistribution,
    dist_d: DurationDistribution,
    sweep_param: str,
    values: Sequence[float],
    replicas: int = 200,
    params: Optional[DiseaseParams] = None,
    fixed: Optional[float] = None,
    seed=None,
) -> RiskGridResult:
    """
    Score ``replicas`` sampled days for every swept value.

    ``sweep_param`` is ``"d_min"`` or ``"p_max"``. ``fixed`` is the value of
    the other one (``p_max = 1`` or ``d_min = 0`` when omitted). The same
    sampled days are reused across swept values so rows are directly
    comparable.
    """
    if sweep_param not in ("d_min", "p_max"):
        raise ConfigError(f"sweep_param must be 'd_min' or 'p_max', got {sweep_param!r}")
    if len(values) == 0:
        raise ConfigError("sweep values are empty")
    params = params or DiseaseParams(p_epsilon=0.0)
    rng = np.random.default_rng(seed)
    days = [sample_day(dist_n, dist_d, rng) for _ in range(replicas)]
    n_meet = np.array([len(d) for d in days])
    exposure = np.array([d.sum() for d in days], dtype=float)

    cols = {k: [] for k in ("v", "r", "n", "e", "p")}
    for v in values:
        if sweep_param == "d_min":
            probs = _project_days(days, params, v, 1.0 if fixed is None else fixed)
        else:
            probs = _project_days(days, params, 0.0 if fixed is None else fixed, v)
        cols["v"].append(np.full(replicas, float(v)))
        cols["r"].append(np.arange(replicas))
        cols["n"].append(n_meet)
        cols["e"].append(exposure)
        cols["p"].append(probs)
    cat = {k: np.concatenate(v) for k, v in cols.items()}
    return RiskGridResult(sweep_param, cat["v"], cat["r"], cat["n"], cat["e"], cat["p"])


def low_exposure_fit(result: RiskGridResult, value: float):
    """
    Pearson r and least-squares slope of ``p_infected`` on total exposure,
    over the days whose exposure is at or below the median.
    """
    sub = result.select(value)
    keep = sub.total_exposure <= np.median(sub.total_exposure)
    x, y = sub.total_exposure[keep], sub.p_infected[keep]
    r = float(np.corrcoef(x, y)[0, 1])
    slope = float(np.polyfit(x, y, 1)[0])
    return r, slope


def write_grid_csv(result: RiskGridResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep_param", "sweep_value", "replica", "n_meetings", "total_exposure_s", "p_infected"])
        for v, r, n, e, p in zip(result.sweep_value, result.replica, result.n_meetings,
                                 result.total_exposure, result.p_infected):
            w.writerow([result.sweep_param, format(v, ".9g"), int(r), int(n),
                        format(e, ".9g"), format(p, ".9g")])
