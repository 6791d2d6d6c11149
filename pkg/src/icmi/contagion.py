"""
Exposure probability kernel.

Per-encounter infection probability as a piecewise-linear function of the
meeting duration, the end-of-day complement product over all encounters with
infectious nodes, and the gathering rule that scales a gathering's duration by
the number of infectious members present.

Scalar functions are the reference; the ``*_array`` variants are what the
simulation engine calls and must agree with them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import ConfigError

COUNT_BASED = "count_based"
DURATION_BASED = "duration_based"
MODES = (COUNT_BASED, DURATION_BASED)


@dataclass(frozen=True)
class DiseaseParams:
    """
    Pathogen-level contagion parameters.

    Parameters
    ----------
    d_min : float
        Minimum exposure latency in seconds. Shorter encounters get ``p_epsilon``.
    d_max : float
        Duration (seconds) at which the per-encounter probability saturates at 1.
    p_max : float
        Probability of infection under maximal exposure.
    p_epsilon : float
        Residual probability assigned to encounters shorter than ``d_min``.
    mode : str
        ``"duration_based"`` (default) or ``"count_based"``.
    """

    d_min: float = 0.0
    d_max: float = 3600.0
    p_max: float = 0.5
    p_epsilon: float = 0.001
    mode: str = DURATION_BASED

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.p_max <= 1.0:
            raise ConfigError(f"p_max must lie in [0, 1], got {self.p_max}")
        if not 0.0 <= self.p_epsilon <= 1.0:
            raise ConfigError(f"p_epsilon must lie in [0, 1], got {self.p_epsilon}")
        if self.d_max <= 0:
            raise ConfigError(f"d_max must be positive, got {self.d_max}")
        if not 0.0 <= self.d_min <= self.d_max:
            raise ConfigError(
                f"need 0 <= d_min <= d_max, got d_min={self.d_min}, d_max={self.d_max}"
            )
        # keeps the piecewise law monotone across the d_min jump
        if self.d_min > 0 and self.p_epsilon > self.d_min / self.d_max:
            raise ConfigError(
                f"p_epsilon={self.p_epsilon} exceeds d_min/d_max="
                f"{self.d_min / self.d_max:.6g}; encounter probability would not be monotone"
            )

    def with_(self, **changes) -> "DiseaseParams":
        return replace(self, **changes)


def encounter_prob(duration: float, params: DiseaseParams) -> float:
    """Probability that a single encounter of ``duration`` seconds infects."""
    if duration < params.d_min:
        return params.p_epsilon
    if duration <= params.d_max:
        return duration / params.d_max
    return 1.0


def encounter_prob_array(durations, params: DiseaseParams) -> np.ndarray:
    d = np.asarray(durations, dtype=float)
    p = np.minimum(d / params.d_max, 1.0)
    return np.where(d < params.d_min, params.p_epsilon, p)


def gathering_effective_duration(duration: float, infectious_members: int) -> float:
    """Exposure duration inside a gathering: duration times infectious head count."""
    if infectious_members < 0:
        raise ValueError("infectious_members must be non-negative")
    return duration * infectious_members


def daily_infection_prob(encounter_probs: Iterable[float], p_max: float) -> float:
    """
    Probability of becoming infected over one window.

    ``1 - prod(1 - p * p_max)`` over the encounter probabilities; zero for an
    empty list.
    """
    survive = 1.0
    for p in encounter_probs:
        survive *= 1.0 - p * p_max
    return 1.0 - survive


def daily_infection_prob_count_based(infectious_contacts: int, p_max: float) -> float:
    """Count-based variant: every infectious contact carries ``p_max``."""
    if infectious_contacts < 0:
        raise ValueError("infectious_contacts must be non-negative")
    return 1.0 - (1.0 - p_max) ** infectious_contacts


def daily_infection_probs_by_node(
    targets: np.ndarray, encounter_probs: np.ndarray, p_max: float, n_nodes: int
) -> np.ndarray:
    """
    Grouped version of :func:`daily_infection_prob`.

    ``targets[j]`` is the exposed node of the j-th encounter. Returns an array
    of length ``n_nodes`` with each node's daily infection probability. The
    survival product is accumulated factor by factor in encounter order, so
    each entry equals the scalar kernel applied to that node's list.
    """
    survive = np.ones(n_nodes)
    if len(targets):
        np.multiply.at(survive, targets, 1.0 - np.asarray(encounter_probs) * p_max)
    return 1.0 - survive
