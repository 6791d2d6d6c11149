"""Interaction-driven contagion simulation with individual outcomes on temporal contact networks."""

from .contagion import (
    DiseaseParams,
    daily_infection_prob,
    daily_infection_prob_count_based,
    encounter_prob,
    gathering_effective_duration,
)
from .disease import Event, HealthState, Individual, ProgressionDelays, on_exposure, step
from .errors import ConfigError, DataError
from .risk import (
    ContactCountDistribution,
    DurationDistribution,
    RiskGridResult,
    project_risk,
    risk_grid,
)
from .simulation import (
    DailyReport,
    EnsembleSummary,
    ScenarioConfig,
    SusceptibilitySpec,
    beds_timeseries,
    place_patients_zero,
    run_ensemble,
    run_once,
    run_replicas,
    sweep_asymptomatic,
)
from .temporal_graph import (
    Encounter,
    Gathering,
    ScanRecord,
    Snapshot,
    TemporalNetwork,
    build_network,
    detect_gatherings,
    duration_histogram,
    load_interactions,
    split_density,
    temporal_density,
)

__version__ = "0.1.0"
