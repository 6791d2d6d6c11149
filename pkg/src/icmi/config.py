"""
Scenario configuration files.

Flat INI-style key/value text with sections, read with :mod:`configparser`.
Every key is optional; missing keys fall back to the library defaults.

.. code:: ini

    [disease]
    mode = duration_based        ; or count_based
    d_min = 0                    ; seconds
    d_max = 3600
    p_max = 0.5
    p_epsilon = 0.001

    [delays]
    t1 = 7                       ; ... t8, in days
    incubation_symptomatic = 5
    incubation_asymptomatic = 5

    [population]
    susceptibility = constant 0.2    ; | mixture <young_fraction> [young] [old]
                                     ; | file <path> | values <s_0> <s_1> ...
    patient_zero_count = 1

    [run]
    iterations = 200
    master_seed = 0
    extra_days = 0

    [network]
    rssi_threshold = -90
    window_length = 86400
    scan_interval = 300
    gatherings = true

    [sweep]
    fractions = 0.1, 0.3, 0.5, 0.7, 0.9
    densities = 1, 2, 3
    split_seed = 0

    [risk]
    a = 0.051
    b = -0.635
    n_min = 1
    n_max = 120
    replicas = 200
    seed = 0
    d_max = 3600
    p_epsilon = 0
    d_min_sweep = 0, 60, 300, 900
    p_max_for_d_min_sweep = 1.0
    p_max_sweep = 1.0, 0.75, 0.5, 0.25
    d_min_for_p_max_sweep = 0
    durations = synthetic         ; or data (empirical, from --data)

Values can be overridden from the environment with
``ICMI_<SECTION>_<KEY>`` (upper case), e.g. ``ICMI_RUN_ITERATIONS=10``.
``file`` paths are resolved relative to the config file.

A run manifest (``manifest.json``) written by the command-line tool is also
accepted wherever a config file is: its embedded effective configuration
is used and the dataset checksum it records is checked against ``--data``.
"""

from __future__ import annotations

import configparser
import io
import json
import os
from dataclasses import asdict as dataclasses_asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .contagion import DiseaseParams
from .disease import ProgressionDelays
from .errors import ConfigError
from .simulation import ScenarioConfig, SusceptibilitySpec

ENV_PREFIX = "ICMI_"
SECTIONS = ("disease", "delays", "population", "run", "network", "sweep", "risk")
PRESET_PACKAGE = "icmi.presets"


def preset_names() -> list[str]:
    return sorted(
        p.name[:-4] for p in resources.files(PRESET_PACKAGE).iterdir() if p.name.endswith(".ini")
    )


def preset_text(name: str) -> str:
    path = resources.files(PRESET_PACKAGE) / f"{name}.ini"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text()


@dataclass
class NetworkOptions:
    rssi_threshold: int = -90
    window_length: int = 86400
    scan_interval: int = 300
    gatherings: bool = True


@dataclass
class SweepOptions:
    fractions: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    densities: tuple = (1,)
    split_seed: int = 0


@dataclass
class RiskOptions:
    a: float = 0.051
    b: float = -0.635
    n_min: int = 1
    n_max: int = 120
    replicas: int = 200
    seed: int = 0
    d_max: float = 3600.0
    p_epsilon: float = 0.0
    d_min_sweep: tuple = (0.0, 60.0, 300.0, 900.0)
    p_max_for_d_min_sweep: float = 1.0
    p_max_sweep: tuple = (1.0, 0.75, 0.5, 0.25)
    d_min_for_p_max_sweep: float = 0.0
    durations: str = "synthetic"


@dataclass
class Settings:
    """Everything a config file can set."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    network: NetworkOptions = field(default_factory=NetworkOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)
    risk: RiskOptions = field(default_factory=RiskOptions)
    source: Optional[str] = None
    raw: dict = field(default_factory=dict)
    expected_dataset: Optional[str] = None


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _parse_susceptibility(text: str, base_dir: Path) -> SusceptibilitySpec:
    parts = text.split()
    if not parts:
        raise ConfigError("empty susceptibility spec")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "constant" and len(args) == 1:
            return SusceptibilitySpec.constant(float(args[0]))
        if kind == "mixture" and 1 <= len(args) <= 3:
            return SusceptibilitySpec.mixture(*(float(a) for a in args))
        if kind == "values" and args:
            return SusceptibilitySpec.vector([float(a) for a in args])
        if kind == "file" and len(args) == 1:
            path = Path(args[0])
            if not path.is_absolute():
                path = base_dir / path
            return SusceptibilitySpec.vector(np.loadtxt(path, delimiter=",", ndmin=1))
    except (ValueError, OSError) as exc:
        raise ConfigError(f"bad susceptibility spec {text!r}: {exc}") from None
    raise ConfigError(f"bad susceptibility spec {text!r}")


def _read_parser(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
    for key, value in os.environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        section, _, option = key[len(ENV_PREFIX):].lower().partition("_")
        if section in SECTIONS and option:
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, option, value)
    return cp


def parse_settings(text: str, base_dir=".", source: Optional[str] = None) -> Settings:
    cp = _read_parser(text)
    base_dir = Path(base_dir)

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                return conv(raw)
            except ValueError:
                raise ConfigError(f"[{section}] {key} = {raw!r} is not valid") from None
        return default

    def check_keys(section, allowed):
        if cp.has_section(section):
            extra = set(cp.options(section)) - set(allowed)
            if extra:
                raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)

    dp = DiseaseParams()
    check_keys("disease", ["mode", "d_min", "d_max", "p_max", "p_epsilon"])
    params = DiseaseParams(
        d_min=get("disease", "d_min", float, dp.d_min),
        d_max=get("disease", "d_max", float, dp.d_max),
        p_max=get("disease", "p_max", float, dp.p_max),
        p_epsilon=get("disease", "p_epsilon", float, dp.p_epsilon),
        mode=get("disease", "mode", str.strip, dp.mode),
    )

    dd = ProgressionDelays()
    delay_keys = [f"t{i}" for i in range(1, 9)] + ["incubation_symptomatic", "incubation_asymptomatic"]
    check_keys("delays", delay_keys)
    delays = ProgressionDelays(**{k: get("delays", k, int, getattr(dd, k)) for k in delay_keys})

    check_keys("population", ["susceptibility", "patient_zero_count"])
    susc = get("population", "susceptibility", lambda t: _parse_susceptibility(t, base_dir),
               SusceptibilitySpec())
    sc = ScenarioConfig()
    check_keys("run", ["iterations", "master_seed", "extra_days"])
    scenario = ScenarioConfig(
        params=params,
        delays=delays,
        susceptibility=susc,
        patient_zero_count=get("population", "patient_zero_count", int, sc.patient_zero_count),
        iterations=get("run", "iterations", int, sc.iterations),
        master_seed=get("run", "master_seed", int, sc.master_seed),
        extra_days=get("run", "extra_days", int, sc.extra_days),
    )

    no = NetworkOptions()
    check_keys("network", ["rssi_threshold", "window_length", "scan_interval", "gatherings"])
    network = NetworkOptions(
        rssi_threshold=get("network", "rssi_threshold", int, no.rssi_threshold),
        window_length=get("network", "window_length", int, no.window_length),
        scan_interval=get("network", "scan_interval", int, no.scan_interval),
        gatherings=get("network", "gatherings", boolean, no.gatherings),
    )

    so = SweepOptions()
    check_keys("sweep", ["fractions", "densities", "split_seed"])
    sweep = SweepOptions(
        fractions=get("sweep", "fractions", _floats, so.fractions),
        densities=get("sweep", "densities", _ints, so.densities),
        split_seed=get("sweep", "split_seed", int, so.split_seed),
    )

    ro = RiskOptions()
    check_keys("risk", list(RiskOptions.__dataclass_fields__))
    risk = RiskOptions(
        a=get("risk", "a", float, ro.a),
        b=get("risk", "b", float, ro.b),
        n_min=get("risk", "n_min", int, ro.n_min),
        n_max=get("risk", "n_max", int, ro.n_max),
        replicas=get("risk", "replicas", int, ro.replicas),
        seed=get("risk", "seed", int, ro.seed),
        d_max=get("risk", "d_max", float, ro.d_max),
        p_epsilon=get("risk", "p_epsilon", float, ro.p_epsilon),
        d_min_sweep=get("risk", "d_min_sweep", _floats, ro.d_min_sweep),
        p_max_for_d_min_sweep=get("risk", "p_max_for_d_min_sweep", float, ro.p_max_for_d_min_sweep),
        p_max_sweep=get("risk", "p_max_sweep", _floats, ro.p_max_sweep),
        d_min_for_p_max_sweep=get("risk", "d_min_for_p_max_sweep", float, ro.d_min_for_p_max_sweep),
        durations=get("risk", "durations", str.strip, ro.durations),
    )
    if risk.durations not in ("synthetic", "data"):
        raise ConfigError("[risk] durations must be 'synthetic' or 'data'")
    if risk.replicas < 1:
        raise ConfigError("[risk] replicas must be >= 1")

    raw = {s: dict(cp.items(s)) for s in cp.sections()}
    return Settings(scenario, network, sweep, risk, source, raw)


def _susceptibility_text(spec: SusceptibilitySpec) -> str:
    if spec.kind == "constant":
        return f"constant {spec.value!r}"
    if spec.kind == "mixture":
        return f"mixture {spec.young_fraction!r} {spec.young!r} {spec.old!r}"
    return "values " + " ".join(repr(v) for v in spec.values)


def settings_to_ini(settings: Settings) -> str:
    """Effective configuration as config-file text; parses back to equal settings."""
    sc = settings.scenario

    def seq(xs):
        return ", ".join(repr(x) for x in xs)

    cp = configparser.ConfigParser()
    p = sc.params
    cp["disease"] = {"mode": p.mode, "d_min": repr(p.d_min), "d_max": repr(p.d_max),
                     "p_max": repr(p.p_max), "p_epsilon": repr(p.p_epsilon)}
    cp["delays"] = {k: str(v) for k, v in dataclasses_asdict(sc.delays).items()}
    cp["population"] = {"susceptibility": _susceptibility_text(sc.susceptibility),
                        "patient_zero_count": str(sc.patient_zero_count)}
    cp["run"] = {"iterations": str(sc.iterations), "master_seed": str(sc.master_seed),
                 "extra_days": str(sc.extra_days)}
    n = settings.network
    cp["network"] = {"rssi_threshold": str(n.rssi_threshold), "window_length": str(n.window_length),
                     "scan_interval": str(n.scan_interval), "gatherings": str(n.gatherings).lower()}
    w = settings.sweep
    cp["sweep"] = {"fractions": seq(w.fractions), "densities": seq(w.densities),
                   "split_seed": str(w.split_seed)}
    cp["risk"] = {k: seq(v) if isinstance(v, tuple) else (v if isinstance(v, str) else repr(v))
                  for k, v in dataclasses_asdict(settings.risk).items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _from_manifest(path: Path) -> Settings:
    try:
        manifest = json.loads(path.read_text())
        text = manifest["config_ini"]
    except (ValueError, KeyError, TypeError):
        raise ConfigError(f"{path} is not a run manifest") from None
    settings = parse_settings(text, base_dir=path.parent, source=f"manifest:{path}")
    settings.expected_dataset = manifest.get("dataset_checksum")
    return settings


def load_settings(path_or_preset: Optional[str]) -> Settings:
    """
    Read a config file, a run manifest, or a shipped preset by name.
    ``None`` gives defaults.
    """
    if path_or_preset is None:
        return parse_settings("", source="<defaults>")
    path = Path(path_or_preset)
    if path.is_file():
        if path.suffix == ".json":
            return _from_manifest(path)
        return parse_settings(path.read_text(), base_dir=path.parent, source=str(path))
    if path.suffix or os.sep in str(path_or_preset):
        raise ConfigError(f"config file not found: {path_or_preset}")
    return parse_settings(preset_text(path_or_preset), source=f"preset:{path_or_preset}")
