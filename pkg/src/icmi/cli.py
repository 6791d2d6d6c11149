"""
Command-line entry point.

Subcommands: ``simulate``, ``sweep``, ``project-risk``, ``net-stats``.
Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.

``--data`` takes a scan CSV (``timestamp,user_a,user_b,rssi``) or
``synthetic[:SEED]`` for the bundled campus-like generator.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import hashlib
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import Settings, load_settings, preset_names, settings_to_ini
from .errors import ConfigError, DataError
from .risk import (
    ContactCountDistribution,
    DurationDistribution,
    risk_grid,
    write_grid_csv,
)
from .contagion import DiseaseParams
from .simulation import (
    ScenarioConfig,
    SusceptibilitySpec,
    run_replicas,
    summarize,
    write_census_csv,
    write_summary_json,
)
from .synthetic import cns_like_network
from .temporal_graph import (
    TemporalNetwork,
    build_network,
    duration_histogram,
    load_interactions,
    split_density,
    write_histogram,
    write_network_stats,
)

log = logging.getLogger("icmi")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _network_digest(network: TemporalNetwork) -> str:
    h = hashlib.sha256()
    h.update(str(network.node_count).encode())
    for s in network:
        for arr in (s.node_i, s.node_k, s.duration, s.in_gathering.astype(np.int64)):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        for g in s.gatherings:
            h.update(repr((sorted(g.members), g.duration)).encode())
    return h.hexdigest()


def load_network(data: str, settings: Settings) -> tuple[TemporalNetwork, str]:
    """Network plus a checksum identifying the dataset."""
    if data.startswith("synthetic"):
        _, _, seed = data.partition(":")
        try:
            net = cns_like_network(seed=int(seed) if seed else 0)
        except ValueError:
            raise DataError(f"bad synthetic seed in {data!r}") from None
        return net, "synthetic:" + _network_digest(net)
    path = Path(data)
    if not path.is_file():
        raise DataError(f"data file not found: {data}")
    opts = settings.network
    records = load_interactions(path, opts.rssi_threshold)
    net = build_network(records, opts.window_length, opts.scan_interval, opts.gatherings)
    return net, "sha256:" + _sha256_file(path)


def _checked_network(data: str, settings: Settings) -> tuple[TemporalNetwork, str]:
    # when replaying a manifest the dataset must be the one it was made from
    network, digest = load_network(data, settings)
    if settings.expected_dataset is not None and digest != settings.expected_dataset:
        raise DataError(f"dataset checksum {digest} does not match the manifest "
                        f"({settings.expected_dataset})")
    return network, digest


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _config_snapshot(settings: Settings) -> dict:
    return {
        "source": settings.source,
        "scenario": _jsonable(settings.scenario),
        "network": _jsonable(settings.network),
        "sweep": _jsonable(settings.sweep),
        "risk": _jsonable(settings.risk),
    }


def _write_manifest(out: Path, settings, started, files, dataset=None, extra=None):
    manifest = {
        "code_version": __version__,
        "config": _config_snapshot(settings),
        "config_ini": settings_to_ini(settings),
        "master_seed": settings.scenario.master_seed,
        "dataset_checksum": dataset,
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": {f: _sha256_file(out / f) for f in files},
    }
    manifest.update(extra or {})
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _apply_overrides(settings: Settings, args) -> Settings:
    sc = settings.scenario
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
        settings.risk = dataclasses.replace(settings.risk, seed=args.seed)
    if getattr(args, "iterations", None) is not None:
        changes["iterations"] = args.iterations
        settings.risk = dataclasses.replace(settings.risk, replicas=args.iterations)
    if changes:
        settings.scenario = dataclasses.replace(sc, **changes)
    return settings


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def cmd_simulate(args) -> int:
    started = _now()
    settings = _apply_overrides(load_settings(args.config), args)
    network, digest = _checked_network(args.data, settings)
    if len(network) == 0:
        raise DataError("network is empty; nothing to simulate")
    traj = run_replicas(network, settings.scenario, args.threads)
    summary = summarize(traj, network.node_count)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_census_csv(traj, out / "census.csv")
    write_summary_json(summary, out / "summary.json",
                       {"master_seed": settings.scenario.master_seed, "dataset": digest})
    _write_manifest(out, settings, started, ["census.csv", "summary.json"], digest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = _now()
    settings = _apply_overrides(load_settings(args.config), args)
    fractions = settings.sweep.fractions if args.fractions is None else args.fractions
    densities = settings.sweep.densities if args.densities is None else args.densities
    if len(fractions) == 0:
        raise ConfigError("fraction list is empty")
    if len(densities) == 0:
        raise ConfigError("density list is empty")
    for f in fractions:
        if not 0.0 < f < 1.0:
            raise ConfigError(f"asymptomatic fraction must lie in (0, 1), got {f}")
    network, digest = _checked_network(args.data, settings)
    if len(network) == 0:
        raise DataError("network is empty; nothing to simulate")

    base = settings.scenario
    rows = []
    for k in densities:
        net_k = split_density(network, k, seed=settings.sweep.split_seed)
        for f in fractions:
            cfg = dataclasses.replace(base, susceptibility=SusceptibilitySpec.for_asymptomatic_fraction(f))
            s = summarize(run_replicas(net_k, cfg, args.threads), network.node_count)
            rows.append((k, f, len(net_k), s.final_rate_mean, s.final_rate_sd))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w") as fh:
        fh.write("k,fraction,windows,infection_rate_mean,infection_rate_sd\n")
        for k, f, w, m, sd in rows:
            fh.write(f"{k},{f:.9g},{w},{m:.9g},{sd:.9g}\n")
    with open(out / "sweep.json", "w") as fh:
        json.dump(
            [{"k": k, "fraction": float(f"{f:.9g}"), "windows": w,
              "infection_rate": {"mean": float(f"{m:.9g}"), "sd": float(f"{sd:.9g}")}}
             for k, f, w, m, sd in rows],
            fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, settings, started, ["sweep.csv", "sweep.json"], digest)
    return EXIT_OK


def cmd_project_risk(args) -> int:
    started = _now()
    settings = _apply_overrides(load_settings(args.config), args)
    ro = settings.risk
    dist_n = ContactCountDistribution(ro.a, ro.b, ro.n_min, ro.n_max)
    digest = None
    if ro.durations == "data":
        if not args.data:
            raise ConfigError("[risk] durations = data needs --data")
        network, digest = _checked_network(args.data, settings)
        dist_d = DurationDistribution.from_network(network)
    else:
        dist_d = DurationDistribution.log_uniform()
    params = DiseaseParams(d_max=ro.d_max, p_epsilon=ro.p_epsilon)

    wanted = ["d_min", "p_max"] if args.sweep == "both" else [args.sweep]
    grids, seeds = {}, {}
    for j, name in enumerate(["d_min", "p_max"]):
        if name not in wanted:
            continue
        ss = np.random.SeedSequence(ro.seed, spawn_key=(j,))
        seeds[name] = {"entropy": ro.seed, "spawn_key": [j]}
        if name == "d_min":
            grids[name] = risk_grid(dist_n, dist_d, "d_min", ro.d_min_sweep, ro.replicas,
                                    params, ro.p_max_for_d_min_sweep, seed=ss)
        else:
            grids[name] = risk_grid(dist_n, dist_d, "p_max", ro.p_max_sweep, ro.replicas,
                                    params, ro.d_min_for_p_max_sweep, seed=ss)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, grid in grids.items():
        fname = f"risk_{name}.csv"
        write_grid_csv(grid, out / fname)
        files.append(fname)
    _write_manifest(out, settings, started, files, digest,
                    {"grid_seeds": seeds, "duration_distribution": dist_d.label})
    return EXIT_OK


def cmd_net_stats(args) -> int:
    started = _now()
    settings = _apply_overrides(load_settings(args.config), args)
    network, digest = _checked_network(args.data, settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_network_stats(network, out / "network_stats.csv")
    files = ["network_stats.csv"]
    if len(network):
        write_histogram(duration_histogram(network, args.bins), out / "duration_histogram.csv")
    else:
        warnings.warn("empty network: statistics are empty")
        with open(out / "duration_histogram.csv", "w") as fh:
            fh.write("bin_low_s,bin_high_s,avg_daily_count\n")
    files.append("duration_histogram.csv")
    _write_manifest(out, settings, started, files, digest)
    return EXIT_OK


def _float_list(text: str):
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _int_list(text: str):
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"config file or preset ({', '.join(preset_names())})")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--iterations", type=int, help="override the number of replicas")
    common.add_argument("--threads", type=int, default=1, help="worker processes for replicas")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="icmi", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run an outbreak ensemble")
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[common], help="asymptomatic fraction x density sweep")
    s.add_argument("--data", required=True)
    s.add_argument("--fractions", type=_float_list)
    s.add_argument("--densities", type=_int_list, help="pseudo-day split factors k")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("project-risk", parents=[common], help="personal risk grids")
    s.add_argument("--data", help="needed when [risk] durations = data")
    s.add_argument("--sweep", choices=("d_min", "p_max", "both"), default="both")
    s.set_defaults(func=cmd_project_risk)

    s = sub.add_parser("net-stats", parents=[common], help="density table and duration histogram")
    s.add_argument("--data", required=True)
    s.add_argument("--bins", type=int, default=20)
    s.set_defaults(func=cmd_net_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
