import pytest

from icmi.config import load_settings, parse_settings, preset_names, settings_to_ini
from icmi.errors import ConfigError


def test_presets_ship():
    names = preset_names()
    for n in ("paper-fig2", "paper-fig2-fast", "paper-fig2-slow", "paper-fig5", "paper-fig3-4"):
        assert n in names
        load_settings(n)


def test_fast_and_slow_differ_only_in_threshold():
    fast, slow = load_settings("paper-fig2-fast").scenario, load_settings("paper-fig2-slow").scenario
    assert fast.params.d_min == 0 and slow.params.d_min == 60
    assert fast.params.p_max == slow.params.p_max
    assert fast.susceptibility == slow.susceptibility
    assert fast.master_seed == slow.master_seed


def test_defaults():
    s = load_settings(None)
    assert s.scenario.iterations == 200
    assert s.network.scan_interval == 300
    assert s.risk.a == 0.051


def test_full_file(tmp_path):
    (tmp_path / "s.csv").write_text("0.1,0.2,0.3\n")
    cfg = tmp_path / "c.ini"
    cfg.write_text(
        "[disease]\nmode = count_based\np_max = 0.3\n"
        "[delays]\nt6 = 3\n"
        "[population]\nsusceptibility = file s.csv\npatient_zero_count = 2\n"
        "[run]\niterations = 7 ; comment\n"
        "[network]\ngatherings = no\n"
        "[sweep]\nfractions = 0.2, 0.4\ndensities = 1 3\n"
    )
    s = load_settings(str(cfg))
    sc = s.scenario
    assert sc.params.mode == "count_based" and sc.params.p_max == 0.3
    assert sc.delays.t6 == 3
    assert sc.susceptibility.kind == "vector"
    assert list(sc.susceptibility.values) == [0.1, 0.2, 0.3]
    assert sc.patient_zero_count == 2 and sc.iterations == 7
    assert s.network.gatherings is False
    assert s.sweep.fractions == (0.2, 0.4) and s.sweep.densities == (1, 3)


def test_mixture_syntax():
    spec = parse_settings("[population]\nsusceptibility = mixture 0.4 0.05 0.8\n").scenario.susceptibility
    assert spec.kind == "mixture"


def test_env_override(monkeypatch):
    monkeypatch.setenv("ICMI_RUN_ITERATIONS", "11")
    monkeypatch.setenv("ICMI_DISEASE_P_MAX", "0.125")
    s = load_settings("paper-fig2")
    assert s.scenario.iterations == 11
    assert s.scenario.params.p_max == 0.125


@pytest.mark.parametrize(
    "text",
    [
        "[bogus]\nx = 1\n",
        "[run]\nspeed = 3\n",
        "[run]\niterations = many\n",
        "[disease]\np_max = 2\n",
        "[population]\nsusceptibility = gaussian 0.2\n",
        "[population]\nsusceptibility = file missing.csv\n",
        "[risk]\ndurations = magic\n",
        "[delays]\nt1 = -1\n",
        "not an ini",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_settings(text)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_settings("no-such-preset")
    with pytest.raises(ConfigError):
        load_settings("missing/file.ini")


@pytest.mark.parametrize("name", ["paper-fig2", "paper-fig2-slow", "paper-fig5", "paper-fig3-4"])
def test_ini_round_trip(name):
    s = load_settings(name)
    back = parse_settings(settings_to_ini(s))
    assert back.scenario == s.scenario
    assert (back.network, back.sweep, back.risk) == (s.network, s.sweep, s.risk)


def test_vector_round_trip():
    s = parse_settings("[population]\nsusceptibility = values 0.1 0.25 1\n")
    assert parse_settings(settings_to_ini(s)).scenario.susceptibility == s.scenario.susceptibility


def test_manifest_without_config_rejected(tmp_path):
    (tmp_path / "m.json").write_text("{}")
    with pytest.raises(ConfigError):
        load_settings(str(tmp_path / "m.json"))
