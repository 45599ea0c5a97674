import pytest

from botsim.config import format_config, load_config, parse_config, parse_duration
from botsim.engine import DAY, HOUR, ConfigError, SimConfig
from botsim.sensor import SensorStrategy
from botsim.trust import DEFAULT_THRESHOLDS, Model


@pytest.mark.parametrize("text, seconds", [
    ("14d", 14 * DAY), ("40m", 2400), ("6h", 6 * HOUR), ("90", 90), ("1.5h", 5400), ("60 s", 60),
])
def test_parse_duration(text, seconds):
    assert parse_duration(text) == seconds


def test_parse_duration_rejects_unknown_unit():
    with pytest.raises(ValueError):
        parse_duration("3w")


def test_duration_key():
    assert parse_config("duration = 14d").duration == 14 * DAY


def test_empty_file_gives_defaults():
    cfg = parse_config("")
    assert cfg == SimConfig()
    assert (cfg.n_bots, cfg.n_sensors, cfg.trust.model, cfg.seed) == (1000, 10, Model.EBAY, 0)


def test_p_loss_out_of_range():
    with pytest.raises(ConfigError, match="p_loss"):
        parse_config("[noise]\np_loss = 1.5\n")


def test_unknown_key_names_line():
    with pytest.raises(ConfigError, match=r"line 3: unknown key 'n_botz'"):
        parse_config("# header\n[simulation]\nn_botz = 5\n")


def test_malformed_value_names_key_and_line():
    with pytest.raises(ConfigError, match=r"line 2: key 'n_bots'"):
        parse_config("[simulation]\nn_bots = many\n")


def test_key_in_wrong_section():
    with pytest.raises(ConfigError, match=r"belongs in \[noise\]"):
        parse_config("[trust]\np_loss = 0.1\n")


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("seed = 1\nseed = 2\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[gravity]\n")


def test_model_switch_takes_that_models_threshold():
    cfg = parse_config("[trust]\nmodel = beta\n")
    assert cfg.trust.model is Model.BETA
    assert cfg.trust.threshold == DEFAULT_THRESHOLDS[Model.BETA]
    assert parse_config("model = sl\nthreshold = 0.3\n").trust.threshold == 0.3


def test_model_none_disables_trust():
    assert parse_config("model = none").trust is None


def test_full_example():
    text = """
    [simulation]
    n_bots = 500
    sensor_strategy = silent
    seed = 7
    [churn]
    mean_online = 4h
    [noise]
    p_loss = 0.05   # elevated
    """
    cfg = parse_config(text)
    assert cfg.n_bots == 500 and cfg.seed == 7
    assert cfg.sensor_strategy is SensorStrategy.SILENT
    assert cfg.churn.mean_online == 4 * HOUR and cfg.churn.mean_offline == 18 * HOUR
    assert cfg.noise.p_loss == 0.05


def test_base_is_not_mutated():
    base = SimConfig(seed=5)
    cfg = parse_config("n_bots = 10\nnl_low_watermark = 5\nnl_capacity = 8\nannouncement_k = 2", base)
    assert base.n_bots == 1000 and cfg.n_bots == 10 and cfg.seed == 5


@pytest.mark.parametrize("cfg", [
    SimConfig(),
    SimConfig(trust=None, seed=3),
    parse_config("model = ct\nmax_evidence = 20\nsensor_strategy = corrupt\np_corrupt = 0.01"),
])
def test_format_round_trips(cfg):
    assert parse_config(format_config(cfg)) == cfg


def test_shipped_default_config_matches_defaults():
    from pathlib import Path
    path = Path(__file__).resolve().parent.parent / "configs" / "default.conf"
    assert load_config(path) == SimConfig()
