"""Parse the key-value simulation config format.

Example::

    # comments start with '#'
    [simulation]
    n_bots = 1000
    duration = 14d

    [trust]
    model = ebay

Sections are optional; a key placed under a section must belong to it.
Durations accept ``s``, ``m``, ``h`` and ``d`` suffixes (bare numbers are
seconds). Unknown keys and sections are errors.
"""

from __future__ import annotations

import re
from dataclasses import replace
from typing import Any, Callable, Dict, Optional, Tuple

from .engine import ConfigError, SimConfig
from .sensor import SensorStrategy
from .trust import DEFAULT_THRESHOLDS, Model, TrustParams

_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}
_DURATION = re.compile(r"^([0-9]*\.?[0-9]+)\s*([smhd]?)$")


def parse_duration(text: str) -> int:
    m = _DURATION.match(text.strip().lower())
    if not m:
        raise ValueError(f"not a duration: {text!r}")
    seconds = float(m.group(1)) * _UNITS[m.group(2) or "s"]
    return int(round(seconds))


def _int(text: str) -> int:
    return int(text.strip())


def _float(text: str) -> float:
    return float(text.strip())


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _model(text: str) -> Optional[Model]:
    if text.strip().lower() in ("none", "off", "disabled", "baseline"):
        return None
    return Model.parse(text)


# key -> (section, converter)
KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "n_bots": ("simulation", _int),
    "n_sensors": ("simulation", _int),
    "duration": ("simulation", parse_duration),
    "mm_cycle": ("simulation", parse_duration),
    "seed": ("simulation", _int),
    "sensor_strategy": ("simulation", SensorStrategy.parse),
    "announcement_k": ("simulation", _int),
    "coverage_window": ("simulation", parse_duration),
    "debug": ("simulation", _bool),
    "model": ("trust", _model),
    "threshold": ("trust", _float),
    "min_experiences": ("trust", _int),
    "base_rate": ("trust", _float),
    "max_evidence": ("trust", _int),
    "initial_trust": ("trust", _float),
    "bcs_rate": ("trust", _float),
    "suspect_bcs_rate": ("trust", _float),
    "delta_min": ("trust", _int),
    "delta_max": ("trust", _int),
    "nl_capacity": ("membership", _int),
    "nl_low_watermark": ("membership", _int),
    "nl_reply_size": ("membership", _int),
    "inactivity_cycles": ("membership", _int),
    "response_timeout": ("membership", parse_duration),
    "mean_online": ("churn", parse_duration),
    "mean_offline": ("churn", parse_duration),
    "p_loss": ("noise", _float),
    "p_corrupt": ("noise", _float),
    "latency": ("noise", parse_duration),
    "interval": ("commands", parse_duration),
    "seed_fraction": ("commands", _float),
    "initial_id": ("commands", _int),
}
SECTIONS = sorted({section for section, _ in KEYS.values()})

_TRUST_FIELDS = {
    "threshold": "threshold",
    "min_experiences": "min_experiences",
    "base_rate": "base_rate",
    "max_evidence": "max_evidence",
    "initial_trust": "initial_trust",
}
_TOP_FIELDS = (
    "n_bots", "n_sensors", "duration", "mm_cycle", "seed", "sensor_strategy", "announcement_k",
    "coverage_window", "debug", "bcs_rate", "suspect_bcs_rate", "delta_min", "delta_max", "nl_capacity",
    "nl_low_watermark", "nl_reply_size", "inactivity_cycles", "response_timeout",
)


def read_values(text: str) -> Dict[str, Any]:
    """Tokenize and convert every assignment, without building a config."""
    values: Dict[str, Any] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        home, convert = KEYS[key]
        if section is not None and section != home:
            raise ConfigError(f"line {lineno}: key {key!r} belongs in [{home}], not [{section}]")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None
    return values


def build_config(values: Dict[str, Any], base: Optional[SimConfig] = None) -> SimConfig:
    cfg = base or SimConfig()
    top = {name: values[name] for name in _TOP_FIELDS if name in values}
    cfg = replace(cfg, **top)
    cfg = replace(
        cfg,
        churn=replace(cfg.churn, **{k: values[k] for k in ("mean_online", "mean_offline") if k in values}),
        noise=replace(cfg.noise, **{k: values[k] for k in ("p_loss", "p_corrupt", "latency") if k in values}),
        commands=replace(cfg.commands,
                         **{k: values[k] for k in ("interval", "seed_fraction", "initial_id") if k in values}),
    )

    trust_overrides = {field: values[key] for key, field in _TRUST_FIELDS.items() if key in values}
    if "model" in values and values["model"] is None:
        cfg = replace(cfg, trust=None)
    else:
        current = cfg.trust or TrustParams()
        model = values.get("model", current.model)
        if "threshold" not in trust_overrides and model is not current.model:
            trust_overrides["threshold"] = DEFAULT_THRESHOLDS[model]
        try:
            cfg = replace(cfg, trust=replace(current, model=model, **trust_overrides))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg.validate()


def parse_config(text: str, base: Optional[SimConfig] = None) -> SimConfig:
    return build_config(read_values(text), base)


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: SimConfig) -> str:
    """Render ``cfg`` back into the config format (round-trips through parse_config)."""
    def dur(seconds: int) -> str:
        for unit in ("d", "h", "m"):
            if seconds and seconds % _UNITS[unit] == 0:
                return f"{seconds // _UNITS[unit]}{unit}"
        return f"{seconds}s"

    lines = [
        "[simulation]",
        f"n_bots = {cfg.n_bots}",
        f"n_sensors = {cfg.n_sensors}",
        f"duration = {dur(cfg.duration)}",
        f"mm_cycle = {dur(cfg.mm_cycle)}",
        f"seed = {cfg.seed}",
        f"sensor_strategy = {cfg.sensor_strategy.value}",
        f"announcement_k = {cfg.announcement_k}",
        f"coverage_window = {dur(cfg.coverage_window)}",
        "",
        "[trust]",
    ]
    if cfg.trust is None:
        lines.append("model = none")
    else:
        t = cfg.trust
        lines += [
            f"model = {t.model.value}",
            f"threshold = {t.threshold!r}",
            f"min_experiences = {t.min_experiences}",
            f"base_rate = {t.base_rate!r}",
            f"max_evidence = {t.max_evidence}",
            f"initial_trust = {t.initial_trust!r}",
        ]
    lines += [
        f"bcs_rate = {cfg.bcs_rate!r}",
        f"suspect_bcs_rate = {cfg.suspect_bcs_rate!r}",
        f"delta_min = {cfg.delta_min}",
        f"delta_max = {cfg.delta_max}",
        "",
        "[membership]",
        f"nl_capacity = {cfg.nl_capacity}",
        f"nl_low_watermark = {cfg.nl_low_watermark}",
        f"nl_reply_size = {cfg.nl_reply_size}",
        f"inactivity_cycles = {cfg.inactivity_cycles}",
        f"response_timeout = {dur(cfg.response_timeout)}",
        "",
        "[churn]",
        f"mean_online = {dur(cfg.churn.mean_online)}",
        f"mean_offline = {dur(cfg.churn.mean_offline)}",
        "",
        "[noise]",
        f"p_loss = {cfg.noise.p_loss!r}",
        f"p_corrupt = {cfg.noise.p_corrupt!r}",
        f"latency = {dur(cfg.noise.latency)}",
        "",
        "[commands]",
        f"interval = {dur(cfg.commands.interval)}",
        f"seed_fraction = {cfg.commands.seed_fraction!r}",
        f"initial_id = {cfg.commands.initial_id}",
    ]
    return "\n".join(lines) + "\n"
