"""Flat `key = value` config files and mapping <-> SimConfig conversion.

The same mapping form travels over the wire (session reset payloads), so
parsing is shared here. Weight overrides use the five ``w_*`` keys: when
any is present, the base values come from the preset (or balanced) and
the given keys override it.
"""
from __future__ import annotations

from typing import Dict, Mapping, Optional, Tuple

from .domain import InvalidConfigError, RewardWeights, SimConfig, WEIGHT_NAMES
from .reward import preset_weights

_INT_FIELDS = {
    "intervals_per_episode",
    "max_tasks_per_interval",
    "num_participants",
    "grid_width",
    "grid_height",
    "weather_period",
    "seed",
    "required_participants",
}
_FLOAT_FIELDS = {
    "speed_min",
    "speed_max",
    "weather_amplitude",
    "cancel_prob",
    "fare_base",
    "fare_rate",
    "energy_e0",
    "energy_e1",
    "fare_scale",
}
_OPT_FLOAT_FIELDS = {"dist_scale", "time_scale", "energy_scale"}
_BOOL_FIELDS = {"resample_records", "fixed_task_count", "record_events"}
_STR_FIELDS = {"data_source"}
_OPT_STR_FIELDS = {"trip_records_path", "preset"}

CONFIG_KEYS = frozenset(
    _INT_FIELDS
    | _FLOAT_FIELDS
    | _OPT_FLOAT_FIELDS
    | _BOOL_FIELDS
    | _STR_FIELDS
    | _OPT_STR_FIELDS
    | {"bbox"}
    | set(WEIGHT_NAMES)
)


def _parse_scalar(raw: str):
    text = raw.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> Dict[str, object]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    mapping: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise InvalidConfigError(f"line {lineno}: expected key = value")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key == "bbox":
            parts = [p for p in raw.replace(",", " ").split() if p]
            try:
                mapping[key] = tuple(float(p) for p in parts)
            except ValueError:
                raise InvalidConfigError(f"line {lineno}: bbox needs four numbers") from None
        else:
            mapping[key] = _parse_scalar(raw)
    return mapping


def _coerce_bbox(value) -> Tuple[float, float, float, float]:
    try:
        parts = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise InvalidConfigError("bbox must be four numbers") from None
    if len(parts) != 4:
        raise InvalidConfigError("bbox must be four numbers")
    return parts


def config_from_mapping(mapping: Mapping[str, object]) -> SimConfig:
    """Build a validated SimConfig from a flat mapping."""
    unknown = sorted(set(mapping) - CONFIG_KEYS)
    if unknown:
        raise InvalidConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs: Dict[str, object] = {}
    for key, value in mapping.items():
        if key in WEIGHT_NAMES:
            continue
        if key == "bbox":
            kwargs[key] = None if value is None else _coerce_bbox(value)
        elif key in _INT_FIELDS:
            try:
                kwargs[key] = int(value)
            except (TypeError, ValueError):
                raise InvalidConfigError(f"{key} must be an integer") from None
        elif key in _FLOAT_FIELDS or (key in _OPT_FLOAT_FIELDS and value is not None):
            try:
                kwargs[key] = float(value)
            except (TypeError, ValueError):
                raise InvalidConfigError(f"{key} must be a number") from None
        elif key in _OPT_FLOAT_FIELDS:
            kwargs[key] = None
        elif key in _BOOL_FIELDS:
            if not isinstance(value, bool):
                raise InvalidConfigError(f"{key} must be true or false")
            kwargs[key] = value
        else:
            kwargs[key] = None if value is None else str(value)

    given_weights = {k: mapping[k] for k in WEIGHT_NAMES if k in mapping}
    if given_weights:
        preset = kwargs.get("preset", "balanced") or "balanced"
        base = preset_weights(preset)
        merged = {name: getattr(base, name) for name in WEIGHT_NAMES}
        for name, value in given_weights.items():
            try:
                merged[name] = float(value)
            except (TypeError, ValueError):
                raise InvalidConfigError(f"{name} must be a number") from None
        kwargs["weights"] = RewardWeights(**merged)

    config = SimConfig(**kwargs)
    config.validate()
    return config


def load_config(path: str) -> SimConfig:
    with open(path) as fh:
        return config_from_mapping(parse_config_text(fh.read()))


def config_to_mapping(config: SimConfig) -> Dict[str, object]:
    """Flat JSON-friendly form; inverse of config_from_mapping."""
    out: Dict[str, object] = {
        "intervals_per_episode": config.intervals_per_episode,
        "max_tasks_per_interval": config.max_tasks_per_interval,
        "num_participants": config.num_participants,
        "grid_width": config.grid_width,
        "grid_height": config.grid_height,
        "speed_min": config.speed_min,
        "speed_max": config.speed_max,
        "weather_amplitude": config.weather_amplitude,
        "weather_period": config.weather_period,
        "cancel_prob": config.cancel_prob,
        "seed": config.seed,
        "data_source": config.data_source,
        "resample_records": config.resample_records,
        "fixed_task_count": config.fixed_task_count,
        "record_events": config.record_events,
        "fare_base": config.fare_base,
        "fare_rate": config.fare_rate,
        "energy_e0": config.energy_e0,
        "energy_e1": config.energy_e1,
        "required_participants": config.required_participants,
        "fare_scale": config.fare_scale,
    }
    for key in ("trip_records_path", "preset", "dist_scale", "time_scale", "energy_scale"):
        value = getattr(config, key)
        if value is not None:
            out[key] = value
    if config.bbox is not None:
        out["bbox"] = list(config.bbox)
    if config.weights is not None:
        for name in WEIGHT_NAMES:
            out[name] = getattr(config.weights, name)
    return out


def merge_config(base: SimConfig, overrides: Optional[Mapping[str, object]]) -> SimConfig:
    """Base config with a mapping of field overrides applied."""
    if not overrides:
        return base
    merged = config_to_mapping(base)
    merged.update(overrides)
    return config_from_mapping(merged)
