"""Flat key-value configuration for simulations and sweeps.

The document is a flat JSON object; unknown keys are rejected and missing
keys take the default simulation parameters (10 stations per unit square,
path-loss exponent 3, 10 dB shadowing, 100 resource blocks per station,
10-block per-user cap, 4 Mbit/s target over 180 kHz blocks).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from .equilibria import ALLOCATE_MODES, SUPPLY_MODES
from .errors import ConfigError
from .metrics import DEPLOYMENTS, METHODS
from .radio import RadioParams


@dataclass(frozen=True)
class Config:
    lambda_n: float = 10.0
    lambda_m: float = 100.0
    deployment: str = "poisson"
    beta: float = 1.0
    window_side: float = 1.0
    pathloss_exponent: float = 3.0
    shadowing_sigma_db: float = 10.0
    tx_power: float = 1.0
    noise_power: float = 0.0
    capacity_target_bps: float = 4.0e6
    rb_bandwidth_hz: float = 1.8e5
    rb_per_station: int = 100
    rb_max_per_user: int = 10
    min_distance: float = 1e-3
    method: str = "exact"
    supply_mode: str = "inequality"
    allocate_mode: str = "demand_capped"
    support_threshold: float = 1e-9
    tol: float = 1e-8
    cost_weight: object = "auto"

    def radio_params(self) -> RadioParams:
        return RadioParams(
            pathloss_exponent=self.pathloss_exponent,
            shadowing_sigma_db=self.shadowing_sigma_db,
            tx_power=self.tx_power,
            noise_power=self.noise_power,
            capacity_target_bps=self.capacity_target_bps,
            rb_bandwidth_hz=self.rb_bandwidth_hz,
            rb_per_station=self.rb_per_station,
            rb_max_per_user=self.rb_max_per_user,
            min_distance=self.min_distance,
        )

    def as_dict(self) -> dict:
        return asdict(self)


_FLOAT_KEYS = {
    "lambda_n",
    "lambda_m",
    "beta",
    "window_side",
    "pathloss_exponent",
    "shadowing_sigma_db",
    "tx_power",
    "noise_power",
    "capacity_target_bps",
    "rb_bandwidth_hz",
    "min_distance",
    "support_threshold",
    "tol",
}
_INT_KEYS = {"rb_per_station", "rb_max_per_user"}
_STR_KEYS = {"deployment", "method", "supply_mode", "allocate_mode"}

_CHOICES = {
    "deployment": DEPLOYMENTS,
    "method": METHODS,
    "supply_mode": SUPPLY_MODES,
    "allocate_mode": ALLOCATE_MODES,
}

def parse_config(text: str) -> Config:
    """Parse a flat JSON config document, validating every key.

    Raises ConfigError naming the offending key on unknown keys, type
    mismatches, and invariant violations.
    """
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat JSON object")

    known = {f.name for f in fields(Config)}
    values = {}
    for key, raw in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key!r}")
        values[key] = _coerce(key, raw)

    cfg = Config(**values)
    _validate(cfg)
    return cfg


def _coerce(key: str, raw):
    if key in _FLOAT_KEYS:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {raw!r}")
        return float(raw)
    if key in _INT_KEYS:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(raw)
    if key in _STR_KEYS:
        if not isinstance(raw, str):
            raise ConfigError(f"{key}: expected a string, got {raw!r}")
        if raw not in _CHOICES[key]:
            raise ConfigError(f"{key}: must be one of {_CHOICES[key]}, got {raw!r}")
        return raw
    if key == "cost_weight":
        if raw == "auto":
            return "auto"
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or raw <= 0:
            raise ConfigError(f"cost_weight: expected 'auto' or a positive number, got {raw!r}")
        return float(raw)
    raise ConfigError(f"unhandled config key: {key!r}")


def _validate(cfg: Config) -> None:
    if not 0 < cfg.beta <= 1:
        raise ConfigError(f"beta: must be in (0, 1], got {cfg.beta}")
    for key in ("lambda_n", "lambda_m", "window_side", "capacity_target_bps",
                "rb_bandwidth_hz", "min_distance", "support_threshold", "tol"):
        if getattr(cfg, key) <= 0:
            raise ConfigError(f"{key}: must be > 0, got {getattr(cfg, key)}")
    if cfg.pathloss_exponent <= 2:
        raise ConfigError(f"pathloss_exponent: must be > 2, got {cfg.pathloss_exponent}")
    if cfg.shadowing_sigma_db < 0:
        raise ConfigError("shadowing_sigma_db: must be >= 0")
    if cfg.tx_power < 0 or cfg.noise_power < 0:
        raise ConfigError("powers must be >= 0")
    if cfg.rb_per_station < 1 or cfg.rb_max_per_user < 1:
        raise ConfigError("resource-block counts must be >= 1")
