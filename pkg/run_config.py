"""
Run configuration: JSON file + preset + command-line overrides.
"""

import copy
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from data_exporter import FORMATS
from errors import ConfigError
from laser_params import LaserParams, params_from_config
from mc_simulator import MCConfig
from presets import get_preset
from spectrum import SPECTRUM_KINDS, GridSpec

logger = logging.getLogger(__name__)

DEFAULT_RUN_CONFIG = {
    "physical": None,
    "dimensionless": None,
    "pumps": None,
    "kinds": ["full"],
    "grid": {},
    "mc": {},
    "popfluct": True,
    "format": "csv",
    "out": None,
    "preset": None,
    "seed": 0,
}

GRID_KEYS = ("w_min", "w_max", "n_log", "n_lin")
MC_KEYS = ("dt", "duration", "burn_in", "seed", "segments", "window", "scheme")


@dataclass(frozen=True)
class RunConfig:
    lasers: Tuple[LaserParams, ...]
    pumps: Tuple[float, ...]
    kinds: Tuple[str, ...] = ("full",)
    grid: GridSpec = GridSpec()
    mc: MCConfig = MCConfig()
    popfluct: bool = True
    format: str = "csv"
    out: Optional[str] = None
    preset: Optional[str] = None
    seed: int = 0
    resolved: Dict = field(default_factory=dict, compare=False)

    @property
    def laser(self) -> LaserParams:
        return self.lasers[0]

    def metadata(self) -> Dict:
        """Parameter echo embedded in every output file"""
        return {"config": self.resolved, "lasers": [p.to_dict() for p in self.lasers]}


def parse_pumps(value) -> Tuple[float, ...]:
    """
    Pump values from a list, a comma list '2,4,8', a linear range
    'start:stop:num' or a log range 'log:start:stop:num'.
    """
    if value is None:
        return ()
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        values = [float(value)]
    elif isinstance(value, (list, tuple)):
        try:
            values = [float(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"pumps must be numbers (got {value!r})") from exc
    elif isinstance(value, str):
        text = value.strip()
        try:
            if text.startswith("log:"):
                start, stop, num = text[4:].split(":")
                if float(start) <= 0:
                    raise ConfigError(f"log pump range must start above 0 (got {text!r})")
                values = np.geomspace(float(start), float(stop), int(num)).tolist()
            elif ":" in text:
                start, stop, num = text.split(":")
                values = np.linspace(float(start), float(stop), int(num)).tolist()
            else:
                values = [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"invalid pump spec {value!r}: {exc}") from exc
    else:
        raise ConfigError(f"invalid pump spec {value!r}")
    if not values:
        raise ConfigError(f"pump spec {value!r} is empty")
    if any(not np.isfinite(v) or v < 0 for v in values):
        raise ConfigError(f"pump values must be finite and >= 0 (got {value!r})")
    return tuple(values)


def _check_keys(block, allowed: Sequence[str], where: str) -> Dict:
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"'{where}' must be a JSON object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key '{where}.{unknown[0]}' (allowed: {', '.join(allowed)})")
    return block


def load_run_config(path: str) -> Dict:
    """Read a JSON run configuration and check its keys"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    _check_keys(config, tuple(DEFAULT_RUN_CONFIG), "config")
    return config


def merge_config(*layers: Optional[Dict]) -> Dict:
    """Later layers win; None values in a layer do not override"""
    merged = copy.deepcopy(DEFAULT_RUN_CONFIG)
    for layer in layers:
        for key, value in (layer or {}).items():
            if value is None:
                continue
            if key not in DEFAULT_RUN_CONFIG:
                raise ConfigError(f"unknown key 'config.{key}'")
            if key in ("grid", "mc") and isinstance(value, dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = copy.deepcopy(value)
    return merged


def build_run_config(file_config: Optional[Dict] = None, overrides: Optional[Dict] = None,
                     gamma_perp: Optional[float] = None) -> RunConfig:
    """
    Resolve defaults < preset < file < command line into a RunConfig.

    A preset named in either layer supplies the lasers, pumps and kinds unless
    the file or command line gives them explicitly.
    """
    layers = [file_config or {}, overrides or {}]
    preset_id = next((layer["preset"] for layer in reversed(layers) if layer.get("preset")), None)
    preset_layer = {}
    lasers: Tuple[LaserParams, ...] = ()
    if preset_id:
        preset = get_preset(preset_id)
        preset_layer = {"pumps": list(preset.pumps), "kinds": list(preset.kinds), "popfluct": preset.popfluct}
        lasers = preset.lasers
    config = merge_config(preset_layer, *layers)

    _check_keys(config["grid"], GRID_KEYS, "grid")
    _check_keys(config["mc"], MC_KEYS, "mc")
    if config["physical"] is not None or config["dimensionless"] is not None:
        lasers = (params_from_config(config),)
    elif not lasers:
        raise ConfigError("no laser parameters: give a 'physical' or 'dimensionless' block, or a preset")
    if gamma_perp is not None:
        # a multi-laser preset selects the matching laser, anything else is overridden
        matching = tuple(p for p in lasers if p.gamma_perp == float(gamma_perp))
        lasers = matching or (replace(lasers[0], gamma_perp=float(gamma_perp)).validate(),)

    kinds = config["kinds"]
    if isinstance(kinds, str):
        kinds = [k.strip() for k in kinds.split(",") if k.strip()]
    unknown_kinds = [k for k in kinds if k not in SPECTRUM_KINDS]
    if unknown_kinds:
        raise ConfigError(f"unknown spectrum kind {unknown_kinds[0]!r}; valid kinds: {', '.join(SPECTRUM_KINDS)}")
    if config["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)} (got {config['format']!r})")

    pumps = parse_pumps(config["pumps"]) or (lasers[0].P,)
    grid = config["grid"]
    try:
        grid_spec = GridSpec(**grid).validate()
    except TypeError as exc:
        raise ConfigError(f"invalid 'grid' block: {exc}") from exc
    mc_block = dict(config["mc"])
    mc_block.setdefault("seed", config["seed"])
    mc = MCConfig(**mc_block).validate()

    return RunConfig(
        lasers=lasers, pumps=pumps, kinds=tuple(kinds), grid=grid_spec, mc=mc,
        popfluct=bool(config["popfluct"]), format=config["format"], out=config["out"],
        preset=preset_id, seed=int(config["seed"]), resolved=config,
    )
