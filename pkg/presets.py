"""
Read-only laser presets reproducing the published figure setups
"""

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import ConfigError
from laser_params import LaserParams

logger = logging.getLogger(__name__)

PRESET_FILE = Path(__file__).with_name("figure_presets.json")
COMMANDS = ("spectrum", "steady", "linewidth", "rf")


@dataclass(frozen=True)
class FigurePreset:
    id: str
    description: str
    command: str
    lasers: Tuple[LaserParams, ...]
    pumps: Tuple[float, ...]
    kinds: Tuple[str, ...]
    popfluct: bool = True

    @property
    def laser(self) -> LaserParams:
        return self.lasers[0]

    def laser_for(self, gamma_perp: Optional[float] = None) -> LaserParams:
        if gamma_perp is None:
            return self.laser
        for params in self.lasers:
            if params.gamma_perp == gamma_perp:
                return params
        raise ConfigError(f"preset {self.id} has no laser with gamma_perp={gamma_perp} "
                          f"(available: {', '.join(str(p.gamma_perp) for p in self.lasers)})")


def _pumps(spec) -> Tuple[float, ...]:
    if isinstance(spec, dict) and "log" in spec:
        start, stop, num = spec["log"]
        return tuple(float(x) for x in np.geomspace(start, stop, int(num)))
    return tuple(float(x) for x in spec)


@lru_cache(maxsize=1)
def load_presets(path: str = str(PRESET_FILE)) -> Dict[str, FigurePreset]:
    """Load figure presets once"""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    base = data["base"]
    presets = {}
    for preset_id, entry in data["presets"].items():
        if entry["command"] not in COMMANDS:
            raise ConfigError(f"preset {preset_id}: unknown command {entry['command']!r}")
        lasers = tuple(LaserParams(gamma_perp=float(g), **base).validate() for g in entry["gamma_perp"])
        presets[preset_id] = FigurePreset(
            id=preset_id,
            description=entry["description"],
            command=entry["command"],
            lasers=lasers,
            pumps=_pumps(entry["pumps"]),
            kinds=tuple(entry["kinds"]),
            popfluct=bool(entry.get("popfluct", True)),
        )
    logger.debug("Loaded %d presets from %s", len(presets), path)
    return presets


def get_preset(preset_id: str) -> FigurePreset:
    presets = load_presets()
    if preset_id not in presets:
        raise ConfigError(f"unknown preset {preset_id!r}; valid ids: {', '.join(presets)}")
    return presets[preset_id]


def list_presets() -> List[FigurePreset]:
    return list(load_presets().values())
