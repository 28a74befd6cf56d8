"""Scenario ingestion, defaults, validation and serialization.

Scenario files are JSON objects; missing optional blocks take module
defaults, invariant violations raise ConfigError naming the offending
field path (e.g. "ues[2].position").
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .agent import TrainConfig
from .env import EnvConfig
from .errors import ConfigError
from .geometry import ActionZone, Building, Position3, VenueSpec
from .linkmac import MacParams, UESpec
from .radio import (
    DEFAULT_MCS_TABLE,
    McsEntry,
    NlosStreetParams,
    RadioConfig,
    validate_mcs_table,
)

log = logging.getLogger(__name__)

LOG_LEVELS = {
    "Error": logging.ERROR,
    "Warning": logging.WARNING,
    "Info": logging.INFO,
    "Debug": logging.DEBUG,
}

INITIAL_POSITION_RULES = ("venue_center_z10", "above_central_building_5m")


def setup_logging(level_name: str) -> None:
    if level_name not in LOG_LEVELS:
        raise ConfigError(f"log_level: unknown level {level_name!r}")
    logging.basicConfig(
        level=LOG_LEVELS[level_name],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@dataclass(frozen=True, eq=True)
class ScenarioConfig:
    name: str
    venue: VenueSpec
    buildings: tuple[Building, ...]
    ues: tuple[UESpec, ...]
    radio: RadioConfig
    street: NlosStreetParams
    mac: MacParams
    mcs_table: tuple[McsEntry, ...]
    zone: ActionZone
    env: EnvConfig
    train: TrainConfig
    initial_position_rule: str | tuple[float, float, float]
    candidate_positions: tuple[Position3, ...]
    log_level: str
    path: str | None = field(default=None, compare=False)

    @cached_property
    def ue_xyz(self) -> np.ndarray:
        return np.array(
            [[u.position.x, u.position.y, u.position.z] for u in self.ues],
            dtype=np.float64,
        )

    @cached_property
    def building_boxes(self) -> np.ndarray:
        if not self.buildings:
            return np.zeros((0, 5), dtype=np.float64)
        return np.array(
            [
                [b.x_min, b.x_max, b.y_min, b.y_max, b.height]
                for b in self.buildings
            ],
            dtype=np.float64,
        )

    @cached_property
    def demand_sum(self) -> float:
        return sum(u.demand for u in self.ues)

    def central_building(self) -> Building:
        if not self.buildings:
            raise ConfigError(
                "initial_position: no buildings for above_central_building_5m"
            )
        cx = self.venue.width / 2.0
        cy = self.venue.depth / 2.0
        return min(
            self.buildings,
            key=lambda b: ((b.x_min + b.x_max) / 2 - cx) ** 2
            + ((b.y_min + b.y_max) / 2 - cy) ** 2,
        )

    def initial_position(self) -> Position3:
        rule = self.initial_position_rule
        if rule == "venue_center_z10":
            return Position3(self.venue.width / 2.0, self.venue.depth / 2.0, 10.0)
        if rule == "above_central_building_5m":
            b = self.central_building()
            return Position3(
                (b.x_min + b.x_max) / 2.0,
                (b.y_min + b.y_max) / 2.0,
                b.height + 5.0,
            )
        return Position3(*rule)

    def baseline_position(self) -> Position3:
        """The paper-style fixed comparison point (same as the start)."""
        return self.initial_position()


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise ConfigError(f"{path}.{key}: required field missing")
    return data[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _position(value, path: str) -> Position3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path}: expected [x, y, z]")
    try:
        return Position3(*(_number(v, path) for v in value))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _interval(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path}: expected [min, max]")
    lo, hi = (_number(v, path) for v in value)
    if lo > hi:
        raise ConfigError(f"{path}: min must not exceed max")
    return (lo, hi)


def _build(cls, data: dict, path: str, **extra):
    """Construct a config dataclass from a JSON object with field checking."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    allowed = set(cls.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field")
    try:
        return cls(**{**data, **extra})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_scenario(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    scenario = scenario_from_dict(data, source_path=path)
    log.info(
        "loaded scenario %s: %d buildings, %d UEs, demand %.1f Mbit/s",
        scenario.name, len(scenario.buildings), len(scenario.ues),
        scenario.demand_sum,
    )
    return scenario


def scenario_from_dict(data: dict, source_path: str | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario: expected a top-level object")

    known = {
        "name", "venue", "buildings", "ues", "radio", "street", "mac",
        "mcs_table", "zone", "env", "train", "initial_position",
        "candidate_positions", "log_level",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")

    name = data.get("name", "scenario")
    venue_data = _require(data, "venue", "scenario")
    venue = _build(VenueSpec, venue_data, "venue")

    buildings = []
    for i, bdata in enumerate(data.get("buildings", [])):
        b = _build(Building, bdata, f"buildings[{i}]")
        if (
            b.x_min < 0 or b.x_max > venue.width
            or b.y_min < 0 or b.y_max > venue.depth
        ):
            raise ConfigError(f"buildings[{i}]: footprint outside the venue")
        buildings.append(b)

    mcs_raw = data.get("mcs_table")
    if mcs_raw is None:
        mcs_table = DEFAULT_MCS_TABLE
    else:
        entries = [
            _build(McsEntry, e, f"mcs_table[{i}]") for i, e in enumerate(mcs_raw)
        ]
        mcs_table = tuple(entries)
        try:
            validate_mcs_table(mcs_table)
        except ValueError as exc:
            raise ConfigError(f"mcs_table: {exc}") from exc

    ues_raw = _require(data, "ues", "scenario")
    if not ues_raw:
        raise ConfigError("ues: at least one UE is required")
    ues = []
    for i, udata in enumerate(ues_raw):
        path_i = f"ues[{i}]"
        if not isinstance(udata, dict):
            raise ConfigError(f"{path_i}: expected an object")
        unknown = set(udata) - {"id", "position", "demand_mbps"}
        if unknown:
            raise ConfigError(f"{path_i}.{sorted(unknown)[0]}: unknown field")
        pos = _position(_require(udata, "position", path_i), f"{path_i}.position")
        demand = _number(
            _require(udata, "demand_mbps", path_i), f"{path_i}.demand_mbps"
        )
        if not (0 <= pos.x <= venue.width and 0 <= pos.y <= venue.depth):
            raise ConfigError(f"{path_i}.position: outside the venue")
        if any(b.contains_interior(pos) for b in buildings):
            raise ConfigError(f"{path_i}.position: inside a building interior")
        try:
            ue = UESpec.make(
                int(udata.get("id", i)), pos, demand, table=mcs_table
            )
        except Exception as exc:
            raise ConfigError(f"{path_i}.demand_mbps: {exc}") from exc
        ues.append(ue)
    if len({u.id for u in ues}) != len(ues):
        raise ConfigError("ues: duplicate UE ids")

    radio = _build(RadioConfig, data.get("radio", {}), "radio")

    street_data = dict(data.get("street", {}))
    if "avg_rooftop_height" not in street_data and buildings:
        street_data["avg_rooftop_height"] = sum(
            b.height for b in buildings
        ) / len(buildings)
    street = _build(NlosStreetParams, street_data, "street")

    mac = _build(MacParams, data.get("mac", {}), "mac")

    zone_data = _require(data, "zone", "scenario")
    if not isinstance(zone_data, dict):
        raise ConfigError("zone: expected an object")
    unknown = set(zone_data) - {"x", "y", "z"}
    if unknown:
        raise ConfigError(f"zone.{sorted(unknown)[0]}: unknown field")
    try:
        zone = ActionZone(
            x_range=_interval(_require(zone_data, "x", "zone"), "zone.x"),
            y_range=_interval(_require(zone_data, "y", "zone"), "zone.y"),
            z_range=_interval(_require(zone_data, "z", "zone"), "zone.z"),
        )
    except ValueError as exc:
        raise ConfigError(f"zone: {exc}") from exc

    env_cfg = _build(EnvConfig, data.get("env", {}), "env")
    train_cfg = _build(TrainConfig, data.get("train", {}), "train")

    initial = data.get("initial_position", "venue_center_z10")
    if isinstance(initial, str):
        if initial not in INITIAL_POSITION_RULES:
            raise ConfigError(f"initial_position: unknown rule {initial!r}")
        initial_rule: str | tuple[float, float, float] = initial
    else:
        initial_rule = _position(initial, "initial_position").as_tuple()

    candidates = tuple(
        _position(p, f"candidate_positions[{i}]")
        for i, p in enumerate(data.get("candidate_positions", []))
    )

    log_level = data.get("log_level", "Warning")
    if log_level not in LOG_LEVELS:
        raise ConfigError(f"log_level: unknown level {log_level!r}")

    return ScenarioConfig(
        name=name,
        venue=venue,
        buildings=tuple(buildings),
        ues=tuple(ues),
        radio=radio,
        street=street,
        mac=mac,
        mcs_table=mcs_table,
        zone=zone,
        env=env_cfg,
        train=train_cfg,
        initial_position_rule=initial_rule,
        candidate_positions=candidates,
        log_level=log_level,
        path=source_path,
    )


def scenario_to_dict(sc: ScenarioConfig) -> dict:
    """Serialize back to the file schema; load(serialize(x)) == x."""
    out: dict = {
        "name": sc.name,
        "venue": {"width": sc.venue.width, "depth": sc.venue.depth},
        "buildings": [
            {
                "x_min": b.x_min, "x_max": b.x_max,
                "y_min": b.y_min, "y_max": b.y_max,
                "height": b.height, "floors": b.floors,
                "rooms_x": b.rooms_x, "rooms_y": b.rooms_y,
            }
            for b in sc.buildings
        ],
        "ues": [
            {
                "id": u.id,
                "position": list(u.position.as_tuple()),
                "demand_mbps": u.demand,
            }
            for u in sc.ues
        ],
        "radio": {
            "frequency": sc.radio.frequency,
            "tx_power": sc.radio.tx_power,
            "antenna_gain_tx": sc.radio.antenna_gain_tx,
            "antenna_gain_rx": sc.radio.antenna_gain_rx,
            "noise_floor": sc.radio.noise_floor,
            "channel_width": sc.radio.channel_width,
            "guard_interval": sc.radio.guard_interval,
            "spatial_streams": sc.radio.spatial_streams,
        },
        "street": {
            "avg_rooftop_height": sc.street.avg_rooftop_height,
            "street_width": sc.street.street_width,
            "building_separation": sc.street.building_separation,
            "street_orientation": sc.street.street_orientation,
            "ue_antenna_height": sc.street.ue_antenna_height,
        },
        "mac": {
            "efficiency": sc.mac.efficiency,
            "overhead": sc.mac.overhead,
            "packet_size": sc.mac.packet_size,
        },
        "mcs_table": [
            {"index": e.index, "phy_rate": e.phy_rate, "min_snr": e.min_snr}
            for e in sc.mcs_table
        ],
        "zone": {
            "x": list(sc.zone.x_range),
            "y": list(sc.zone.y_range),
            "z": list(sc.zone.z_range),
        },
        "env": {
            "decision_interval": sc.env.decision_interval,
            "episode_duration": sc.env.episode_duration,
            "step_m": sc.env.step_m,
            "w1": sc.env.w1,
            "w2": sc.env.w2,
            "evaluator_mode": sc.env.evaluator_mode,
            "observe_throughput": sc.env.observe_throughput,
        },
        "train": {
            "episodes": sc.train.episodes,
            "eval_episodes": sc.train.eval_episodes,
            "batch": sc.train.batch,
            "learning_rate": sc.train.learning_rate,
            "gamma": sc.train.gamma,
            "epsilon_start": sc.train.epsilon_start,
            "epsilon_end": sc.train.epsilon_end,
            "epsilon_decay_fraction": sc.train.epsilon_decay_fraction,
            "target_sync": sc.train.target_sync,
            "warmup": sc.train.warmup,
            "buffer_capacity": sc.train.buffer_capacity,
        },
        "initial_position": (
            sc.initial_position_rule
            if isinstance(sc.initial_position_rule, str)
            else list(sc.initial_position_rule)
        ),
        "candidate_positions": [
            list(p.as_tuple()) for p in sc.candidate_positions
        ],
        "log_level": sc.log_level,
    }
    return out


def save_scenario(sc: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(scenario_to_dict(sc), fh, indent=2)
        fh.write("\n")


def builtin_scenario_path(name: str) -> str:
    """Path of a shipped scenario file (scenario_a/scenario_b/scenario_c)."""
    here = os.path.dirname(__file__)
    path = os.path.join(here, "scenarios", f"{name}.json")
    if not os.path.exists(path):
        raise ConfigError(f"no shipped scenario named {name!r}")
    return path
