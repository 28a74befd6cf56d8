"""Episodic RL environment: 7-action move model, reward, episode clock.

One environment instance is single-threaded; run several instances (with
distinct seeds) for parallel experiments.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import EpisodeFinished, InvalidScenario
from .geometry import Position3, clamp_to_zone, count_los
from .linkmac import DesSession, LinkReport, analytic_evaluate

log = logging.getLogger(__name__)

ACTION_NAMES = ("up", "down", "forward", "backward", "left", "right", "stay")

# Action code -> unit move along (x, y, z); forward is +y, right is +x.
ACTION_DELTAS = (
    (0.0, 0.0, 1.0),
    (0.0, 0.0, -1.0),
    (0.0, 1.0, 0.0),
    (0.0, -1.0, 0.0),
    (-1.0, 0.0, 0.0),
    (1.0, 0.0, 0.0),
    (0.0, 0.0, 0.0),
)


@dataclass(frozen=True)
class EnvConfig:
    decision_interval: float = 0.1  # s
    episode_duration: float = 100.0  # s
    step_m: float = 1.0
    w1: float = 0.8
    w2: float = 0.2
    evaluator_mode: str = "analytic"  # or "des"
    observe_throughput: bool = False

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("reward weights must be >= 0")
        if abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise ValueError("reward weights must sum to 1")
        if self.decision_interval <= 0 or self.episode_duration <= 0:
            raise ValueError("durations must be > 0")
        ratio = self.episode_duration / self.decision_interval
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("episode_duration must be a multiple of decision_interval")
        if self.evaluator_mode not in ("analytic", "des"):
            raise ValueError("evaluator_mode must be 'analytic' or 'des'")

    @property
    def steps_per_episode(self) -> int:
        return round(self.episode_duration / self.decision_interval)


def compute_reward(
    n_los: int,
    n_total: int,
    throughput: float,
    demand_sum: float,
    w1: float,
    w2: float,
) -> float:
    """Weighted sum of normalized LoS count and normalized throughput.

    Throughput normalization is clamped at 1 so the reward stays within
    [0, 1] whenever w1 + w2 = 1.
    """
    if n_total <= 0:
        raise ValueError("n_total must be > 0")
    if demand_sum <= 0:
        raise ValueError("demand_sum must be > 0")
    return w1 * (n_los / n_total) + w2 * min(throughput / demand_sum, 1.0)


@dataclass(frozen=True)
class Observation:
    """UAV position (raw and zone-normalized) plus the LoS count."""

    position: Position3
    normalized: tuple[float, float, float]
    n_los: int
    n_ues: int
    throughput: float | None = None

    def vector(self) -> np.ndarray:
        """Normalized learner input: position in [0,1]^3 and nLoS/N."""
        parts = [*self.normalized, self.n_los / self.n_ues]
        if self.throughput is not None:
            parts.append(self.throughput)
        return np.asarray(parts, dtype=np.float64)


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict[str, Any] = field(default_factory=dict)


def snapshot(scenario, position: Position3) -> LinkReport:
    """One-shot analytic evaluation at a fixed position."""
    return analytic_evaluate(scenario, position)


def snapshot_reward(scenario, position: Position3, env_cfg: EnvConfig) -> float:
    """Reward the agent would see while parked at `position` (analytic)."""
    report = analytic_evaluate(scenario, position)
    return compute_reward(
        report.n_los,
        len(scenario.ues),
        report.aggregate_throughput,
        scenario.demand_sum,
        env_cfg.w1,
        env_cfg.w2,
    )


class UavEnv:
    """The positioning environment over one scenario."""

    def __init__(self, scenario, env_cfg: EnvConfig | None = None):
        self.scenario = scenario
        self.cfg = env_cfg if env_cfg is not None else scenario.env
        self._position: Position3 | None = None
        self._step_count = 0
        self._done = True
        self._des: DesSession | None = None

    @property
    def n_actions(self) -> int:
        return len(ACTION_DELTAS)

    @property
    def position(self) -> Position3:
        if self._position is None:
            raise RuntimeError("environment not reset")
        return self._position

    def _normalize(self, p: Position3) -> tuple[float, float, float]:
        zone = self.scenario.zone
        out = []
        for v, (lo, hi) in zip(
            (p.x, p.y, p.z), (zone.x_range, zone.y_range, zone.z_range)
        ):
            out.append((v - lo) / (hi - lo) if hi > lo else 0.0)
        return tuple(out)

    def _observe(
        self, throughput: float | None = None, n_los: int | None = None
    ) -> Observation:
        p = self.position
        if n_los is None:
            n_los = count_los(
                p, [ue.position for ue in self.scenario.ues], self.scenario.buildings
            )
        return Observation(
            position=p,
            normalized=self._normalize(p),
            n_los=n_los,
            n_ues=len(self.scenario.ues),
            throughput=throughput if self.cfg.observe_throughput else None,
        )

    def reset(self, seed: int = 0) -> Observation:
        scenario = self.scenario
        start = scenario.initial_position()
        if not scenario.zone.contains(start):
            raise InvalidScenario(
                f"initial position {start.as_tuple()} outside the action zone"
            )
        if any(b.contains_interior(start) for b in scenario.buildings):
            raise InvalidScenario(
                f"initial position {start.as_tuple()} inside a building"
            )
        self._position = start
        self._step_count = 0
        self._done = False
        if self.cfg.evaluator_mode == "des":
            self._des = DesSession(
                scenario, start, seed, horizon=self.cfg.episode_duration
            )
        else:
            self._des = None
        return self._observe(throughput=0.0)

    def step(self, action: int) -> StepResult:
        if self._position is None:
            raise RuntimeError("environment not reset")
        if self._done:
            raise EpisodeFinished("episode already finished; call reset()")
        if not 0 <= int(action) < len(ACTION_DELTAS):
            raise ValueError(f"action code {action} out of range 0..6")

        cfg = self.cfg
        scenario = self.scenario
        dx, dy, dz = ACTION_DELTAS[int(action)]
        zone = scenario.zone
        # Pre-clamp into the zone so the candidate is a valid position,
        # then reject moves that end inside a building.
        proposed = Position3(
            min(max(self._position.x + dx * cfg.step_m, zone.x_range[0]), zone.x_range[1]),
            min(max(self._position.y + dy * cfg.step_m, zone.y_range[0]), zone.y_range[1]),
            min(max(self._position.z + dz * cfg.step_m, zone.z_range[0]), zone.z_range[1]),
        )
        self._position = clamp_to_zone(
            proposed, zone, scenario.buildings, previous=self._position
        )

        self._step_count += 1
        now = self._step_count * cfg.decision_interval

        if self._des is not None:
            self._des.move(self._position)
            pkts, delay_sum, delay_count = self._des.advance(now)
            bits = pkts * scenario.mac.packet_bits
            throughput = bits / cfg.decision_interval / 1e6
            mean_delay = delay_sum / delay_count if delay_count else 0.0
            report = analytic_evaluate(scenario, self._position)
            n_los = report.n_los
            feasible = report.feasible
        else:
            report = analytic_evaluate(scenario, self._position)
            throughput = report.aggregate_throughput
            mean_delay = report.mean_delay
            n_los = report.n_los
            feasible = report.feasible

        reward = compute_reward(
            n_los,
            len(scenario.ues),
            throughput,
            scenario.demand_sum,
            cfg.w1,
            cfg.w2,
        )
        self._done = self._step_count >= cfg.steps_per_episode
        obs = self._observe(throughput=throughput, n_los=n_los)
        info = {
            "aggregate_throughput": throughput,
            "mean_delay": mean_delay,
            "feasible": feasible,
            "nLoS": n_los,
        }
        log.debug(
            "step %d action=%s pos=%s reward=%.4f",
            self._step_count,
            ACTION_NAMES[int(action)],
            self._position.as_tuple(),
            reward,
        )
        return StepResult(observation=obs, reward=reward, done=self._done, info=info)
