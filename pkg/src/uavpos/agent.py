"""Reference DQN learner, baseline policies, grid oracle and evaluation.

The value network is a small fully-connected net (two hidden layers of 32
rectifier units) trained with an adaptive-moment optimizer on the mean
squared Bellman error, all in plain numpy; no ML framework involved.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .env import EnvConfig, UavEnv, compute_reward, snapshot
from .geometry import Position3
from .linkmac import des_run
from .metrics import MetricSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 10
    eval_episodes: int = 1
    batch: int = 64
    learning_rate: float = 1e-2
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.6
    target_sync: int = 200
    warmup: int = 500
    buffer_capacity: int = 1_000_000

    def __post_init__(self):
        if min(
            self.episodes, self.eval_episodes, self.batch, self.target_sync,
            self.warmup, self.buffer_capacity,
        ) <= 0:
            raise ValueError("counts must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 < self.epsilon_decay_fraction <= 1.0:
            raise ValueError("epsilon_decay_fraction must be in (0, 1]")


class QNetwork:
    """obs -> q-values map: affine, relu, affine, relu, affine."""

    def __init__(
        self,
        obs_dim: int,
        n_actions: int = 7,
        hidden: tuple[int, int] = (32, 32),
        rng: np.random.Generator | None = None,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        sizes = [obs_dim, *hidden, n_actions]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            scale = math.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.obs_dim = obs_dim
        self.n_actions = n_actions

    def parameters(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy_from(self, other: "QNetwork") -> None:
        self.weights = [w.copy() for w in other.weights]
        self.biases = [b.copy() for b in other.biases]

    def clone(self) -> "QNetwork":
        twin = QNetwork.__new__(QNetwork)
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        twin.obs_dim = self.obs_dim
        twin.n_actions = self.n_actions
        return twin

    def forward(self, obs: np.ndarray) -> np.ndarray:
        """Q-values for a batch (B, obs_dim) or a single observation."""
        single = obs.ndim == 1
        x = np.atleast_2d(obs)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            x = np.maximum(x @ w + b, 0.0)
        x = x @ self.weights[-1] + self.biases[-1]
        return x[0] if single else x

    def _forward_cached(self, obs: np.ndarray):
        activations = [obs]
        x = obs
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            x = np.maximum(x @ w + b, 0.0)
            activations.append(x)
        out = x @ self.weights[-1] + self.biases[-1]
        return out, activations

    def to_dict(self) -> dict:
        return {
            "obs_dim": self.obs_dim,
            "n_actions": self.n_actions,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QNetwork":
        net = cls.__new__(cls)
        net.obs_dim = int(data["obs_dim"])
        net.n_actions = int(data["n_actions"])
        net.weights = [np.asarray(w, dtype=np.float64) for w in data["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in data["biases"]]
        return net


def forward(net: QNetwork, obs: np.ndarray) -> np.ndarray:
    return net.forward(obs)


class Adam:
    """Adaptive-moment gradient descent over a parameter list."""

    def __init__(self, params, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def q_loss_and_grads(net: QNetwork, target_net: QNetwork, batch, gamma: float):
    """MSE Bellman loss and its gradients w.r.t. net parameters."""
    obs, actions, rewards, next_obs, dones = batch
    batch_size = obs.shape[0]
    q_next = target_net.forward(next_obs)
    targets = rewards + (1.0 - dones) * gamma * q_next.max(axis=1)

    q, activations = net._forward_cached(obs)
    idx = np.arange(batch_size)
    predicted = q[idx, actions]
    err = predicted - targets
    loss = float(np.mean(err * err))

    dq = np.zeros_like(q)
    dq[idx, actions] = 2.0 * err / batch_size

    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.biases)
    delta = dq
    for layer in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[layer]
        grads_w[layer] = a_prev.T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ net.weights[layer].T) * (activations[layer] > 0.0)
    return loss, [*grads_w, *grads_b]


def train_step(
    net: QNetwork,
    target_net: QNetwork,
    batch,
    cfg: TrainConfig,
    optimizer: Adam,
) -> float:
    """One gradient update; returns the pre-update loss."""
    loss, grads = q_loss_and_grads(net, target_net, batch, cfg.gamma)
    optimizer.step(grads)
    return loss


def act(
    net: QNetwork, obs: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    """Epsilon-greedy action; greedy ties resolve to the lowest code."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(net.n_actions))
    return int(np.argmax(net.forward(obs)))


class ReplayBuffer:
    """FIFO ring of transitions sampled uniformly in minibatches."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.actions = np.zeros(self.capacity, dtype=np.int64)
        self.rewards = np.zeros(self.capacity)
        self.dones = np.zeros(self.capacity)
        self.size = 0
        self._head = 0

    def __len__(self) -> int:
        return self.size

    def push(self, obs, action, reward, next_obs, done) -> None:
        i = self._head
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = float(done)
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=batch)
        return (
            self.obs[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_obs[idx],
            self.dones[idx],
        )


@dataclass
class TrainResult:
    policy: QNetwork
    episode_returns: list[float]
    best_position: Position3
    best_reward: float
    steps: int


def train(env: UavEnv, cfg: TrainConfig, seed: int) -> TrainResult:
    """Run the full training loop and track the best visited position.

    The deliverable is both the greedy policy and the visited position
    with the highest parked (analytic snapshot) reward.
    """
    rng = np.random.default_rng(seed)
    obs0 = env.reset(seed=seed)
    obs_dim = obs0.vector().shape[0]
    net = QNetwork(obs_dim, n_actions=env.n_actions, rng=rng)
    target = net.clone()
    optimizer = Adam(net.parameters(), lr=cfg.learning_rate)
    buffer = ReplayBuffer(cfg.buffer_capacity, obs_dim)

    steps_per_episode = env.cfg.steps_per_episode
    total_steps = cfg.episodes * steps_per_episode
    decay_steps = max(1, int(cfg.epsilon_decay_fraction * total_steps))
    analytic_mode = env.cfg.evaluator_mode == "analytic"

    best_reward = -1.0
    best_position = env.position
    episode_returns: list[float] = []
    global_step = 0

    for episode in range(cfg.episodes):
        obs = env.reset(seed=seed + episode)
        obs_vec = obs.vector()
        ep_return = 0.0
        for _ in range(steps_per_episode):
            frac = min(global_step / decay_steps, 1.0)
            epsilon = cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)
            action = act(net, obs_vec, epsilon, rng)
            result = env.step(action)
            next_vec = result.observation.vector()
            buffer.push(obs_vec, action, result.reward, next_vec, result.done)
            ep_return += result.reward

            parked = (
                result.reward
                if analytic_mode
                else snapshot_reward_of(env, result.observation.position)
            )
            if parked > best_reward:
                best_reward = parked
                best_position = result.observation.position

            if len(buffer) >= cfg.warmup:
                batch = buffer.sample(cfg.batch, rng)
                train_step(net, target, batch, cfg, optimizer)
            if global_step % cfg.target_sync == 0:
                target.copy_from(net)
            global_step += 1
            obs_vec = next_vec
        episode_returns.append(ep_return)
        log.info(
            "episode %d/%d return=%.2f best=%.4f",
            episode + 1, cfg.episodes, ep_return, best_reward,
        )

    return TrainResult(
        policy=net,
        episode_returns=episode_returns,
        best_position=best_position,
        best_reward=best_reward,
        steps=global_step,
    )


def snapshot_reward_of(env: UavEnv, position: Position3) -> float:
    report = snapshot(env.scenario, position)
    return compute_reward(
        report.n_los,
        len(env.scenario.ues),
        report.aggregate_throughput,
        env.scenario.demand_sum,
        env.cfg.w1,
        env.cfg.w2,
    )


def run_greedy_episode(env: UavEnv, net: QNetwork, seed: int = 0) -> float:
    """One evaluation episode under the greedy policy; returns the return."""
    rng = np.random.default_rng(seed)
    obs = env.reset(seed=seed)
    total = 0.0
    done = False
    while not done:
        action = act(net, obs.vector(), 0.0, rng)
        result = env.step(action)
        total += result.reward
        obs = result.observation
        done = result.done
    return total


@dataclass
class OracleResult:
    position: Position3
    reward: float
    report: object


def _axis_lattice(lo: float, hi: float, resolution: float) -> list[float]:
    out = []
    k = 0
    while True:
        v = lo + k * resolution
        if v > hi + 1e-9:
            break
        out.append(min(v, hi))
        k += 1
    return out


def grid_oracle(scenario, resolution: float, env_cfg: EnvConfig | None = None):
    """Exhaustive lattice scan of the action zone for the best parked reward.

    Positions inside building interiors are skipped. Ties resolve to the
    lexicographically smallest (x, y, z).
    """
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    cfg = env_cfg if env_cfg is not None else scenario.env
    zone = scenario.zone
    n_ues = len(scenario.ues)
    demand_sum = scenario.demand_sum

    best: OracleResult | None = None
    for x in _axis_lattice(*zone.x_range, resolution):
        for y in _axis_lattice(*zone.y_range, resolution):
            for z in _axis_lattice(*zone.z_range, resolution):
                p = Position3(x, y, z)
                if any(b.contains_interior(p) for b in scenario.buildings):
                    continue
                report = snapshot(scenario, p)
                reward = compute_reward(
                    report.n_los,
                    n_ues,
                    report.aggregate_throughput,
                    demand_sum,
                    cfg.w1,
                    cfg.w2,
                )
                if best is None or reward > best.reward:
                    best = OracleResult(position=p, reward=reward, report=report)
    if best is None:
        raise ValueError("action zone contains no admissible lattice point")
    return best


@dataclass
class EvalResult:
    throughput: MetricSeries
    delay: MetricSeries
    per_seed_aggregate: list[float]
    per_seed_mean_delay: list[float]


def evaluate_position(
    scenario,
    position: Position3,
    seeds,
    duration: float,
    label: str = "position",
    workers: int | None = None,
) -> EvalResult:
    """One DES run per seed at a fixed position; emits metric series.

    Runs fan out over a thread pool when the compiled kernel is active
    (it releases the GIL); results are merged in seed order either way.
    A run that delivers nothing contributes an infinite mean delay.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seeds must be non-empty")

    def one(seed_value: int):
        return des_run(scenario, position, duration, seed_value)

    if workers is None:
        workers = 4 if _kernels.BACKEND == "cython" else 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, seeds))
    else:
        runs = [one(s) for s in seeds]

    aggregates = [r.aggregate for r in runs]
    delays = [
        float(np.mean(r.delays)) if r.delays.size else math.inf for r in runs
    ]
    return EvalResult(
        throughput=MetricSeries(
            label=f"{label}_throughput", kind="throughput_Mbps",
            samples=tuple(aggregates),
        ),
        delay=MetricSeries(
            label=f"{label}_delay", kind="delay_s", samples=tuple(delays),
        ),
        per_seed_aggregate=aggregates,
        per_seed_mean_delay=delays,
    )


def displaced_positions(
    scenario, origin: Position3, offset: float = 10.0
) -> list[Position3]:
    """The five comparison positions: origin shifted +/-x, +/-y and +z."""
    zone = scenario.zone
    moves = [
        (offset, 0.0, 0.0),
        (-offset, 0.0, 0.0),
        (0.0, offset, 0.0),
        (0.0, -offset, 0.0),
        (0.0, 0.0, offset),
    ]
    out = []
    for dx, dy, dz in moves:
        out.append(
            Position3(
                min(max(origin.x + dx, zone.x_range[0]), zone.x_range[1]),
                min(max(origin.y + dy, zone.y_range[0]), zone.y_range[1]),
                min(max(origin.z + dz, zone.z_range[0]), zone.z_range[1]),
            )
        )
    return out
