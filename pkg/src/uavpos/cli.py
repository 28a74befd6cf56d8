"""Command-line entry points: train, eval, oracle, serve, rollout."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import __version__, bridge
from .agent import (
    displaced_positions,
    evaluate_position,
    grid_oracle,
    train,
)
from .config_io import load_scenario, setup_logging
from .env import UavEnv
from .errors import UavposError
from .geometry import Position3
from .metrics import export_metrics


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _parse_position(text: str, scenario, resolution: float):
    if text == "oracle":
        return grid_oracle(scenario, resolution).position, "oracle"
    if text == "baseline":
        return scenario.baseline_position(), "baseline"
    parts = text.split(",")
    if len(parts) != 3:
        raise SystemExit("--position must be x,y,z or 'oracle' or 'baseline'")
    p = Position3(*(float(v) for v in parts))
    return p, f"pos_{p.x:g}_{p.y:g}_{p.z:g}"


def _write_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_train(args) -> int:
    scenario = load_scenario(args.config)
    train_cfg = scenario.train
    if args.episodes is not None:
        train_cfg = dataclasses.replace(train_cfg, episodes=args.episodes)
    env = UavEnv(scenario)
    result = train(env, train_cfg, seed=args.seed)

    summary = {
        "scenario": scenario.name,
        "seed": args.seed,
        "episodes": train_cfg.episodes,
        "episode_returns": result.episode_returns,
        "best_position": list(result.best_position.as_tuple()),
        "best_snapshot_reward": result.best_reward,
        "steps": result.steps,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "training_log.json"), summary)
        _write_json(
            os.path.join(args.out, "policy.json"), result.policy.to_dict()
        )
    return 0


def cmd_eval(args) -> int:
    scenario = load_scenario(args.config)
    seeds = _parse_seeds(args.seeds)
    position, label = _parse_position(args.position, scenario, args.resolution)
    result = evaluate_position(
        scenario, position, seeds, args.duration, label=label
    )
    series = [result.throughput, result.delay]
    manifest = {
        "scenario": scenario.name,
        "scenario_path": os.path.abspath(args.config),
        "position": list(position.as_tuple()),
        "label": label,
        "seeds": seeds,
        "duration_s": args.duration,
        "version": __version__,
    }
    if args.out:
        paths = export_metrics(series, args.out, manifest)
        for p in paths:
            print(p)
    else:
        print(json.dumps(
            {
                "throughput_Mbps": result.per_seed_aggregate,
                "mean_delay_s": [
                    (d if d != float("inf") else "inf")
                    for d in result.per_seed_mean_delay
                ],
                **manifest,
            },
            indent=2, sort_keys=True,
        ))
    return 0


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.config)
    best = grid_oracle(scenario, args.resolution)
    displaced = displaced_positions(scenario, best.position)
    report = best.report
    print(json.dumps(
        {
            "scenario": scenario.name,
            "resolution_m": args.resolution,
            "position": list(best.position.as_tuple()),
            "reward": best.reward,
            "n_los": report.n_los,
            "aggregate_throughput_Mbps": report.aggregate_throughput,
            "feasible": report.feasible,
            "baseline": list(scenario.baseline_position().as_tuple()),
            "displaced_positions": [list(p.as_tuple()) for p in displaced],
        },
        indent=2, sort_keys=True,
    ))
    return 0


def cmd_serve(args) -> int:
    scenario = load_scenario(args.config)
    host, _, port = args.listen.rpartition(":")
    if not host:
        raise SystemExit("--listen must be HOST:PORT")
    bridge.serve(scenario, host, int(port))
    return 0


def cmd_rollout(args) -> int:
    """Print the in-process trajectory for a fixed action sequence as JSON.

    Mirrors the bridge payloads so remote trajectories can be compared
    field by field.
    """
    scenario = load_scenario(args.config)
    env = UavEnv(scenario)
    actions = [int(a) for a in args.actions.split(",") if a]
    obs = env.reset(seed=args.seed)
    steps = []
    for a in actions:
        result = env.step(a)
        steps.append(bridge.step_payload(result))
        if result.done:
            break
    print(json.dumps(
        {"reset": bridge.obs_payload(obs), "steps": steps},
        sort_keys=True, allow_nan=False,
    ))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavpos",
        description="Obstacle-aware UAV positioning simulator and RL lab",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the reference DQN agent")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--log-level", default="Warning")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="multi-seed DES evaluation of a position")
    p.add_argument("--config", required=True)
    p.add_argument("--position", required=True,
                   help="x,y,z or 'oracle' or 'baseline'")
    p.add_argument("--seeds", default="1..30")
    p.add_argument("--duration", type=float, default=100.0)
    p.add_argument("--resolution", type=float, default=2.5,
                   help="oracle lattice resolution when --position oracle")
    p.add_argument("--out", default=None)
    p.add_argument("--log-level", default="Warning")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="brute-force lattice search of the zone")
    p.add_argument("--config", required=True)
    p.add_argument("--resolution", type=float, default=2.5)
    p.add_argument("--log-level", default="Warning")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the environment server")
    p.add_argument("--config", required=True)
    p.add_argument("--listen", default="127.0.0.1:9500")
    p.add_argument("--log-level", default="Warning")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("rollout", help="in-process trajectory for fixed actions")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--actions", required=True, help="comma-separated codes 0..6")
    p.add_argument("--log-level", default="Warning")
    p.set_defaults(func=cmd_rollout)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except UavposError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
