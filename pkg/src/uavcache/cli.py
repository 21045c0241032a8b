"""Command-line entry point: train | eval | sweep | calibrate | oracle.

Every command loads (or defaults) a JSON config, fills the calibrated
constants, snapshots the resolved config into the run directory, and writes
its artifacts there. Errors exit nonzero with a structured JSON report on
stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import agents, calibrate, evaluate, oracles, runio
from .config import ConfigError, ScenarioConfig, default_config, load_config
from .env import CachingEnv, equal_split_action_space


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavcache",
        description="Coded-caching map transmission simulator and optimizer")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None,
                        help="JSON scenario config (defaults used when omitted)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", type=str, default="runs/latest",
                        help="run directory for artifacts")
    common.add_argument("--mode", choices=["all-eligible", "selected-k"],
                        default=None, help="override the recovery mode")
    common.add_argument("--cell-mode", choices=["simplified", "literal-eq6"],
                        default=None, help="override the cell recovery mode")

    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[common],
                             help="train a Q-learning agent")
    p_train.add_argument("--agent", choices=["sacrl", "scrl"], default="sacrl")

    p_eval = sub.add_parser("eval", parents=[common],
                            help="compare policies with common random numbers")
    p_eval.add_argument("--policies", type=str, default="random,nct",
                        help="comma-separated policy names")
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--checkpoint", type=str, default=None,
                        help="sacrl checkpoint (.npz)")
    p_eval.add_argument("--scrl-checkpoint", type=str, default=None)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="evaluate policies across a parameter grid")
    p_sweep.add_argument("--param", type=str, required=True)
    p_sweep.add_argument("--values", type=str, required=True,
                         help="comma-separated numeric values")
    p_sweep.add_argument("--policies", type=str, default="oracle")
    p_sweep.add_argument("--episodes", type=int, default=5)
    p_sweep.add_argument("--checkpoint", type=str, default=None)
    p_sweep.add_argument("--scrl-checkpoint", type=str, default=None)

    sub.add_parser("calibrate", parents=[common],
                   help="solve the calibrated channel constants")

    p_oracle = sub.add_parser("oracle", parents=[common],
                              help="run an independent cross-check suite")
    p_oracle.add_argument("--suite", choices=list(oracles.SUITE_NAMES),
                          required=True)

    return parser


def load_and_resolve(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.mode is not None:
        config = config.replace(recovery_mode=args.mode)
    if args.cell_mode is not None:
        config = config.replace(cell_recovery_mode=args.cell_mode)
    return calibrate.resolve(config)


def cmd_train(args) -> int:
    config = load_and_resolve(args)
    run_dir = runio.ensure_run_dir(args.out)
    cfg_hash = runio.write_resolved_config(config, run_dir)
    if args.agent == "scrl":
        env = CachingEnv(config, action_space=equal_split_action_space(config))
    else:
        env = CachingEnv(config)
    q, curve = agents.train_dqn(env, config.dqn, config.seed)
    checkpoint = run_dir / f"{args.agent}_checkpoint.npz"
    agents.save_checkpoint(q, checkpoint, meta={
        "agent": args.agent, "config_hash": cfg_hash, "seed": config.seed,
        "action_space": env.action_space.name})
    runio.write_csv(run_dir / "learning_curve.csv",
                    ["episode", "mean_reward", "epsilon", "mean_loss"],
                    [dataclasses.asdict(point) for point in curve], cfg_hash)
    tail = max(1, len(curve) // 10)
    summary = {
        "agent": args.agent,
        "episodes": len(curve),
        "action_space_size": len(env.action_space),
        "seed": config.seed,
        "config_hash": cfg_hash,
        "checkpoint": checkpoint.name,
        "tail_mean_reward": sum(p.mean_reward for p in curve[-tail:]) / tail,
    }
    runio.write_json(run_dir / "summary.json", summary)
    print(f"trained {args.agent}: {len(curve)} episodes, "
          f"tail mean reward {summary['tail_mean_reward']:.4f} -> {run_dir}")
    return 0


def _checkpoints(args) -> dict[str, str]:
    paths = {}
    if getattr(args, "checkpoint", None):
        paths["sacrl"] = args.checkpoint
    if getattr(args, "scrl_checkpoint", None):
        paths["scrl"] = args.scrl_checkpoint
    return paths


def cmd_eval(args) -> int:
    config = load_and_resolve(args)
    run_dir = runio.ensure_run_dir(args.out)
    cfg_hash = runio.write_resolved_config(config, run_dir)
    names = [n.strip() for n in args.policies.split(",") if n.strip()]
    results = evaluate.evaluate_policies(config, names, args.episodes,
                                         config.seed, _checkpoints(args))
    summary = evaluate.summary_dict(results)
    summary["config_hash"] = cfg_hash
    summary["episodes"] = args.episodes
    summary["seed"] = config.seed
    runio.write_json(run_dir / "eval_summary.json", summary)
    rows = []
    for name, res in results.items():
        for slot, value in enumerate(res.cumulative_by_slot, start=1):
            rows.append({"policy": name, "slot": slot,
                         "cumulative_area_m2": float(value)})
    runio.write_csv(run_dir / "cumulative_area.csv",
                    ["policy", "slot", "cumulative_area_m2"], rows, cfg_hash)
    for name, res in results.items():
        if res.first_episode_trace:
            header = list(res.first_episode_trace[0].keys())
            runio.write_csv(run_dir / f"trace_{name}.csv", header,
                            res.first_episode_trace, cfg_hash)
    for name, res in results.items():
        print(f"{name}: mean area {res.mean_area:.1f} m^2 "
              f"(std {res.std_area:.1f}, {args.episodes} episodes)")
    return 0


def cmd_sweep(args) -> int:
    config = load_and_resolve(args)
    run_dir = runio.ensure_run_dir(args.out)
    cfg_hash = runio.write_resolved_config(config, run_dir)
    names = [n.strip() for n in args.policies.split(",") if n.strip()]
    values = [float(v) for v in args.values.split(",")]
    rows, _ = evaluate.sweep(config, args.param, values, names,
                             args.episodes, config.seed, _checkpoints(args))
    runio.write_csv(run_dir / "sweep.csv",
                    ["parameter", "value", "policy", "mean_area",
                     "std_area", "stderr_area", "episodes"],
                    [dataclasses.asdict(row) for row in rows], cfg_hash)
    print(f"swept {args.param} over {values} for {names} -> {run_dir / 'sweep.csv'}")
    return 0


def cmd_calibrate(args) -> int:
    base = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        base = base.replace(seed=args.seed)
    report = calibrate.calibration_report(base)
    resolved = base.replace(beta0=report.beta0, tau_s=report.tau_s)
    run_dir = runio.ensure_run_dir(args.out)
    runio.write_resolved_config(resolved, run_dir)
    payload = dataclasses.asdict(report)
    runio.write_json(run_dir / "calibration.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_oracle(args) -> int:
    config = load_and_resolve(args)
    run_dir = runio.ensure_run_dir(args.out)
    runio.write_resolved_config(config, run_dir)
    report = oracles.run_suite(args.suite, config, config.seed)
    runio.write_json(run_dir / f"oracle_{args.suite}.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["passed"] else 1


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        report = {"error": "config", "problems": [
            {"field": path, "message": msg} for path, msg in exc.problems]}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 2
    except (calibrate.CalibrationError, agents.TrainingDivergedError,
            FileNotFoundError, ValueError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
