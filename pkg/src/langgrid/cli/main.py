"""Command line entry point: play, train, eval, bench, replay, serve."""
from __future__ import annotations

import argparse
import json
import sys

from ..core import make
from ..train.config import TrainConfig, parse_overrides


def _read_config_file(path: str) -> list[str]:
    """key = value lines, # comments, returned as override pairs."""
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            pairs.append(f"{key.strip()}={value.strip()}")
    return pairs


def _split_sets(pairs: list[str]) -> tuple[dict, dict]:
    return parse_overrides(pairs or [])


def cmd_play(args: argparse.Namespace) -> int:
    from .render import render_observation
    from .trajectory import TrajectoryRecorder

    _, env_overrides = _split_sets(args.set)
    env = make(args.env, split=args.split, seed=0, **env_overrides)
    obs = env.reset(args.seed)
    recorder = TrajectoryRecorder(env, env.episode_seed, obs, env_overrides)
    reward = None
    result = None
    print(f"== {args.env} ({env.split} split, seed {env.episode_seed}) ==")
    while not env.done:
        print()
        print(render_observation(obs, reward=reward, steps=env.steps_taken))
        try:
            raw = input("action index (q quits)> ").strip()
        except EOFError:
            raw = "q"
        if raw.lower() in ("q", "quit", "exit"):
            break
        try:
            action = int(raw)
            if not 0 <= action < len(obs.actions):
                raise ValueError
        except ValueError:
            print(f"enter an index in [0, {len(obs.actions)}) or q")
            continue
        result = env.step(action)
        recorder.record(action, result)
        obs, reward = result.obs, result.reward
    footer = recorder.footer()
    print(f"\noutcome: {footer['outcome']}  return: {footer['return']:+.3f}  "
          f"steps: {footer['steps']}")
    if args.record:
        recorder.save(args.record)
        print(f"trajectory written to {args.record}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    from ..train import Trainer

    pairs = _read_config_file(args.config) if args.config else []
    pairs += args.set or []
    if args.env:
        pairs.append(f"env_id={args.env}")
    if args.seed is not None:
        pairs.append(f"seed={args.seed}")
    if args.out:
        pairs.append(f"out_dir={args.out}")
    cfg = TrainConfig.from_overrides(pairs)
    summary = Trainer(cfg).run()
    print(json.dumps(summary, indent=2))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from ..model import load_checkpoint
    from ..train.evaluate import evaluate_model

    _, env_overrides = _split_sets(args.set)
    model, extra = load_checkpoint(args.ckpt)
    env = make(args.env, split=args.split, seed=0, **env_overrides)
    stats = evaluate_model(model, env, args.episodes, base_seed=args.seed)
    print(json.dumps({"checkpoint": args.ckpt, "env": args.env,
                      "split": args.split, "extra": extra, **stats}, indent=2))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench import bench_env_fps, bench_kernels

    if args.kernels:
        print(json.dumps(bench_kernels(), indent=2))
        return 0
    if not args.env:
        print("bench: provide --env or --kernels", file=sys.stderr)
        return 2
    _, env_overrides = _split_sets(args.set)
    report = bench_env_fps(args.env, args.frames, trials=args.trials,
                           **env_overrides)
    print(json.dumps(report, indent=2))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    from .trajectory import replay_many

    report = replay_many(args.file)
    for r in report["reports"]:
        mark = "ok" if r["ok"] else f"MISMATCH at step {r['first_mismatch']}"
        print(f"{r['file']}: {mark}  outcome={r['outcome']} steps={r['steps']}")
    print(f"verified {report['verified']}/{report['files']}  "
          f"win rate {report['win_rate']:.2%}  "
          f"mean steps {report['mean_steps']:.1f}")
    return 0 if report["verified"] == report["files"] else 1


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    timeout = None if args.idle_timeout <= 0 else args.idle_timeout
    print(f"session service on ws://{args.host}:{args.port}/session")
    serve(args.port, host=args.host, idle_timeout=timeout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="langgrid",
        description="Symbolic language-grounding environments: play, "
                    "train, evaluate, benchmark, replay, serve.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_set(sp):
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override; env.* keys go to the environment")

    sp = sub.add_parser("play", help="play an episode in the console")
    sp.add_argument("--env", required=True)
    sp.add_argument("--split", default="train")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--record", metavar="FILE",
                    help="write the trajectory here on exit")
    add_set(sp)
    sp.set_defaults(fn=cmd_play)

    sp = sub.add_parser("train", help="run the actor-critic trainer")
    sp.add_argument("--env", default=None)
    sp.add_argument("--config", metavar="FILE",
                    help="key = value file; keys are TrainConfig fields")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", metavar="DIR", default=None)
    add_set(sp)
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint greedily")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--env", required=True)
    sp.add_argument("--split", default="test")
    sp.add_argument("--episodes", type=int, default=100)
    sp.add_argument("--seed", type=int, default=777_000,
                    help="base seed of the evaluation episode list")
    add_set(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("bench", help="environment FPS or kernel timings")
    sp.add_argument("--env", default=None)
    sp.add_argument("--frames", type=int, default=10_000)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--kernels", action="store_true",
                    help="time the compiled vs plain-numpy kernels instead")
    add_set(sp)
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("replay", help="verify recorded trajectories")
    sp.add_argument("--file", nargs="+", required=True)
    sp.set_defaults(fn=cmd_replay)

    sp = sub.add_parser("serve", help="run the web-play session service")
    sp.add_argument("--port", type=int, default=8765)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--idle-timeout", type=float, default=300.0,
                    help="seconds; 0 disables the idle cutoff")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
