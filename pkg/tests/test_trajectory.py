"""Recorded episodes round trip through the log format and replay clean."""
import json

import numpy as np
import pytest

from langgrid.cli import (
    TrajectoryRecorder,
    load_trajectory,
    replay_many,
    replay_trajectory,
)
from langgrid.core import make
from langgrid.envs.rtfm import oracle_solve


def record_episode(env_id, seed, actions=None, path=None, **overrides):
    env = make(env_id, split="train", seed=0, **overrides)
    obs = env.reset(seed)
    rec = TrajectoryRecorder(env, seed, obs, overrides)
    rng = np.random.default_rng(seed)
    while not env.done:
        if actions is not None:
            a = actions.pop(0)
        else:
            a = int(rng.integers(len(env.last_obs.actions)))
        rec.record(a, env.step(a))
    if path is not None:
        rec.save(path)
    return rec


class TestFormat:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        rec = record_episode("messenger", 11, path=p)
        parsed = load_trajectory(p)
        head, steps, foot = parsed["header"], parsed["steps"], parsed["footer"]
        assert head["env"] == "messenger"
        assert head["seed"] == 11
        assert head["version"] == 1
        assert len(steps) == foot["steps"]
        assert foot["outcome"] in {"win", "loss", "limit"}
        total = sum(s["reward"] for s in steps)
        assert abs(total - foot["return"]) < 1e-9

    def test_step_indices_contiguous(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("rtfm", 3, path=p)
        steps = load_trajectory(p)["steps"]
        assert [s["i"] for s in steps] == list(range(len(steps)))

    def test_lines_parse_as_json(self, tmp_path):
        rec = record_episode("crawler", 7)
        kinds = [json.loads(line)["kind"] for line in rec.lines()]
        assert kinds[0] == "header" and kinds[-1] == "footer"
        assert set(kinds[1:-1]) == {"step"}

    def test_truncated_file_rejected(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("rtfm", 5, path=p)
        lines = p.read_text().splitlines()
        p.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ValueError):
            load_trajectory(p)


class TestReplay:
    def test_random_episode_replays_clean(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("textchoice", 21, path=p)
        report = replay_trajectory(p)
        assert report["ok"]
        assert report["first_mismatch"] is None

    def test_overrides_respected(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("rtfm", 4, path=p, height=4, width=4)
        assert replay_trajectory(p)["ok"]

    def test_tampered_action_detected(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("messenger", 9, path=p)
        rows = [json.loads(line) for line in p.read_text().splitlines()]
        target = next(r for r in rows if r["kind"] == "step")
        target["digest"] = "0" * 16
        p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        report = replay_trajectory(p)
        assert not report["ok"]
        assert report["first_mismatch"] == target["i"]

    def test_wrong_seed_flags_reset(self, tmp_path):
        p = tmp_path / "ep.jsonl"
        record_episode("rtfm", 13, path=p)
        rows = [json.loads(line) for line in p.read_text().splitlines()]
        rows[0]["seed"] = 14
        p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        report = replay_trajectory(p)
        assert not report["ok"]
        assert report["first_mismatch"] == -1

    def test_oracle_batch_aggregates(self, tmp_path):
        paths = []
        env = make("rtfm", split="train", seed=0)
        for i, seed in enumerate(range(40, 90)):
            obs = env.reset(seed)
            plan = oracle_solve(env)
            assert plan is not None
            rec = TrajectoryRecorder(env, seed, obs, {})
            for a in plan:
                rec.record(a, env.step(a))
            assert env.done
            p = tmp_path / f"ep{i}.jsonl"
            rec.save(p)
            paths.append(p)
        stats = replay_many(paths)
        assert stats["verified"] == 50
        assert stats["failed"] == []
        assert stats["win_rate"] == 1.0
        assert stats["mean_steps"] < 32
