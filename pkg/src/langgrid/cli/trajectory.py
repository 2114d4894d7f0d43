"""Line-delimited trajectory files and digest-checked replay.

A file is one header line, one line per step, and a footer line, all
JSON objects.  Steps store the observation digest rather than the
observation, so replaying (env, seed, actions) and comparing digests
verifies the file against the environment code.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone

from ..core import Environment, Observation, StepResult, make

FORMAT_VERSION = 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def outcome_of(result: StepResult | None) -> str:
    if result is None or not result.done:
        return "incomplete"
    if result.info.get("win"):
        return "win"
    if result.info.get("limit"):
        return "limit"
    return "loss"


class TrajectoryRecorder:
    """Accumulates one episode; call record per step, then lines()."""

    def __init__(self, env: Environment, episode_seed: int,
                 first_obs: Observation, overrides: dict | None = None) -> None:
        self.header = {
            "kind": "header",
            "version": FORMAT_VERSION,
            "env": env.env_id,
            "split": env.split,
            "seed": int(episode_seed),
            "overrides": dict(overrides or {}),
            "reset_digest": first_obs.digest(),
            "started": _now(),
        }
        self.steps: list[dict] = []
        self.total = 0.0
        self.last: StepResult | None = None

    def record(self, action: int, result: StepResult) -> None:
        self.steps.append({
            "kind": "step",
            "i": len(self.steps),
            "action": int(action),
            "reward": float(result.reward),
            "done": bool(result.done),
            "digest": result.obs.digest(),
        })
        self.total += float(result.reward)
        self.last = result

    def footer(self) -> dict:
        return {
            "kind": "footer",
            "outcome": outcome_of(self.last),
            "return": round(self.total, 9),
            "steps": len(self.steps),
            "ended": _now(),
        }

    def lines(self) -> list[str]:
        rows = [self.header, *self.steps, self.footer()]
        return [json.dumps(r) for r in rows]

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.lines()) + "\n")


def load_trajectory(path: str) -> dict:
    """Parse and structurally validate one trajectory file."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    if len(rows) < 2 or rows[0].get("kind") != "header" \
            or rows[-1].get("kind") != "footer":
        raise ValueError(f"{path}: not a trajectory file "
                         "(header ... steps ... footer)")
    steps = rows[1:-1]
    for i, s in enumerate(steps):
        if s.get("kind") != "step" or s.get("i") != i:
            raise ValueError(f"{path}: bad step record at line {i + 2}")
    return {"header": rows[0], "steps": steps, "footer": rows[-1]}


def replay_trajectory(path: str) -> dict:
    """Re-run the recorded actions and compare digests step by step.

    Returns a report; mismatch index -1 means the reset observation
    already diverged.
    """
    data = load_trajectory(path)
    head = data["header"]
    env = make(head["env"], split=head["split"], seed=0, **head["overrides"])
    obs = env.reset(head["seed"])
    report = {
        "file": path,
        "env": head["env"],
        "outcome": data["footer"]["outcome"],
        "steps": len(data["steps"]),
        "ok": True,
        "first_mismatch": None,
    }
    if obs.digest() != head["reset_digest"]:
        report["ok"] = False
        report["first_mismatch"] = -1
        return report
    for step in data["steps"]:
        result = env.step(step["action"])
        same = (result.obs.digest() == step["digest"]
                and bool(result.done) == bool(step["done"])
                and abs(float(result.reward) - float(step["reward"])) < 1e-9)
        if not same:
            report["ok"] = False
            report["first_mismatch"] = step["i"]
            return report
    return report


def replay_many(paths: list[str]) -> dict:
    """Verify several files and aggregate expert statistics."""
    reports = [replay_trajectory(p) for p in paths]
    wins = sum(1 for r in reports if r["ok"] and r["outcome"] == "win")
    checked = sum(1 for r in reports if r["ok"])
    steps = [r["steps"] for r in reports if r["ok"]]
    return {
        "files": len(paths),
        "verified": checked,
        "failed": [r["file"] for r in reports if not r["ok"]],
        "win_rate": wins / checked if checked else 0.0,
        "mean_steps": sum(steps) / len(steps) if steps else 0.0,
        "reports": reports,
    }
