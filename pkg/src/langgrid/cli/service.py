"""WebSocket play service speaking the session message protocol.

One connection is one session holding at most one environment.  Every
message in either direction validates against the shipped JSON schema.
Step handling is synchronous inside each session; sessions share no
mutable state, so concurrent connections are independent.
"""
from __future__ import annotations

import asyncio
import importlib.resources
import json

import jsonschema
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..core import (
    Environment,
    FixedActions,
    NavChoices,
    Observation,
    TextChoices,
    env_ids,
    make,
)
from .trajectory import TrajectoryRecorder, outcome_of


def load_schema() -> dict:
    ref = importlib.resources.files("langgrid.schemas") / "session_schema.json"
    return json.loads(ref.read_text())


_SCHEMA = load_schema()
_CLIENT = jsonschema.Draft202012Validator(
    {"$ref": "#/$defs/client", "$defs": _SCHEMA["$defs"]})
_SERVER = jsonschema.Draft202012Validator(
    {"$ref": "#/$defs/server", "$defs": _SCHEMA["$defs"]})


def describe_actions(obs: Observation) -> dict:
    a = obs.actions
    if isinstance(a, FixedActions):
        return {"kind": "fixed", "labels": list(a.labels)}
    if isinstance(a, TextChoices):
        return {"kind": "text_choices", "choices": list(a.choices)}
    assert isinstance(a, NavChoices)
    return {"kind": "nav_coordinates", "columns": [int(c) for c in a.columns],
            "stop": bool(a.stop)}


def obs_message(obs: Observation, step: int, reward: float | None,
                done: bool) -> dict:
    return {
        "type": "obs",
        "step": int(step),
        "reward": None if reward is None else float(reward),
        "done": bool(done),
        "digest": obs.digest(),
        "grid": obs.grid.tolist(),
        "legend": {str(k): v for k, v in sorted(obs.legend.items())},
        "fields": [{"name": f.name, "text": f.text} for f in obs.text.fields],
        "joint": obs.text.joint_text,
        "actions": describe_actions(obs),
    }


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


class Session:
    """Protocol state machine, independent of the transport."""

    def __init__(self) -> None:
        self.env: Environment | None = None
        self.recorder: TrajectoryRecorder | None = None

    def handle(self, raw: str) -> list[dict]:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            return [_error("bad_message", f"not JSON: {exc}")]
        errors = sorted(_CLIENT.iter_errors(msg), key=str)
        if errors:
            return [_error("bad_message", errors[0].message)]
        if msg["type"] == "reset":
            return self._reset(msg)
        return self._step(msg)

    def _reset(self, msg: dict) -> list[dict]:
        env_id = msg["env"]
        if env_id not in env_ids():
            return [_error("unknown_env", f"no environment {env_id!r}")]
        split = msg.get("split", "train")
        overrides = msg.get("overrides", {})
        try:
            env = make(env_id, split=split, seed=0, **overrides)
            seed = msg.get("seed")
            obs = env.reset(seed)
        except (TypeError, ValueError) as exc:
            return [_error("bad_reset", str(exc))]
        self.env = env
        self.recorder = TrajectoryRecorder(env, env.episode_seed, obs,
                                           overrides)
        return [obs_message(obs, step=0, reward=None, done=False)]

    def _step(self, msg: dict) -> list[dict]:
        if self.env is None or self.env.done or self.recorder is None:
            return [_error("no_episode", "reset first")]
        action = msg["action"]
        if not 0 <= action < len(self.env.last_obs.actions):
            return [_error("bad_action",
                           f"action {action} out of range "
                           f"[0, {len(self.env.last_obs.actions)})")]
        result = self.env.step(action)
        self.recorder.record(action, result)
        out = [obs_message(result.obs, step=self.env.steps_taken,
                           reward=result.reward, done=result.done)]
        if result.done:
            footer = self.recorder.footer()
            out.append({
                "type": "done",
                "outcome": outcome_of(result),
                "return": footer["return"],
                "steps": footer["steps"],
                "trajectory": self.recorder.lines(),
            })
        return out


def create_app(idle_timeout: float | None = 300.0) -> FastAPI:
    app = FastAPI(title="langgrid play service")

    @app.get("/envs")
    def envs() -> dict:
        return {"envs": list(env_ids())}

    @app.get("/schema")
    def schema() -> dict:
        return _SCHEMA

    @app.websocket("/session")
    async def session(ws: WebSocket) -> None:
        await ws.accept()
        state = Session()
        while True:
            try:
                if not idle_timeout:
                    raw = await ws.receive_text()
                else:
                    raw = await asyncio.wait_for(ws.receive_text(),
                                                 timeout=idle_timeout)
            except asyncio.TimeoutError:
                await ws.send_text(json.dumps(
                    _error("idle_timeout", "session closed after idling")))
                await ws.close()
                return
            except WebSocketDisconnect:
                return
            for reply in state.handle(raw):
                _SERVER.validate(reply)
                await ws.send_text(json.dumps(reply))

    return app


def serve(port: int, host: str = "127.0.0.1",
          idle_timeout: float | None = 300.0) -> None:
    import uvicorn

    uvicorn.run(create_app(idle_timeout), host=host, port=port,
                log_level="warning")
