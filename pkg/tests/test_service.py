"""The websocket play service and its wire protocol."""
import json

import pytest

pytest.importorskip("starlette")
from starlette.testclient import TestClient

from langgrid.cli.service import create_app, load_schema
from langgrid.cli.trajectory import replay_trajectory
from langgrid.core import env_ids, make
from langgrid.envs.messenger import oracle_solve

import jsonschema


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app(idle_timeout=0)) as c:
        yield c


def send(ws, **msg):
    ws.send_text(json.dumps(msg))
    return json.loads(ws.receive_text())


class TestHttp:
    def test_env_listing(self, client):
        r = client.get("/envs")
        assert r.status_code == 200
        assert set(r.json()["envs"]) == set(env_ids())

    def test_schema_served(self, client):
        schema = client.get("/schema").json()
        jsonschema.Draft202012Validator.check_schema(schema)


class TestSession:
    def test_reset_then_steps(self, client):
        with client.websocket_connect("/session") as ws:
            first = send(ws, type="reset", env="rtfm", split="train", seed=5)
            assert first["type"] == "obs"
            assert first["step"] == 0
            assert first["reward"] is None
            assert first["done"] is False
            assert first["actions"]["kind"] == "fixed"
            for i in range(3):
                msg = send(ws, type="step", action=0)
                assert msg["type"] == "obs"
                assert msg["step"] == i + 1

    def test_digest_matches_local_env(self, client):
        env = make("messenger", split="train", seed=0)
        obs = env.reset(7)
        with client.websocket_connect("/session") as ws:
            first = send(ws, type="reset", env="messenger", split="train",
                         seed=7)
            assert first["digest"] == obs.digest()

    def test_unknown_env_error(self, client):
        with client.websocket_connect("/session") as ws:
            msg = send(ws, type="reset", env="tetris", split="train", seed=0)
            assert msg["type"] == "error"
            assert msg["code"] == "unknown_env"

    def test_step_before_reset(self, client):
        with client.websocket_connect("/session") as ws:
            msg = send(ws, type="step", action=0)
            assert msg == {"type": "error", "code": "no_episode",
                           "message": msg["message"]}

    def test_bad_action_preserves_state(self, client):
        with client.websocket_connect("/session") as ws:
            first = send(ws, type="reset", env="rtfm", split="train", seed=9)
            err = send(ws, type="step", action=99)
            assert err["type"] == "error" and err["code"] == "bad_action"
            ok = send(ws, type="step", action=0)
            assert ok["type"] == "obs" and ok["step"] == 1

    def test_malformed_json_keeps_session(self, client):
        with client.websocket_connect("/session") as ws:
            send(ws, type="reset", env="rtfm", split="train", seed=2)
            ws.send_text("{nope")
            err = json.loads(ws.receive_text())
            assert err["type"] == "error" and err["code"] == "bad_message"
            ok = send(ws, type="step", action=1)
            assert ok["type"] == "obs"

    def test_schema_violation_rejected(self, client):
        with client.websocket_connect("/session") as ws:
            msg = send(ws, type="reset", env="rtfm", split="train",
                       seed="five")
            assert msg["type"] == "error" and msg["code"] == "bad_message"

    def test_parallel_sessions_independent(self, client):
        with client.websocket_connect("/session") as a, \
                client.websocket_connect("/session") as b:
            ra = send(a, type="reset", env="crawler", split="train", seed=3)
            rb = send(b, type="reset", env="crawler", split="train", seed=3)
            assert ra["digest"] == rb["digest"]
            sa = send(a, type="step", action=0)
            sb = send(b, type="step", action=0)
            assert sa["digest"] == sb["digest"]

    def test_overrides_forwarded(self, client):
        with client.websocket_connect("/session") as ws:
            msg = send(ws, type="reset", env="rtfm", split="train", seed=1,
                       overrides={"height": 4, "width": 4})
            assert len(msg["grid"]) == 4
            bad = send(ws, type="reset", env="rtfm", split="train", seed=1,
                       overrides={"bogus_knob": 1})
            assert bad["type"] == "error" and bad["code"] == "bad_reset"


class TestEpisodeCompletion:
    def test_full_episode_yields_replayable_trajectory(self, client, tmp_path):
        env = make("messenger", split="train", seed=0)
        env.reset(4)
        plan = oracle_solve(env)
        assert plan is not None
        with client.websocket_connect("/session") as ws:
            send(ws, type="reset", env="messenger", split="train", seed=4)
            done_msg = None
            for a in plan:
                msg = send(ws, type="step", action=int(a))
                if msg["type"] == "obs" and msg["done"]:
                    done_msg = json.loads(ws.receive_text())
                    break
            assert done_msg is not None
            assert done_msg["type"] == "done"
            assert done_msg["outcome"] == "win"
            p = tmp_path / "session.jsonl"
            p.write_text("\n".join(done_msg["trajectory"]) + "\n")
            report = replay_trajectory(p)
            assert report["ok"] and report["outcome"] == "win"


class TestWireSchema:
    def test_server_messages_validate(self, client):
        schema = load_schema()
        v = jsonschema.Draft202012Validator(
            {"$ref": "#/$defs/server", "$defs": schema["$defs"]}
        )
        with client.websocket_connect("/session") as ws:
            msgs = [send(ws, type="reset", env="textchoice", split="train",
                         seed=0)]
            msgs.append(send(ws, type="step", action=0))
            msgs.append(send(ws, type="step", action=999))
            for m in msgs:
                v.validate(m)

    def test_action_descriptors_cover_kinds(self, client):
        kinds = {}
        with client.websocket_connect("/session") as ws:
            for env_id, want in (("rtfm", "fixed"),
                                 ("textchoice", "text_choices"),
                                 ("navgraph", "nav_coordinates")):
                msg = send(ws, type="reset", env=env_id, split="train", seed=0)
                kinds[env_id] = msg["actions"]["kind"]
                assert msg["actions"]["kind"] == want
        assert len(set(kinds.values())) == 3
