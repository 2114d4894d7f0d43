"""Regenerate test fixtures from the real service implementation.

Fixtures are exact server frames (the Session state machine's replies),
so the frontend tests exercise the same bytes a live websocket would
deliver.  Run from frontend/: python3 tools/make_fixtures.py
"""
import json
import pathlib

from langgrid.cli.service import Session
from langgrid.core import make
from langgrid.envs.messenger import oracle_solve

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

RESETS = {
    "obs_rtfm": {"env": "rtfm", "split": "train", "seed": 3},
    "obs_messenger": {"env": "messenger", "split": "train", "seed": 4},
    "obs_crawler": {"env": "crawler", "split": "train", "seed": 5},
    "obs_textchoice": {"env": "textchoice", "split": "train", "seed": 6},
    "obs_navgraph": {"env": "navgraph", "split": "train", "seed": 7},
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, req in RESETS.items():
        session = Session()
        replies = session.handle(json.dumps({"type": "reset", **req}))
        assert len(replies) == 1 and replies[0]["type"] == "obs", name
        (OUT / f"{name}.json").write_text(
            json.dumps(replies[0], indent=2) + "\n"
        )

    env = make("messenger", split="train", seed=0)
    env.reset(RESETS["obs_messenger"]["seed"])
    plan = oracle_solve(env)
    assert plan is not None
    script = {
        "reset": RESETS["obs_messenger"],
        "plan": [int(a) for a in plan],
        "outcome": "win",
    }
    (OUT / "messenger_script.json").write_text(
        json.dumps(script, indent=2) + "\n"
    )
    print(f"wrote {len(RESETS) + 1} fixtures to {OUT}")


if __name__ == "__main__":
    main()
