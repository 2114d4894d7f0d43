"""Household command environment: goals, preconditions, splits, planner."""
import pytest

from langgrid.core import hash_bucket, make
from langgrid.envs.textchoice import (
    LAYOUTS_EVAL,
    LAYOUTS_TRAIN,
    SPLIT_NAMES,
    run_planner,
)


@pytest.fixture(scope="module")
def env():
    return make("textchoice", split="train", seed=0)


class TestGeneration:
    def test_enough_choices_for_head(self, env):
        for seed in range(20):
            obs = env.reset(seed)
            assert len(obs.actions) >= 50

    def test_goal_triple_in_train_buckets(self, env):
        for seed in range(40):
            env.reset(seed)
            assert hash_bucket(env.goal) in range(0, 7)

    def test_eval_layout_has_heldout_types(self):
        e = make("textchoice", split="val_new_layout", seed=0)
        for seed in range(10):
            e.reset(seed)
            heldout = {"rack", "dresser", "crate"}
            assert heldout & set(e.rec_type), "eval layout misses held-out types"

    def test_train_layouts_exclude_heldout(self):
        heldout = {"rack", "dresser", "crate"}
        for layout in LAYOUTS_TRAIN:
            assert not heldout & {t for t, _ in layout}
        for layout in LAYOUTS_EVAL:
            assert heldout & {t for t, _ in layout}

    def test_split_aliases(self):
        v = make("textchoice", split="val", seed=0)
        assert v.split == "val_new_instr"
        t = make("textchoice", split="test", seed=0)
        assert t.split == "test_new_instr"
        assert set(SPLIT_NAMES) == {
            "train", "val_new_instr", "val_new_layout",
            "test_new_instr", "test_new_layout"}

    def test_goal_stated_in_field(self, env):
        obs = env.reset(7)
        goal_field = [f for f in obs.text.fields if f.name == "goal"][0]
        _, noun, rtype = env.goal
        assert noun in goal_field.text and rtype in goal_field.text


class TestPreconditions:
    def test_take_requires_empty_hand(self, env):
        env.reset(11)
        take = [c for c in env.last_obs.actions.choices if c.startswith("take")]
        if not take:
            go = [i for i, c in enumerate(env.last_obs.actions.choices)
                  if c.startswith("go")]
            env.step(go[0])
            take = [c for c in env.last_obs.actions.choices
                    if c.startswith("take")]
        if take:
            env.step(env.last_obs.actions.choices.index(take[0]))
            held = [c for c in env.last_obs.actions.choices
                    if c.startswith("take")]
            assert not held, "take offered while already holding"

    def test_put_requires_held_object(self, env):
        env.reset(12)
        puts = [c for c in env.last_obs.actions.choices if c.startswith("put")]
        assert not puts, "put offered with empty hands"

    def test_go_commands_exclude_current(self, env):
        env.reset(13)
        here = env.receptacles[env.location]
        gos = [c for c in env.last_obs.actions.choices if c.startswith("go")]
        assert f"go to the {here}" not in gos
        assert len(gos) >= 50


class TestPlanner:
    def test_planner_wins_fast(self, env):
        for seed in range(50):
            env.reset(seed)
            won, steps = run_planner(env)
            assert won, f"seed {seed}"
            assert steps <= 7

    def test_planner_wins_eval_layouts(self):
        e = make("textchoice", split="test_new_layout", seed=0)
        for seed in range(25):
            e.reset(seed)
            won, steps = run_planner(e)
            assert won and steps <= 7

    def test_limit_reward(self, env):
        env.reset(3)
        look = env.last_obs.actions.choices.index("look")
        while not env.done:
            result = env.step(look)
        assert result.info.get("limit")
        assert result.info["raw_reward"] == -1.0
