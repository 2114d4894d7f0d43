"""Household command game: choose among generated text commands.

A scene is a room full of receptacle instances holding small objects.
The observation lists every currently valid command (movement between
receptacles, taking, putting, cleaning at the sink); the action is an
index into that list.  Goals are "put a <noun> on the <type>" or the
clean-first variant.  Goal triples are hash-split; separate layout
pools hold receptacle types never seen in training scenes.

The grid projection enumerates scene objects row-major, one object per
cell, so the model's world encoder sees "sponge 1" as cell tokens.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    Environment,
    Observation,
    PAD_ID,
    TextBundle,
    TextChoices,
    TextField,
    Vocabulary,
    hash_bucket,
    register,
    relative_position,
)

ON_TYPES = ("countertop", "table", "shelf", "stove", "desk", "rack")
IN_TYPES = ("drawer", "cabinet", "sink", "fridge", "dresser", "crate")
PREPOSITION = {t: "on" for t in ON_TYPES} | {t: "in" for t in IN_TYPES}

NOUNS = (
    "sponge", "mug", "plate", "knife", "apple", "cloth", "bowl", "cup",
    "pan", "soap", "towel", "spoon", "bottle", "jar", "brush",
)

# Every layout keeps >= 56 receptacle instances so the go-to commands
# alone clear the 50-command floor, and includes exactly one sink.
LAYOUTS_TRAIN = (
    (("cabinet", 16), ("drawer", 14), ("shelf", 10), ("countertop", 6),
     ("table", 4), ("desk", 3), ("stove", 2), ("fridge", 1), ("sink", 1)),
    (("cabinet", 18), ("drawer", 12), ("shelf", 8), ("countertop", 8),
     ("table", 3), ("desk", 4), ("stove", 1), ("fridge", 2), ("sink", 1)),
    (("drawer", 18), ("cabinet", 12), ("shelf", 12), ("countertop", 5),
     ("table", 5), ("desk", 2), ("stove", 1), ("fridge", 1), ("sink", 1)),
    (("cabinet", 20), ("drawer", 10), ("shelf", 9), ("countertop", 7),
     ("table", 2), ("desk", 5), ("stove", 2), ("fridge", 1), ("sink", 1)),
    (("cabinet", 14), ("drawer", 16), ("shelf", 11), ("countertop", 4),
     ("table", 6), ("desk", 1), ("stove", 2), ("fridge", 1), ("sink", 1)),
    (("cabinet", 15), ("drawer", 15), ("shelf", 7), ("countertop", 9),
     ("table", 4), ("desk", 2), ("stove", 1), ("fridge", 2), ("sink", 1)),
    (("cabinet", 17), ("drawer", 13), ("shelf", 9), ("countertop", 6),
     ("table", 5), ("desk", 3), ("stove", 1), ("fridge", 1), ("sink", 1)),
    (("cabinet", 13), ("drawer", 17), ("shelf", 10), ("countertop", 7),
     ("table", 3), ("desk", 3), ("stove", 2), ("fridge", 1), ("sink", 1)),
)
LAYOUTS_EVAL = (
    (("rack", 12), ("cabinet", 14), ("drawer", 12), ("shelf", 8),
     ("countertop", 5), ("table", 3), ("fridge", 1), ("sink", 1)),
    (("dresser", 14), ("cabinet", 12), ("drawer", 12), ("shelf", 8),
     ("countertop", 6), ("desk", 2), ("stove", 1), ("sink", 1)),
    (("crate", 13), ("rack", 9), ("drawer", 14), ("cabinet", 10),
     ("countertop", 5), ("table", 4), ("sink", 1)),
    (("dresser", 10), ("crate", 10), ("cabinet", 12), ("shelf", 12),
     ("countertop", 6), ("desk", 4), ("fridge", 1), ("sink", 1)),
)

GOAL_PUT = "your task is to put a {noun} {prep} the {rtype}"
GOAL_CLEAN = "your task is to put a clean {noun} {prep} the {rtype}"

SPLIT_NAMES = ("train", "val_new_instr", "val_new_layout", "test_new_instr",
               "test_new_layout")
_ALIASES = {"val": "val_new_instr", "test": "test_new_instr"}
_BUCKETS = {
    "train": set(range(7)),
    "val_new_instr": {7, 8},
    "val_new_layout": {7, 8},
    "test_new_instr": {9},
    "test_new_layout": {9},
}

GRID_H, GRID_W, GRID_K = 12, 16, 4


def _build_vocab() -> Vocabulary:
    words = list(ON_TYPES) + list(IN_TYPES) + list(NOUNS)
    words += [str(n) for n in range(1, 21)]
    for tpl in (GOAL_PUT, GOAL_CLEAN):
        words += tpl.format(noun="", prep="", rtype="").split()
    words += "look go to take from put on in clean with and".split()
    words += "you see nothing are at holding arrive".split()
    return Vocabulary(words)


VOCAB = _build_vocab()


@dataclass(frozen=True)
class TextChoiceConfig:
    objects: tuple[int, int] = (26, 32)
    dirty_chance: float = 0.5


@dataclass
class _Object:
    noun: str
    num: int
    dirty: bool
    location: int  # receptacle index, or -1 while held

    @property
    def name(self) -> str:
        return f"{self.noun} {self.num}"


@register
class TextChoiceEnv(Environment):
    env_id = "textchoice"
    step_limit = 32
    limit_reward = -1.0

    def __init__(self, split: str = "train", seed: int = 0, **overrides) -> None:
        split = _ALIASES.get(split, split)
        super().__init__(split, seed)
        self.cfg = TextChoiceConfig(**overrides)
        self._legend = VOCAB.legend()

    def split_names(self) -> tuple[str, ...]:
        return SPLIT_NAMES

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return (GRID_H, GRID_W, GRID_K)

    @property
    def vocab(self) -> Vocabulary:
        return VOCAB

    @property
    def has_agent_cell(self) -> bool:
        return False

    # -- scene construction ---------------------------------------------------

    def _generate(self, rng: np.random.Generator) -> Observation:
        pool = LAYOUTS_EVAL if self.split.endswith("new_layout") else LAYOUTS_TRAIN
        self.layout = pool[int(rng.integers(len(pool)))]
        self.receptacles: list[str] = []
        self.rec_type: list[str] = []
        for rtype, count in self.layout:
            for i in range(1, count + 1):
                self.receptacles.append(f"{rtype} {i}")
                self.rec_type.append(rtype)

        n_objects = int(rng.integers(self.cfg.objects[0], self.cfg.objects[1] + 1))
        counts: dict[str, int] = {}
        self.objects: list[_Object] = []
        for _ in range(n_objects):
            noun = NOUNS[int(rng.integers(len(NOUNS)))]
            counts[noun] = counts.get(noun, 0) + 1
            self.objects.append(
                _Object(
                    noun,
                    counts[noun],
                    bool(rng.random() < self.cfg.dirty_chance),
                    int(rng.integers(len(self.receptacles))),
                )
            )
        self.location = int(rng.integers(len(self.receptacles)))
        self.holding: int | None = None

        buckets = _BUCKETS[self.split]
        present = sorted({o.noun for o in self.objects})
        types_here = sorted({t for t, _ in self.layout})
        for _ in range(10_000):
            family = ("put", "clean")[int(rng.integers(2))]
            noun = present[int(rng.integers(len(present)))]
            rtype = types_here[int(rng.integers(len(types_here)))]
            if hash_bucket((family, noun, rtype)) not in buckets:
                continue
            self.goal = (family, noun, rtype)
            if not self._satisfied():
                break
        else:
            raise RuntimeError("could not sample an unsatisfied goal for this scene")

        tpl = GOAL_CLEAN if self.goal[0] == "clean" else GOAL_PUT
        self._goal_text = tpl.format(
            noun=self.goal[1], prep=PREPOSITION[self.goal[2]], rtype=self.goal[2]
        )
        self._feedback = self._look_text()
        return self._observe()

    # -- helpers ---------------------------------------------------------------

    def _satisfied(self) -> bool:
        family, noun, rtype = self.goal
        for obj in self.objects:
            if obj.noun != noun or obj.location < 0:
                continue
            if self.rec_type[obj.location] != rtype:
                continue
            if family == "clean" and obj.dirty:
                continue
            return True
        return False

    def _contents(self, rec: int) -> list[_Object]:
        return [o for o in self.objects if o.location == rec]

    def _listing(self, objs: list[_Object]) -> str:
        if not objs:
            return "nothing"
        names = [o.name for o in objs]
        return names[0] if len(names) == 1 else " and ".join([" ".join(names[:-1]), names[-1]])

    def _look_text(self) -> str:
        here = self.receptacles[self.location]
        return f"you are at {here} . you see {self._listing(self._contents(self.location))}"

    def _sink_index(self) -> int:
        return self.rec_type.index("sink")

    def _commands(self) -> list[tuple]:
        cmds: list[tuple] = [("look",)]
        for i, rec in enumerate(self.receptacles):
            if i != self.location:
                cmds.append(("go", i))
        if self.holding is None:
            for oi, obj in enumerate(self.objects):
                if obj.location == self.location:
                    cmds.append(("take", oi))
        else:
            cmds.append(("put", self.holding, self.location))
            obj = self.objects[self.holding]
            if obj.dirty and self.location == self._sink_index():
                cmds.append(("clean", self.holding))
        return cmds

    def _command_text(self, cmd: tuple) -> str:
        if cmd[0] == "look":
            return "look"
        if cmd[0] == "go":
            return f"go to {self.receptacles[cmd[1]]}"
        if cmd[0] == "take":
            obj = self.objects[cmd[1]]
            return f"take {obj.name} from {self.receptacles[obj.location]}"
        if cmd[0] == "put":
            rec = cmd[2]
            prep = PREPOSITION[self.rec_type[rec]]
            return f"put {self.objects[cmd[1]].name} {prep} {self.receptacles[rec]}"
        if cmd[0] == "clean":
            return f"clean {self.objects[cmd[1]].name} with sink 1"
        raise ValueError(cmd)

    # -- observation -------------------------------------------------------------

    def _observe(self) -> Observation:
        grid = np.full((GRID_H, GRID_W, GRID_K), PAD_ID, dtype=np.int32)
        for i, obj in enumerate(self.objects):
            r, c = divmod(i, GRID_W)
            grid[r, c, 0] = VOCAB.id_of(obj.noun)
            grid[r, c, 1] = VOCAB.id_of(str(obj.num))

        scene = " ".join(o.name for o in self.objects)
        held = self.objects[self.holding].name if self.holding is not None else "nothing"
        status = f"you are at {self.receptacles[self.location]} holding {held}"
        fields = (
            TextField("goal", self._goal_text, tuple(VOCAB.tokenize(self._goal_text))),
            TextField("objects", scene, tuple(VOCAB.tokenize(scene))),
            TextField("status", status, tuple(VOCAB.tokenize(status))),
            TextField("feedback", self._feedback, tuple(VOCAB.tokenize(self._feedback))),
        )
        joint = ". ".join(f.text for f in fields)
        text = TextBundle(fields, joint, tuple(VOCAB.tokenize(joint)))

        self._current = self._commands()
        choices = tuple(self._command_text(c) for c in self._current)
        actions = TextChoices(choices, tuple(tuple(VOCAB.tokenize(c)) for c in choices))
        relpos = relative_position(GRID_H, GRID_W, None)
        return Observation(grid, text, relpos, actions, self._legend)

    # -- stepping ------------------------------------------------------------------

    def _apply(self, action: int) -> tuple[Observation, float, bool, dict]:
        cmd = self._current[action]
        if cmd[0] == "look":
            self._feedback = self._look_text()
        elif cmd[0] == "go":
            self.location = cmd[1]
            self._feedback = self._look_text()
        elif cmd[0] == "take":
            obj = self.objects[cmd[1]]
            obj.location = -1
            self.holding = cmd[1]
            self._feedback = f"you take {obj.name}"
        elif cmd[0] == "put":
            obj = self.objects[cmd[1]]
            obj.location = cmd[2]
            self.holding = None
            prep = PREPOSITION[self.rec_type[cmd[2]]]
            self._feedback = f"you put {obj.name} {prep} {self.receptacles[cmd[2]]}"
        elif cmd[0] == "clean":
            obj = self.objects[cmd[1]]
            obj.dirty = False
            self._feedback = f"you clean {obj.name}"

        done = self._satisfied()
        reward = 1.0 if done else 0.0
        info: dict = {"goal": self.goal}
        if done:
            info["win"] = True
        return self._observe(), reward, done, info


def planner_commands(env: TextChoiceEnv) -> list[str]:
    """Scripted solution for the current episode, as command strings."""
    family, noun, rtype = env.goal
    candidates = [o for o in env.objects if o.noun == noun and o.location >= 0]
    if family == "clean":
        clean_ones = [o for o in candidates if not o.dirty]
        obj = clean_ones[0] if clean_ones else candidates[0]
    else:
        obj = candidates[0]
    target = env.rec_type.index(rtype)
    sink = env.rec_type.index("sink")

    plan: list[str] = []
    location = env.location
    if obj.location != location:
        plan.append(f"go to {env.receptacles[obj.location]}")
        location = obj.location
    plan.append(f"take {obj.name} from {env.receptacles[location]}")
    if family == "clean" and obj.dirty:
        if location != sink:
            plan.append("go to sink 1")
            location = sink
        plan.append(f"clean {obj.name} with sink 1")
    if location != target:
        plan.append(f"go to {env.receptacles[target]}")
        location = target
    prep = PREPOSITION[rtype]
    plan.append(f"put {obj.name} {prep} {env.receptacles[target]}")
    return plan


def run_planner(env: TextChoiceEnv) -> tuple[bool, int]:
    """Execute the planner from the current state: (won, steps)."""
    steps = 0
    for command in planner_commands(env):
        choices = env.last_obs.actions.choices
        result = env.step(choices.index(command))
        steps += 1
        if result.done:
            return bool(result.info.get("win")), steps
    return False, steps
