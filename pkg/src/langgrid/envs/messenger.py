"""Courier grid game: identify roles from text, fetch the message, deliver it.

Three entities appear on the grid as opaque glyph symbols.  The manual
assigns them roles (message holder, destination, enemy) using synonyms
that never appear on the grid, so the agent has to ground text onto
symbols rather than string-match.  Role assignments are hash-split so
evaluation assignments never occur in training.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    Environment,
    FixedActions,
    Observation,
    PAD_ID,
    TextBundle,
    TextField,
    Vocabulary,
    register,
    relative_position,
    split_for_key,
)
from .rtfm import grid_shortest_path

ENTITIES = (
    ("dog", "hound", "canine"),
    ("cat", "feline", "tabby"),
    ("fox", "vixen", "reynard"),
    ("bear", "grizzly", "bruin"),
    ("bird", "sparrow", "finch"),
    ("whale", "orca", "leviathan"),
    ("mage", "wizard", "sorcerer"),
    ("thief", "rogue", "bandit"),
    ("ship", "boat", "vessel"),
    ("plane", "airplane", "jet"),
    ("robot", "machine", "automaton"),
    ("ghost", "spirit", "phantom"),
)
GLYPHS = tuple(f"glyph{i}" for i in range(len(ENTITIES)))

ROLES = ("message", "goal", "enemy")
ROLE_TEMPLATES = {
    "message": (
        "the {syn} is the one carrying the secret message",
        "you must first pick up the message from the {syn}",
        "the message you need is held by the {syn}",
    ),
    "goal": (
        "the {syn} is waiting for the message to arrive",
        "once you have it bring the message to the {syn}",
        "deliver the message you collect to the {syn}",
    ),
    "enemy": (
        "whatever happens keep away from the {syn}",
        "the {syn} will destroy you so avoid it",
        "do not let the {syn} come near you",
    ),
}

AGENT_WORD = "you"
CARRIER_WORD = "courier"

ACTIONS = FixedActions(("up", "down", "left", "right", "stay"))
DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0))


def _build_vocab() -> Vocabulary:
    words: list[str] = [AGENT_WORD, CARRIER_WORD]
    words += [syn for group in ENTITIES for syn in group]
    words += GLYPHS
    for templates in ROLE_TEMPLATES.values():
        for t in templates:
            words += t.format(syn="").split()
    return Vocabulary(words)


VOCAB = _build_vocab()


@dataclass(frozen=True)
class MessengerConfig:
    height: int = 10
    width: int = 10
    min_pairwise_distance: int = 3
    # Oracle path (message leg + delivery leg) must fit the step limit
    # with one step to spare; spawns are rejection-sampled against this.
    max_oracle_steps: int = 15


@register
class MessengerEnv(Environment):
    env_id = "messenger"
    step_limit = 16

    def __init__(self, split: str = "train", seed: int = 0, **overrides) -> None:
        super().__init__(split, seed)
        self.cfg = MessengerConfig(**overrides)
        self._legend = VOCAB.legend()

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return (self.cfg.height, self.cfg.width, 1)

    @property
    def vocab(self) -> Vocabulary:
        return VOCAB

    def _generate(self, rng: np.random.Generator) -> Observation:
        while True:
            picks = rng.choice(len(ENTITIES), size=3, replace=False)
            assignment = tuple(
                (role, ENTITIES[int(e)][0]) for role, e in zip(ROLES, picks)
            )
            if split_for_key(assignment) == self.split:
                break
        self.assignment = assignment
        self.entity_ids = {role: int(e) for role, e in zip(ROLES, picks)}

        cfg = self.cfg
        n_cells = cfg.height * cfg.width
        while True:
            flat = rng.choice(n_cells, size=4, replace=False)
            cells = [(int(i) // cfg.width, int(i) % cfg.width) for i in flat]
            agent, msg, goal, enemy = cells
            pairs = [(agent, msg), (agent, goal), (agent, enemy),
                     (msg, goal), (msg, enemy), (goal, enemy)]
            if any(
                abs(a[0] - b[0]) + abs(a[1] - b[1]) < cfg.min_pairwise_distance
                for a, b in pairs
            ):
                continue
            leg1 = grid_shortest_path(
                cfg.height, cfg.width, {goal, enemy}, agent, msg
            )
            leg2 = grid_shortest_path(cfg.height, cfg.width, {enemy}, msg, goal)
            if leg1 is not None and leg2 is not None:
                if len(leg1) + len(leg2) <= cfg.max_oracle_steps:
                    break

        self.agent = agent
        self.positions = {"message": msg, "goal": goal, "enemy": enemy}
        self.has_message = False
        self.message_taken = False

        sentences = []
        for role, entity in assignment:
            group = ENTITIES[self.entity_ids[role]]
            syn = group[rng.integers(len(group))]
            tpl = ROLE_TEMPLATES[role][rng.integers(len(ROLE_TEMPLATES[role]))]
            sentences.append(tpl.format(syn=syn))
        order = [int(i) for i in rng.permutation(3)]
        self._sentences = [sentences[i] for i in order]
        return self._observe()

    def _observe(self) -> Observation:
        cfg = self.cfg
        grid = np.full((cfg.height, cfg.width, 1), PAD_ID, dtype=np.int32)
        for role in ROLES:
            if role == "message" and self.message_taken:
                continue
            r, c = self.positions[role]
            grid[r, c, 0] = VOCAB.id_of(GLYPHS[self.entity_ids[role]])
        ar, ac = self.agent
        grid[ar, ac, 0] = VOCAB.id_of(CARRIER_WORD if self.has_message else AGENT_WORD)

        fields = tuple(
            TextField(f"hint{i}", s, tuple(VOCAB.tokenize(s)))
            for i, s in enumerate(self._sentences)
        )
        joint = ". ".join(f.text for f in fields)
        text = TextBundle(fields, joint, tuple(VOCAB.tokenize(joint)))
        relpos = relative_position(cfg.height, cfg.width, self.agent)
        return Observation(grid, text, relpos, ACTIONS, self._legend)

    def _apply(self, action: int) -> tuple[Observation, float, bool, dict]:
        cfg = self.cfg
        dr, dc = DELTAS[action]
        target = (
            min(max(self.agent[0] + dr, 0), cfg.height - 1),
            min(max(self.agent[1] + dc, 0), cfg.width - 1),
        )
        done, win = False, False
        if target == self.positions["enemy"]:
            self.agent = target
            done, win = True, False
        elif target == self.positions["message"] and not self.message_taken:
            self.agent = target
            self.has_message = True
            self.message_taken = True
        elif target == self.positions["goal"]:
            if self.has_message:
                self.agent = target
                done, win = True, True
            # without the message the destination blocks: nothing happens
        else:
            self.agent = target
        reward = (1.0 if win else -1.0) if done else 0.0
        info: dict = {"has_message": self.has_message}
        if done:
            info["win"] = win
        return self._observe(), reward, done, info


def oracle_solve(env: MessengerEnv) -> list[int] | None:
    """Shortest message-then-goal action sequence from the current state."""
    cfg = env.cfg
    enemy = env.positions["enemy"]
    goal = env.positions["goal"]
    if env.has_message:
        return grid_shortest_path(cfg.height, cfg.width, {enemy}, env.agent, goal)
    msg = env.positions["message"]
    leg1 = grid_shortest_path(cfg.height, cfg.width, {goal, enemy}, env.agent, msg)
    leg2 = grid_shortest_path(cfg.height, cfg.width, {enemy}, msg, goal)
    if leg1 is None or leg2 is None:
        return None
    return leg1 + leg2
