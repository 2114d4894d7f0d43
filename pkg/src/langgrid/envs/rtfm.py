"""Beat-table grid game: read the manual, arm yourself, defeat the right team.

Each episode samples latent dynamics (team rosters, monster elements, a
bijective modifier-beats-element table, a target team), renders them as
a short manual, and places the agent, one monster per team, and two
items on the grid.  Winning requires chaining goal -> target team ->
on-map monster -> its element -> the modifier that beats it -> the item
carrying that modifier, then touching the monster while holding it.

Dynamics tuples are hash-assigned to train/val/test, so evaluation
worlds never occur during training.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

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

TEAMS = ("star alliance", "rebel enclave")
MONSTERS = ("goblin", "shaman", "wolf", "imp", "zombie", "dragon")
ELEMENTS = ("fire", "lightning", "poison", "cold")
MODIFIERS = ("arcane", "blessed", "shimmering", "gleaming")
ITEM_NOUNS = ("sword", "axe", "staff", "hammer", "dagger", "bow")

MEMBER_TEMPLATES = (
    "{members} are on the {team} team",
    "the {team} team consists of {members}",
    "{team} members include {members}",
)
BEAT_TEMPLATES = (
    "{mod} items beat {el} monsters",
    "{el} monsters are weak to {mod} items",
    "use {mod} items against {el} monsters",
)
GOAL_TEMPLATE = "defeat the {team}"
INVENTORY_EMPTY = "your inventory is empty"
INVENTORY_FULL = "you have a {mod} {noun}"

AGENT_WORD = "you"

ACTIONS = FixedActions(("up", "down", "left", "right", "stay"))
DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1), (0, 0))


def _build_vocab() -> Vocabulary:
    words: list[str] = [AGENT_WORD]
    words += [w for t in TEAMS for w in t.split()]
    words += MONSTERS + ELEMENTS + MODIFIERS + ITEM_NOUNS
    for t in MEMBER_TEMPLATES + BEAT_TEMPLATES:
        words += t.format(members="", team="", mod="", el="").split()
    words += GOAL_TEMPLATE.format(team="").split()
    words += INVENTORY_EMPTY.split()
    words += INVENTORY_FULL.format(mod="", noun="").split()
    words += ["and"]
    return Vocabulary(words)


VOCAB = _build_vocab()


@dataclass(frozen=True)
class RtfmConfig:
    height: int = 6
    width: int = 6
    monster_pool: int = 6    # names drawn from MONSTERS[:monster_pool]
    n_elements: int = 4
    n_modifiers: int = 4
    n_item_nouns: int = 6
    chase_period: int = 2    # monsters advance every chase_period-th step; 0 = never
    min_spawn_distance: int = 2

    def __post_init__(self) -> None:
        if self.n_modifiers != self.n_elements:
            raise ValueError("beat table is a bijection: n_modifiers must equal n_elements")
        if self.monster_pool % 2 or not 2 <= self.monster_pool <= len(MONSTERS):
            raise ValueError("monster_pool must be even and within the name pool")
        if self.height * self.width < 8:
            raise ValueError("grid too small for agent, two monsters, and two items")


@dataclass(frozen=True)
class Dynamics:
    teams: tuple[tuple[str, ...], ...]        # rosters, one tuple per team name
    elements: tuple[tuple[str, str], ...]     # (monster, element) for every monster
    beats: tuple[tuple[str, str], ...]        # (modifier, element it defeats)
    target_team: str

    def key(self):
        return (self.teams, self.elements, self.beats, self.target_team)

    def element_of(self, monster: str) -> str:
        return dict(self.elements)[monster]

    def modifier_beating(self, element: str) -> str:
        for mod, el in self.beats:
            if el == element:
                return mod
        raise KeyError(element)


@dataclass(frozen=True)
class _Monster:
    team: str
    name: str
    element: str


@dataclass(frozen=True)
class _Item:
    modifier: str
    noun: str


@dataclass(frozen=True)
class _State:
    """Full mutable episode state, kept immutable so the oracle can search it."""

    agent: tuple[int, int]
    monster_pos: tuple[tuple[int, int] | None, ...]   # None once defeated
    item_pos: tuple[tuple[int, int] | None, ...]      # None while carried
    inventory: int            # index into items, or -1
    steps: int


def _chase_step(
    pos: tuple[int, int],
    agent: tuple[int, int],
    blocked: set[tuple[int, int]],
) -> tuple[int, int]:
    """One chase move: larger axis first (ties row-first), blocked cells skipped."""
    dr = agent[0] - pos[0]
    dc = agent[1] - pos[1]
    if dr == 0 and dc == 0:
        return pos
    prefer_row = abs(dr) >= abs(dc) and dr != 0
    moves = []
    if prefer_row:
        moves.append((pos[0] + (1 if dr > 0 else -1), pos[1]))
        if dc != 0:
            moves.append((pos[0], pos[1] + (1 if dc > 0 else -1)))
    else:
        moves.append((pos[0], pos[1] + (1 if dc > 0 else -1)))
        if dr != 0:
            moves.append((pos[0] + (1 if dr > 0 else -1), pos[1]))
    for move in moves:
        if move not in blocked:
            return move
    return pos


class _Rules:
    """Pure transition function shared by the environment and the oracle."""

    def __init__(self, cfg: RtfmConfig, monsters: tuple[_Monster, ...],
                 items: tuple[_Item, ...], winning: dict) -> None:
        self.cfg = cfg
        self.monsters = monsters
        self.items = items
        self.winning = winning  # {"team": ..., "modifier": ...}

    def _combat(self, state: _State, mi: int) -> tuple[bool, bool]:
        """(done, win) for the agent touching monster mi."""
        m = self.monsters[mi]
        armed = (
            state.inventory >= 0
            and self.items[state.inventory].modifier == self.winning["modifier"]
        )
        win = m.team == self.winning["team"] and armed
        return True, win

    def transition(self, state: _State, action: int) -> tuple[_State, bool, bool]:
        """Apply one agent action (and any due chase moves): (state, done, win)."""
        cfg = self.cfg
        dr, dc = DELTAS[action]
        r = min(max(state.agent[0] + dr, 0), cfg.height - 1)
        c = min(max(state.agent[1] + dc, 0), cfg.width - 1)
        agent = (r, c)
        monster_pos = list(state.monster_pos)
        item_pos = list(state.item_pos)
        inventory = state.inventory

        for mi, mp in enumerate(monster_pos):
            if mp == agent:
                done, win = self._combat(state, mi)
                return (
                    replace(state, agent=agent, steps=state.steps + 1),
                    done,
                    win,
                )
        for ii, ip in enumerate(item_pos):
            if ip == agent:
                item_pos[ii] = None
                if inventory >= 0:
                    item_pos[inventory] = agent
                inventory = ii
                break

        steps = state.steps + 1
        if cfg.chase_period and steps % cfg.chase_period == 0:
            for mi, mp in enumerate(monster_pos):
                if mp is None:
                    continue
                blocked = {p for p in item_pos if p is not None}
                blocked |= {p for j, p in enumerate(monster_pos) if j != mi and p is not None}
                new_mp = _chase_step(mp, agent, blocked)
                monster_pos[mi] = new_mp
                if new_mp == agent:
                    done, win = self._combat(
                        replace(state, inventory=inventory), mi
                    )
                    return (
                        _State(agent, tuple(monster_pos), tuple(item_pos), inventory, steps),
                        done,
                        win,
                    )

        return (
            _State(agent, tuple(monster_pos), tuple(item_pos), inventory, steps),
            False,
            False,
        )


@register
class RtfmEnv(Environment):
    env_id = "rtfm"
    step_limit = 32

    def __init__(self, split: str = "train", seed: int = 0, **overrides) -> None:
        super().__init__(split, seed)
        self.cfg = RtfmConfig(**overrides)
        self._legend = VOCAB.legend()

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return (self.cfg.height, self.cfg.width, 2)

    @property
    def vocab(self) -> Vocabulary:
        return VOCAB

    # -- episode construction ------------------------------------------------

    def _sample_dynamics(self, rng: np.random.Generator) -> Dynamics:
        cfg = self.cfg
        pool = list(MONSTERS[: cfg.monster_pool])
        order = rng.permutation(len(pool))
        half = cfg.monster_pool // 2
        rosters = (
            tuple(sorted(pool[i] for i in order[:half])),
            tuple(sorted(pool[i] for i in order[half:])),
        )
        elements = ELEMENTS[: cfg.n_elements]
        assigned = tuple(
            (m, elements[rng.integers(len(elements))])
            for roster in rosters
            for m in roster
        )
        beat_order = rng.permutation(cfg.n_elements)
        beats = tuple(
            (MODIFIERS[i], elements[beat_order[i]]) for i in range(cfg.n_modifiers)
        )
        target = TEAMS[rng.integers(2)]
        return Dynamics(rosters, assigned, beats, target)

    def _generate(self, rng: np.random.Generator) -> Observation:
        while True:
            dyn = self._sample_dynamics(rng)
            if split_for_key(dyn.key()) == self.split:
                break
        self.dynamics = dyn

        cfg = self.cfg
        rosters = dict(zip(TEAMS, dyn.teams))
        on_map = tuple(
            _Monster(team, roster[rng.integers(len(roster))], "")
            for team, roster in zip(TEAMS, dyn.teams)
        )
        on_map = tuple(
            _Monster(m.team, m.name, dyn.element_of(m.name)) for m in on_map
        )
        target_monster = next(m for m in on_map if m.team == dyn.target_team)
        win_mod = dyn.modifier_beating(target_monster.element)
        other_mods = [m for m, _ in dyn.beats if m != win_mod]
        nouns = ITEM_NOUNS[: cfg.n_item_nouns]
        items = (
            _Item(win_mod, nouns[rng.integers(len(nouns))]),
            _Item(other_mods[rng.integers(len(other_mods))], nouns[rng.integers(len(nouns))]),
        )

        n_cells = cfg.height * cfg.width
        while True:
            flat = rng.choice(n_cells, size=5, replace=False)
            cells = [(int(i) // cfg.width, int(i) % cfg.width) for i in flat]
            agent, m0, m1, i0, i1 = cells
            if all(
                abs(agent[0] - p[0]) + abs(agent[1] - p[1]) >= cfg.min_spawn_distance
                for p in (m0, m1)
            ):
                break

        self.rules = _Rules(
            cfg, on_map, items, {"team": dyn.target_team, "modifier": win_mod}
        )
        self.state = _State(agent, (m0, m1), (i0, i1), -1, 0)

        manual_sentences = []
        for team, roster in rosters.items():
            members = " ".join(roster[:-1]) + " and " + roster[-1]
            tpl = MEMBER_TEMPLATES[rng.integers(len(MEMBER_TEMPLATES))]
            manual_sentences.append(tpl.format(members=members, team=team))
        for el in sorted({m.element for m in on_map}):
            tpl = BEAT_TEMPLATES[rng.integers(len(BEAT_TEMPLATES))]
            manual_sentences.append(tpl.format(mod=dyn.modifier_beating(el), el=el))
        order = rng.permutation(len(manual_sentences))
        self._manual_text = ". ".join(manual_sentences[i] for i in order)
        self._goal_text = GOAL_TEMPLATE.format(team=dyn.target_team)
        return self._observe()

    # -- rendering -----------------------------------------------------------

    def _inventory_text(self) -> str:
        if self.state.inventory < 0:
            return INVENTORY_EMPTY
        item = self.rules.items[self.state.inventory]
        return INVENTORY_FULL.format(mod=item.modifier, noun=item.noun)

    def _observe(self) -> Observation:
        cfg = self.cfg
        grid = np.full((cfg.height, cfg.width, 2), PAD_ID, dtype=np.int32)
        for item, pos in zip(self.rules.items, self.state.item_pos):
            if pos is not None:
                grid[pos[0], pos[1], 0] = VOCAB.id_of(item.modifier)
                grid[pos[0], pos[1], 1] = VOCAB.id_of(item.noun)
        for monster, pos in zip(self.rules.monsters, self.state.monster_pos):
            if pos is not None:
                grid[pos[0], pos[1], 0] = VOCAB.id_of(monster.element)
                grid[pos[0], pos[1], 1] = VOCAB.id_of(monster.name)
        ar, ac = self.state.agent
        grid[ar, ac, 0] = VOCAB.id_of(AGENT_WORD)
        grid[ar, ac, 1] = PAD_ID

        fields = (
            TextField("manual", self._manual_text, tuple(VOCAB.tokenize(self._manual_text))),
            TextField("goal", self._goal_text, tuple(VOCAB.tokenize(self._goal_text))),
            TextField("inventory", self._inventory_text(), tuple(VOCAB.tokenize(self._inventory_text()))),
        )
        joint = ". ".join(f.text for f in fields)
        text = TextBundle(fields, joint, tuple(VOCAB.tokenize(joint)))
        relpos = relative_position(cfg.height, cfg.width, self.state.agent)
        return Observation(grid, text, relpos, ACTIONS, self._legend)

    # -- stepping ------------------------------------------------------------

    def _apply(self, action: int) -> tuple[Observation, float, bool, dict]:
        self.state, done, win = self.rules.transition(self.state, action)
        reward = (1.0 if win else -1.0) if done else 0.0
        info: dict = {}
        if done:
            info["win"] = win
        return self._observe(), reward, done, info


def grid_shortest_path(
    h: int,
    w: int,
    blocked: set[tuple[int, int]],
    start: tuple[int, int],
    goal: tuple[int, int],
) -> list[int] | None:
    """BFS action sequence on the move grid, or None when unreachable."""
    if start == goal:
        return []
    frontier = deque([start])
    parents: dict[tuple[int, int], tuple[tuple[int, int], int]] = {start: (start, -1)}
    while frontier:
        cell = frontier.popleft()
        for action, (dr, dc) in enumerate(DELTAS[:4]):
            nxt = (cell[0] + dr, cell[1] + dc)
            if not (0 <= nxt[0] < h and 0 <= nxt[1] < w):
                continue
            if nxt in parents or nxt in blocked:
                continue
            parents[nxt] = (cell, action)
            if nxt == goal:
                path = []
                cur = nxt
                while cur != start:
                    cur, act = parents[cur]
                    path.append(act)
                return path[::-1]
            frontier.append(nxt)
    return None


def oracle_solve(env: RtfmEnv, max_depth: int | None = None) -> list[int] | None:
    """Shortest winning action sequence from the env's current state.

    Breadth-first search over the full deterministic game state; the
    chase rule is part of the searched transition, so a returned plan is
    a certified win, not a heuristic.
    """
    limit = env.step_limit if max_depth is None else max_depth
    rules = env.rules
    start = env.state
    budget = limit - start.steps
    if budget <= 0:
        return None
    seen = {(start.agent, start.monster_pos, start.item_pos, start.inventory,
             start.steps % max(env.cfg.chase_period, 1))}
    frontier = deque([(start, [])])
    while frontier:
        state, plan = frontier.popleft()
        if len(plan) >= budget:
            continue
        for action in range(len(ACTIONS)):
            nxt, done, win = rules.transition(state, action)
            if done:
                if win:
                    return plan + [action]
                continue
            key = (nxt.agent, nxt.monster_pos, nxt.item_pos, nxt.inventory,
                   nxt.steps % max(env.cfg.chase_period, 1))
            if key in seen:
                continue
            seen.add(key)
            frontier.append((nxt, plan + [action]))
    return None


def oracle_winning_item(env: RtfmEnv) -> int:
    """Index of the item whose modifier beats the target monster's element."""
    dyn = env.dynamics
    target = next(m for m in env.rules.monsters if m.team == dyn.target_team)
    want = dyn.modifier_beating(target.element)
    for i, item in enumerate(env.rules.items):
        if item.modifier == want:
            return i
    raise RuntimeError("episode has no winning item")
