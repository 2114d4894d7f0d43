"""Environment base class: seeding, step accounting, penalty, limits.

Subclasses implement episode generation and the raw transition; this
class owns everything the contract promises uniformly: deterministic
per-episode rngs, action validation against the current descriptor,
the per-step penalty (terminal steps exempt), the step limit, and
rejection of steps after done.
"""
from __future__ import annotations

import numpy as np

from .hashing import stable_hash64
from .splits import DEFAULT_SPLITS, SplitSpec
from .tokens import Vocabulary
from .types import Observation, StepResult


class Environment:
    env_id: str = ""
    step_limit: int = 0
    step_penalty: float = -0.02
    limit_reward: float = 0.0
    splits: SplitSpec = DEFAULT_SPLITS

    def __init__(self, split: str = "train", seed: int = 0) -> None:
        if split not in self.split_names():
            raise ValueError(f"unknown split {split!r} for {self.env_id}")
        self.split = split
        self._auto_seed = seed
        self._steps = 0
        self._done = True
        self._last_obs: Observation | None = None
        self.episode_seed: int | None = None

    # -- subclass interface -------------------------------------------------

    def _generate(self, rng: np.random.Generator) -> Observation:
        raise NotImplementedError

    def _apply(self, action: int) -> tuple[Observation, float, bool, dict]:
        raise NotImplementedError

    def _fold_seed(self, seed: int) -> int:
        """Map a caller seed to the episode seed; seed-range envs override."""
        return seed

    def split_names(self) -> tuple[str, ...]:
        return tuple(self.splits.ranges)

    # -- metadata used by the model and the service -------------------------

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        raise NotImplementedError

    @property
    def vocab(self) -> Vocabulary:
        raise NotImplementedError

    @property
    def has_agent_cell(self) -> bool:
        return True

    # -- episode driving -----------------------------------------------------

    def reset(self, seed: int | None = None) -> Observation:
        if seed is None:
            seed = self._auto_seed
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self._auto_seed = seed + 1
        self.episode_seed = self._fold_seed(seed)
        rng = np.random.default_rng(
            stable_hash64(("episode", self.env_id, self.episode_seed))
        )
        obs = self._generate(rng)
        self._steps = 0
        self._done = False
        self._last_obs = obs
        return obs

    def step(self, action: int) -> StepResult:
        if self._done or self._last_obs is None:
            raise RuntimeError("episode is done; call reset() before step()")
        if not isinstance(action, (int, np.integer)):
            raise TypeError(f"action must be an int index, got {type(action).__name__}")
        n = len(self._last_obs.actions)
        if not 0 <= action < n:
            raise ValueError(f"action {action} out of range [0, {n})")

        obs, raw, done, info = self._apply(int(action))
        self._steps += 1
        if not done and self._steps >= self.step_limit:
            done = True
            raw = float(self.limit_reward)
            info["limit"] = True
        if done:
            info.setdefault("win", False)
        info["raw_reward"] = float(raw)
        info["steps"] = self._steps
        reward = raw if done else raw + self.step_penalty

        self._done = done
        self._last_obs = obs
        return StepResult(obs, float(reward), done, info)

    @property
    def steps_taken(self) -> int:
        return self._steps

    @property
    def done(self) -> bool:
        return self._done

    @property
    def last_obs(self) -> Observation:
        if self._last_obs is None:
            raise RuntimeError("reset() has not been called")
        return self._last_obs
