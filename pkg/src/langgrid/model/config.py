"""Model hyperparameters and environment binding."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

VARIANTS = ("base", "state", "local_conv", "entity_attn", "concat_fields")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    grid: tuple[int, int, int]       # (h, w, k)
    n_fields: int
    action_kind: str                 # fixed | text_choices | nav_coordinates
    n_actions: int = 0               # fixed-head action count
    has_agent: bool = False
    d_emb: int = 64
    r: int = 64                      # text representation width (even)
    d_film: int = 64                 # film conv channels
    films: int = 5
    d_final: int = 256
    variant: str = "base"
    dtype: str = "float32"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.r % 2:
            raise ValueError("r must be even (bidirectional halves)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.action_kind == "fixed" and self.n_actions <= 0:
            raise ValueError("fixed action head needs n_actions")
        if self.variant == "local_conv" and not self.has_agent:
            raise ValueError("local_conv needs an agent cell")

    @property
    def np_dtype(self):
        return np.dtype(self.dtype)

    def with_(self, **kw) -> "ModelConfig":
        return replace(self, **kw)

    @classmethod
    def for_env(cls, env, **overrides) -> "ModelConfig":
        """Bind to an environment's observation contract.

        Uses the env's current observation, resetting once if needed.
        """
        try:
            obs = env.last_obs
        except RuntimeError:
            obs = env.reset(0)
        kind = obs.actions.kind
        return cls(
            vocab_size=len(env.vocab),
            grid=env.grid_shape,
            n_fields=len(obs.text.fields),
            action_kind=kind,
            n_actions=len(obs.actions) if kind == "fixed" else 0,
            has_agent=env.has_agent_cell,
            **overrides,
        )
