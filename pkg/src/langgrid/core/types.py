"""Shared observation and action types.

Every environment, whatever its dynamics, emits the same bundle: a
symbol grid of token ids, a text bundle of named fields plus their
joint concatenation, a relative-position tensor, an action-space
descriptor, and a legend for rendering.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hashing import stable_hash_hex
from .tokens import PAD_ID


@dataclass(frozen=True)
class TextField:
    """One named text field; tokens carry no padding."""

    name: str
    text: str
    tokens: tuple[int, ...]


@dataclass(frozen=True)
class TextBundle:
    """Named fields plus their joint concatenation (field order fixed per env)."""

    fields: tuple[TextField, ...]
    joint_text: str
    joint_tokens: tuple[int, ...]

    def padded_fields(self) -> tuple[np.ndarray, np.ndarray]:
        """(n, m) id matrix padded with PAD_ID, plus true lengths (n,)."""
        lengths = np.array([len(f.tokens) for f in self.fields], dtype=np.int64)
        m = max(1, int(lengths.max()) if len(self.fields) else 1)
        out = np.full((len(self.fields), m), PAD_ID, dtype=np.int32)
        for i, f in enumerate(self.fields):
            out[i, : len(f.tokens)] = f.tokens
        return out, lengths


@dataclass(frozen=True)
class FixedActions:
    """A fixed discrete action set, e.g. movement plus interactions."""

    labels: tuple[str, ...]

    kind = "fixed"

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class TextChoices:
    """A variable list of candidate command strings; the action is an index."""

    choices: tuple[str, ...]
    choice_tokens: tuple[tuple[int, ...], ...]

    kind = "text_choices"

    def __len__(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class NavChoices:
    """Grid-column coordinates of outgoing edges, optionally plus stop.

    Action i < len(columns) moves along the edge rendered at columns[i];
    when stop is present it is the final index.
    """

    columns: tuple[int, ...]
    stop: bool = False

    kind = "nav_coordinates"

    def __len__(self) -> int:
        return len(self.columns) + (1 if self.stop else 0)

    @property
    def stop_index(self) -> int | None:
        return len(self.columns) if self.stop else None


ActionSpaceDescriptor = FixedActions | TextChoices | NavChoices


@dataclass(frozen=True)
class Observation:
    grid: np.ndarray                 # (h, w, k) int32 token ids
    text: TextBundle
    relpos: np.ndarray               # (h, w, 2) float32
    actions: ActionSpaceDescriptor
    legend: dict[int, str]

    def digest(self) -> str:
        return stable_hash_hex(self._canonical())

    def _canonical(self):
        if isinstance(self.actions, FixedActions):
            adesc = ("fixed", self.actions.labels)
        elif isinstance(self.actions, TextChoices):
            adesc = ("text_choices", self.actions.choice_tokens)
        else:
            adesc = ("nav_coordinates", self.actions.columns, self.actions.stop)
        return (
            ("grid", self.grid),
            ("fields", tuple((f.name, f.tokens) for f in self.text.fields)),
            ("joint", self.text.joint_tokens),
            ("relpos", self.relpos),
            ("actions", adesc),
            ("legend", self.legend),
        )


@dataclass
class StepResult:
    obs: Observation
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


def relative_position(h: int, w: int, agent: tuple[int, int] | None) -> np.ndarray:
    """(h, w, 2) of ((row-ar)/h, (col-ac)/w); all-zero when there is no agent."""
    out = np.zeros((h, w, 2), dtype=np.float32)
    if agent is not None:
        ar, ac = agent
        out[:, :, 0] = ((np.arange(h) - ar) / h)[:, None].astype(np.float32)
        out[:, :, 1] = ((np.arange(w) - ac) / w)[None, :].astype(np.float32)
    return out
