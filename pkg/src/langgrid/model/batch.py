"""Packing observation lists into dense batched arrays for the model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import FixedActions, NavChoices, Observation, PAD_ID, TextChoices


@dataclass
class Packed:
    """One dense batch; token matrices are padded with PAD_ID."""

    grid: np.ndarray                      # (B, h, w, k) int
    relpos: np.ndarray                    # (B, h, w, 2) float
    fields: list[np.ndarray]              # per field: (B, L_i) int
    field_lengths: list[np.ndarray]       # per field: (B,) int
    joint: np.ndarray                     # (B, L) int
    joint_length: np.ndarray              # (B,) int
    kind: str
    n_actions: np.ndarray                 # (B,) valid action counts
    agent: np.ndarray | None = None       # (B, 2) agent cell, if any
    choice_tokens: np.ndarray | None = None   # (B, J, L) int
    choice_lengths: np.ndarray | None = None  # (B, J) int
    nav_columns: np.ndarray | None = None     # (B, J) int
    nav_stop: np.ndarray | None = None        # (B,) bool

    @property
    def batch(self) -> int:
        return self.grid.shape[0]

    @property
    def max_actions(self) -> int:
        return int(self.n_actions.max())

    def action_mask(self) -> np.ndarray:
        """(B, A_max) validity mask over padded action slots."""
        return np.arange(self.max_actions)[None, :] < self.n_actions[:, None]


def _pad_tokens(rows: list[tuple[int, ...]], dtype) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([max(1, len(r)) for r in rows], dtype=np.int64)
    out = np.full((len(rows), int(lengths.max())), PAD_ID, dtype=dtype)
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out, lengths


def _agent_cell(obs: Observation) -> tuple[int, int]:
    rows = np.flatnonzero(obs.relpos[:, 0, 0] == 0.0)
    cols = np.flatnonzero(obs.relpos[0, :, 1] == 0.0)
    return int(rows[0]), int(cols[0])


def pack_observations(
    observations: list[Observation], float_dtype=np.float32, with_agent: bool = False
) -> Packed:
    first = observations[0]
    grid = np.stack([o.grid for o in observations]).astype(np.int64)
    relpos = np.stack([o.relpos for o in observations]).astype(float_dtype)

    fields, field_lengths = [], []
    for i in range(len(first.text.fields)):
        ids, lengths = _pad_tokens(
            [o.text.fields[i].tokens for o in observations], np.int64
        )
        fields.append(ids)
        field_lengths.append(lengths)
    joint, joint_length = _pad_tokens(
        [o.text.joint_tokens for o in observations], np.int64
    )

    agent = None
    if with_agent:
        agent = np.array([_agent_cell(o) for o in observations], dtype=np.int64)

    kind = first.actions.kind
    B = len(observations)
    counts = np.array([len(o.actions) for o in observations], dtype=np.int64)
    packed = Packed(
        grid, relpos, fields, field_lengths, joint, joint_length, kind, counts,
        agent=agent,
    )
    if kind == "fixed":
        return packed
    if kind == "text_choices":
        J = int(counts.max())
        flat: list[tuple[int, ...]] = []
        for o in observations:
            assert isinstance(o.actions, TextChoices)
            toks = list(o.actions.choice_tokens)
            toks += [()] * (J - len(toks))
            flat.extend(toks)
        ids, lengths = _pad_tokens(flat, np.int64)
        packed.choice_tokens = ids.reshape(B, J, -1)
        packed.choice_lengths = lengths.reshape(B, J)
        return packed
    if kind == "nav_coordinates":
        J = int(max(len(o.actions.columns) for o in observations))
        cols = np.zeros((B, J), dtype=np.int64)
        stop = np.zeros(B, dtype=bool)
        for i, o in enumerate(observations):
            assert isinstance(o.actions, NavChoices)
            cols[i, : len(o.actions.columns)] = o.actions.columns
            stop[i] = o.actions.stop
        packed.nav_columns = cols
        packed.nav_stop = stop
        return packed
    raise ValueError(f"unknown action kind {kind!r}")


def descriptor_kind(obs: Observation) -> str:
    assert isinstance(obs.actions, (FixedActions, TextChoices, NavChoices))
    return obs.actions.kind
