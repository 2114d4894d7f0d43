"""Console rendering of observations: grid, legend, text, actions."""
from __future__ import annotations

from ..core import (
    FixedActions,
    NavChoices,
    Observation,
    PAD_ID,
    TextChoices,
    UNK_ID,
)

GLYPHS = {
    "unseen": "?",
    "wall": "#",
    "floor": ".",
    "you": "@",
    "gold": "$",
    "stairs": ">",
}

EMPTY = "."


def _glyph(word: str) -> str:
    return GLYPHS.get(word, word[0])


def _cell_words(obs: Observation, r: int, c: int) -> list[str]:
    out = []
    for t in obs.grid[r, c]:
        t = int(t)
        if t in (PAD_ID, UNK_ID):
            continue
        out.append(obs.legend.get(t, "?"))
    return out


def render_grid(obs: Observation) -> str:
    h, w, _ = obs.grid.shape
    cells = [[_cell_words(obs, r, c) for c in range(w)] for r in range(h)]
    packed = w > 40
    rows = []
    if packed:
        for r in range(h):
            rows.append("".join(
                _glyph(ws[0]) if ws else EMPTY for ws in cells[r]))
    else:
        texts = [["".join(_glyph(wd) for wd in ws) or EMPTY for ws in row]
                 for row in cells]
        width = max(len(t) for row in texts for t in row)
        for row in texts:
            rows.append(" ".join(t.ljust(width) for t in row))
    return "\n".join(rows)


def render_legend(obs: Observation) -> str:
    present: dict[str, str] = {}
    for t in sorted(set(int(x) for x in obs.grid.ravel())):
        if t in (PAD_ID, UNK_ID):
            continue
        word = obs.legend.get(t, "?")
        present.setdefault(word, _glyph(word))
    pairs = [f"{g}={w}" for w, g in sorted(present.items())]
    lines = []
    for start in range(0, len(pairs), 8):
        lines.append("  ".join(pairs[start:start + 8]))
    return "\n".join(lines)


def render_actions(obs: Observation) -> str:
    a = obs.actions
    if isinstance(a, FixedActions):
        items = list(a.labels)
    elif isinstance(a, TextChoices):
        items = list(a.choices)
    else:
        assert isinstance(a, NavChoices)
        items = [f"go toward column {c}" for c in a.columns]
        if a.stop:
            items.append("stop")
    return "\n".join(f"  [{i}] {label}" for i, label in enumerate(items))


def render_observation(obs: Observation, reward: float | None = None,
                       steps: int | None = None) -> str:
    parts = [render_grid(obs), "", render_legend(obs), ""]
    for f in obs.text.fields:
        parts.append(f"{f.name}: {f.text}")
    status = []
    if steps is not None:
        status.append(f"steps: {steps}")
    if reward is not None:
        status.append(f"reward: {reward:+.3f}")
    if status:
        parts.append("  ".join(status))
    parts.append("actions:")
    parts.append(render_actions(obs))
    return "\n".join(parts)
