"""Training configuration and key=value override parsing."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


def coerce(text: str):
    """int, then float, then bool, then plain string."""
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def parse_overrides(pairs: list[str]) -> tuple[dict, dict]:
    """Split key=value strings into trainer and env.* override dicts."""
    train: dict = {}
    env: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not key=value")
        key, _, raw = pair.partition("=")
        value = coerce(raw)
        if key.startswith("env."):
            env[key[4:]] = value
        else:
            train[key] = value
    return train, env


@dataclass(frozen=True)
class TrainConfig:
    env_id: str = "rtfm"
    seed: int = 0
    variant: str = "base"
    # model dims
    d_emb: int = 64
    r: int = 64
    d_film: int = 64
    films: int = 5
    d_final: int = 256
    # optimization
    lr: float = 5e-4
    rmsprop_alpha: float = 0.99
    rmsprop_eps: float = 0.01
    gamma: float = 0.99
    entropy_coef: float = 0.05
    value_coef: float = 0.5
    grad_clip: float = 40.0
    unroll: int = 80
    lanes: int = 16
    chunk_steps: int = 16
    # schedule
    total_frames: int = 1_000_000
    eval_every: int = 50_000
    eval_episodes: int = 100
    log_every: int = 10
    eval_split: str = "val"
    stop_train_win_rate: float | None = None
    out_dir: str = "runs/default"
    env_overrides: dict = field(default_factory=dict)

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)

    @classmethod
    def from_overrides(cls, pairs: list[str]) -> "TrainConfig":
        train, env = parse_overrides(pairs)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(train) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**train, env_overrides=env) if env else cls(**train)
