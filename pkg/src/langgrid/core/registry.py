"""String-keyed environment registry."""
from __future__ import annotations

from .env import Environment

_REGISTRY: dict[str, type[Environment]] = {}


def register(cls: type[Environment]) -> type[Environment]:
    if not cls.env_id:
        raise ValueError("environment class must set env_id")
    if cls.env_id in _REGISTRY:
        raise ValueError(f"duplicate env id {cls.env_id!r}")
    _REGISTRY[cls.env_id] = cls
    return cls


def make(env_id: str, split: str = "train", seed: int = 0, **overrides) -> Environment:
    try:
        cls = _REGISTRY[env_id]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ValueError(f"unknown env id {env_id!r} (known: {known})") from None
    return cls(split=split, seed=seed, **overrides)


def env_ids() -> list[str]:
    return sorted(_REGISTRY)
