"""Operator surface: console play, training, benchmarks, replay, service."""
from .main import main
from .render import render_observation
from .trajectory import (
    TrajectoryRecorder,
    load_trajectory,
    replay_many,
    replay_trajectory,
)

__all__ = [
    "main",
    "render_observation",
    "TrajectoryRecorder",
    "load_trajectory",
    "replay_trajectory",
    "replay_many",
]
