"""Actor-critic training, evaluation rollouts, and run configuration."""
from .a2c import RMSProp, Trainer, compute_returns
from .config import TrainConfig, parse_overrides
from .evaluate import evaluate_model, greedy_action, model_policy, run_episodes

__all__ = [
    "Trainer",
    "RMSProp",
    "compute_returns",
    "TrainConfig",
    "parse_overrides",
    "evaluate_model",
    "greedy_action",
    "model_policy",
    "run_episodes",
]
