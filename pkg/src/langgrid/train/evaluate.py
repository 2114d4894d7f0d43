"""Episode rollouts for evaluation: greedy model play or any policy."""
from __future__ import annotations

import numpy as np

from ..core import Environment
from ..model import Reader, pack_observations
from ..model.net import ModelOutput


def greedy_action(out: ModelOutput, row: int = 0) -> int:
    logits = np.where(out.mask[row], out.logits.data[row], -np.inf)
    return int(np.argmax(logits))


def sample_action(out: ModelOutput, row: int, rng: np.random.Generator) -> int:
    logits = np.where(out.mask[row], out.logits.data[row], -np.inf)
    z = logits - logits.max()
    p = np.exp(z)
    p /= p.sum()
    return int(rng.choice(len(p), p=p))


def model_policy(model: Reader, greedy: bool = True,
                 rng: np.random.Generator | None = None):
    """Stateful single-env policy closure around a model."""
    state = {"rec": None}

    def act(env: Environment) -> int:
        obs = env.last_obs
        batch = pack_observations([obs], float_dtype=model.cfg.np_dtype,
                                  with_agent=model.cfg.has_agent)
        if env.steps_taken == 0:
            state["rec"] = model.initial_state(1)
        out = model.forward(batch, state=state["rec"])
        state["rec"] = out.state
        if greedy:
            return greedy_action(out)
        return sample_action(out, 0, rng)

    return act


def run_episodes(env: Environment, act, episodes: int, base_seed: int = 0) -> dict:
    """Roll a policy callable env -> action; returns aggregate metrics."""
    wins = 0
    returns = []
    steps = []
    for ep in range(episodes):
        env.reset(base_seed + ep)
        total = 0.0
        done = False
        while not done:
            result = env.step(act(env))
            total += result.reward
            done = result.done
        wins += bool(result.info.get("win"))
        returns.append(total)
        steps.append(result.info["steps"])
    return {
        "episodes": episodes,
        "win_rate": wins / episodes,
        "return": float(np.mean(returns)),
        "steps": float(np.mean(steps)),
    }


def evaluate_model(model: Reader, env: Environment, episodes: int,
                   base_seed: int = 0) -> dict:
    return run_episodes(env, model_policy(model, greedy=True), episodes, base_seed)
