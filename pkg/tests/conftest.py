import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def rollout_digests(env_id: str, seed: int, n_steps: int = 40, split: str = "train",
                    **overrides) -> list[str]:
    """Fixed-policy rollout digest trace, used by determinism tests."""
    from langgrid.core import make, stable_hash64

    env = make(env_id, split=split, seed=0, **overrides)
    obs = env.reset(seed)
    prng = np.random.default_rng(stable_hash64(("trace", env_id, seed)))
    out = [obs.digest()]
    for _ in range(n_steps):
        action = int(prng.integers(len(obs.actions)))
        result = env.step(action)
        out.append(result.obs.digest())
        obs = env.reset() if result.done else result.obs
    return out
