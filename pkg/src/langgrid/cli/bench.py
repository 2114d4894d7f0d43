"""Wall-clock benchmarks: environment FPS and kernel backend timing."""
from __future__ import annotations

import statistics
import time

import numpy as np

from ..core import make, stable_hash64
from ..model import kernels


def bench_env_fps(env_id: str, frames: int, trials: int = 5,
                  seed: int = 0, **overrides) -> dict:
    """Median steps-per-second over trials of random valid play."""
    if frames < 10_000:
        raise ValueError("frames must be at least 10000 for a stable estimate")
    rates = []
    for trial in range(trials):
        env = make(env_id, split="train", seed=seed + trial, **overrides)
        rng = np.random.default_rng(stable_hash64(("bench", env_id, trial)))
        obs = env.reset()
        t0 = time.perf_counter()
        for _ in range(frames):
            action = int(rng.integers(len(obs.actions)))
            result = env.step(action)
            obs = env.reset() if result.done else result.obs
        rates.append(frames / (time.perf_counter() - t0))
    return {
        "env": env_id,
        "frames": frames,
        "trials": trials,
        "fps_p50": statistics.median(rates),
        "fps_all": [round(r, 1) for r in rates],
    }


def _time_call(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(T: int = 80, B: int = 16, D: int = 64, H: int = 64,
                  repeats: int = 5) -> dict:
    """Compare the compiled and plain-numpy sequence kernels.

    Times the recurrent forward and backward passes on one unroll-sized
    workload per backend and reports the speedup.
    """
    rng = np.random.default_rng(0)
    f32 = np.float32
    xg = rng.standard_normal((B, T, 4 * H)).astype(f32)
    Wh = rng.standard_normal((H, 4 * H)).astype(f32) * 0.1
    h0 = np.zeros((B, H), dtype=f32)
    c0 = np.zeros((B, H), dtype=f32)
    d_h = rng.standard_normal((B, T, H)).astype(f32)
    d_last = np.zeros((B, H), dtype=f32)

    out: dict = {"shape": {"T": T, "B": B, "hidden": H}, "backends": {}}
    available = ["numpy"] + (["numba"] if kernels._HAVE_NUMBA else [])
    saved = kernels.current_backend()
    try:
        for name in available:
            kernels.set_backend(name)
            h_seq, c_seq, act, tanc = kernels.lstm_seq_forward(xg, h0, c0, Wh)
            fwd = _time_call(kernels.lstm_seq_forward, (xg, h0, c0, Wh),
                             repeats)
            args = (d_h, d_last, d_last, act, tanc, c_seq, c0, Wh)
            kernels.lstm_seq_backward(*args)
            bwd = _time_call(kernels.lstm_seq_backward, args, repeats)
            out["backends"][name] = {
                "forward_ms": round(fwd * 1e3, 3),
                "backward_ms": round(bwd * 1e3, 3),
            }
    finally:
        kernels.set_backend(saved)
    if len(out["backends"]) == 2:
        a, b = out["backends"]["numba"], out["backends"]["numpy"]
        out["speedup_forward"] = round(b["forward_ms"] / a["forward_ms"], 2)
        out["speedup_backward"] = round(b["backward_ms"] / a["backward_ms"], 2)
    return out
