"""Advantage actor-critic over parallel environment lanes.

One update: roll `lanes` environments forward `unroll` steps with the
current policy (no tape), compute bootstrapped returns, then replay the
stored observations under a tape to accumulate the policy, value, and
entropy terms.  Non-recurrent models replay in step chunks to bound
peak memory; the state variant replays sequentially so gradients flow
through the carried state.
"""
from __future__ import annotations

import json
import os
import time

import numpy as np

from ..core import make, stable_hash64
from ..model import ModelConfig, Reader, ops, pack_observations, save_checkpoint
from ..model.tape import tape
from .config import TrainConfig
from .evaluate import evaluate_model


def compute_returns(rewards: np.ndarray, dones: np.ndarray,
                    bootstrap: np.ndarray, gamma: float) -> np.ndarray:
    """R_t = r_t + gamma * (1 - done_t) * R_{t+1}, seeded by bootstrap."""
    T = rewards.shape[0]
    out = np.empty_like(rewards)
    running = bootstrap.astype(rewards.dtype)
    for t in range(T - 1, -1, -1):
        running = rewards[t] + gamma * (1.0 - dones[t]) * running
        out[t] = running
    return out


class RMSProp:
    def __init__(self, params: dict, lr: float, alpha: float, eps: float) -> None:
        self.params = params
        self.lr, self.alpha, self.eps = lr, alpha, eps
        self.sq = {k: np.zeros_like(v.data) for k, v in params.items()}

    def step(self, clip: float | None = None) -> float:
        total = 0.0
        for v in self.params.values():
            if v.grad is not None:
                total += float((v.grad.astype(np.float64) ** 2).sum())
        norm = float(np.sqrt(total))
        scale = clip / norm if clip is not None and norm > clip else 1.0
        for k, v in self.params.items():
            if v.grad is None:
                continue
            g = v.grad * scale
            sq = self.sq[k]
            sq *= self.alpha
            sq += (1.0 - self.alpha) * g * g
            v.data -= self.lr * g / (np.sqrt(sq) + self.eps)
        return norm


class Trainer:
    def __init__(self, cfg: TrainConfig) -> None:
        self.cfg = cfg
        self.envs = [
            make(cfg.env_id, split="train", seed=cfg.seed * 100_003 + lane,
                 **cfg.env_overrides)
            for lane in range(cfg.lanes)
        ]
        mcfg = ModelConfig.for_env(
            self.envs[0], d_emb=cfg.d_emb, r=cfg.r, d_film=cfg.d_film,
            films=cfg.films, d_final=cfg.d_final, variant=cfg.variant,
            seed=cfg.seed,
        )
        self.model = Reader(mcfg)
        self.opt = RMSProp(self.model.params, cfg.lr, cfg.rmsprop_alpha,
                           cfg.rmsprop_eps)
        self.rng = np.random.default_rng(stable_hash64(("a2c", cfg.seed)))
        self._obs = [env.reset() for env in self.envs]
        self._rec = self.model.initial_state(cfg.lanes)
        self.frames = 0
        self.updates = 0
        self._best_val = -1.0
        self._best_train = -1.0
        os.makedirs(cfg.out_dir, exist_ok=True)
        self._metrics_path = os.path.join(cfg.out_dir, "metrics.jsonl")
        self._metrics = open(self._metrics_path, "w")

    # -- plumbing ---------------------------------------------------------------

    def _emit(self, record: dict) -> None:
        self._metrics.write(json.dumps(record) + "\n")
        self._metrics.flush()

    def _pack(self, observations):
        return pack_observations(
            observations, float_dtype=self.model.cfg.np_dtype,
            with_agent=self.model.cfg.has_agent,
        )

    def _sample(self, logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
        z = np.where(mask, logits, -np.inf)
        z = z - z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        u = self.rng.random(p.shape[0])
        return (p.cumsum(axis=1) > u[:, None]).argmax(axis=1)

    # -- one update ----------------------------------------------------------------

    def rollout(self):
        cfg = self.cfg
        T, B = cfg.unroll, cfg.lanes
        obs_steps = []
        actions = np.empty((T, B), dtype=np.int64)
        rewards = np.zeros((T, B), dtype=np.float32)
        dones = np.zeros((T, B), dtype=np.float32)
        state0 = None
        if self._rec is not None:
            state0 = (self._rec[0].copy(), self._rec[1].copy())

        for t in range(T):
            step_obs = list(self._obs)
            obs_steps.append(step_obs)
            out = self.model.forward(self._pack(step_obs), state=self._rec)
            if self._rec is not None:
                self._rec = out.state
            acts = self._sample(out.logits.data, out.mask)
            actions[t] = acts
            for b, env in enumerate(self.envs):
                result = env.step(int(acts[b]))
                rewards[t, b] = result.reward
                if result.done:
                    dones[t, b] = 1.0
                    self._obs[b] = env.reset()
                    if self._rec is not None:
                        self._rec[0][b] = 0.0
                        self._rec[1][b] = 0.0
                else:
                    self._obs[b] = result.obs

        tail = self.model.forward(self._pack(self._obs), state=self._rec)
        bootstrap = tail.value.data * (1.0 - dones[-1])
        returns = compute_returns(rewards, dones, bootstrap, cfg.gamma)
        return obs_steps, actions, returns, dones, state0

    def _step_loss(self, out, acts: np.ndarray, rets: np.ndarray):
        cfg = self.cfg
        logp = ops.masked_log_softmax(out.logits, out.mask)
        probs = ops.masked_softmax(out.logits, out.mask)
        picked = ops.gather_cols(logp, acts)
        adv = rets - out.value.data
        pg = ops.neg(ops.sum_all(ops.mul(picked, ops.constant(adv))))
        diff = ops.sub(ops.constant(rets), out.value)
        vl = ops.mul_const(ops.sum_all(ops.mul(diff, diff)), cfg.value_coef)
        ent = ops.neg(ops.sum_all(ops.mul(probs, logp)))
        terms = ops.add(pg, vl)
        loss = ops.sub(terms, ops.mul_const(ent, cfg.entropy_coef))
        return loss, float(pg.data), float(vl.data), float(ent.data)

    def learn(self, obs_steps, actions, returns, dones, state0) -> dict:
        cfg = self.cfg
        T, B = cfg.unroll, cfg.lanes
        count = float(T * B)
        self.model.zero_grad()
        pg_total = vl_total = ent_total = 0.0

        if self.model.is_recurrent:
            with tape() as t:
                sv = (ops.constant(state0[0]), ops.constant(state0[1]))
                parts = []
                for step in range(T):
                    out = self.model.forward(self._pack(obs_steps[step]),
                                             state_vars=sv)
                    keep = ops.constant((1.0 - dones[step])[:, None]
                                        .astype(self.model.cfg.np_dtype))
                    sv = (ops.mul(out.state_vars[0], keep),
                          ops.mul(out.state_vars[1], keep))
                    loss, pg, vl, ent = self._step_loss(out, actions[step],
                                                        returns[step])
                    parts.append(loss)
                    pg_total += pg
                    vl_total += vl
                    ent_total += ent
                total = ops.mul_const(ops.add_n(parts), 1.0 / count)
                t.backward(total)
        else:
            for start in range(0, T, cfg.chunk_steps):
                stop = min(start + cfg.chunk_steps, T)
                flat_obs = [o for step in range(start, stop) for o in obs_steps[step]]
                acts = actions[start:stop].reshape(-1)
                rets = returns[start:stop].reshape(-1)
                with tape() as t:
                    out = self.model.forward(self._pack(flat_obs))
                    loss, pg, vl, ent = self._step_loss(out, acts, rets)
                    t.backward(ops.mul_const(loss, 1.0 / count))
                pg_total += pg
                vl_total += vl
                ent_total += ent

        norm = self.opt.step(cfg.grad_clip)
        self.model.apply_constraints()
        return {
            "pg": pg_total / count,
            "value": vl_total / count,
            "entropy": ent_total / count,
            "grad_norm": norm,
        }

    def update(self) -> dict:
        obs_steps, actions, returns, dones, state0 = self.rollout()
        stats = self.learn(obs_steps, actions, returns, dones, state0)
        self.frames += self.cfg.unroll * self.cfg.lanes
        self.updates += 1
        return stats

    # -- evaluation and the loop -------------------------------------------------------

    def _eval(self, split: str) -> dict:
        env = make(self.cfg.env_id, split=split, seed=0, **self.cfg.env_overrides)
        return evaluate_model(self.model, env, self.cfg.eval_episodes,
                              base_seed=777_000)

    def run(self) -> dict:
        cfg = self.cfg
        next_eval = cfg.eval_every
        t_last = time.time()
        frames_last = 0
        train_win = val_win = 0.0
        stopped = ""

        while self.frames < cfg.total_frames:
            stats = self.update()
            if self.updates % cfg.log_every == 0:
                now = time.time()
                fps = (self.frames - frames_last) / max(now - t_last, 1e-9)
                t_last, frames_last = now, self.frames
                self._emit({"type": "update", "step": self.updates,
                            "frames": self.frames, **stats,
                            "fps": round(fps, 1)})
            if self.frames >= next_eval:
                next_eval += cfg.eval_every
                train_stats = self._eval("train")
                val_stats = self._eval(cfg.eval_split)
                train_win = train_stats["win_rate"]
                val_win = val_stats["win_rate"]
                self._emit({"type": "eval", "step": self.updates,
                            "frames": self.frames, "split": "train",
                            **train_stats})
                self._emit({"type": "eval", "step": self.updates,
                            "frames": self.frames, "split": cfg.eval_split,
                            **val_stats})
                self._best_train = max(self._best_train, train_win)
                if val_win > self._best_val:
                    self._best_val = val_win
                    save_checkpoint(self.model,
                                    os.path.join(cfg.out_dir, "best.npz"),
                                    {"frames": self.frames,
                                     "val_win_rate": val_win})
                if (cfg.stop_train_win_rate is not None
                        and train_win >= cfg.stop_train_win_rate):
                    stopped = "train_win_rate"
                    break

        save_checkpoint(self.model, os.path.join(cfg.out_dir, "last.npz"),
                        {"frames": self.frames, "val_win_rate": val_win})
        summary = {
            "frames": self.frames,
            "updates": self.updates,
            "train_win_rate": train_win,
            "val_win_rate": val_win,
            "best_train_win_rate": max(self._best_train, 0.0),
            "best_val_win_rate": max(self._best_val, 0.0),
            "stopped": stopped or "frame_budget",
        }
        self._emit({"type": "summary", **summary})
        self._metrics.close()
        return summary
