"""Exhaustive finite-difference verification of model gradients.

Builds deliberately tiny synthetic batches (small vocabulary, 3x3 or
4x4 grids) so central differences over every scalar parameter stay
affordable, runs the same loss shape the trainer uses (policy log-prob,
value, entropy), and compares against the tape's gradients in float64.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..core import PAD_ID
from . import ops
from .batch import Packed
from .config import ModelConfig
from .net import Reader
from .tape import tape

EPS = 1e-5
RTOL = 1e-4
ATOL = 1e-7


def _fixture_config(action_kind: str, variant: str) -> ModelConfig:
    return ModelConfig(
        vocab_size=12,
        grid=(3, 3, 2),
        n_fields=2,
        action_kind=action_kind,
        n_actions=4 if action_kind == "fixed" else 0,
        has_agent=True,
        d_emb=4,
        r=4,
        d_film=4,
        films=2,
        d_final=8,
        variant=variant,
        dtype="float64",
        seed=3,
    )


def _rand_tokens(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.integers(2, 12, size=shape).astype(np.int64)


def build_fixture(cfg: ModelConfig, seed: int = 11) -> tuple[Packed, dict]:
    """A small synthetic batch matching cfg's contract, plus loss inputs."""
    rng = np.random.default_rng(seed)
    B = 2
    h, w, k = cfg.grid
    grid = _rand_tokens(rng, (B, h, w, k))
    grid[rng.random((B, h, w, k)) < 0.2] = PAD_ID
    relpos = rng.normal(0, 0.3, size=(B, h, w, 2)).astype(cfg.np_dtype)

    fields, field_lengths = [], []
    for _ in range(cfg.n_fields):
        L = int(rng.integers(3, 6))
        fields.append(_rand_tokens(rng, (B, L)))
        field_lengths.append(rng.integers(2, L + 1, size=B).astype(np.int64))
    joint = _rand_tokens(rng, (B, 7))
    joint_length = rng.integers(4, 8, size=B).astype(np.int64)

    agent = np.stack([rng.integers(0, h, size=B), rng.integers(0, w, size=B)], axis=1)
    counts = np.full(B, 4, dtype=np.int64)
    packed = Packed(
        grid, relpos, fields, field_lengths, joint, joint_length,
        cfg.action_kind, counts, agent=agent,
    )
    if cfg.action_kind == "text_choices":
        counts[:] = 3
        packed.choice_tokens = _rand_tokens(rng, (B, 3, 3))
        packed.choice_lengths = rng.integers(1, 4, size=(B, 3)).astype(np.int64)
    elif cfg.action_kind == "nav_coordinates":
        counts[:] = 3  # two edges plus stop
        packed.nav_columns = rng.integers(0, w, size=(B, 2)).astype(np.int64)
        packed.nav_stop = np.ones(B, dtype=bool)

    aux = {
        "actions": rng.integers(0, counts.min(), size=B).astype(np.int64),
        "pg_w": rng.normal(0, 1, size=B),
        "v_w": rng.normal(0, 1, size=B),
        "state": (
            rng.normal(0, 0.5, size=(B, cfg.d_final)),
            rng.normal(0, 0.5, size=(B, cfg.d_final)),
        ),
    }
    return packed, aux


def _loss(model: Reader, batch: Packed, aux: dict):
    state = aux["state"] if model.is_recurrent else None
    out = model.forward(batch, state=state)
    logp = ops.masked_log_softmax(out.logits, out.mask)
    probs = ops.masked_softmax(out.logits, out.mask)
    picked = ops.gather_cols(logp, aux["actions"])
    pg = ops.sum_all(ops.mul(picked, ops.constant(aux["pg_w"])))
    v = ops.sum_all(ops.mul(out.value, ops.constant(aux["v_w"])))
    ent = ops.mul_const(ops.sum_all(ops.mul(probs, logp)), -0.3)
    return ops.add(ops.add(pg, v), ent)


@dataclass
class GradReport:
    label: str
    n_params: int
    n_checked: int
    max_abs_diff: float
    max_rel_err: float
    worst_param: str
    seconds: float

    @property
    def passed(self) -> bool:
        return self.n_checked == self.n_params and self.max_rel_err <= RTOL


def check_model(action_kind: str, variant: str, seed: int = 11) -> GradReport:
    cfg = _fixture_config(action_kind, variant)
    model = Reader(cfg)
    # Check at a generic point: init leaves biases exactly on the relu
    # kink (zero-padded crops make pre-activations equal the bias), where
    # one-sided differences disagree with the subgradient by design.
    prng = np.random.default_rng(seed + 1)
    for var in model.params.values():
        var.data = prng.uniform(-0.5, 0.5, var.data.shape).astype(var.data.dtype)
    batch, aux = build_fixture(cfg, seed)
    label = f"{variant}/{action_kind}"
    t0 = time.time()

    model.zero_grad()
    with tape() as t:
        loss = _loss(model, batch, aux)
        t.backward(loss)
    analytic = {k: (v.grad.copy() if v.grad is not None else np.zeros_like(v.data))
                for k, v in model.params.items()}

    worst_rel, worst_abs, worst_name = 0.0, 0.0, ""
    checked = 0
    for name, var in sorted(model.params.items()):
        flat = var.data.reshape(-1)
        gflat = analytic[name].reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + EPS
            up = float(_loss(model, batch, aux).data)
            flat[i] = keep - EPS
            down = float(_loss(model, batch, aux).data)
            flat[i] = keep
            fd = (up - down) / (2 * EPS)
            a = gflat[i]
            diff = abs(a - fd)
            rel = diff / max(abs(a), abs(fd), ATOL / RTOL)
            checked += 1
            if rel > worst_rel:
                worst_rel, worst_abs, worst_name = rel, diff, f"{name}[{i}]"

    total = model.n_parameters()
    return GradReport(label, total, checked, worst_abs, worst_rel, worst_name,
                      time.time() - t0)


ALL_CONFIGS = (
    ("fixed", "base"),
    ("text_choices", "base"),
    ("nav_coordinates", "base"),
    ("fixed", "state"),
    ("fixed", "local_conv"),
    ("fixed", "entity_attn"),
    ("fixed", "concat_fields"),
)


def check_all(seed: int = 11) -> list[GradReport]:
    return [check_model(kind, variant, seed) for kind, variant in ALL_CONFIGS]
