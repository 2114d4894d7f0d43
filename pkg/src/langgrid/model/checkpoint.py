"""Checkpoint serialization: exact parameter arrays plus a JSON manifest."""
from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .config import ModelConfig
from .net import Reader


def save_checkpoint(model: Reader, path: str, extra: dict | None = None) -> None:
    manifest = {"config": asdict(model.cfg), "extra": extra or {}}
    arrays = {f"param:{name}": var.data for name, var in model.params.items()}
    np.savez_compressed(path, manifest=json.dumps(manifest), **arrays)


def load_checkpoint(path: str) -> tuple[Reader, dict]:
    """Rebuild the model with bit-identical parameters."""
    data = np.load(path)
    manifest = json.loads(str(data["manifest"]))
    raw = dict(manifest["config"])
    raw["grid"] = tuple(raw["grid"])
    cfg = ModelConfig(**raw)
    model = Reader(cfg)
    stored = {k[len("param:") :] for k in data.files if k.startswith("param:")}
    if stored != set(model.params):
        missing = sorted(set(model.params) - stored)
        surplus = sorted(stored - set(model.params))
        raise ValueError(f"parameter mismatch: missing {missing}, surplus {surplus}")
    for name, var in model.params.items():
        arr = data[f"param:{name}"]
        if arr.shape != var.data.shape:
            raise ValueError(f"shape mismatch for {name}")
        var.data = arr.astype(var.data.dtype)
    return model, manifest["extra"]
