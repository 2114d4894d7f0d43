"""Policy network, autodiff machinery, and kernels."""
from .batch import Packed, pack_observations
from .checkpoint import load_checkpoint, save_checkpoint
from .config import VARIANTS, ModelConfig
from .kernels import current_backend, set_backend
from .net import ModelOutput, Reader
from .tape import Tape, Var, tape

__all__ = [
    "Packed",
    "pack_observations",
    "ModelConfig",
    "VARIANTS",
    "Reader",
    "ModelOutput",
    "Tape",
    "Var",
    "tape",
    "save_checkpoint",
    "load_checkpoint",
    "set_backend",
    "current_backend",
]
