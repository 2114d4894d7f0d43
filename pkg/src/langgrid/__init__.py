"""Symbol-grid language games with a shared observation contract.

Importing the top-level package registers every environment family, so
`langgrid.make("rtfm")` works without further imports.
"""
from . import envs  # noqa: F401  (registers environment families)
from .core import (
    Environment,
    Observation,
    StepResult,
    env_ids,
    make,
    split_for_key,
    split_for_seed,
    stable_hash64,
    stable_hash_hex,
)

__version__ = "0.1.0"

__all__ = [
    "Environment",
    "Observation",
    "StepResult",
    "env_ids",
    "make",
    "split_for_key",
    "split_for_seed",
    "stable_hash64",
    "stable_hash_hex",
    "__version__",
]
