from .env import Environment
from .hashing import canonical_bytes, stable_hash64, stable_hash_hex
from .registry import env_ids, make, register
from .splits import (
    DEFAULT_SPLITS,
    SplitSpec,
    hash_bucket,
    split_for_key,
    split_for_seed,
)
from .tokens import PAD_ID, PAD_WORD, UNK_ID, UNK_WORD, Vocabulary, split_words
from .types import (
    ActionSpaceDescriptor,
    FixedActions,
    NavChoices,
    Observation,
    StepResult,
    TextBundle,
    TextChoices,
    TextField,
    relative_position,
)

__all__ = [
    "Environment",
    "Observation",
    "StepResult",
    "TextBundle",
    "TextField",
    "FixedActions",
    "TextChoices",
    "NavChoices",
    "ActionSpaceDescriptor",
    "relative_position",
    "Vocabulary",
    "split_words",
    "UNK_ID",
    "PAD_ID",
    "UNK_WORD",
    "PAD_WORD",
    "SplitSpec",
    "DEFAULT_SPLITS",
    "split_for_seed",
    "split_for_key",
    "hash_bucket",
    "stable_hash64",
    "stable_hash_hex",
    "canonical_bytes",
    "register",
    "make",
    "env_ids",
]
