"""Seed-range and hash-bucket split assignment.

Two mechanisms coexist.  Seed-range splits carve the integer seed line
into disjoint half-open ranges (the crawler uses these directly).  The
generative environments instead hash the canonical tuple describing an
episode's latent dynamics and map the bucket to a split, so that the
same assignment falls out in any process.
"""
from __future__ import annotations

from dataclasses import dataclass

from .hashing import stable_hash64

TRAIN, VAL, TEST = "train", "val", "test"

# bucket = hash mod 10; 0-6 train, 7-8 val, 9 test.
_BUCKETS = (TRAIN,) * 7 + (VAL,) * 2 + (TEST,)


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint half-open seed ranges keyed by split name."""

    ranges: dict[str, tuple[int, int]]

    def __post_init__(self) -> None:
        spans = sorted(self.ranges.values())
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ValueError("split ranges overlap")
        for lo, hi in spans:
            if lo >= hi:
                raise ValueError("split range is empty")

    def split_of(self, seed: int) -> str:
        for name, (lo, hi) in self.ranges.items():
            if lo <= seed < hi:
                return name
        raise ValueError(f"seed {seed} falls outside every split range")

    def range_of(self, split: str) -> tuple[int, int]:
        try:
            return self.ranges[split]
        except KeyError:
            raise ValueError(f"unknown split {split!r}") from None

    def seed_in(self, split: str, seed: int) -> int:
        """Fold an arbitrary seed into the split's range, preserving identity
        for seeds already inside it."""
        lo, hi = self.range_of(split)
        if lo <= seed < hi:
            return seed
        return lo + seed % (hi - lo)


DEFAULT_SPLITS = SplitSpec(
    {TRAIN: (0, 1_000_000), VAL: (1_000_000, 2_000_000), TEST: (2_000_000, 3_000_000)}
)


def split_for_seed(seed: int, spec: SplitSpec = DEFAULT_SPLITS) -> str:
    return spec.split_of(seed)


def hash_bucket(key) -> int:
    """Stable bucket in [0, 10) for a canonical key tuple."""
    return stable_hash64(key) % 10


def split_for_key(key) -> str:
    """train/val/test assignment of a canonical dynamics key (7/2/1 buckets)."""
    return _BUCKETS[hash_bucket(key)]
