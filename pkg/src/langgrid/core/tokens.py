"""Tokenisation and per-environment vocabularies.

Ids 0 and 1 are reserved globally: 0 is the unknown word, 1 is both the
text pad and the empty grid cell.  Every environment builds its
vocabulary once from its closed template lexicon, so any word an
environment can ever emit has a fixed id.
"""
from __future__ import annotations

import re

UNK_ID = 0
PAD_ID = 1
UNK_WORD = "<unk>"
PAD_WORD = "<pad>"

_WORD_RE = re.compile(r"[a-z0-9]+")


def split_words(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation; drops the separators."""
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    """Immutable word <-> id table with the two reserved entries."""

    def __init__(self, words) -> None:
        seen: dict[str, None] = {}
        for word in words:
            for part in split_words(word):
                seen.setdefault(part, None)
        self._words = [UNK_WORD, PAD_WORD] + sorted(seen)
        self._ids = {w: i for i, w in enumerate(self._words)}

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def id_of(self, word: str) -> int:
        return self._ids.get(word, UNK_ID)

    def word_of(self, token_id: int) -> str:
        return self._words[token_id]

    def tokenize(self, text: str) -> list[int]:
        """Token ids for a string; unknown words map to UNK_ID, '' to []."""
        return [self._ids.get(w, UNK_ID) for w in split_words(text)]

    def legend(self) -> dict[int, str]:
        """id -> surface form for every id this vocabulary can emit."""
        return dict(enumerate(self._words))

    @property
    def words(self) -> list[str]:
        return list(self._words)
