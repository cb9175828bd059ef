"""Closed whitespace-token vocabulary."""

from typing import Dict, Iterable, List, Sequence

import numpy as np

from ..errors import VocabularyError
from ..instances import SEP_TOKEN, TO_TOKEN


class Vocabulary:
    """Bijective token <-> id map. Unknown tokens are errors, never mapped to UNK."""

    def __init__(self, tokens: Iterable[str]):
        self._tokens: List[str] = []
        self._index: Dict[str, int] = {}
        for token in tokens:
            if token not in self._index:
                self._index[token] = len(self._tokens)
                self._tokens.append(token)
        if SEP_TOKEN not in self._index:
            raise VocabularyError(f"Vocabulary must contain {SEP_TOKEN!r}")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        """Vocabulary with the function tokens first and the rest sorted."""
        rest = sorted(set(tokens) - {SEP_TOKEN, TO_TOKEN})
        return cls([SEP_TOKEN, TO_TOKEN] + rest)

    @property
    def sep_id(self) -> int:
        return self._index[SEP_TOKEN]

    @property
    def tokens(self) -> List[str]:
        return list(self._tokens)

    def id_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise VocabularyError(f"Token {token!r} is not in the vocabulary") from None

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.id_of(t) for t in tokens], dtype=np.int64)

    def decode(self, ids: Iterable[int]) -> List[str]:
        out = []
        for i in ids:
            if not 0 <= int(i) < len(self._tokens):
                raise VocabularyError(f"Token id {i} outside vocabulary of size {len(self)}")
            out.append(self._tokens[int(i)])
        return out

    def extend(self, tokens: Iterable[str]) -> "Vocabulary":
        """New vocabulary with unseen tokens appended; existing ids are unchanged."""
        return Vocabulary(self._tokens + [t for t in tokens if t not in self._index])

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def __len__(self) -> int:
        return len(self._tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens
