"""Index sets of active RF chains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ModelError


@dataclass(frozen=True)
class SelectionSet:
    """Strictly increasing 1-based chain indices drawn from ``1..universe_size``."""

    indices: tuple[int, ...]
    universe_size: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.universe_size < 0:
            raise ModelError("universe_size must be non-negative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ModelError(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 1 or idx[-1] > self.universe_size):
            raise ModelError(f"indices {idx} outside 1..{self.universe_size}")

    @classmethod
    def full(cls, n: int) -> SelectionSet:
        return cls(tuple(range(1, n + 1)), n)

    @classmethod
    def from_zero_based(cls, idx: Iterable[int], n: int) -> SelectionSet:
        return cls(tuple(sorted(int(i) + 1 for i in idx)), n)

    @property
    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def matrix(self) -> np.ndarray:
        """Binary selection matrix ``[e_{n_1}, ..., e_{n_K}]``."""
        s = np.zeros((self.universe_size, len(self)))
        s[self.zero_based, np.arange(len(self))] = 1.0
        return s

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)
