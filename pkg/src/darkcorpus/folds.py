"""Stratified k-fold and repeated k-fold split assignments."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Sequence

from ._rng import derive_seed


@dataclass(frozen=True)
class FoldAssignment:
    folds: tuple[int, ...]
    k: int
    seed: int
    repetition: int = 0

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.folds:
            sizes[f] += 1
        return sizes

    def members(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.folds) if f == fold]

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "repetition": self.repetition, "folds": list(self.folds)}


def _check(labels: Sequence, k: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > len(labels):
        raise ValueError(f"k={k} exceeds the number of items ({len(labels)})")


def stratified_kfold(labels: Sequence[Hashable], k: int = 10, seed: int = 0, repetition: int = 0) -> FoldAssignment:
    """Shuffle each class with a seeded RNG and deal its items round-robin.

    Classes are dealt in sorted order and the dealing position carries over
    from one class to the next, so both per-class and overall fold sizes
    differ by at most one.
    """
    _check(labels, k)
    by_class: dict = defaultdict(list)
    for i, y in enumerate(labels):
        by_class[y].append(i)
    rng = random.Random(seed)
    folds = [0] * len(labels)
    pos = 0
    for y in sorted(by_class, key=lambda c: (type(c).__name__, c)):
        items = by_class[y]
        rng.shuffle(items)
        for i in items:
            folds[i] = pos
            pos = (pos + 1) % k
    return FoldAssignment(tuple(folds), k, seed, repetition)


def repetition_seed(seed: int, repetition: int) -> int:
    """splitmix64(seed XOR repetition)."""
    return derive_seed(seed, repetition)


def repeated_kfold(labels: Sequence[Hashable], k: int = 5, repetitions: int = 5, seed: int = 0) -> list[FoldAssignment]:
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    _check(labels, k)
    return [stratified_kfold(labels, k, repetition_seed(seed, r), r) for r in range(repetitions)]
