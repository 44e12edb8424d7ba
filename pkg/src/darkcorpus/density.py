"""Character-count filter for pages with low information density."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .ingest import PageRecord
from .stats import CharCountQuartiles

DEFAULT_MIN_CHARS = 500
DEFAULT_MAX_CHARS = 10_000


@dataclass(frozen=True)
class DensityThresholds:
    min_chars: int = DEFAULT_MIN_CHARS
    # math.inf disables the upper bound
    max_chars: float = DEFAULT_MAX_CHARS

    def __post_init__(self):
        if not 0 < self.min_chars < self.max_chars:
            raise ValueError(f"need 0 < min_chars < max_chars, got {self.min_chars}, {self.max_chars}")

    def to_dict(self) -> dict:
        return {"min_chars": self.min_chars,
                "max_chars": None if math.isinf(self.max_chars) else int(self.max_chars)}


def derive_thresholds(q: CharCountQuartiles) -> DensityThresholds:
    """Half of Q1 and double Q3."""
    low = q.q1 // 2
    if low == 0:
        raise ValueError(f"degenerate corpus: Q1={q.q1} gives a zero minimum threshold")
    return DensityThresholds(low, 2 * q.q3)


class DensityFilter:
    def __init__(self, thresholds: DensityThresholds):
        self.t = thresholds
        self.kept = 0
        self.dropped_low = 0
        self.dropped_high = 0

    def filter(self, pages: Iterable[PageRecord]) -> Iterator[PageRecord]:
        lo, hi = self.t.min_chars, self.t.max_chars
        for p in pages:
            if p.char_count < lo:
                self.dropped_low += 1
            elif p.char_count > hi:
                self.dropped_high += 1
            else:
                self.kept += 1
                yield p


def filter_by_density(pages: Iterable[PageRecord], t: DensityThresholds) -> tuple[list[PageRecord], int, int]:
    """Keep pages with ``min_chars <= char_count <= max_chars``.

    Returns ``(kept, dropped_low, dropped_high)``.
    """
    f = DensityFilter(t)
    kept = list(f.filter(pages))
    return kept, f.dropped_low, f.dropped_high
