"""Corpus statistics: character-count quartiles, word lengths, reduction rates."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .ingest import PageRecord


class EmptyCorpusError(ValueError):
    pass


class IntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class CharCountQuartiles:
    q1: int
    q2: int
    q3: int
    n: int
    mean: Fraction
    min: int
    max: int

    def to_dict(self) -> dict:
        return {"q1": self.q1, "q2": self.q2, "q3": self.q3, "n": self.n,
                "mean": float(self.mean), "min": self.min, "max": self.max}


def nearest_rank_index(p: Fraction, n: int) -> int:
    """1-based nearest-rank position ceil(p*n), clamped to [1, n]."""
    k = -((-p.numerator * n) // p.denominator)
    return min(max(k, 1), n)


class CharCountAccumulator:
    """Mergeable multiset of per-page character counts."""

    def __init__(self):
        self.counts: Counter[int] = Counter()

    def add(self, char_count: int) -> None:
        self.counts[char_count] += 1

    def update(self, pages: Iterable[PageRecord]) -> CharCountAccumulator:
        for p in pages:
            self.counts[p.char_count] += 1
        return self

    def merge(self, other: CharCountAccumulator) -> CharCountAccumulator:
        out = CharCountAccumulator()
        out.counts = self.counts + other.counts
        return out

    def _value_at(self, keys: list[int], rank: int) -> int:
        seen = 0
        for k in keys:
            seen += self.counts[k]
            if seen >= rank:
                return k
        raise AssertionError("rank beyond multiset size")

    def quartiles(self) -> CharCountQuartiles:
        n = sum(self.counts.values())
        if n == 0:
            raise EmptyCorpusError("empty corpus: no pages to compute quartiles over")
        keys = sorted(self.counts)
        q = [self._value_at(keys, nearest_rank_index(Fraction(i, 4), n)) for i in (1, 2, 3)]
        total = sum(k * c for k, c in self.counts.items())
        return CharCountQuartiles(q[0], q[1], q[2], n, Fraction(total, n), keys[0], keys[-1])


def char_quartiles(pages: Iterable[PageRecord]) -> CharCountQuartiles:
    return CharCountAccumulator().update(pages).quartiles()


class WordLengthAccumulator:
    """Distinct whitespace-delimited words seen so far; merge is set union."""

    def __init__(self):
        self.words: set[str] = set()

    def update(self, pages: Iterable[PageRecord]) -> WordLengthAccumulator:
        for p in pages:
            self.words.update(p.text.split())
        return self

    def merge(self, other: WordLengthAccumulator) -> WordLengthAccumulator:
        out = WordLengthAccumulator()
        out.words = self.words | other.words
        return out

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(w) for w in self.words).items()))


def word_length_histogram(pages: Iterable[PageRecord]) -> dict[int, int]:
    """Map word length -> number of distinct words of that length."""
    return WordLengthAccumulator().update(pages).histogram()


# ------------------------------------------------------------- distributions

@dataclass
class CategoryStat:
    page_count: int = 0
    byte_size: int = 0


class CategoryDistribution(dict):
    """category -> CategoryStat, with totals."""

    @classmethod
    def from_pages(cls, pages: Iterable[PageRecord], default: str = "unlabeled") -> CategoryDistribution:
        dist = cls()
        for p in pages:
            dist.add(p.category or default, p.byte_size)
        return dist

    def add(self, category: str, nbytes: int, pages: int = 1) -> None:
        stat = self.setdefault(category, CategoryStat())
        stat.page_count += pages
        stat.byte_size += nbytes

    @property
    def total_pages(self) -> int:
        return sum(s.page_count for s in self.values())

    @property
    def total_bytes(self) -> int:
        return sum(s.byte_size for s in self.values())

    def to_dict(self) -> dict:
        return {k: {"page_count": v.page_count, "byte_size": v.byte_size} for k, v in sorted(self.items())}

    @classmethod
    def from_dict(cls, d: Mapping) -> CategoryDistribution:
        dist = cls()
        for k, v in d.items():
            dist[k] = CategoryStat(int(v["page_count"]), int(v["byte_size"]))
        return dist


@dataclass(frozen=True)
class ReductionRow:
    bytes_initial: int
    bytes_after_dedup: int
    bytes_final: int

    def _rate(self, after: int) -> Fraction:
        if self.bytes_initial == 0:
            return Fraction(0)
        return 1 - Fraction(after, self.bytes_initial)

    @property
    def dedup_rate(self) -> Fraction:
        return self._rate(self.bytes_after_dedup)

    @property
    def total_reduction_rate(self) -> Fraction:
        return self._rate(self.bytes_final)

    def to_dict(self) -> dict:
        return {
            "bytes_initial": self.bytes_initial,
            "bytes_after_dedup": self.bytes_after_dedup,
            "bytes_final": self.bytes_final,
            "dedup_rate": float(self.dedup_rate),
            "total_reduction_rate": float(self.total_reduction_rate),
            "dedup_rate_pct": format_pct(self.dedup_rate),
            "total_reduction_rate_pct": format_pct(self.total_reduction_rate),
        }


def format_pct(rate: Fraction) -> str:
    """Percentage with two decimals, rounded half-up on the exact value."""
    hundredths = math.floor(Fraction(rate) * 10_000 + Fraction(1, 2))
    sign = "-" if hundredths < 0 else ""
    whole, frac = divmod(abs(hundredths), 100)
    return f"{sign}{whole}.{frac:02d}%"


@dataclass(frozen=True)
class ReductionReport:
    categories: dict[str, ReductionRow]
    total: ReductionRow

    def to_dict(self) -> dict:
        return {"categories": {k: v.to_dict() for k, v in sorted(self.categories.items())},
                "total": self.total.to_dict()}


def reduction_report(
    dist_initial: CategoryDistribution,
    dist_after_dedup: CategoryDistribution,
    dist_final: CategoryDistribution,
) -> ReductionReport:
    """Byte-based dedup and total reduction rates per category and overall.

    Raises :class:`IntegrityError` if any category grows between stages.
    """
    names = sorted(set(dist_initial) | set(dist_after_dedup) | set(dist_final))
    rows = {}
    for name in names:
        sizes = [d[name].byte_size if name in d else 0 for d in (dist_initial, dist_after_dedup, dist_final)]
        if sizes[1] > sizes[0] or sizes[2] > sizes[1]:
            raise IntegrityError(f"category {name!r} grew between stages: {sizes}")
        rows[name] = ReductionRow(*sizes)
    total = ReductionRow(
        sum(r.bytes_initial for r in rows.values()),
        sum(r.bytes_after_dedup for r in rows.values()),
        sum(r.bytes_final for r in rows.values()),
    )
    return ReductionReport(rows, total)
