"""MinHash signatures over word shingles, and signature-equality deduplication.

Hash family: every shingle is hashed once with 64-bit FNV-1a over its UTF-8
bytes; permutation ``i`` maps that value ``x`` through
``mix(a_i * x + b_i mod 2**64)`` where ``mix(v) = g(g(v) * C)``,
``g(v) = v ^ (v >> 32)`` and ``C = 0xD6E8FEB86659FD93``. The odd multipliers
``a_i`` and addends ``b_i`` alternate in a splitmix64 stream seeded with the
signature seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from ._backend import BACKEND, kernels
from ._rng import splitmix_stream
from .emit import case_fold
from .ingest import PageRecord

log = logging.getLogger(__name__)

DEFAULT_SHINGLE_N = 3
DEFAULT_NUM_PERMS = 128
DEFAULT_SEED = 1


@lru_cache(maxsize=64)
def permutation_params(num_perms: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    stream = splitmix_stream(seed, 2 * num_perms)
    a = np.array([v | 1 for v in stream[0::2]], dtype=np.uint64)
    b = np.array(stream[1::2], dtype=np.uint64)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _normalized_words(text: str) -> list[str]:
    return case_fold(text).split()


def shingles(text: str, n: int = DEFAULT_SHINGLE_N) -> set[str]:
    """Set of n-word windows of the case-folded, whitespace-normalized text."""
    if n < 1:
        raise ValueError("shingle size n must be >= 1")
    words = _normalized_words(text)
    if len(words) < n:
        return {" ".join(words)}
    return {" ".join(words[i:i + n]) for i in range(len(words) - n + 1)}


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    values: np.ndarray
    seed: int

    @property
    def num_perms(self) -> int:
        return len(self.values)

    def key(self) -> bytes:
        return self.values.tobytes()

    def __eq__(self, other):
        if not isinstance(other, MinHashSignature):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.seed, self.key()))


def _check(num_perms: int) -> None:
    if num_perms < 1:
        raise ValueError("num_perms must be >= 1")


def signature(s: Iterable[str], num_perms: int = DEFAULT_NUM_PERMS, seed: int = DEFAULT_SEED) -> MinHashSignature:
    """MinHash signature of a shingle set."""
    _check(num_perms)
    items = [x.encode("utf-8") for x in s]
    if not items:
        raise ValueError("cannot sign an empty shingle set")
    a, b = permutation_params(num_perms, seed)
    return MinHashSignature(kernels.minhash(kernels.hash_strings(items), a, b), seed)


def text_signature(text: str, n: int = DEFAULT_SHINGLE_N, num_perms: int = DEFAULT_NUM_PERMS,
                   seed: int = DEFAULT_SEED) -> MinHashSignature:
    """Equal to ``signature(shingles(text, n), ...)`` without building the set."""
    if n < 1:
        raise ValueError("shingle size n must be >= 1")
    _check(num_perms)
    buf = " ".join(_normalized_words(text)).encode("utf-8")
    a, b = permutation_params(num_perms, seed)
    return MinHashSignature(kernels.text_signature(buf, n, a, b), seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing positions."""
    if a.num_perms != b.num_perms or a.seed != b.seed:
        raise ValueError(
            f"incomparable signatures: num_perms {a.num_perms}/{b.num_perms}, seed {a.seed}/{b.seed}"
        )
    return float(np.count_nonzero(a.values == b.values)) / a.num_perms


def _page_signature(args) -> bytes:
    text, n, num_perms, seed = args
    return text_signature(text, n, num_perms, seed).values.tobytes()


class Deduplicator:
    """First-occurrence-wins filter over a page stream.

    A page is a duplicate when its full signature equals one already kept. With
    ``near_dup_threshold`` set, a page is also dropped when its estimated
    Jaccard similarity to any kept page reaches the threshold (linear scan).
    """

    def __init__(self, shingle_n: int = DEFAULT_SHINGLE_N, num_perms: int = DEFAULT_NUM_PERMS,
                 seed: int = DEFAULT_SEED, near_dup_threshold: float | None = None, workers: int = 1):
        if shingle_n < 1:
            raise ValueError("shingle size n must be >= 1")
        _check(num_perms)
        if near_dup_threshold is not None and not 0.0 < near_dup_threshold <= 1.0:
            raise ValueError("near_dup_threshold must lie in (0, 1]")
        self.shingle_n = shingle_n
        self.num_perms = num_perms
        self.seed = seed
        self.near_dup_threshold = near_dup_threshold
        self.workers = workers
        self.seen: set[bytes] = set()
        # kept signatures for the near-duplicate scan; grown by doubling
        self._kept_sigs = np.empty((0, num_perms), dtype=np.uint64)
        self._n_kept_sigs = 0
        self.kept = 0
        self.removed = 0
        self.removed_pages: list[PageRecord] = []
        self.keep_removed = False

    def _is_near_dup(self, sig: np.ndarray) -> bool:
        if self.near_dup_threshold is None or not self._n_kept_sigs:
            return False
        agree = (self._kept_sigs[:self._n_kept_sigs] == sig).sum(axis=1)
        return bool(agree.max() >= self.near_dup_threshold * self.num_perms)

    def _remember(self, sig: np.ndarray) -> None:
        if self._n_kept_sigs == len(self._kept_sigs):
            grown = np.empty((max(64, 2 * len(self._kept_sigs)), self.num_perms), dtype=np.uint64)
            grown[:self._n_kept_sigs] = self._kept_sigs
            self._kept_sigs = grown
        self._kept_sigs[self._n_kept_sigs] = sig
        self._n_kept_sigs += 1

    def filter(self, pages: Iterable[PageRecord]) -> Iterator[PageRecord]:
        from .parallel import ordered_map

        pages = iter(pages)
        # signatures are pure per page; the uniqueness fold stays sequential
        for page, key in ordered_map(
            _page_signature, pages, self.workers,
            arg=lambda p: (p.text, self.shingle_n, self.num_perms, self.seed),
        ):
            if key in self.seen:
                dup = True
            else:
                sig = np.frombuffer(key, dtype=np.uint64)
                dup = self._is_near_dup(sig)
                if not dup and self.near_dup_threshold is not None:
                    self._remember(sig)
            if dup:
                self.removed += 1
                if self.keep_removed:
                    self.removed_pages.append(page)
                continue
            self.seen.add(key)
            self.kept += 1
            yield page

    def parameters(self) -> dict:
        return {"shingle_n": self.shingle_n, "num_perms": self.num_perms, "minhash_seed": self.seed,
                "near_dup_threshold": self.near_dup_threshold}


def dedup(pages: Iterable[PageRecord], num_perms: int = DEFAULT_NUM_PERMS, seed: int = DEFAULT_SEED,
          shingle_n: int = DEFAULT_SHINGLE_N, near_dup_threshold: float | None = None) -> tuple[list[PageRecord], int]:
    """Drop pages whose signature repeats an earlier kept page's; returns ``(kept, removed)``."""
    d = Deduplicator(shingle_n, num_perms, seed, near_dup_threshold)
    kept = list(d.filter(pages))
    return kept, d.removed


__all__ = [
    "BACKEND", "MinHashSignature", "Deduplicator", "dedup", "estimate_jaccard", "permutation_params",
    "shingles", "signature", "text_signature",
]
