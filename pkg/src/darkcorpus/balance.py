"""Activity categories, page classifiers, and random down-sampling of large categories."""

from __future__ import annotations

import json
import logging
import random
import re
import shlex
import subprocess
import zlib
from collections import Counter, defaultdict
from pathlib import Path
from typing import Callable, Iterable, Mapping

from ._rng import derive_seed
from .emit import case_fold
from .ingest import PageRecord
from .stats import CategoryDistribution

log = logging.getLogger(__name__)

CATEGORIES = (
    "Pornography", "Drugs", "Financial", "Gambling", "Cryptocurrency",
    "Hacking", "Arms/Weapons", "Violence", "Electronics",
)
DEFAULT_FALLBACK = "Financial"
DEFAULT_CAP_BYTES = 1_000_000_000

_CANON = {re.sub(r"[\s/_-]+", "", c.lower()): c for c in CATEGORIES}
_CANON.update({"arms": "Arms/Weapons", "weapons": "Arms/Weapons", "porn": "Pornography", "crypto": "Cryptocurrency"})


def canonical_category(name: str | None) -> str | None:
    """Map spelling variants ("Arms / Weapons", "hacking") onto the fixed names."""
    if not name:
        return None
    return _CANON.get(re.sub(r"[\s/_-]+", "", name.lower()))


DEFAULT_LEXICON: dict[str, list[str]] = {
    "Pornography": ["porn", "sex", "xxx", "nude", "nudes", "adult", "erotic", "videos", "camgirl", "webcam", "fetish"],
    "Drugs": ["cocaine", "heroin", "mdma", "lsd", "cannabis", "weed", "meth", "pills", "opioid", "ketamine",
              "xanax", "oxycodone", "fentanyl", "grams", "vendor"],
    "Financial": ["paypal", "bank", "credit", "card", "cards", "cvv", "dumps", "transfer", "account", "accounts",
                  "money", "cash", "western", "counterfeit", "fullz"],
    "Gambling": ["casino", "poker", "bet", "betting", "jackpot", "slots", "roulette", "lottery", "dice", "odds"],
    "Cryptocurrency": ["bitcoin", "btc", "ethereum", "eth", "litecoin", "monero", "xmr", "wallet", "mixer",
                       "tumbler", "blockchain", "crypto", "exchange", "coins"],
    "Hacking": ["hack", "hacking", "exploit", "malware", "ransomware", "botnet", "ddos", "phishing", "rat",
                "keylogger", "vulnerability", "leak", "leaked", "database", "breach", "0day"],
    "Arms/Weapons": ["gun", "guns", "pistol", "rifle", "ammo", "ammunition", "glock", "ar15", "firearm",
                     "firearms", "weapon", "weapons", "silencer"],
    "Violence": ["kill", "murder", "hitman", "assassination", "violence", "torture", "gore", "attack",
                 "terror", "bomb"],
    "Electronics": ["iphone", "samsung", "laptop", "macbook", "electronics", "console", "playstation", "camera",
                    "drone", "tablet", "gadgets", "shipping"],
}

_TOKEN_RE = re.compile(r"[^\W_]+(?:['-][^\W_]+)*")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(case_fold(text))


def keyword_classify(page: PageRecord, lexicon: Mapping[str, Iterable[str]],
                     fallback: str = DEFAULT_FALLBACK) -> str:
    """Category with most lexicon hits; ties go to the lexicographically smaller name."""
    if not lexicon:
        raise ValueError("keyword classifier needs a non-empty lexicon")
    toks = _tokens(page.text)
    counts = Counter(toks)
    best, best_score = None, 0
    for category in sorted(lexicon):
        score = 0
        for term in lexicon[category]:
            parts = _tokens(term)
            if len(parts) == 1:
                score += counts[parts[0]]
            elif parts:
                k = len(parts)
                score += sum(toks[i:i + k] == parts for i in range(len(toks) - k + 1))
        if score > best_score:
            best, best_score = category, score
    return best if best is not None else fallback


def load_lexicon(path: str | Path) -> dict[str, list[str]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not data:
        raise ValueError(f"{path}: lexicon must be a non-empty JSON object")
    lexicon = {}
    for name, words in data.items():
        canon = canonical_category(name)
        if canon is None:
            raise ValueError(f"{path}: unknown category {name!r}")
        if not isinstance(words, list) or not words:
            raise ValueError(f"{path}: category {name!r} needs a non-empty word list")
        lexicon[canon] = [str(w) for w in words]
    missing = set(CATEGORIES) - set(lexicon)
    if missing:
        log.warning("lexicon %s lacks categories: %s", path, ", ".join(sorted(missing)))
    return lexicon


# ---------------------------------------------------------------- classifiers

class LabelClassifier:
    """Pass-through of the record's own category label."""

    name = "label"

    def __init__(self, fallback: str = DEFAULT_FALLBACK):
        self.fallback = fallback
        self.unlabeled = 0

    def __call__(self, page: PageRecord) -> str:
        cat = canonical_category(page.category)
        if cat is None:
            self.unlabeled += 1
            return self.fallback
        return cat

    def close(self):
        if self.unlabeled:
            log.warning("%d pages lacked a usable category label; assigned %s", self.unlabeled, self.fallback)


class KeywordClassifier:
    name = "keyword"

    def __init__(self, lexicon: Mapping[str, Iterable[str]] | None = None, fallback: str = DEFAULT_FALLBACK):
        self.lexicon = {k: list(v) for k, v in (lexicon or DEFAULT_LEXICON).items()}
        self.fallback = fallback

    def __call__(self, page: PageRecord) -> str:
        return keyword_classify(page, self.lexicon, self.fallback)

    def close(self):
        pass


class ExecClassifier:
    """External classifier speaking line-delimited JSON over stdin/stdout.

    Request per page: ``{"id": ..., "text": ...}``; the process must answer
    each line with ``{"category": ...}`` before the next one is sent.
    """

    name = "exec"

    def __init__(self, command: str):
        self.command = command
        self.proc = subprocess.Popen(
            shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1,
        )

    def __call__(self, page: PageRecord) -> str:
        self.proc.stdin.write(json.dumps({"id": page.id, "text": page.text}, ensure_ascii=False) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise RuntimeError(f"classifier {self.command!r} exited without answering page {page.id}")
        try:
            raw = json.loads(line)["category"]
        except (ValueError, KeyError, TypeError) as exc:
            raise RuntimeError(f"classifier {self.command!r}: bad response {line.strip()!r}") from exc
        cat = canonical_category(raw)
        if cat is None:
            raise RuntimeError(f"classifier {self.command!r}: unknown category {raw!r} for page {page.id}")
        return cat

    def close(self):
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=30)


def make_classifier(spec: str = "label", lexicon_path: str | None = None,
                    fallback: str = DEFAULT_FALLBACK) -> Callable[[PageRecord], str]:
    if spec == "label":
        return LabelClassifier(fallback)
    if spec == "keyword":
        return KeywordClassifier(load_lexicon(lexicon_path) if lexicon_path else None, fallback)
    if spec.startswith("exec:"):
        return ExecClassifier(spec[len("exec:"):])
    raise ValueError(f"unknown classifier {spec!r}; expected label, keyword or exec:<command>")


def classify_all(pages: Iterable[PageRecord], classifier: Callable[[PageRecord], str]) -> list[PageRecord]:
    out = []
    for p in pages:
        p.category = classifier(p)
        out.append(p)
    return out


# ---------------------------------------------------------------- balancing

def category_rng(seed: int, category: str) -> random.Random:
    return random.Random(derive_seed(seed, zlib.crc32(category.encode("utf-8"))))


def balance(pages: Iterable[PageRecord], cap_bytes: int = DEFAULT_CAP_BYTES,
            seed: int = 0) -> tuple[list[PageRecord], CategoryDistribution, CategoryDistribution]:
    """Randomly drop whole pages from every category larger than ``cap_bytes``.

    Pages of an over-cap category are visited in a seeded random order and
    removed until the category fits under the cap. Returns the kept pages in
    their original order plus the distributions before and after.
    """
    if cap_bytes <= 0:
        raise ValueError("cap_bytes must be positive")
    pages = list(pages)
    sizes = [p.byte_size for p in pages]
    members: dict[str, list[int]] = defaultdict(list)
    for i, p in enumerate(pages):
        if p.category is None:
            raise ValueError(f"page {p.id} has no category; classify before balancing")
        members[p.category].append(i)

    before = CategoryDistribution()
    removed: set[int] = set()
    for cat in sorted(members):
        idx = members[cat]
        total = sum(sizes[i] for i in idx)
        before.add(cat, total, len(idx))
        if total <= cap_bytes:
            continue
        order = list(idx)
        category_rng(seed, cat).shuffle(order)
        for i in order:
            if total <= cap_bytes:
                break
            removed.add(i)
            total -= sizes[i]

    kept = [p for i, p in enumerate(pages) if i not in removed]
    after = CategoryDistribution()
    for cat in sorted(members):
        after.add(cat, 0, 0)
    for p in kept:
        after.add(p.category, p.byte_size)
    return kept, before, after
