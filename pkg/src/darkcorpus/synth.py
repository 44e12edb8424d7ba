"""Deterministic synthetic crawl generator for tests, benchmarks and demos.

Pages mix English-like prose with planted identifiers (emails, onion and
surface URLs, IPv4/IPv6, BTC/ETH/LTC addresses, SHA-256 hashes), a little
non-Latin text, exact duplicates, out-of-range page lengths, non-English
pages and some raw-HTML records. Category sizes are skewed so that
balancing has something to do.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterator

from .balance import CATEGORIES, DEFAULT_LEXICON
from .ingest import ENGLISH_STOPWORDS

B58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
BECH32 = "qpzry9x8gf2tvdw0s3jn54khce6mua7l"
BASE32 = "abcdefghijklmnopqrstuvwxyz234567"
HEX = "0123456789abcdef"

# relative byte share per category, skewed like a real crawl
CATEGORY_WEIGHTS = {
    "Pornography": 40, "Drugs": 9, "Financial": 10, "Gambling": 1, "Cryptocurrency": 7,
    "Hacking": 15, "Arms/Weapons": 1, "Violence": 6, "Electronics": 5,
}

_SYLLABLES = ["ka", "to", "ri", "men", "sol", "ver", "an", "tes", "lo", "dar", "pe", "qui", "nor", "stel",
              "bra", "cu", "fin", "gal", "hom", "jor", "lis", "mar", "nev", "or", "pra", "ren", "sa", "tur"]
_FOREIGN = ["привет", "мир", "данные", "日本語", "中文", "✓", "→", "€", "•", "‘quoted’", "naïve", "café"]
_CYRILLIC = ["это", "сайт", "продажа", "товар", "доставка", "цена", "купить", "только", "сегодня", "новый",
             "для", "и", "в", "не", "на", "что", "как", "мы", "вы", "они"]


def _vocabulary(rng: random.Random) -> tuple[list[str], list[float]]:
    words = sorted(ENGLISH_STOPWORDS)
    weights = [30.0] * len(words)
    synthetic = set()
    while len(synthetic) < 3000:
        synthetic.add("".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(1, 4))))
    for i, w in enumerate(sorted(synthetic)):
        words.append(w)
        weights.append(20.0 / (1 + i) ** 0.8)
    return words, weights


def _b58(rng, n):
    return "".join(rng.choices(B58, k=n))


def _identifier(rng: random.Random) -> str:
    kind = rng.randrange(12)
    if kind == 0:
        return f"{rng.choice(['admin', 'support', 'john.doe', 'vendor_7'])}@{rng.choice(['protonmail.com', 'mail.ru', 'example.org'])}"
    if kind == 1:
        return "".join(rng.choices(BASE32, k=56)) + ".onion"
    if kind == 2:
        return "http://" + "".join(rng.choices(BASE32, k=16)) + ".onion/" + rng.choice(["index.php", "shop", ""])
    if kind == 3:
        return rng.choice(["https://www.", "http://", "www."]) + rng.choice(["example", "market", "forum"]) + \
            rng.choice([".com", ".net", ".org/page?id=3"])
    if kind == 4:
        return ".".join(str(rng.randrange(256)) for _ in range(4))
    if kind == 5:
        return ":".join(f"{rng.randrange(65536):x}" for _ in range(8))
    if kind == 6:
        return "1" + _b58(rng, rng.randint(25, 33))
    if kind == 7:
        return "bc1" + "".join(rng.choices(BECH32, k=39))
    if kind == 8:
        return "0x" + "".join(rng.choices(HEX, k=40))
    if kind == 9:
        return "L" + _b58(rng, 33)
    if kind == 10:
        return "".join(rng.choices(HEX, k=64))
    return rng.choice(_FOREIGN)


class SyntheticCrawl:
    def __init__(self, seed: int = 0, identifier_rate: float = 0.02, duplicate_rate: float = 0.12,
                 foreign_rate: float = 0.04, html_rate: float = 0.05):
        self.rng = random.Random(seed)
        self.words, weights = _vocabulary(self.rng)
        total = 0.0
        self.cum = []
        for w in weights:
            total += w
            self.cum.append(total)
        self.identifier_rate = identifier_rate
        self.duplicate_rate = duplicate_rate
        self.foreign_rate = foreign_rate
        self.html_rate = html_rate
        cats = list(CATEGORY_WEIGHTS)
        self.categories = cats
        self.cat_cum = []
        acc = 0
        for c in cats:
            acc += CATEGORY_WEIGHTS[c]
            self.cat_cum.append(acc)
        self.recent: list[tuple[str, str]] = []

    def _length(self) -> int:
        r = self.rng.random()
        if r < 0.06:
            return self.rng.randint(5, 499)
        if r < 0.10:
            return self.rng.randint(10_001, 30_000)
        return min(10_000, max(500, int(self.rng.lognormvariate(8.0, 0.6))))

    def _prose(self, n_chars: int, category: str) -> str:
        rng = self.rng
        topic = DEFAULT_LEXICON[category]
        parts: list[str] = []
        size = 0
        while size < n_chars:
            k = rng.randint(8, 20)
            sent = rng.choices(self.words, cum_weights=self.cum, k=k)
            sent[rng.randrange(k)] = rng.choice(topic)
            if rng.random() < self.identifier_rate * k:
                sent.insert(rng.randrange(k), _identifier(rng))
            sent[0] = sent[0].capitalize()
            s = " ".join(sent) + rng.choice([". ", ".\n", "! ", "? ", ".\n\n"])
            parts.append(s)
            size += len(s)
        return "".join(parts)[:n_chars]

    def page(self, index: int) -> dict:
        rng = self.rng
        cat = rng.choices(self.categories, cum_weights=self.cat_cum)[0]
        rec = {"id": f"p{index:08d}", "url": "http://" + "".join(rng.choices(BASE32, k=56)) + ".onion/"}
        if self.recent and rng.random() < self.duplicate_rate:
            cat, text = rng.choice(self.recent)
        elif rng.random() < self.foreign_rate:
            text = " ".join(rng.choices(_CYRILLIC, k=rng.randint(100, 800)))
            rec["lang"] = "ru"
            rec["text"] = text
            rec["category"] = cat
            return rec
        else:
            text = self._prose(self._length(), cat)
            self.recent.append((cat, text))
            if len(self.recent) > 200:
                self.recent.pop(rng.randrange(len(self.recent)))
        rec["lang"] = "en"
        rec["category"] = cat
        if rng.random() < self.html_rate:
            rec["html"] = (f"<html><head><title>Page {index}</title><style>p{{color:red}}</style></head>"
                           f"<body><div><p>{_html_escape(text)}</p><script>var t={index};</script></div></body></html>")
        else:
            rec["text"] = text
        return rec

    def pages(self, n: int | None = None, target_bytes: int | None = None) -> Iterator[dict]:
        i = 0
        total = 0
        while (n is None or i < n) and (target_bytes is None or total < target_bytes):
            rec = self.page(i)
            total += len(rec.get("text", rec.get("html", "")).encode("utf-8"))
            yield rec
            i += 1


def _html_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_synthetic(path: str | Path, n_pages: int | None = None, target_bytes: int | None = None,
                    seed: int = 0, **kwargs) -> int:
    """Write a synthetic JSONL crawl; returns the number of pages written."""
    if n_pages is None and target_bytes is None:
        raise ValueError("give n_pages or target_bytes")
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in SyntheticCrawl(seed, **kwargs).pages(n_pages, target_bytes):
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def random_set_pair(rng: random.Random, universe: int = 10_000, size_range=(20, 200)) -> tuple[set[str], set[str]]:
    """Two random shingle sets with a random overlap, for estimator checks."""
    na = rng.randint(*size_range)
    nb = rng.randint(*size_range)
    shared = rng.randint(0, min(na, nb))
    pool = rng.sample(range(universe), na + nb - shared)
    a = {f"s{x}" for x in pool[:na]}
    b = {f"s{x}" for x in pool[:shared]} | {f"s{x}" for x in pool[na:]}
    return a, b


__all__ = ["SyntheticCrawl", "write_synthetic", "random_set_pair", "CATEGORIES"]
