"""Slow, obviously-correct reimplementations used as test oracles."""

from __future__ import annotations

import math
import re
from collections import defaultdict

from darkcorpus import masking


# ---------------------------------------------------------------- masking

def reference_mask(text: str, names=None) -> tuple[str, dict]:
    """Whole-text rule chain, one regex pass per rule, repeated to a fixpoint."""
    rules = masking.MaskRuleSet(names)
    counts = {r.name: 0 for r in rules}
    while True:
        changed = False
        for rule in rules:
            if rule.action == masking.REPLACE:
                n = 0

                def repl(m, rule=rule):
                    nonlocal n
                    if rule.name == masking.EMAIL and m.group("userinfo") is not None:
                        return m.group(0)
                    n += 1
                    return rule.token

                text = rule.pattern.sub(repl, text)
            elif rule.action == masking.REMOVE:
                kept = "".join(c for c in text if ord(c) <= 0xFF)
                n = len(text) - len(kept)
                text = kept
            else:
                text = re.sub(r"\s+", " ", text).strip(" ")
                continue
            counts[rule.name] += n
            changed = changed or n > 0
        if not changed:
            return text, counts


# ---------------------------------------------------------------- statistics

def nearest_rank_quartiles(values: list[int]) -> tuple[int, int, int]:
    s = sorted(values)
    n = len(s)
    out = []
    for num in (1, 2, 3):
        rank = -(-num * n // 4)  # ceil(num*n/4)
        out.append(s[max(rank, 1) - 1])
    return tuple(out)


def word_length_histogram(texts) -> dict[int, int]:
    seen = set()
    for t in texts:
        for w in t.split():
            seen.add(w)
    hist: dict[int, int] = defaultdict(int)
    for w in seen:
        hist[len(w)] += 1
    return dict(hist)


def reduction_pct(before: int, after: int) -> str:
    if before == 0:
        return "0.00%"
    # half-up rounding on the exact decimal value
    scaled = (before - after) * 100 * 100
    q, r = divmod(scaled, before)
    if 2 * r >= before:
        q += 1
    return f"{q // 100}.{q % 100:02d}%"


# ---------------------------------------------------------------- text extraction

def naive_extract(html: str) -> str:
    """Single-pass tag stripper for well-formed documents."""
    pos = 0
    out: list[str] = []
    entities = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'", "nbsp": "\xa0"}

    while pos < len(html):
        if html.startswith("<!--", pos):
            pos = html.index("-->", pos) + 3
            continue
        if html[pos] == "<":
            end = html.index(">", pos)
            tag = html[pos + 1:end].strip()
            name = tag.lstrip("/").split()[0].lower() if tag.lstrip("/") else ""
            out.append(" ")
            pos = end + 1
            if name in ("script", "style") and not tag.startswith("/"):
                # raw text: everything up to the closing tag is skipped
                pos = html.lower().index(f"</{name}", pos)
            continue
        if html[pos] == "&":
            end = html.find(";", pos)
            name = html[pos + 1:end] if end > 0 else ""
            if name in entities:
                out.append(entities[name])
                pos = end + 1
                continue
        out.append(html[pos])
        pos += 1
    return " ".join("".join(out).split())


# ---------------------------------------------------------------- minhash

def exact_jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


# ---------------------------------------------------------------- misc

def mean(xs) -> float:
    xs = list(xs)
    return math.fsum(xs) / len(xs)
