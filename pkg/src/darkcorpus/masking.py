"""Identifier masking and character cleanup for the preprocessed corpus.

Rules run in a fixed order, each one scanning the output of the previous one:

    ID_EMAIL -> ID_ONION_URL -> ID_NORMAL_URL -> ID_IP_ADDRESS ->
    ID_BTC_ADDRESS -> ID_ETH_ADDRESS -> ID_LTC_ADDRESS -> ID_LONGWORD ->
    uncommon-character removal -> whitespace truncation

A full sweep is repeated until it changes nothing. Later rules can expose new
matches for earlier ones (deleting a U+3000 space joins two words into a
lengthy word, a token followed by ``@host.com`` reads as an email), so a
single sweep is not idempotent on adversarial input. Each extra sweep strictly
shrinks the text or its count of characters outside ``[A-Z_]``, so the loop
terminates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from ._backend import kernels

EMAIL = "ID_EMAIL"
ONION_URL = "ID_ONION_URL"
NORMAL_URL = "ID_NORMAL_URL"
IP_ADDRESS = "ID_IP_ADDRESS"
BTC_ADDRESS = "ID_BTC_ADDRESS"
ETH_ADDRESS = "ID_ETH_ADDRESS"
LTC_ADDRESS = "ID_LTC_ADDRESS"
LONGWORD = "ID_LONGWORD"
UNCOMMON_CHARS = "UNCOMMON_CHARS"
WHITESPACE = "WHITESPACE"

MASK_TOKENS = (EMAIL, NORMAL_URL, ONION_URL, IP_ADDRESS, BTC_ADDRESS, ETH_ADDRESS, LTC_ADDRESS, LONGWORD)
RULE_ORDER = (
    EMAIL, ONION_URL, NORMAL_URL, IP_ADDRESS, BTC_ADDRESS, ETH_ADDRESS, LTC_ADDRESS,
    LONGWORD, UNCOMMON_CHARS, WHITESPACE,
)
LONGWORD_MIN_LEN = 38

REPLACE = "replace_with_token"
REMOVE = "remove"
TRUNCATE = "truncate_whitespace"

# ---------------------------------------------------------------- patterns

_SCHEME = r"(?<![A-Za-z0-9+.-])[A-Za-z][A-Za-z0-9+.-]*://"
# URL tail: optional port, then a path/query/fragment that does not swallow
# trailing sentence punctuation.
_TAIL = r"(?::[0-9]{1,5})?(?:[/?#](?:\S*[^\s.,;:!?)\]}'\"])?)?"
_LABEL = r"[A-Za-z0-9-]+"

_EMAIL_RE = re.compile(
    # a scheme-prefixed "user:pass@host" is URL userinfo, not an address;
    # it is matched here only so it can be skipped
    rf"(?P<userinfo>{_SCHEME}[^\s/@]*)?"
    r"(?<![A-Za-z0-9._%+-])[A-Za-z0-9._%+-]+@(?:[A-Za-z0-9-]+\.)+[A-Za-z]{2,}(?![A-Za-z0-9-])"
)

_ONION_RE = re.compile(
    rf"(?:{_SCHEME})?(?:[^\s/@]+@)?"
    rf"(?<![A-Za-z0-9-])(?:{_LABEL}\.)*"
    r"(?<![A-Za-z0-9-])(?:[a-z2-7]{56}|[a-z2-7]{16})\.onion(?![A-Za-z0-9-])"
    + _TAIL
)

_NORMAL_URL_RE = re.compile(
    rf"(?:(?<![A-Za-z0-9+.-])(?i:https?)://(?:[^\s/@]+@)?{_LABEL}(?:\.{_LABEL})+"
    rf"|(?<![A-Za-z0-9.@-])(?i:www)\.(?:{_LABEL}\.)+[A-Za-z]{{2,}})"
    r"(?![A-Za-z0-9-]|\.[A-Za-z0-9])"
    r"(?<!\.[oO][nN][iI][oO][nN])"
    + _TAIL
)

_OCTET = r"(?:25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])"
_IPV4 = rf"(?:{_OCTET}\.){{3}}{_OCTET}"
_H = r"[0-9A-Fa-f]{1,4}"
_IPV6 = (
    r"(?:"
    rf"::(?:[fF]{{4}}(?::0{{1,4}})?:)?{_IPV4}"
    rf"|(?:{_H}:){{1,4}}:{_IPV4}"
    rf"|(?:{_H}:){{7}}{_H}"
    rf"|(?:{_H}:){{1,6}}:{_H}"
    rf"|(?:{_H}:){{1,5}}(?::{_H}){{1,2}}"
    rf"|(?:{_H}:){{1,4}}(?::{_H}){{1,3}}"
    rf"|(?:{_H}:){{1,3}}(?::{_H}){{1,4}}"
    rf"|(?:{_H}:){{1,2}}(?::{_H}){{1,5}}"
    rf"|{_H}:(?::{_H}){{1,6}}"
    rf"|:(?::{_H}){{1,7}}"
    rf"|(?:{_H}:){{1,7}}:"
    r")"
)
_IP_RE = re.compile(
    rf"(?<![0-9A-Za-z_:.%]){_IPV6}(?:%[0-9A-Za-z_.~-]+)?(?![0-9A-Za-z_:%])"
    rf"|(?<![0-9.]){_IPV4}(?!\.?[0-9])"
)

_B58 = r"[1-9A-HJ-NP-Za-km-z]"
_BECH32 = r"[02-9ac-hj-np-z]"
_BTC_RE = re.compile(
    rf"(?<![A-Za-z0-9])(?:[13]{_B58}{{25,34}}|bc1{_BECH32}{{11,71}})(?![A-Za-z0-9])"
)
_ETH_RE = re.compile(r"(?<![A-Za-z0-9])0[xX][0-9A-Fa-f]{40}(?![A-Za-z0-9])")
_LTC_RE = re.compile(
    rf"(?<![A-Za-z0-9])(?:[LM]{_B58}{{25,33}}|ltc1{_BECH32}{{11,71}})(?![A-Za-z0-9])"
)
_LONGWORD_RE = re.compile(rf"(?<!\S)\S{{{LONGWORD_MIN_LEN},}}")
_UNCOMMON_RE = re.compile(r"[^\x00-\xff]+")


@dataclass(frozen=True)
class MaskRule:
    name: str
    action: str
    pattern: re.Pattern | None = None
    token: str | None = None
    # shortest possible match, for the byte-inflation bound
    min_match_len: int = 0
    # cheap necessary condition for any match; None means always scan
    prefilter: Callable[[str], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.action == REPLACE and self.token not in MASK_TOKENS:
            raise ValueError(f"rule {self.name}: replace rules need a token from the vocabulary")

    @property
    def inflation_per_match(self) -> int:
        if self.action != REPLACE:
            return 0
        return max(0, len(self.token) - self.min_match_len)


_RULES = {
    EMAIL: MaskRule(EMAIL, REPLACE, _EMAIL_RE, EMAIL, 6, lambda t: "@" in t),
    ONION_URL: MaskRule(ONION_URL, REPLACE, _ONION_RE, ONION_URL, 22, lambda t: ".onion" in t),
    NORMAL_URL: MaskRule(
        NORMAL_URL, REPLACE, _NORMAL_URL_RE, NORMAL_URL, 8,
        lambda t: "://" in t or "www." in t or "WWW." in t or "Www." in t,
    ),
    IP_ADDRESS: MaskRule(IP_ADDRESS, REPLACE, _IP_RE, IP_ADDRESS, 3, lambda t: "." in t or ":" in t),
    BTC_ADDRESS: MaskRule(BTC_ADDRESS, REPLACE, _BTC_RE, BTC_ADDRESS, 14, lambda t: "1" in t or "3" in t),
    ETH_ADDRESS: MaskRule(ETH_ADDRESS, REPLACE, _ETH_RE, ETH_ADDRESS, 42, lambda t: "0x" in t or "0X" in t),
    LTC_ADDRESS: MaskRule(LTC_ADDRESS, REPLACE, _LTC_RE, LTC_ADDRESS, 15,
                          lambda t: "L" in t or "M" in t or "ltc1" in t),
    LONGWORD: MaskRule(LONGWORD, REPLACE, _LONGWORD_RE, LONGWORD, LONGWORD_MIN_LEN,
                       lambda t: len(t) >= LONGWORD_MIN_LEN),
    UNCOMMON_CHARS: MaskRule(UNCOMMON_CHARS, REMOVE, _UNCOMMON_RE),
    WHITESPACE: MaskRule(WHITESPACE, TRUNCATE),
}


class MaskRuleSet:
    """An ordered subset of the masking rules.

    Subsets are allowed (for ablations) but always run in canonical order.
    """

    def __init__(self, names: Iterable[str] | None = None):
        if names is None:
            names = RULE_ORDER
        names = list(names)
        unknown = [n for n in names if n not in _RULES]
        if unknown:
            raise ValueError(f"unknown mask rule(s): {', '.join(unknown)}; known: {', '.join(RULE_ORDER)}")
        wanted = set(names)
        self.rules: tuple[MaskRule, ...] = tuple(_RULES[n] for n in RULE_ORDER if n in wanted)

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rules]

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __repr__(self):
        return f"MaskRuleSet({self.names!r})"


DEFAULT_RULES = MaskRuleSet()


@dataclass
class MaskReport:
    counts: dict[str, int] = field(default_factory=dict)
    chars_removed: int = 0
    bytes_before: int = 0
    bytes_after: int = 0
    inflation_bound: int = 0

    def merge(self, other: MaskReport) -> MaskReport:
        counts = dict(self.counts)
        for name, n in other.counts.items():
            counts[name] = counts.get(name, 0) + n
        return MaskReport(
            counts,
            self.chars_removed + other.chars_removed,
            self.bytes_before + other.bytes_before,
            self.bytes_after + other.bytes_after,
            self.inflation_bound + other.inflation_bound,
        )

    @property
    def total_replacements(self) -> int:
        return sum(n for name, n in self.counts.items() if name in MASK_TOKENS)

    def is_zero(self) -> bool:
        return self.chars_removed == 0 and not any(self.counts.values())

    def to_dict(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "chars_removed": self.chars_removed,
            "bytes_before": self.bytes_before,
            "bytes_after": self.bytes_after,
            "inflation_bound": self.inflation_bound,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MaskReport:
        return cls(dict(d.get("counts", {})), d.get("chars_removed", 0), d.get("bytes_before", 0),
                   d.get("bytes_after", 0), d.get("inflation_bound", 0))


def remove_uncommon_chars(text: str) -> tuple[str, int]:
    """Delete every character above U+00FF; returns the text and how many went."""
    if text.isascii():
        return text, 0
    cleaned = _UNCOMMON_RE.sub("", text)
    return cleaned, len(text) - len(cleaned)


def normalize_whitespace(text: str) -> str:
    """Collapse each whitespace run to one space and strip both ends."""
    return " ".join(text.split())


def _truncate_whitespace(text: str) -> tuple[str, int]:
    out = " ".join(text.split())
    # counted as characters dropped; a lone tab turned into a space counts 0
    return out, len(text) - len(out)


# Every identifier pattern matches inside a single whitespace-delimited token
# and treats a neighbouring whitespace char like a string boundary, so the
# identifier rules can run token by token. A token can only match if it holds
# '@', ':', digit-dot-digit or "www.", or is at least 14 chars long (the
# shortest BTC form); the kernel finds those tokens.
_CANDIDATE_MIN_LEN = 14


def _replace(rule: MaskRule, text: str) -> tuple[str, int]:
    if rule.prefilter is not None and not rule.prefilter(text):
        return text, 0
    if rule.name != EMAIL:
        return rule.pattern.subn(rule.token, text)
    hits = 0

    def repl(m):
        nonlocal hits
        if m.group("userinfo") is not None:
            return m.group(0)
        hits += 1
        return EMAIL

    return rule.pattern.sub(repl, text), hits


def _mask_tokens(text: str, replacers: list[MaskRule], counts: dict, totals: list) -> str:
    parts = []
    last = 0
    for start, end in kernels.candidate_spans(text, _CANDIDATE_MIN_LEN):
        tok = text[start:end]
        hit = False
        for rule in replacers:
            tok, n = _replace(rule, tok)
            if n:
                hit = True
                counts[rule.name] += n
                totals[0] += n
                totals[1] += n * rule.inflation_per_match
        if hit:
            parts.append(text[last:start])
            parts.append(tok)
            last = end
    if not parts:
        return text
    parts.append(text[last:])
    return "".join(parts)


def apply_masks(text: str, rules: MaskRuleSet = DEFAULT_RULES) -> tuple[str, MaskReport]:
    """Mask identifiers in ``text`` and clean it up per ``rules``.

    Returns the masked text and a report with per-rule replacement counts.
    Pure and deterministic; never raises on any string input.
    """
    counts = {r.name: 0 for r in rules}
    replacers = [r for r in rules if r.action == REPLACE]
    do_remove = any(r.action == REMOVE for r in rules)
    do_ws = any(r.action == TRUNCATE for r in rules)
    removed = 0
    bytes_before = len(text.encode("utf-8"))
    # [replacements in this sweep, inflation bound]
    totals = [0, 0]

    while True:
        totals[0] = 0
        if replacers:
            text = _mask_tokens(text, replacers, counts, totals)
        if do_remove:
            text, n = remove_uncommon_chars(text)
            removed += n
            counts[UNCOMMON_CHARS] += n
            totals[0] += n
        if do_ws:
            # never creates a new match, so it does not force another sweep
            text, n = _truncate_whitespace(text)
            counts[WHITESPACE] += n
        if not totals[0]:
            break
    report = MaskReport(counts, removed, bytes_before, len(text.encode("utf-8")), totals[1])
    return text, report
