"""Page records, JSONL interchange, HTML text extraction and the language gate."""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass, field
from html.entities import html5
from html.parser import HTMLParser
from pathlib import Path
from typing import IO, Iterable, Iterator

from .masking import normalize_whitespace

log = logging.getLogger(__name__)


@dataclass
class PageRecord:
    """One crawled page.

    ``char_count`` is the length of the whitespace-normalized text, in code
    points. ``extra`` keeps any unrecognised JSONL fields so they survive a
    round trip through a stage.
    """

    id: str
    url: str = ""
    text: str = ""
    raw_html: str | None = None
    lang_label: str | None = None
    category: str | None = None
    char_count: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.refresh()

    def refresh(self) -> None:
        self.char_count = len(normalize_whitespace(self.text))

    def set_text(self, text: str) -> None:
        self.text = text
        self.refresh()

    @property
    def byte_size(self) -> int:
        return len(self.text.encode("utf-8"))

    def to_json(self) -> dict:
        out = dict(self.extra)
        out.update(id=self.id, url=self.url, text=self.text, char_count=self.char_count)
        if self.lang_label is not None:
            out["lang"] = self.lang_label
        if self.category is not None:
            out["category"] = self.category
        return out


_KNOWN_FIELDS = {"id", "url", "html", "text", "lang", "category", "char_count"}


def record_from_json(obj: dict, index: int) -> PageRecord:
    """Build a record from one decoded JSONL object; extracts HTML if needed."""
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    rid = obj.get("id")
    rid = str(index) if rid is None else str(rid)
    html = obj.get("html")
    text = obj.get("text")
    if text is not None and html is not None:
        log.warning("record %s has both html and text; using text", rid)
        html = None
    if text is None:
        if html is not None:
            title, body = extract_text(str(html))
            text = f"{title} {body}".strip()
        else:
            text = ""
    return PageRecord(
        id=rid,
        url=str(obj.get("url") or ""),
        text=str(text),
        raw_html=None if html is None else str(html),
        lang_label=obj.get("lang"),
        category=obj.get("category"),
        extra={k: v for k, v in obj.items() if k not in _KNOWN_FIELDS},
    )


@dataclass
class ReadStats:
    lines: int = 0
    malformed: int = 0
    source_bytes: int = 0


def read_pages(fh: IO[str], name: str = "<stream>", stats: ReadStats | None = None) -> Iterator[PageRecord]:
    """Parse JSONL records from an open text stream (see :func:`load_pages`)."""
    seen: set[str] = set()
    stats = stats if stats is not None else ReadStats()
    for index, line in enumerate(fh):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            rec = record_from_json(json.loads(line), index)
        except (ValueError, TypeError) as exc:
            stats.malformed += 1
            log.warning("%s: line %d: skipped malformed record (%s)", name, index + 1, exc)
            continue
        src = rec.raw_html if rec.raw_html is not None else rec.text
        stats.source_bytes += len(src.encode("utf-8"))
        if rec.id in seen:
            new_id = f"{rec.id}#{index}"
            log.warning("%s: line %d: duplicate id %r renamed to %r", name, index + 1, rec.id, new_id)
            rec.id = new_id
        seen.add(rec.id)
        yield rec


def load_pages(path: str | Path, stats: ReadStats | None = None) -> Iterator[PageRecord]:
    """Stream records from a JSONL file in file order.

    Malformed lines are logged with their 1-based line number and skipped.
    An unreadable file raises ``OSError`` before the first record is yielded.
    """
    fh = open(path, encoding="utf-8")

    def gen():
        with fh:
            yield from read_pages(fh, str(path), stats)

    return gen()


def write_pages(pages: Iterable[PageRecord], fh: IO[str]) -> int:
    n = 0
    for rec in pages:
        fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")
        n += 1
    return n


# ------------------------------------------------------------ HTML extraction

_SKIP_TAGS = {"script", "style"}
_TAG_RE = re.compile(r"<!--.*?(?:-->|$)|<(script|style)\b.*?(?:</\1\s*>|$)|<[^>]*>?", re.S | re.I)


def _decode_named(name: str, literal: str) -> str:
    value = html5.get(name + ";")
    if value is None or any(c > "\xff" for c in value):
        return literal
    return value


def _decode_codepoint(cp: int, literal: str) -> str:
    # only Latin-1 targets are decoded; anything above would be stripped by
    # masking anyway, so the reference stays literal
    if 0 < cp <= 0xFF:
        return chr(cp)
    return literal


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=False)
        self.title: list[str] = []
        self.body: list[str] = []
        self.skip = 0
        self.in_title = False
        self.in_head = False

    def _sink(self):
        if self.skip:
            return None
        if self.in_title:
            return self.title
        if self.in_head:
            return None
        return self.body

    def _emit(self, s: str):
        sink = self._sink()
        if sink is not None:
            sink.append(s)

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self.skip += 1
        elif tag == "title":
            self.in_title = True
        elif tag == "head":
            self.in_head = True
        elif tag == "body":
            self.in_head = False
        self._emit(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self.skip = max(0, self.skip - 1)
        elif tag == "title":
            self.in_title = False
        elif tag == "head":
            self.in_head = False
        self._emit(" ")

    def handle_startendtag(self, tag, attrs):
        self._emit(" ")

    def handle_data(self, data):
        self._emit(data)

    def handle_entityref(self, name):
        self._emit(_decode_named(name, f"&{name};"))

    def handle_charref(self, name):
        literal = f"&#{name};"
        try:
            cp = int(name[1:], 16) if name[:1] in "xX" else int(name)
        except ValueError:
            self._emit(literal)
            return
        self._emit(_decode_codepoint(cp, literal))


def _decode_entities(text: str) -> str:
    def repl(m):
        ent = m.group(1)
        if ent.startswith("#"):
            try:
                cp = int(ent[2:], 16) if ent[1:2] in "xX" else int(ent[1:])
            except ValueError:
                return m.group(0)
            return _decode_codepoint(cp, m.group(0))
        return _decode_named(ent, m.group(0))

    return re.sub(r"&(#[xX]?[0-9A-Fa-f]+|[A-Za-z][A-Za-z0-9]*);", repl, text)


def _strip_tags(raw_html: str) -> tuple[str, str]:
    title_m = re.search(r"<title[^>]*>(.*?)</title\s*>", raw_html, re.S | re.I)
    title = title_m.group(1) if title_m else ""
    body = raw_html
    if title_m:
        body = raw_html[: title_m.start()] + " " + raw_html[title_m.end():]
    body = _TAG_RE.sub(" ", body)
    title = _TAG_RE.sub(" ", title)
    return normalize_whitespace(_decode_entities(title)), normalize_whitespace(_decode_entities(body))


def extract_text(raw_html: str) -> tuple[str, str]:
    """Return ``(title, body)`` plain text from possibly malformed HTML.

    Script, style and comment content is dropped, each tag becomes a single
    space, and both parts are whitespace-normalized.
    """
    if not raw_html:
        return "", ""
    parser = _TextExtractor()
    try:
        parser.feed(raw_html)
        parser.close()
    except Exception:  # noqa: BLE001 - any parser failure degrades to tag stripping
        log.debug("HTML parser failed; falling back to tag stripping", exc_info=True)
        return _strip_tags(raw_html)
    return normalize_whitespace("".join(parser.title)), normalize_whitespace("".join(parser.body))


# ------------------------------------------------------------ language gate

TRUST_LABEL = "trust_label"
HEURISTIC = "heuristic"
ACCEPT_ALL = "accept_all"

# 150 high-frequency English function words
ENGLISH_STOPWORDS = frozenset("""
a about above after again against all also am an and any are as at be because been before being
below between both but by can could did do does doing down during each even few for from further
get got had has have having he her here hers herself him himself his how i if in into is it its
itself just like many may me might more most much must my myself never no nor not now of off on
once one only or other our ours ourselves out over own same shall she should so some such than
that the their theirs them themselves then there these they this those through to too under until
up upon us very was we well were what when where which while who whom why will with within without
would yet you your yours yourself yourselves across among around since though
""".split())

_PUNCT = string.punctuation + "«»¿¡"


@dataclass(frozen=True)
class LanguagePolicy:
    mode: str = TRUST_LABEL
    accept_language: str = "en"
    heuristic_threshold: float = 0.40

    def __post_init__(self):
        if self.mode not in (TRUST_LABEL, HEURISTIC, ACCEPT_ALL):
            raise ValueError(f"unknown language mode {self.mode!r}")
        if not 0.0 <= self.heuristic_threshold <= 1.0:
            raise ValueError("heuristic_threshold must lie in [0, 1]")


def english_scores(text: str) -> tuple[float, float]:
    """Fraction of Latin-1 characters and fraction of stopword tokens."""
    if not text:
        return 0.0, 0.0
    latin = sum(1 for c in text if c <= "\xff") / len(text)
    tokens = [t.strip(_PUNCT) for t in text.lower().split()]
    tokens = [t for t in tokens if t]
    if not tokens:
        return latin, 0.0
    return latin, sum(t in ENGLISH_STOPWORDS for t in tokens) / len(tokens)


class LanguageGate:
    """Applies a :class:`LanguagePolicy` and tallies what it drops."""

    def __init__(self, policy: LanguagePolicy):
        self.policy = policy
        self.kept = 0
        self.dropped = 0
        self.unlabeled = 0

    def keep(self, record: PageRecord) -> bool:
        ok = language_gate(record, self.policy)
        if ok:
            self.kept += 1
        elif self.policy.mode == TRUST_LABEL and not record.lang_label:
            self.unlabeled += 1
        else:
            self.dropped += 1
        return ok

    def filter(self, pages: Iterable[PageRecord]) -> Iterator[PageRecord]:
        return (p for p in pages if self.keep(p))


def language_gate(record: PageRecord, policy: LanguagePolicy) -> bool:
    if policy.mode == ACCEPT_ALL:
        return True
    if policy.mode == TRUST_LABEL:
        return bool(record.lang_label) and record.lang_label == policy.accept_language
    latin, stop = english_scores(record.text)
    return latin >= policy.heuristic_threshold and stop >= policy.heuristic_threshold
