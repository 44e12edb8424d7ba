"""Corpus assembly (separator joining, case variants) and the run manifest."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

log = logging.getLogger(__name__)

SEPARATOR = "</s>"
RAW = "raw"
PREPROCESSED = "preprocessed"
CASED = "cased"
UNCASED = "uncased"

PIPELINE_STAGES = ("ingest", "language_gate", "density_filter", "mask", "dedup", "balance", "emit")


def case_fold(text: str) -> str:
    """Simple (one-to-one) Unicode lowercase.

    ``str.lower`` applies the full mappings; the two places where they differ
    from the simple ones are pre-mapped: U+0130 and final sigma.
    """
    if text.isascii():
        return text.lower()
    return text.replace("İ", "i").replace("Σ", "σ").lower()


def escape_separator(text: str, separator: str = SEPARATOR) -> tuple[str, bool]:
    """Break up a literal separator inside a page by inserting a space after its first char."""
    if separator and separator in text:
        return text.replace(separator, separator[0] + " " + separator[1:]), True
    return text, False


class CorpusWriter:
    """Sequential writer placing the separator between pages, never trailing."""

    def __init__(self, fh: IO[str], separator: str = SEPARATOR, uncased: bool = False):
        self.fh = fh
        self.separator = separator
        self.uncased = uncased
        self.pages = 0
        self.escaped = 0
        self.bytes_written = 0
        # bytes added beyond the page texts themselves: separators, escapes,
        # and any growth from lowercasing
        self.overhead_bytes = 0

    def write(self, text: str) -> None:
        size_in = len(text.encode("utf-8"))
        if self.uncased:
            text = case_fold(text)
        text, hit = escape_separator(text, self.separator)
        self.escaped += hit
        chunk = text if self.pages == 0 else self.separator + text
        self.fh.write(chunk)
        nbytes = len(chunk.encode("utf-8"))
        self.bytes_written += nbytes
        self.overhead_bytes += max(0, nbytes - size_in)
        self.pages += 1

    def write_all(self, texts: Iterable[str]) -> CorpusWriter:
        for t in texts:
            self.write(t)
        if self.pages == 0:
            log.warning("emitting an empty corpus")
        return self


def emit_corpus(pages: Iterable, separator: str = SEPARATOR) -> str:
    """Join page texts (records or strings) with ``separator`` between them."""
    import io

    buf = io.StringIO()
    CorpusWriter(buf, separator).write_all(p if isinstance(p, str) else p.text for p in pages)
    return buf.getvalue()


# ---------------------------------------------------------------- manifest

class ManifestError(ValueError):
    pass


@dataclass
class StageRecord:
    stage: str
    pages_in: int
    pages_out: int
    bytes_in: int
    bytes_out: int
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    # bytes a stage may legitimately add (separators, mask-token inflation)
    bytes_allowance: int = 0

    def validate(self) -> None:
        if self.pages_out > self.pages_in:
            raise ManifestError(f"stage {self.stage}: pages_out {self.pages_out} > pages_in {self.pages_in}")
        if self.bytes_out > self.bytes_in + self.bytes_allowance:
            raise ManifestError(
                f"stage {self.stage}: bytes_out {self.bytes_out} exceeds bytes_in {self.bytes_in}"
                f" + allowance {self.bytes_allowance}"
            )

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "pages_in": self.pages_in,
            "pages_out": self.pages_out,
            "bytes_in": self.bytes_in,
            "bytes_out": self.bytes_out,
            "bytes_allowance": self.bytes_allowance,
            "parameters": self.parameters,
            "seed": self.seed,
        }


def validate_stage_order(stages: list[StageRecord]) -> None:
    positions = []
    for s in stages:
        if s.stage not in PIPELINE_STAGES:
            raise ManifestError(f"unknown stage {s.stage!r}")
        positions.append(PIPELINE_STAGES.index(s.stage))
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        raise ManifestError(f"stages out of pipeline order: {[s.stage for s in stages]}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_manifest(stages: list[StageRecord], path: str | Path, **extra) -> dict:
    """Validate ``stages`` and write the manifest as canonical JSON.

    Extra keyword arguments become top-level manifest fields.
    """
    for s in stages:
        s.validate()
    validate_stage_order(stages)
    doc = dict(extra)
    doc["stages"] = [s.to_dict() for s in stages]
    Path(path).write_text(canonical_json(doc), encoding="utf-8")
    return doc
