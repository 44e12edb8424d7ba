"""End-to-end orchestration: ingest -> language gate -> density filter ->
mask (preprocessed only) -> dedup -> balance -> emit."""

from __future__ import annotations

import dataclasses
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import __version__
from .balance import DEFAULT_CAP_BYTES, DEFAULT_FALLBACK, balance, classify_all, make_classifier
from .density import DensityFilter, DensityThresholds, derive_thresholds
from .emit import (CASED, PREPROCESSED, RAW, SEPARATOR, UNCASED, CorpusWriter, StageRecord,
                   canonical_json, write_manifest)
from .ingest import LanguageGate, LanguagePolicy, PageRecord, ReadStats, load_pages, write_pages
from .masking import MaskReport, MaskRuleSet, apply_masks
from .minhash import Deduplicator
from .parallel import ordered_map
from .stats import (CategoryDistribution, CharCountAccumulator, EmptyCorpusError, WordLengthAccumulator,
                    reduction_report)

log = logging.getLogger(__name__)

CORPUS_FILE = "corpus.txt"
MANIFEST_FILE = "manifest.json"
STATS_FILE = "stats.json"
PAGES_FILE = "pages.jsonl"
STATUS_FILE = "STATUS"


class StageError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    input: str = ""
    output_dir: str = "out"
    variant: str = PREPROCESSED
    case: str = CASED
    separator: str = SEPARATOR
    # language gate
    lang_mode: str = "trust_label"
    accept_language: str = "en"
    heuristic_threshold: float = 0.40
    # density filter
    min_chars: int = 500
    max_chars: int = 10_000
    derive_thresholds: bool = False
    # masking; None means every rule
    mask_rules: list[str] | None = None
    # dedup
    shingle_n: int = 3
    num_perms: int = 128
    minhash_seed: int = 1
    near_dup_threshold: float | None = None
    # balance
    classifier: str = "label"
    lexicon: str | None = None
    fallback_category: str = DEFAULT_FALLBACK
    cap_bytes: int = DEFAULT_CAP_BYTES
    balance_seed: int = 0
    # emit
    shuffle_seed: int | None = None
    write_pages: bool = True
    # stage toggles
    enable_language_gate: bool = True
    enable_density_filter: bool = True
    enable_mask: bool = True
    enable_dedup: bool = True
    enable_balance: bool = True
    workers: int = 1

    def validate(self) -> None:
        if self.variant not in (RAW, PREPROCESSED):
            raise ValueError(f"variant must be raw or preprocessed, got {self.variant!r}")
        if self.case not in (CASED, UNCASED):
            raise ValueError(f"case must be cased or uncased, got {self.case!r}")
        if not self.input:
            raise ValueError("no input path configured")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.near_dup_threshold is not None and not 0.0 < self.near_dup_threshold <= 1.0:
            raise ValueError("near_dup_threshold must be in (0, 1]")
        if self.cap_bytes < 1 or self.shingle_n < 1 or self.num_perms < 1:
            raise ValueError("cap_bytes, shingle_n and num_perms must be positive")
        if not self.derive_thresholds and not 0 <= self.min_chars <= self.max_chars:
            raise ValueError("need 0 <= min_chars <= max_chars")
        LanguagePolicy(self.lang_mode, self.accept_language, self.heuristic_threshold)
        MaskRuleSet(self.mask_rules)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def reproducibility_dict(self) -> dict:
        # everything that determines the outputs; where they land and how
        # many workers produced them do not
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> PipelineConfig:
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]  # a manifest: rerun its embedded config
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_file(cls, path: str | Path) -> PipelineConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class _Tap:
    """Counts pages and text bytes flowing through a generator."""

    def __init__(self):
        self.pages = 0
        self.bytes = 0

    def __call__(self, pages: Iterable[PageRecord]) -> Iterator[PageRecord]:
        for p in pages:
            self.pages += 1
            self.bytes += p.byte_size
            yield p


def _mask_one(args) -> tuple[str, MaskReport]:
    text, rule_names = args
    return apply_masks(text, MaskRuleSet(rule_names))


def mask_pages(pages: Iterable[PageRecord], rules: MaskRuleSet, workers: int = 1,
               totals: list | None = None) -> Iterator[PageRecord]:
    """Mask each page's text in place, attaching its report under ``extra["mask_report"]``."""
    names = tuple(rules.names)
    for page, (masked, report) in ordered_map(_mask_one, pages, workers, arg=lambda p: (p.text, names)):
        page.set_text(masked)
        page.extra["mask_report"] = report.to_dict()
        if totals is not None:
            totals[0] = totals[0].merge(report)
        yield page


def _write_status(out: Path, status: str) -> None:
    (out / STATUS_FILE).write_text(status + "\n", encoding="utf-8")


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every enabled stage and write corpus, manifest, stats and sidecar.

    Returns the manifest document. Any failure leaves ``STATUS`` reading
    ``incomplete`` and raises :class:`StageError`.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_status(out, "incomplete")
    try:
        manifest = _run(config, out)
    except Exception as exc:
        _write_status(out, f"incomplete\nerror: {type(exc).__name__}: {exc}")
        if isinstance(exc, (OSError, EmptyCorpusError)):
            raise
        raise StageError(str(exc)) from exc
    _write_status(out, "complete")
    return manifest


def _run(config: PipelineConfig, out: Path) -> dict:
    stages: list[StageRecord] = []

    # ingest
    read_stats = ReadStats()
    ingest_out = _Tap()

    def drop_html(pages):
        for p in pages:
            p.raw_html = None
            yield p

    stream: Iterator[PageRecord] = ingest_out(drop_html(load_pages(config.input, read_stats)))

    # language gate
    gate = None
    if config.enable_language_gate:
        gate = LanguageGate(LanguagePolicy(config.lang_mode, config.accept_language, config.heuristic_threshold))
        gate_out = _Tap()
        stream = gate_out(gate.filter(stream))

    # density filter (quartiles come from its input)
    quartiles_acc = CharCountAccumulator()

    def observe(pages):
        for p in pages:
            quartiles_acc.add(p.char_count)
            yield p

    stream = observe(stream)
    thresholds = DensityThresholds(config.min_chars, config.max_chars)
    dens = None
    if config.enable_density_filter:
        if config.derive_thresholds:
            materialized = list(stream)
            thresholds = derive_thresholds(quartiles_acc.quartiles())
            stream = iter(materialized)
        dens = DensityFilter(thresholds)
        dens_in, dens_out = _Tap(), _Tap()
        stream = dens_out(dens.filter(dens_in(stream)))

    words = WordLengthAccumulator()

    def observe_words(pages):
        for p in pages:
            words.words.update(p.text.split())
            yield p

    stream = observe_words(stream)

    # mask
    do_mask = config.variant == PREPROCESSED and config.enable_mask
    mask_totals = [MaskReport()]
    rules = MaskRuleSet(config.mask_rules)
    if do_mask:
        mask_in, mask_out = _Tap(), _Tap()
        stream = mask_out(mask_pages(mask_in(stream), rules, config.workers, mask_totals))

    pages = list(stream)
    log.info("ingested %d pages; %d reach dedup", ingest_out.pages, len(pages))

    stages.append(StageRecord("ingest", read_stats.lines, ingest_out.pages, read_stats.source_bytes,
                              ingest_out.bytes, {"input": config.input, "malformed_lines": read_stats.malformed}))
    if gate is not None:
        stages.append(StageRecord(
            "language_gate", ingest_out.pages, gate_out.pages, ingest_out.bytes, gate_out.bytes,
            {"mode": config.lang_mode, "accept_language": config.accept_language,
             "heuristic_threshold": config.heuristic_threshold,
             "dropped": gate.dropped, "unlabeled": gate.unlabeled},
        ))
    if dens is not None:
        stages.append(StageRecord(
            "density_filter", dens_in.pages, dens_out.pages, dens_in.bytes, dens_out.bytes,
            {**thresholds.to_dict(), "derived": config.derive_thresholds,
             "dropped_low": dens.dropped_low, "dropped_high": dens.dropped_high},
        ))
    if do_mask:
        totals = mask_totals[0]
        stages.append(StageRecord(
            "mask", mask_in.pages, mask_out.pages, mask_in.bytes, mask_out.bytes,
            {"rules": rules.names, "counts": dict(sorted(totals.counts.items())),
             "chars_removed": totals.chars_removed},
            bytes_allowance=totals.inflation_bound,
        ))

    # categories are needed for the reduction report even without balancing
    classifier = make_classifier(config.classifier, config.lexicon, config.fallback_category)
    try:
        classify_all(pages, classifier)
    finally:
        classifier.close()
    dist_initial = CategoryDistribution.from_pages(pages)

    # dedup
    if config.enable_dedup:
        dd = Deduplicator(config.shingle_n, config.num_perms, config.minhash_seed,
                          config.near_dup_threshold, config.workers)
        n_in, b_in = len(pages), dist_initial.total_bytes
        pages = list(dd.filter(pages))
        dist_dedup = CategoryDistribution.from_pages(pages)
        stages.append(StageRecord("dedup", n_in, len(pages), b_in, dist_dedup.total_bytes,
                                  {**dd.parameters(), "removed": dd.removed}, seed=config.minhash_seed))
    else:
        dist_dedup = dist_initial

    # balance
    if config.enable_balance:
        n_in, b_in = len(pages), dist_dedup.total_bytes
        pages, _, _ = balance(pages, config.cap_bytes, config.balance_seed)
        dist_final = CategoryDistribution.from_pages(pages)
        stages.append(StageRecord(
            "balance", n_in, len(pages), b_in, dist_final.total_bytes,
            {"cap_bytes": config.cap_bytes, "classifier": config.classifier,
             "fallback_category": config.fallback_category}, seed=config.balance_seed,
        ))
    else:
        dist_final = dist_dedup

    # emit
    if config.shuffle_seed is not None:
        random.Random(config.shuffle_seed).shuffle(pages)
    b_in = sum(p.byte_size for p in pages)
    with open(out / CORPUS_FILE, "w", encoding="utf-8", newline="") as fh:
        writer = CorpusWriter(fh, config.separator, uncased=config.case == UNCASED).write_all(
            p.text for p in pages)
    stages.append(StageRecord(
        "emit", len(pages), writer.pages, b_in, writer.bytes_written,
        {"separator": config.separator, "case": config.case, "variant": config.variant,
         "escaped_separators": writer.escaped, "shuffle_seed": config.shuffle_seed},
        seed=config.shuffle_seed, bytes_allowance=writer.overhead_bytes,
    ))
    if config.write_pages:
        with open(out / PAGES_FILE, "w", encoding="utf-8") as fh:
            write_pages(pages, fh)

    report = reduction_report(dist_initial, dist_dedup, dist_final)
    stats = {
        "char_count_quartiles": quartiles_acc.quartiles().to_dict() if quartiles_acc.counts else None,
        "word_length_histogram": {str(k): v for k, v in words.histogram().items()},
        "reduction_report": report.to_dict(),
    }
    if quartiles_acc.counts:
        try:
            stats["derived_thresholds"] = derive_thresholds(quartiles_acc.quartiles()).to_dict()
        except ValueError as exc:
            stats["derived_thresholds"] = {"error": str(exc)}
    (out / STATS_FILE).write_text(canonical_json(stats), encoding="utf-8")

    return write_manifest(
        stages, out / MANIFEST_FILE,
        tool=f"darkcorpus {__version__}",
        variant={"text": config.variant, "case": config.case},
        config=config.reproducibility_dict(),
        distributions={"initial": dist_initial.to_dict(), "after_dedup": dist_dedup.to_dict(),
                       "final": dist_final.to_dict()},
        reduction_report=report.to_dict(),
    )
