"""Command-line interface: the full pipeline plus one subcommand per stage.

Stage subcommands read and write JSONL page records (stdin/stdout by
default) so they can be chained with pipes. Exit codes: 0 success, 1 usage,
2 input error, 3 stage failure. ``DARKCORPUS_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import __version__
from .balance import DEFAULT_FALLBACK, balance, classify_all, make_classifier
from .density import DensityFilter, DensityThresholds, derive_thresholds
from .emit import (CASED, PREPROCESSED, RAW, SEPARATOR, UNCASED, CorpusWriter, StageRecord, canonical_json,
                   write_manifest)
from .folds import repeated_kfold, stratified_kfold
from .ingest import LanguageGate, LanguagePolicy, ReadStats, read_pages, write_pages
from .masking import RULE_ORDER, MaskReport, MaskRuleSet
from .minhash import Deduplicator
from .pipeline import PipelineConfig, StageError, mask_pages, run_pipeline
from .stats import (CategoryDistribution, CharCountAccumulator, EmptyCorpusError, WordLengthAccumulator,
                    reduction_report)

log = logging.getLogger("darkcorpus")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_STAGE = 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- io helpers

@contextlib.contextmanager
def _open_in(path: str | None):
    if path in (None, "-"):
        yield sys.stdin
        return
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        yield fh


@contextlib.contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _pages(args, stats: ReadStats | None = None):
    with _open_in(args.input) as fh:
        yield from read_pages(fh, args.input or "<stdin>", stats)


def _rules(value: str) -> list[str]:
    names = [n.strip() for n in value.split(",") if n.strip()]
    unknown = [n for n in names if n not in RULE_ORDER]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown rule(s) {', '.join(unknown)}; known: {', '.join(RULE_ORDER)}")
    return names


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _seed(value: str) -> int:
    n = int(value, 0)
    if not 0 <= n < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {value}")
    return n


def _io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", help="input JSONL (default stdin)")
    p.add_argument("--output", "-o", help="output path (default stdout)")


# ---------------------------------------------------------------- stage arguments

def _add_lang(p, defaults: bool):
    d = PipelineConfig() if defaults else None
    p.add_argument("--lang-mode", choices=["trust_label", "heuristic", "accept_all"],
                   default=d.lang_mode if d else None)
    p.add_argument("--accept-language", default=d.accept_language if d else None)
    p.add_argument("--heuristic-threshold", type=float, default=d.heuristic_threshold if d else None)


def _add_density(p, defaults: bool):
    d = PipelineConfig() if defaults else None
    p.add_argument("--min-chars", type=_positive_int, default=d.min_chars if d else None)
    p.add_argument("--max-chars", type=_positive_int, default=d.max_chars if d else None)
    p.add_argument("--derive-thresholds", action="store_true", default=None if not defaults else False,
                   help="use (Q1/2, 2*Q3) of the input's character counts instead")


def _add_mask(p):
    p.add_argument("--rules", type=_rules, default=None,
                   help="comma-separated rule subset (always applied in canonical order)")


def _add_dedup(p, defaults: bool):
    d = PipelineConfig() if defaults else None
    p.add_argument("--shingle-n", type=_positive_int, default=d.shingle_n if d else None)
    p.add_argument("--num-perms", type=_positive_int, default=d.num_perms if d else None)
    p.add_argument("--minhash-seed", type=_seed, default=d.minhash_seed if d else None)
    p.add_argument("--near-dup-threshold", type=float, default=None,
                   help="also drop pages whose estimated Jaccard to a kept page reaches this value")


def _add_balance(p, defaults: bool):
    d = PipelineConfig() if defaults else None
    p.add_argument("--cap-bytes", type=_positive_int, default=d.cap_bytes if d else None)
    p.add_argument("--balance-seed", type=_seed, default=d.balance_seed if d else None)
    p.add_argument("--classifier", default=d.classifier if d else None, help="label, keyword or exec:<command>")
    p.add_argument("--lexicon", help="JSON map category -> word list for the keyword classifier")
    p.add_argument("--fallback-category", default=d.fallback_category if d else None)


def _add_emit(p, defaults: bool):
    d = PipelineConfig() if defaults else None
    p.add_argument("--variant", choices=[RAW, PREPROCESSED], default=d.variant if d else None)
    p.add_argument("--case", choices=[CASED, UNCASED], default=d.case if d else None)
    p.add_argument("--separator", default=d.separator if d else None)
    p.add_argument("--shuffle-seed", type=_seed, default=None)


# ---------------------------------------------------------------- commands

def cmd_run(args) -> int:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {
        "input": args.input, "output_dir": args.output, "variant": args.variant, "case": args.case,
        "separator": args.separator, "lang_mode": args.lang_mode, "accept_language": args.accept_language,
        "heuristic_threshold": args.heuristic_threshold, "min_chars": args.min_chars,
        "max_chars": args.max_chars, "derive_thresholds": args.derive_thresholds, "mask_rules": args.rules,
        "shingle_n": args.shingle_n, "num_perms": args.num_perms, "minhash_seed": args.minhash_seed,
        "near_dup_threshold": args.near_dup_threshold, "classifier": args.classifier, "lexicon": args.lexicon,
        "fallback_category": args.fallback_category, "cap_bytes": args.cap_bytes,
        "balance_seed": args.balance_seed, "shuffle_seed": args.shuffle_seed, "workers": args.workers,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, value)
    if args.no_pages:
        config.write_pages = False
    for stage in args.disable or ():
        setattr(config, f"enable_{stage}", False)
    if not args.output and not args.config:
        raise UsageError("run needs --output DIR (or a --config naming output_dir)")
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    manifest = run_pipeline(config)
    emit_stage = manifest["stages"][-1]
    log.info("wrote %d pages (%d bytes) to %s", emit_stage["pages_out"], emit_stage["bytes_out"],
             config.output_dir)
    return EXIT_OK


def cmd_ingest(args) -> int:
    stats = ReadStats()
    pages = _pages(args, stats)
    gate = None
    if args.lang_mode:
        gate = LanguageGate(LanguagePolicy(args.lang_mode, args.accept_language or "en",
                                           0.40 if args.heuristic_threshold is None else args.heuristic_threshold))
        pages = gate.filter(pages)
    with _open_out(args.output) as out:
        n = write_pages(pages, out)
    log.info("ingest: %d lines, %d malformed, %d written", stats.lines, stats.malformed, n)
    if gate is not None:
        log.info("language gate: kept %d, dropped %d, unlabeled %d", gate.kept, gate.dropped, gate.unlabeled)
    return EXIT_OK


def cmd_stats(args) -> int:
    quartiles, words = CharCountAccumulator(), WordLengthAccumulator()
    dist = CategoryDistribution()
    for p in _pages(args):
        quartiles.add(p.char_count)
        words.words.update(p.text.split())
        dist.add(p.category or "unlabeled", p.byte_size)
    if not quartiles.counts:
        raise EmptyCorpusError("empty corpus: no pages to summarise")
    q = quartiles.quartiles()
    doc = {
        "char_count_quartiles": q.to_dict(),
        "word_length_histogram": {str(k): v for k, v in words.histogram().items()},
        "category_distribution": dist.to_dict(),
    }
    try:
        doc["derived_thresholds"] = derive_thresholds(q).to_dict()
    except ValueError as exc:
        doc["derived_thresholds"] = {"error": str(exc)}
    if args.after_dedup or args.final:
        after = _distribution(args.after_dedup) if args.after_dedup else dist
        final = _distribution(args.final) if args.final else after
        doc["reduction_report"] = reduction_report(dist, after, final).to_dict()
    with _open_out(args.output) as out:
        out.write(canonical_json(doc))
    return EXIT_OK


def _distribution(path: str) -> CategoryDistribution:
    dist = CategoryDistribution()
    with _open_in(path) as fh:
        for p in read_pages(fh, path):
            dist.add(p.category or "unlabeled", p.byte_size)
    return dist


def cmd_filter(args) -> int:
    pages = _pages(args)
    if args.derive_thresholds:
        pages = list(pages)
        if not pages:
            raise EmptyCorpusError("empty corpus: cannot derive thresholds")
        thresholds = derive_thresholds(CharCountAccumulator().update(pages).quartiles())
        log.info("derived thresholds %d..%d", thresholds.min_chars, thresholds.max_chars)
    else:
        thresholds = DensityThresholds(args.min_chars or 500, args.max_chars or 10_000)
    dens = DensityFilter(thresholds)
    with _open_out(args.output) as out:
        write_pages(dens.filter(pages), out)
    log.info("density filter: kept %d, dropped_low %d, dropped_high %d", dens.kept, dens.dropped_low,
             dens.dropped_high)
    return EXIT_OK


def cmd_mask(args) -> int:
    totals = [MaskReport()]
    with _open_out(args.output) as out:
        write_pages(mask_pages(_pages(args), MaskRuleSet(args.rules), args.workers, totals), out)
    log.info("mask: %s", json.dumps(totals[0].to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_dedup(args) -> int:
    d = PipelineConfig()
    dd = Deduplicator(args.shingle_n or d.shingle_n, args.num_perms or d.num_perms,
                      d.minhash_seed if args.minhash_seed is None else args.minhash_seed,
                      args.near_dup_threshold, args.workers)
    with _open_out(args.output) as out:
        write_pages(dd.filter(_pages(args)), out)
    log.info("dedup: kept %d, removed %d", dd.kept, dd.removed)
    return EXIT_OK


def cmd_balance(args) -> int:
    d = PipelineConfig()
    classifier = make_classifier(args.classifier or d.classifier, args.lexicon,
                                 args.fallback_category or d.fallback_category)
    try:
        pages = classify_all(_pages(args), classifier)
    finally:
        classifier.close()
    kept, before, after = balance(pages, args.cap_bytes or d.cap_bytes,
                                  d.balance_seed if args.balance_seed is None else args.balance_seed)
    with _open_out(args.output) as out:
        write_pages(kept, out)
    log.info("balance: kept %d of %d pages, %d of %d bytes", len(kept), len(pages), after.total_bytes,
             before.total_bytes)
    return EXIT_OK


def cmd_emit(args) -> int:
    pages = list(_pages(args))
    if args.shuffle_seed is not None:
        random.Random(args.shuffle_seed).shuffle(pages)
    b_in = sum(p.byte_size for p in pages)
    separator = SEPARATOR if args.separator is None else args.separator
    case = args.case or CASED
    with _open_out(args.output) as out:
        writer = CorpusWriter(out, separator, uncased=case == UNCASED).write_all(p.text for p in pages)
    if writer.escaped:
        log.warning("escaped the separator inside %d page(s)", writer.escaped)
    if args.manifest:
        stage = StageRecord(
            "emit", len(pages), writer.pages, b_in, writer.bytes_written,
            {"separator": separator, "case": case, "variant": args.variant or PREPROCESSED,
             "escaped_separators": writer.escaped, "shuffle_seed": args.shuffle_seed},
            seed=args.shuffle_seed, bytes_allowance=writer.overhead_bytes,
        )
        write_manifest([stage], args.manifest, tool=f"darkcorpus {__version__}",
                       variant={"text": args.variant or PREPROCESSED, "case": case})
    return EXIT_OK


def cmd_folds(args) -> int:
    ids, labels = [], []
    for p in _pages(args):
        rec = p.to_json()
        if args.label_field not in rec:
            raise InputError(f"record {p.id} lacks the label field {args.label_field!r}")
        ids.append(p.id)
        labels.append(json.dumps(rec[args.label_field], sort_keys=True))
    try:
        if args.repetitions is None:
            assignments = [stratified_kfold(labels, args.k, args.seed)]
        else:
            assignments = repeated_kfold(labels, args.k, args.repetitions, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {
        "ids": ids, "k": args.k, "seed": args.seed, "repetitions": args.repetitions,
        "assignments": [a.to_dict() for a in assignments],
    }
    with _open_out(args.output) as out:
        out.write(canonical_json(doc))
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import SyntheticCrawl

    if args.pages is None and args.bytes is None:
        raise UsageError("synth needs --pages or --bytes")
    with _open_out(args.output) as out:
        for rec in SyntheticCrawl(args.seed).pages(args.pages, args.bytes):
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="darkcorpus", description="Curate crawled web pages into a pretraining corpus.")
    parser.add_argument("--version", action="version", version=f"darkcorpus {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=_positive_int, default=1, help="worker processes for per-page stages")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", parents=[common], help="run the whole pipeline")
    p.add_argument("--config", help="JSON config file (a previous manifest works too)")
    p.add_argument("--input", "-i", help="input JSONL")
    p.add_argument("--output", "-o", help="output directory")
    _add_lang(p, defaults=False)
    _add_density(p, defaults=False)
    _add_mask(p)
    _add_dedup(p, defaults=False)
    _add_balance(p, defaults=False)
    _add_emit(p, defaults=False)
    p.add_argument("--disable", action="append",
                   choices=["language_gate", "density_filter", "mask", "dedup", "balance"],
                   help="skip a stage (repeatable)")
    p.add_argument("--no-pages", action="store_true", help="do not write the pages.jsonl sidecar")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ingest", parents=[common], help="normalise raw records, optionally apply the language gate")
    _io_args(p)
    p.add_argument("--lang-mode", choices=["trust_label", "heuristic", "accept_all"])
    p.add_argument("--accept-language")
    p.add_argument("--heuristic-threshold", type=float)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[common], help="character quartiles, word lengths, reduction report")
    _io_args(p)
    p.add_argument("--after-dedup", help="JSONL of the same corpus after dedup, for the reduction report")
    p.add_argument("--final", help="JSONL of the final corpus, for the reduction report")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("filter", parents=[common], help="drop pages outside the character-count window")
    _io_args(p)
    _add_density(p, defaults=False)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("mask", parents=[common], help="mask identifiers and clean text")
    _io_args(p)
    _add_mask(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("dedup", parents=[common], help="drop pages with a repeated MinHash signature")
    _io_args(p)
    _add_dedup(p, defaults=False)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("balance", parents=[common], help="classify pages and down-sample large categories")
    _io_args(p)
    _add_balance(p, defaults=False)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("emit", parents=[common], help="join page texts into the corpus file")
    _io_args(p)
    _add_emit(p, defaults=False)
    p.add_argument("--manifest", help="also write an emit-stage manifest here")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("folds", parents=[common], help="stratified (repeated) k-fold assignments")
    _io_args(p)
    p.add_argument("--label-field", default="label")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--repetitions", type=_positive_int)
    p.set_defaults(func=cmd_folds)

    p = sub.add_parser("synth", help="write a synthetic crawl for testing")
    p.add_argument("--output", "-o")
    p.add_argument("--pages", type=_positive_int)
    p.add_argument("--bytes", type=_positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("DARKCORPUS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"darkcorpus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, EmptyCorpusError, FileNotFoundError, IsADirectoryError, PermissionError,
            UnicodeDecodeError, json.JSONDecodeError) as exc:
        print(f"darkcorpus: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StageError, Exception) as exc:
        if isinstance(exc, StageError) and isinstance(exc.__cause__, ValueError):
            msg = f"{type(exc.__cause__).__name__}: {exc}"
        else:
            msg = f"{type(exc).__name__}: {exc}"
        print(f"darkcorpus: stage failed: {msg}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
