import json

import pytest

from darkcorpus.emit import PIPELINE_STAGES, SEPARATOR
from darkcorpus.pipeline import (CORPUS_FILE, MANIFEST_FILE, PAGES_FILE, STATS_FILE, STATUS_FILE, PipelineConfig,
                                 StageError, run_pipeline)
from darkcorpus.stats import format_pct
from darkcorpus.synth import write_synthetic
from fractions import Fraction


@pytest.fixture(scope="module")
def crawl(tmp_path_factory):
    path = tmp_path_factory.mktemp("crawl") / "crawl.jsonl"
    write_synthetic(path, n_pages=400, seed=11)
    return str(path)


def _run(crawl, out, **kw):
    kw.setdefault("cap_bytes", 60_000)
    return run_pipeline(PipelineConfig(input=crawl, output_dir=str(out), **kw))


def test_ten_pages_seven_stages(tmp_path):
    src = tmp_path / "ten.jsonl"
    write_synthetic(src, n_pages=10, seed=2)
    m = run_pipeline(PipelineConfig(input=str(src), output_dir=str(tmp_path / "o"), lang_mode="accept_all",
                                    min_chars=1))
    assert [s["stage"] for s in m["stages"]] == list(PIPELINE_STAGES)
    for name in (CORPUS_FILE, MANIFEST_FILE, STATS_FILE, PAGES_FILE):
        assert (tmp_path / "o" / name).exists()
    assert (tmp_path / "o" / STATUS_FILE).read_text() == "complete\n"


def test_deterministic(crawl, tmp_path):
    _run(crawl, tmp_path / "a")
    _run(crawl, tmp_path / "b")
    for name in (CORPUS_FILE, MANIFEST_FILE, STATS_FILE, PAGES_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_reproduces_run(crawl, tmp_path):
    _run(crawl, tmp_path / "a", balance_seed=5, shuffle_seed=3)
    config = PipelineConfig.from_file(tmp_path / "a" / MANIFEST_FILE)
    config.output_dir = str(tmp_path / "b")
    run_pipeline(config)
    for name in (CORPUS_FILE, MANIFEST_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_no_balance_identity(crawl, tmp_path):
    m = _run(crawl, tmp_path / "o", enable_balance=False)
    assert "balance" not in [s["stage"] for s in m["stages"]]
    rows = m["reduction_report"]["categories"]
    assert rows
    for row in rows.values():
        assert row["dedup_rate_pct"] == row["total_reduction_rate_pct"]
        assert row["bytes_after_dedup"] == row["bytes_final"]


def test_balance_applies_cap(crawl, tmp_path):
    m = _run(crawl, tmp_path / "o", cap_bytes=30_000)
    final = m["distributions"]["final"]
    assert all(v["byte_size"] <= 30_000 for v in final.values())
    for name, row in m["reduction_report"]["categories"].items():
        dedup = Fraction(row["bytes_initial"] - row["bytes_after_dedup"], row["bytes_initial"])
        assert row["dedup_rate_pct"] == format_pct(dedup)


def test_corpus_matches_sidecar(crawl, tmp_path):
    _run(crawl, tmp_path / "o")
    pages = [json.loads(line) for line in (tmp_path / "o" / PAGES_FILE).read_text().splitlines()]
    corpus = (tmp_path / "o" / CORPUS_FILE).read_text()
    assert corpus.split(SEPARATOR) == [p["text"] for p in pages]
    assert all("mask_report" in p for p in pages)


def test_stage_monotonicity(crawl, tmp_path):
    m = _run(crawl, tmp_path / "o")
    for s in m["stages"]:
        assert s["pages_out"] <= s["pages_in"]
        assert s["bytes_out"] <= s["bytes_in"] + s["bytes_allowance"]


def test_raw_variant_skips_mask(crawl, tmp_path):
    m = _run(crawl, tmp_path / "raw", variant="raw")
    assert "mask" not in [s["stage"] for s in m["stages"]]


def test_preprocessed_not_larger_than_raw_plus_inflation(crawl, tmp_path):
    kw = dict(enable_dedup=False, enable_balance=False)
    raw = _run(crawl, tmp_path / "raw", variant="raw", **kw)
    pre = _run(crawl, tmp_path / "pre", **kw)
    inflation = next(s for s in pre["stages"] if s["stage"] == "mask")["bytes_allowance"]
    raw_bytes = (tmp_path / "raw" / CORPUS_FILE).stat().st_size
    pre_bytes = (tmp_path / "pre" / CORPUS_FILE).stat().st_size
    assert pre_bytes <= raw_bytes + inflation
    assert raw["stages"][-1]["pages_out"] == pre["stages"][-1]["pages_out"]


def test_uncased(crawl, tmp_path):
    _run(crawl, tmp_path / "u", case="uncased")
    corpus = (tmp_path / "u" / CORPUS_FILE).read_text()
    assert corpus == corpus.lower()
    assert "id_email" in corpus and "ID_EMAIL" not in corpus


def test_preprocessed_postconditions(crawl, tmp_path):
    _run(crawl, tmp_path / "o")
    corpus = (tmp_path / "o" / CORPUS_FILE).read_text()
    assert all(ord(c) <= 0xFF for c in corpus)
    for page in corpus.split(SEPARATOR):
        assert "  " not in page and page == page.strip()


def test_derived_thresholds(crawl, tmp_path):
    m = _run(crawl, tmp_path / "o", derive_thresholds=True)
    stats = json.loads((tmp_path / "o" / STATS_FILE).read_text())
    dens = next(s for s in m["stages"] if s["stage"] == "density_filter")
    assert dens["parameters"]["min_chars"] == stats["derived_thresholds"]["min_chars"]
    assert dens["parameters"]["derived"] is True


def test_workers_do_not_change_output(crawl, tmp_path):
    _run(crawl, tmp_path / "one")
    _run(crawl, tmp_path / "two", workers=2)
    for name in (CORPUS_FILE, MANIFEST_FILE):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_failure_marks_incomplete(crawl, tmp_path):
    with pytest.raises(StageError):
        _run(crawl, tmp_path / "o", classifier="exec:false")
    assert (tmp_path / "o" / STATUS_FILE).read_text().startswith("incomplete")


def test_missing_input(tmp_path):
    with pytest.raises(OSError):
        _run(str(tmp_path / "nope.jsonl"), tmp_path / "o")


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(input="x", variant="tokenized").validate()
    with pytest.raises(ValueError):
        PipelineConfig.from_dict({"input": "x", "bogus": 1})
