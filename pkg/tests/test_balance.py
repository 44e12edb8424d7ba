import json
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darkcorpus.balance import (CATEGORIES, DEFAULT_FALLBACK, ExecClassifier, KeywordClassifier, balance,
                                canonical_category, classify_all, keyword_classify, load_lexicon, make_classifier)
from darkcorpus.ingest import PageRecord

LEXICON = {
    "Cryptocurrency": ["bitcoin", "wallet", "monero", "exchange"],
    "Drugs": ["pills", "grams"],
    "Arms/Weapons": ["rifle", "ammo"],
    "Financial": ["bank"],
}


def _p(text="", cat=None, i=0):
    return PageRecord(str(i), text=text, category=cat)


def test_category_set():
    assert len(CATEGORIES) == 9 and "Others" not in CATEGORIES


def test_canonical_names():
    assert canonical_category("arms / weapons") == "Arms/Weapons"
    assert canonical_category("HACKING") == "Hacking"
    assert canonical_category("Others") is None
    assert canonical_category(None) is None


def test_keyword_hand_count():
    assert keyword_classify(_p("bitcoin wallet monero exchange"), LEXICON) == "Cryptocurrency"
    # Drugs 2 hits vs Cryptocurrency 1
    assert keyword_classify(_p("Pills, GRAMS and a wallet."), LEXICON) == "Drugs"


def test_keyword_fallback_and_tie():
    assert keyword_classify(_p(""), LEXICON) == DEFAULT_FALLBACK
    assert keyword_classify(_p(""), LEXICON, "Gambling") == "Gambling"
    assert keyword_classify(_p("pills rifle"), LEXICON) == "Arms/Weapons"


def test_keyword_token_boundaries():
    assert keyword_classify(_p("bankruptcy banks"), LEXICON) == DEFAULT_FALLBACK
    assert keyword_classify(_p("riflescope"), {"Arms/Weapons": ["rifle"], "Drugs": ["x"]}, "Drugs") == "Drugs"


def test_keyword_multiword_terms():
    lex = {"Financial": ["western union"], "Drugs": ["union jack"]}
    assert keyword_classify(_p("Western Union, western union; union"), lex) == "Financial"


def test_empty_lexicon():
    with pytest.raises(ValueError):
        keyword_classify(_p("x"), {})


def test_load_lexicon(tmp_path):
    path = tmp_path / "lex.json"
    path.write_text(json.dumps({"crypto": ["btc"], "Drugs": ["weed"]}))
    assert load_lexicon(path) == {"Cryptocurrency": ["btc"], "Drugs": ["weed"]}
    path.write_text(json.dumps({"Others": ["x"]}))
    with pytest.raises(ValueError):
        load_lexicon(path)


def test_label_classifier_fallback():
    clf = make_classifier("label")
    pages = classify_all([_p(cat="drugs"), _p(cat=None), _p(cat="Weird")], clf)
    assert [p.category for p in pages] == ["Drugs", DEFAULT_FALLBACK, DEFAULT_FALLBACK]
    clf.close()


def test_keyword_classifier_default_lexicon():
    assert KeywordClassifier()(_p("cheap cocaine and heroin")) == "Drugs"


def test_exec_classifier(tmp_path):
    script = tmp_path / "clf.py"
    script.write_text(
        "import json, sys\n"
        "for line in sys.stdin:\n"
        "    req = json.loads(line)\n"
        "    cat = 'Hacking' if 'exploit' in req['text'] else 'electronics'\n"
        "    print(json.dumps({'category': cat}), flush=True)\n"
    )
    clf = make_classifier(f"exec:{sys.executable} {script}")
    assert isinstance(clf, ExecClassifier)
    try:
        got = [clf(_p("new exploit kit")), clf(_p("laptop"))]
    finally:
        clf.close()
    assert got == ["Hacking", "Electronics"]


def test_exec_classifier_bad_answer(tmp_path):
    script = tmp_path / "bad.py"
    script.write_text("import sys\nfor line in sys.stdin:\n    print('{\"category\": \"Others\"}', flush=True)\n")
    clf = make_classifier(f"exec:{sys.executable} {script}")
    try:
        with pytest.raises(RuntimeError, match="unknown category"):
            clf(_p("x"))
    finally:
        clf.close()


def test_unknown_classifier_spec():
    with pytest.raises(ValueError):
        make_classifier("bert")


# ---------------------------------------------------------------- balancing

def test_all_under_cap_is_noop():
    pages = [_p("a" * 10, "Drugs", 0), _p("b" * 10, "Hacking", 1)]
    kept, before, after = balance(pages, 100)
    assert kept == pages
    assert before.to_dict() == after.to_dict()


def test_exactly_twice_cap_keeps_half():
    pages = [_p("x" * 10, "Drugs", i) for i in range(20)] + [_p("y" * 10, "Gambling", 99)]
    kept, before, after = balance(pages, 100, seed=3)
    assert sum(p.category == "Drugs" for p in kept) == 10
    assert after["Drugs"].byte_size == 100
    assert kept[-1].id == "99"


def test_cap_must_be_positive():
    with pytest.raises(ValueError):
        balance([], 0)


def test_uncategorized_page_rejected():
    with pytest.raises(ValueError):
        balance([_p("x")], 10)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.tuples(st.sampled_from(CATEGORIES[:4]), st.integers(1, 50)), max_size=60),
    st.integers(1, 300),
    st.integers(0, 2 ** 64 - 1),
)
def test_balance_properties(spec, cap, seed):
    pages = [_p("z" * size, cat, i) for i, (cat, size) in enumerate(spec)]
    kept, before, after = balance(pages, cap, seed)
    again, _, _ = balance(pages, cap, seed)
    assert [p.id for p in kept] == [p.id for p in again]
    ids = [p.id for p in kept]
    assert ids == [p.id for p in pages if p.id in set(ids)]
    for cat, stat in after.items():
        assert stat.byte_size <= cap
        assert stat.page_count <= before[cat].page_count
        if before[cat].byte_size <= cap:
            assert [p.id for p in kept if p.category == cat] == [p.id for p in pages if p.category == cat]
        else:
            # removal stopped as soon as the cap was met, so the last page
            # removed (at most the largest dropped one) did not fit
            dropped = [p for p in pages if p.category == cat and p.id not in set(ids)]
            assert stat.byte_size + max(p.byte_size for p in dropped) > cap
