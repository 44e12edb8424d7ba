import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darkcorpus import masking
from darkcorpus.masking import (MASK_TOKENS, RULE_ORDER, MaskReport, MaskRuleSet, apply_masks,
                                normalize_whitespace, remove_uncommon_chars)
from darkcorpus.synth import B58, _identifier

from oracles import reference_mask

GOLDEN = [json.loads(line) for line in (Path(__file__).parent / "data" / "mask_golden.jsonl").read_text().splitlines()]


@pytest.mark.parametrize("row", GOLDEN, ids=[r["name"] for r in GOLDEN])
def test_golden(row):
    assert apply_masks(row["input"])[0] == row["expected"]


def test_longword_boundary():
    assert apply_masks("x " + "a" * 38 + " y")[0] == "x ID_LONGWORD y"
    assert apply_masks("x " + "a" * 37 + " y")[0] == "x " + "a" * 37 + " y"


def test_eth_beats_longword():
    masked, report = apply_masks("pay 0x" + "a" * 40)
    assert masked == "pay ID_ETH_ADDRESS"
    assert report.counts["ID_LONGWORD"] == 0


def test_three_prefix_is_btc():
    addr = "3" + B58[5:38]
    assert apply_masks(addr)[0] == "ID_BTC_ADDRESS"


def _valid_base58_address(s):
    # independent syntax check: alphabet, prefix, length
    return s[0] in "13" and 26 <= len(s) <= 35 and all(c in B58 for c in s)


def test_generated_btc_addresses():
    rng = random.Random(7)
    for _ in range(200):
        addr = "1" + "".join(rng.choices(B58, k=33))
        assert _valid_base58_address(addr)
        assert apply_masks(f"to {addr}.")[0] == "to ID_BTC_ADDRESS."


def test_btc_rejects_excluded_chars():
    # 0, O, I and l are not Base58; the string is still a lengthy word
    bad = "1" + "0OIl" * 10 + "abc"
    assert apply_masks(bad)[0] == "ID_LONGWORD"
    assert apply_masks("1" + "0" * 26)[0] == "1" + "0" * 26


def test_ipv4_not_inside_longer_digit_runs():
    assert apply_masks("v 1.2.3.4.5")[0] == "v 1.2.3.4.5"
    assert apply_masks("1192.168.1.1")[0] == "1192.168.1.1"
    assert apply_masks("256.1.1.1")[0] == "256.1.1.1"
    assert apply_masks("at 10.0.0.1, then")[0] == "at ID_IP_ADDRESS, then"


def test_url_does_not_take_onion_hosts():
    masked, report = apply_masks("http://abcdefghij234567.onion/x")
    assert masked == "ID_ONION_URL"
    assert report.counts["ID_NORMAL_URL"] == 0


def test_url_credentials_are_not_emails():
    masked, report = apply_masks("ftp://user:pw@abcdefghij234567.onion")
    assert masked == "ID_ONION_URL"
    assert report.counts["ID_EMAIL"] == 0


def test_substring_matching_inside_words():
    assert apply_masks("mailto:bob@host.org")[0] == "mailto:ID_EMAIL"


def test_phone_numbers_untouched():
    assert apply_masks("call +1 555 123 4567")[0] == "call +1 555 123 4567"


def test_remove_uncommon_chars():
    assert remove_uncommon_chars("héllo") == ("héllo", 0)
    assert remove_uncommon_chars("hi✓there") == ("hithere", 1)
    assert remove_uncommon_chars("日本語") == ("", 3)
    assert remove_uncommon_chars("\U0001F600x") == ("x", 1)


def test_normalize_whitespace():
    assert normalize_whitespace("a\n\t b") == "a b"
    assert normalize_whitespace("  x  ") == "x"
    assert normalize_whitespace("") == ""
    assert normalize_whitespace("a　b c") == "a b c"


def test_uncommon_whitespace_is_removed_not_collapsed():
    # U+3000 is above U+00FF, so it is deleted before whitespace truncation
    assert apply_masks("ab　cd")[0] == "abcd"


def test_deleting_chars_can_expose_a_longword():
    half = "a" * 20
    assert apply_masks(half + "　" + half)[0] == "ID_LONGWORD"


def test_report_counts_and_bytes():
    text = "a@b.co and c@d.co at 1.2.3.4 ✓"
    masked, report = apply_masks(text)
    assert masked == "ID_EMAIL and ID_EMAIL at ID_IP_ADDRESS"
    assert report.counts["ID_EMAIL"] == 2
    assert report.counts["ID_IP_ADDRESS"] == 1
    assert report.chars_removed == 1
    assert report.bytes_before == len(text.encode())
    assert report.bytes_after == len(masked.encode())
    assert report.bytes_after <= report.bytes_before + report.inflation_bound


def test_report_merge_and_roundtrip():
    _, a = apply_masks("x@y.com")
    _, b = apply_masks("1.2.3.4 x@y.com")
    m = a.merge(b)
    assert m.counts["ID_EMAIL"] == 2 and m.counts["ID_IP_ADDRESS"] == 1
    assert MaskReport.from_dict(m.to_dict()) == m


def test_rule_subset_keeps_canonical_order():
    rules = MaskRuleSet(["ID_LONGWORD", "ID_ETH_ADDRESS"])
    assert rules.names == ["ID_ETH_ADDRESS", "ID_LONGWORD"]
    assert apply_masks("0x" + "b" * 40, rules)[0] == "ID_ETH_ADDRESS"


def test_rule_subset_without_eth_falls_to_longword():
    assert apply_masks("0x" + "b" * 40, MaskRuleSet(["ID_LONGWORD"]))[0] == "ID_LONGWORD"


def test_unknown_rule():
    with pytest.raises(ValueError, match="unknown mask rule"):
        MaskRuleSet(["ID_PHONE"])


def test_replace_rule_needs_vocabulary_token():
    with pytest.raises(ValueError):
        masking.MaskRule("X", masking.REPLACE, None, "ID_SSN")


def test_tokens_never_rematch():
    text = " ".join(MASK_TOKENS)
    masked, report = apply_masks(text)
    assert masked == text
    assert report.is_zero()


# ---------------------------------------------------------------- properties

_pieces = st.one_of(
    st.text(max_size=12),
    st.sampled_from(["@", ".", ":", "::", "www.", "http://", ".onion", ".com", "0x", "bc1", " ", "\n",
                     "　", "ID_EMAIL", "1.2", "%eth0", "/", "a" * 37]),
    st.builds(lambda seed: _identifier(random.Random(seed)), st.integers(0, 10 ** 6)),
)
texts = st.lists(_pieces, max_size=20).map("".join)


@settings(max_examples=400, deadline=None)
@given(texts)
def test_idempotent(text):
    once, _ = apply_masks(text)
    twice, report = apply_masks(once)
    assert twice == once
    assert report.is_zero()


@settings(max_examples=400, deadline=None)
@given(texts)
def test_postconditions(text):
    out, _ = apply_masks(text)
    assert all(ord(c) <= 0xFF for c in out)
    assert out == normalize_whitespace(out)
    assert all(len(w) < 38 or w in MASK_TOKENS for w in out.split())


@settings(max_examples=300, deadline=None)
@given(texts, st.lists(st.sampled_from(RULE_ORDER), unique=True))
def test_matches_whole_text_oracle(text, names):
    rules = names or None
    out, report = apply_masks(text, MaskRuleSet(rules))
    ref, ref_counts = reference_mask(text, rules)
    assert out == ref
    for name, n in ref_counts.items():
        if name != masking.WHITESPACE:
            assert report.counts[name] == n


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.characters(max_codepoint=0xFF, blacklist_characters="@:."), max_size=200))
def test_plain_latin1_passes_through(text):
    # no identifier can form without '@', ':' or '.', and no word reaches 38 chars here
    if any(len(w) >= 14 for w in text.split()):
        return
    assert apply_masks(text)[0] == normalize_whitespace(text)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="0123456789abcdefABCDEF", min_size=40, max_size=40))
def test_eth_never_longword(hexpart):
    out, _ = apply_masks("0x" + hexpart)
    assert out == "ID_ETH_ADDRESS"


@settings(max_examples=200, deadline=None)
@given(texts)
def test_inflation_bound(text):
    _, report = apply_masks(text)
    assert report.bytes_after <= report.bytes_before + report.inflation_bound
