from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darkcorpus._rng import splitmix64
from darkcorpus.folds import repeated_kfold, repetition_seed, stratified_kfold


def _check_invariants(labels, fa):
    k = fa.k
    assert len(fa.folds) == len(labels)
    assert all(0 <= f < k for f in fa.folds)
    sizes = fa.fold_sizes()
    assert max(sizes) - min(sizes) <= 1
    for c in set(labels):
        per = Counter(f for f, y in zip(fa.folds, labels) if y == c)
        counts = [per.get(f, 0) for f in range(k)]
        assert max(counts) - min(counts) <= 1


def test_exact_divisibility():
    labels = [0] * 5 + [1] * 5
    fa = stratified_kfold(labels, 5, seed=1)
    for f in range(5):
        assert sorted(labels[i] for i in fa.members(f)) == [0, 1]


def test_remainder():
    fa = stratified_kfold(["x"] * 7, 3, seed=0)
    assert sorted(fa.fold_sizes()) == [2, 2, 3]


def test_noteworthy_shape():
    labels = [1] * 249 + [0] * 1624
    fa = stratified_kfold(labels, 5, seed=0)
    pos = Counter(f for f, y in zip(fa.folds, labels) if y == 1)
    assert set(pos.values()) <= {49, 50}
    _check_invariants(labels, fa)


def test_errors():
    with pytest.raises(ValueError):
        stratified_kfold([0, 1], 1)
    with pytest.raises(ValueError):
        stratified_kfold([0, 1], 3)
    with pytest.raises(ValueError):
        repeated_kfold([0, 1, 0], 2, repetitions=0)


def test_deterministic():
    labels = [i % 3 for i in range(50)]
    assert stratified_kfold(labels, 5, 9) == stratified_kfold(labels, 5, 9)


def test_repetition_seed_is_splitmix_of_xor():
    assert repetition_seed(5, 3) == splitmix64(5 ^ 3)


def test_single_repetition_matches_derived_seed():
    labels = [i % 2 for i in range(20)]
    (only,) = repeated_kfold(labels, 4, repetitions=1, seed=17)
    assert only.folds == stratified_kfold(labels, 4, repetition_seed(17, 0)).folds


def test_repetitions_differ():
    labels = [i % 2 for i in range(100)]
    for seed in range(100):
        reps = repeated_kfold(labels, 5, repetitions=2, seed=seed)
        assert reps[0].folds != reps[1].folds


def test_five_by_five():
    labels = [i % 4 for i in range(60)]
    reps = repeated_kfold(labels, 5, 5, seed=2)
    assert len(reps) == 5 and [r.repetition for r in reps] == list(range(5))
    for r in reps:
        _check_invariants(labels, r)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_random_invariants(data):
    k = data.draw(st.integers(2, 10))
    n = data.draw(st.integers(k, 500))
    labels = data.draw(st.lists(st.integers(0, 6), min_size=n, max_size=n))
    fa = stratified_kfold(labels, k, data.draw(st.integers(0, 2 ** 64 - 1)))
    _check_invariants(labels, fa)
