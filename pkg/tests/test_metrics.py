import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codelens.bench.metrics import SingleClassError, auc, evaluate_scores, fpr_fnr, youden_threshold


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def random_instance(rng):
    n = int(rng.integers(2, 201))
    labels = rng.integers(0, 2, size=n)
    labels[0], labels[1] = 0, 1
    # coarse rounding forces plenty of ties
    scores = np.round(rng.normal(size=n) + 0.5 * labels, int(rng.integers(0, 3)))
    return scores.tolist(), labels.tolist()


def test_auc_examples():
    assert auc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]) == 1.0
    assert auc([0.9, 0.3, 0.5, 0.1], [1, 1, 0, 0]) == 0.75
    assert auc([0.4] * 6, [1, 0, 1, 0, 1, 0]) == 0.5


def test_auc_equals_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        s, y = random_instance(rng)
        assert abs(auc(s, y) - brute_auc(s, y)) <= 1e-9


def test_single_class_rejected():
    with pytest.raises(SingleClassError):
        auc([0.1, 0.2], [1, 1])
    with pytest.raises(SingleClassError):
        fpr_fnr([0.1, 0.2], [0, 0], 0.5)


def test_fpr_fnr_examples():
    s, y = [0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]
    t = youden_threshold(s, y)
    assert fpr_fnr(s, y, t)[:2] == (0.0, 0.0)
    fpr, fnr, c = fpr_fnr(s, y, -1.0)
    assert (fpr, fnr) == (1.0, 0.0)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 2, 0, 0)


def test_fpr_fnr_mixed_matches_recount():
    rng = np.random.default_rng(3)
    s, y = random_instance(rng)
    t = 0.25
    tp = sum(1 for v, l in zip(s, y) if v >= t and l == 1)
    fp = sum(1 for v, l in zip(s, y) if v >= t and l == 0)
    tn = sum(1 for v, l in zip(s, y) if v < t and l == 0)
    fn = sum(1 for v, l in zip(s, y) if v < t and l == 1)
    fpr, fnr, c = fpr_fnr(s, y, t)
    assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
    assert fpr == fp / (fp + tn) and fnr == fn / (fn + tp)


scores_labels = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-5, 5), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda y: 0 < sum(y) < len(y)),
    )
)


@given(scores_labels, st.lists(st.floats(-6, 6), min_size=2, max_size=10))
def test_threshold_sweep_monotone(data, thresholds):
    s, y = data
    rows = [fpr_fnr(s, y, t)[:2] for t in sorted(thresholds)]
    for (f1, n1), (f2, n2) in zip(rows, rows[1:]):
        assert f2 <= f1 and n2 >= n1


@given(scores_labels)
def test_auc_in_unit_interval_and_flip(data):
    s, y = data
    a = auc(s, y)
    assert 0.0 <= a <= 1.0
    assert auc([-v for v in s], y) == pytest.approx(1 - a, abs=1e-12)


def test_youden_prefers_larger_threshold_on_ties():
    assert youden_threshold([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 0.8


def test_report_invariants():
    r = evaluate_scores("logp", [0.9, 0.3, 0.5, 0.1], [1, 1, 0, 0], 0.4)
    assert r.fpr == r.fp / (r.fp + r.tn) and r.fnr == r.fn / (r.fn + r.tp)
    assert r.auc == 0.75
