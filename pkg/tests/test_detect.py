import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codelens.detect import (
    DegenerateStatisticError,
    EmptySequenceError,
    MissingAlternativesError,
    UnknownDetectorError,
    DetectorScore,
    classify,
    lrr,
    mean_entropy,
    mean_log_rank,
    mean_logp,
    mean_rank,
    safe_score,
    zero_shot,
)
from codelens.grid import build_grid, to_seq_vector
from helpers import scored


def seq_of(logprobs, ranks=None, alternatives=None):
    return scored(["t"] * len(logprobs), logprobs, ranks, alternatives)


def test_mean_logp_examples():
    assert mean_logp(seq_of([-1, -1, -1])).raw == -1
    s = mean_logp(seq_of([-1, -3]))
    assert s.raw == -2 and s.score == -2


def test_mean_logp_random_matches_naive():
    rng = np.random.default_rng(5)
    lps = (-rng.exponential(2.0, size=100)).tolist()
    naive = 0.0
    for v in lps:
        naive += v
    assert mean_logp(seq_of(lps)).raw == pytest.approx(naive / 100, abs=1e-12)


def test_mean_logp_empty():
    with pytest.raises(EmptySequenceError):
        mean_logp(seq_of([]))


def test_entropy_examples():
    assert mean_entropy(seq_of([-1], alternatives=[(("a", 0.0),)])).raw == 0.0
    uniform = tuple((str(i), math.log(0.1)) for i in range(10))
    s = mean_entropy(seq_of([-1], alternatives=[uniform]))
    assert s.raw == pytest.approx(math.log(10), abs=1e-12)
    assert s.raw == pytest.approx(2.3026, abs=1e-4)
    assert s.score == -s.raw


def test_entropy_mixed_matches_direct_sum():
    alts = [(("a", math.log(0.5)), ("b", math.log(0.3))), (("a", math.log(0.2)), ("b", math.log(0.2)), ("c", math.log(0.1)))]
    expected = []
    for probs in ([0.5, 0.3], [0.2, 0.2, 0.1]):
        z = sum(probs)
        expected.append(-sum(p / z * math.log(p / z) for p in probs))
    assert mean_entropy(seq_of([-1, -1], alternatives=alts)).raw == pytest.approx(sum(expected) / 2, abs=1e-12)


def test_entropy_needs_alternatives():
    with pytest.raises(MissingAlternativesError):
        mean_entropy(seq_of([-1], alternatives=[()]))


def test_rank_examples():
    s = seq_of([-1, -1, -1])
    assert mean_rank(s).raw == 1 and mean_log_rank(s).raw == 0
    s = seq_of([-1, -1], ranks=[1, 11])
    assert mean_rank(s).raw == 6
    assert mean_log_rank(s).raw == pytest.approx(math.log(11) / 2, abs=1e-12)
    assert mean_log_rank(s).raw == pytest.approx(1.1989, abs=1e-4)
    assert mean_rank(s).score == -6


def test_rank_random_matches_naive():
    rng = np.random.default_rng(9)
    ranks = rng.integers(1, 12, size=50).tolist()
    s = seq_of([-1.0] * 50, ranks=ranks)
    assert mean_rank(s).raw == pytest.approx(sum(ranks) / 50)
    assert mean_log_rank(s).raw == pytest.approx(sum(math.log(r) for r in ranks) / 50)


def test_lrr_examples():
    # ranks of e cannot be stored as integers; check the ratio identity directly
    s = seq_of([-2, -4], ranks=[2, 4])
    assert lrr(s).raw == pytest.approx(6 / (math.log(2) + math.log(4)), abs=1e-12)
    assert lrr(s).raw == pytest.approx(2.8854, abs=1e-4)
    s = seq_of([-math.log(3)] * 4, ranks=[3] * 4)
    assert lrr(s).raw == pytest.approx(1.0)
    with pytest.raises(DegenerateStatisticError):
        lrr(seq_of([-1, -2]))
    assert safe_score("lrr", seq_of([-1, -2])).score == math.inf


def test_classify_boundary():
    d = lambda v: DetectorScore(v, v, "x")
    assert classify(d(0.7), 0.5).label == "llm"
    assert classify(d(0.5), 0.5).label == "llm"
    assert classify(d(0.49), 0.5).label == "human"


def test_registry():
    assert zero_shot("logp") is mean_logp
    with pytest.raises(UnknownDetectorError):
        zero_shot("vit")
    with pytest.raises(UnknownDetectorError):
        zero_shot("nope")


line_texts = st.lists(st.sampled_from(["a", " b", "\n", "  ", "("]), min_size=1, max_size=30)


@given(line_texts, st.data())
def test_grid_and_seq_agree(texts, data):
    lps = data.draw(st.lists(st.floats(-40, 0), min_size=len(texts), max_size=len(texts)))
    s = scored(texts, lps)
    g, v = build_grid(s), to_seq_vector(s)
    assert mean_logp(g).raw == pytest.approx(mean_logp(v).raw, abs=1e-12)
    assert mean_logp(g).raw == pytest.approx(mean_logp(s).raw, abs=1e-12)


@given(st.lists(st.floats(-40, 0), min_size=1, max_size=40), st.randoms())
def test_mean_logp_permutation_invariant(lps, rnd):
    shuffled = list(lps)
    rnd.shuffle(shuffled)
    assert mean_logp(seq_of(lps)).raw == pytest.approx(mean_logp(seq_of(shuffled)).raw, abs=1e-9)
