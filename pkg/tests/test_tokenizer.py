import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codelens.tokenizer import InputEncodingError, TokenSeq, UnknownTokenError, decode, encode, get_tokenizer, split_lines

PINNED = json.loads((__import__("pathlib").Path(__file__).parent / "fixtures" / "tokenizer_ids.json").read_text())

code_text = st.text(
    alphabet=st.sampled_from(list("abcdefxyz_0123456789 \t\n()[]{}:;,.=+-*/<>\"'#") + ["é", "λ", "→", "😀"]),
    max_size=120,
)


@pytest.mark.parametrize("source", sorted(PINNED))
def test_pinned_ids(source):
    assert list(encode(source).ids) == PINNED[source]


@pytest.mark.parametrize("source", sorted(PINNED))
def test_decode_pinned_ids(source):
    assert decode(PINNED[source]) == source


def test_empty():
    seq = encode("")
    assert len(seq) == 0
    assert decode(seq) == ""
    assert split_lines(seq) == []


def test_single_newline_token_in_a_newline_b():
    seq = encode("a\nb")
    assert "".join(seq.texts) == "a\nb"
    assert sum("\n" in t for t in seq.texts) == 1


def test_indentation_is_its_own_token():
    seq = encode("def f():\n    return 1")
    assert seq.text == "def f():\n    return 1"
    # cl100k folds one indent space into " return"; the rest stays a run of spaces
    assert "   " in seq.texts
    assert " return" in seq.texts


def test_tabs_preserved():
    seq = encode("\tif x:\n\t\ty")
    assert "\t" in seq.texts
    assert seq.text == "\tif x:\n\t\ty"


def test_invalid_utf8_rejected():
    with pytest.raises(InputEncodingError):
        encode(b"\xff\xfe bad")


def test_unknown_id_rejected():
    with pytest.raises(UnknownTokenError):
        decode([10**7])


def test_split_lines_examples():
    runs = split_lines(encode("a\nb"))
    assert [r.text for r in runs] == ["a\n", "b"]
    assert len(split_lines(encode("abc"))) == 1
    assert "".join(r.text for r in split_lines(encode("\n\n"))) == "\n\n"


def test_multi_newline_token_ends_one_run():
    runs = split_lines(encode("x\n\n\ny"))
    assert "".join(r.text for r in runs) == "x\n\n\ny"
    assert all(sum("\n" in t for t in r.texts) <= 1 for r in runs)


@given(code_text)
def test_round_trip(s):
    seq = encode(s)
    assert decode(seq) == s
    assert "".join(seq.texts) == s
    assert len(seq.ids) == len(seq.texts)


@given(code_text)
def test_line_partition(s):
    seq = encode(s)
    runs = split_lines(seq)
    ids = tuple(i for r in runs for i in r.ids)
    assert ids == seq.ids
    terminated = sum(1 for r in runs if "\n" in r.texts[-1])
    assert all("\n" in r.texts[-1] for r in runs[:-1])
    assert len(runs) == terminated + (0 if not runs or "\n" in runs[-1].texts[-1] else 1)


@given(code_text)
def test_from_ids_matches_encode(s):
    seq = encode(s)
    assert get_tokenizer().from_ids(seq.ids) == seq


def test_tokenseq_length_invariant():
    with pytest.raises(ValueError):
        TokenSeq((1, 2), ("a",))
