"""cl100k_base byte-pair encoding with per-line grouping.

The vocabulary file ships inside the package so encoding never touches the
network. Set ``CODELENS_VOCAB_PATH`` (or pass ``vocab_path``) to load a
different tiktoken-format rank file.
"""
from __future__ import annotations

import codecs
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import tiktoken
from tiktoken.load import load_tiktoken_bpe

VOCAB_ENV = "CODELENS_VOCAB_PATH"
CL100K_PATTERN = (
    r"""'(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}++|\p{N}{1,3}+| ?[^\s\p{L}\p{N}]++[\r\n]*+"""
    r"""|\s++$|\s*[\r\n]|\s+(?!\S)|\s"""
)


class TokenizerError(ValueError):
    pass


class InputEncodingError(TokenizerError):
    """Source bytes are not valid UTF-8."""


class UnknownTokenError(TokenizerError):
    pass


@dataclass(frozen=True)
class TokenSeq:
    """Token ids with their source text.

    ``texts[i]`` holds the characters whose final UTF-8 byte falls inside
    token ``i``. For ASCII every token's text is exactly its bytes; a token
    that ends mid-character gets the empty string and the character is
    credited to the token completing it. Either way ``"".join(texts)`` is
    the original source.
    """

    ids: tuple[int, ...]
    texts: tuple[str, ...]

    def __post_init__(self):
        if len(self.ids) != len(self.texts):
            raise ValueError("ids and texts must have equal length")

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, idx) -> TokenSeq:
        if isinstance(idx, slice):
            return TokenSeq(self.ids[idx], self.texts[idx])
        return TokenSeq((self.ids[idx],), (self.texts[idx],))

    @property
    def text(self) -> str:
        return "".join(self.texts)


class Tokenizer:
    def __init__(self, vocab_path: str | Path | None = None):
        path = vocab_path or os.environ.get(VOCAB_ENV)
        if path:
            ranks = load_tiktoken_bpe(str(path))
            self.vocab_path = str(path)
        else:
            ref = resources.files("codelens") / "data" / "cl100k_base.tiktoken"
            with resources.as_file(ref) as p:
                ranks = load_tiktoken_bpe(str(p))
            self.vocab_path = "<embedded cl100k_base>"
        self._enc = tiktoken.Encoding(
            name="cl100k_base", pat_str=CL100K_PATTERN, mergeable_ranks=ranks, special_tokens={}
        )
        self.n_vocab = len(ranks)

    def encode(self, source: str | bytes) -> TokenSeq:
        if isinstance(source, (bytes, bytearray)):
            try:
                source = bytes(source).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise InputEncodingError(f"input is not valid UTF-8: {exc}") from exc
        else:
            try:
                source.encode("utf-8")
            except UnicodeEncodeError as exc:
                raise InputEncodingError(f"input is not valid UTF-8: {exc}") from exc
        ids = self._enc.encode_ordinary(source)
        return TokenSeq(tuple(ids), self._texts(ids))

    def token_bytes(self, token_id: int) -> bytes:
        try:
            return self._enc.decode_single_token_bytes(token_id)
        except KeyError:
            raise UnknownTokenError(f"token id {token_id} is not in the vocabulary") from None

    def _texts(self, ids) -> tuple[str, ...]:
        dec = codecs.getincrementaldecoder("utf-8")()
        return tuple(dec.decode(self.token_bytes(i)) for i in ids)

    def from_ids(self, ids) -> TokenSeq:
        ids = tuple(int(i) for i in ids)
        return TokenSeq(ids, self._texts(ids))

    def decode(self, tokens: TokenSeq | list[int] | tuple[int, ...]) -> str:
        ids = tokens.ids if isinstance(tokens, TokenSeq) else tokens
        data = b"".join(self.token_bytes(int(i)) for i in ids)
        return data.decode("utf-8", errors="replace")


@lru_cache(maxsize=4)
def _cached(path: str | None) -> Tokenizer:
    return Tokenizer(path)


def get_tokenizer(vocab_path: str | Path | None = None) -> Tokenizer:
    path = vocab_path or os.environ.get(VOCAB_ENV)
    return _cached(str(path) if path else None)


def encode(source: str | bytes) -> TokenSeq:
    return get_tokenizer().encode(source)


def decode(tokens: TokenSeq | list[int]) -> str:
    return get_tokenizer().decode(tokens)


def split_lines(tokens: TokenSeq) -> list[TokenSeq]:
    """Cut the sequence after every token whose text contains a newline.

    A token carrying several newlines (``"\\n\\n"``) still ends exactly one
    run. A trailing run without a newline is kept as the final line.
    """
    runs: list[TokenSeq] = []
    start = 0
    for i, text in enumerate(tokens.texts):
        if "\n" in text:
            runs.append(tokens[start : i + 1])
            start = i + 1
    if start < len(tokens):
        runs.append(tokens[start:])
    return runs
