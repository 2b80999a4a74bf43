"""Deterministic hash-based scoring provider.

The oracle behaves like a small language model whose candidate pool is a
fixed set of token ids plus whichever token is being scored, with a
context-dependent tail bucket standing in for the rest of the vocabulary.
For a context ``c`` (the last ``WINDOW`` prefix ids) and a token ``t``

    s(c, t) = log P(t | c) + beta(c) * z(c, t) + GAMMA * tau(t)

``z`` is a hash-derived approximately standard normal value, ``tau`` a
per-token typicality in [0, 1) and ``beta`` grows with the mean typicality
of the context tokens, so typical tokens both score higher and sharpen the
distribution that follows them. ``P`` is an optional interpolated n-gram
prior (:class:`NGramPrior`) giving the oracle knowledge of some code
distribution; without one the term is a constant and the oracle is pure
hash noise.
"""
from __future__ import annotations

import math
from collections import Counter, OrderedDict, defaultdict
from typing import Iterable, Sequence

import numpy as np

from ..tokenizer import get_tokenizer
from .types import K_ALTERNATIVES, ScoreResult

WINDOW = 3
POOL_SIZE = 512
GAMMA = 1.0
BETA_BASE = 0.4
BETA_SLOPE = 1.2
TAIL_LO, TAIL_HI = 0.02, 0.2
VOCAB_SIZE = 100_256

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SALT_TAU = 0x5851F42D4C957F2D
_SALT_CTX = 0x14057B7EF767814F
_SALT_TAIL = 0x27BB2EE687B0B0FD


def _mix(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _mix_np(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(_GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _unit(h):
    return (h >> 11) * (1.0 / (1 << 53))


def _normal_np(h: np.ndarray) -> np.ndarray:
    # Irwin-Hall sum of four 16-bit uniforms, rescaled to unit variance
    m = np.uint64(0xFFFF)
    s = (h & m) + ((h >> np.uint64(16)) & m) + ((h >> np.uint64(32)) & m) + (h >> np.uint64(48))
    return (s.astype(np.float64) / 65535.0 - 2.0) * math.sqrt(3.0)


def _normal(h: int) -> float:
    s = (h & 0xFFFF) + ((h >> 16) & 0xFFFF) + ((h >> 32) & 0xFFFF) + (h >> 48)
    return (s / 65535.0 - 2.0) * math.sqrt(3.0)


class NGramPrior:
    """Interpolated n-gram model over token ids.

    ``P(t | c) = sum_k w_k P_k(t | last k ids of c) + FLOOR / VOCAB_SIZE``
    for k = WINDOW..0, where the weight of an unseen context is handed down
    to the next shorter one. The result is a proper distribution over the
    full vocabulary.
    """

    WEIGHTS = (0.08, 0.15, 0.25, 0.5)  # unigram, then contexts of 1, 2, 3 ids
    FLOOR = 0.02

    def __init__(self, sequences: Iterable[Sequence[int]], name: str):
        self.name = name
        counts: list[dict[tuple, Counter]] = [defaultdict(Counter) for _ in range(WINDOW + 1)]
        for seq in sequences:
            seq = [int(t) for t in seq]
            for i, t in enumerate(seq):
                for k in range(min(i, WINDOW) + 1):
                    counts[k][tuple(seq[i - k : i])][t] += 1
        self.counts = [dict(c) for c in counts]
        self.totals = [{ctx: sum(c.values()) for ctx, c in level.items()} for level in self.counts]
        self.vocab = np.array(sorted(self.counts[0].get((), {})), dtype=np.int64)

    def mixture(self, ctx: tuple[int, ...]) -> list[tuple[float, Counter, int]]:
        """(weight, counts, total) for every seen context order."""
        top = min(WINDOW, len(ctx))
        scale = (1.0 - self.FLOOR) / sum(self.WEIGHTS[: top + 1])
        parts = []
        carry = 0.0
        for k in range(top, -1, -1):
            w = self.WEIGHTS[k] + carry
            sub = tuple(ctx[len(ctx) - k :]) if k else ()
            counts = self.counts[k].get(sub)
            if counts is None:
                carry = w
                continue
            parts.append((w * scale, counts, self.totals[k][sub]))
            carry = 0.0
        return parts

    def _floor(self, parts) -> float:
        # mass of orders with no data at all (empty corpus) joins the floor
        return (1.0 - sum(w for w, _, _ in parts)) / VOCAB_SIZE

    def prob(self, ctx: tuple[int, ...], token: int) -> float:
        parts = self.mixture(ctx)
        p = self._floor(parts)
        for w, counts, total in parts:
            p += w * counts.get(token, 0) / total
        return p

    def probs(self, ctx: tuple[int, ...], index: dict[int, int], size: int) -> np.ndarray:
        parts = self.mixture(ctx)
        out = np.full(size, self._floor(parts))
        for w, counts, total in parts:
            for t, c in counts.items():
                out[index[t]] += w * c / total
        return out


class OracleProvider:
    """Hermetic stand-in for a completion endpoint."""

    context_limit = None

    def __init__(self, seed: int = 0, prior: NGramPrior | None = None, cache_size: int = 200_000):
        self.seed = int(seed)
        self.prior = prior
        tag = prior.name if prior is not None else "none"
        self.provider_id = f"oracle:w={WINDOW}:k={K_ALTERNATIVES}:prior={tag}:seed={self.seed}:bos=empty"
        self._seed_key = _mix(self.seed & _MASK)
        ids = np.arange(POOL_SIZE, dtype=np.int64)
        if prior is not None:
            ids = np.union1d(ids[:256], prior.vocab)
        self._pool_ids = ids
        self._pool = ids.astype(np.uint64)
        self._index = {int(t): i for i, t in enumerate(ids)}
        self._pool_tau = _unit(_mix_np(self._pool ^ np.uint64(self._seed_key ^ _SALT_TAU)))
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size
        self._texts: dict[int, str] = {}

    def tau(self, token_id: int) -> float:
        i = self._index.get(token_id)
        if i is not None:
            return float(self._pool_tau[i])
        return _unit(_mix((token_id ^ self._seed_key ^ _SALT_TAU) & _MASK))

    def _ctx_key(self, ctx: tuple[int, ...]) -> int:
        k = self._seed_key ^ _SALT_CTX
        for t in ctx:
            k = _mix(k ^ ((t + 1) * _GOLDEN & _MASK))
        return _mix(k ^ len(ctx))

    def _context(self, ctx: tuple[int, ...]):
        hit = self._cache.get(ctx)
        if hit is not None:
            return hit
        key = self._ctx_key(ctx)
        typ = sum(self.tau(t) for t in ctx) / len(ctx) if ctx else 0.5
        beta = BETA_BASE + BETA_SLOPE * typ
        rho = TAIL_LO + (TAIL_HI - TAIL_LO) * _unit(_mix(key ^ _SALT_TAIL))
        z = _normal_np(_mix_np(self._pool ^ np.uint64(key)))
        logits = beta * z + GAMMA * self._pool_tau
        if self.prior is not None:
            logits = logits + np.log(self.prior.probs(ctx, self._index, len(self._pool_ids)))
        hi = float(logits.max())
        log_pool = hi + math.log(float(np.exp(logits - hi).sum()))
        # the tail bucket holds a fixed share rho of the mass
        log_z = log_pool - math.log1p(-rho)
        top = np.argpartition(-logits, K_ALTERNATIVES)[:K_ALTERNATIVES]
        top = sorted(((int(self._pool_ids[i]), float(logits[i])) for i in top), key=lambda c: (-c[1], c[0]))
        entry = (key, beta, log_z, logits, tuple(top))
        self._cache[ctx] = entry
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return entry

    def _text(self, token_id: int) -> str:
        text = self._texts.get(token_id)
        if text is None:
            text = get_tokenizer().token_bytes(token_id).decode("utf-8", errors="replace")
            self._texts[token_id] = text
        return text

    def score(self, prefix: Sequence[int], next_id: int) -> ScoreResult:
        next_id = int(next_id)
        ctx = tuple(int(t) for t in prefix[-WINDOW:])
        key, beta, log_z, logits, top = self._context(ctx)
        i = self._index.get(next_id)
        if i is not None:
            s = float(logits[i])
            cands = list(top)
        else:
            s = beta * _normal(_mix(next_id ^ key)) + GAMMA * self.tau(next_id)
            if self.prior is not None:
                s += math.log(self.prior.prob(ctx, next_id))
            log_z = float(np.logaddexp(log_z, s))
            cands = sorted(list(top) + [(next_id, s)], key=lambda c: (-c[1], c[0]))[:K_ALTERNATIVES]
        # pool entries strictly above s; an in-pool token never counts itself
        rank = int(np.count_nonzero(logits > s)) + 1
        alts = tuple((self._text(t), v - log_z) for t, v in cands)
        return ScoreResult(s - log_z, rank, alts)


_PROVIDERS: dict[int, OracleProvider] = {}


def oracle_score(prefix: Sequence[int], next_id: int, seed: int = 0) -> ScoreResult:
    """Score with the prior-free hash oracle for ``seed``."""
    p = _PROVIDERS.get(seed)
    if p is None:
        p = _PROVIDERS[seed] = OracleProvider(seed)
    return p.score(prefix, next_id)
