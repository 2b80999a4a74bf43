from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from ..tokenizer import TokenSeq
from .cache import ScoreCache
from .types import ContextOverflowError, Provider, ProviderError, ScoredSeq, ScoredToken, ScoreResult, ScoringError

MAX_SHRINKS = 8


def _window(ids: Sequence[int], i: int, limit: int | None) -> tuple[int, ...]:
    # keep room for the generated token inside the provider context
    if limit is None or i < limit:
        return tuple(ids[:i])
    return tuple(ids[i - (limit - 1) : i])


def _score_position(provider: Provider, cache: ScoreCache | None, ids, i: int) -> ScoreResult:
    limit = provider.context_limit
    for _ in range(MAX_SHRINKS + 1):
        prefix = _window(ids, i, limit)
        if cache is not None:
            hit = cache.get(provider.provider_id, prefix, ids[i])
            if hit is not None:
                return hit
        try:
            result = provider.score(prefix, ids[i])
        except ContextOverflowError:
            # slide the window: drop the oldest quarter and retry
            limit = max(2, (3 * len(prefix)) // 4 + 1)
            continue
        if cache is not None:
            cache.put(provider.provider_id, prefix, ids[i], result)
        return result
    raise ContextOverflowError(f"prefix still too long after {MAX_SHRINKS} truncations")


def score_sequence(tokens: TokenSeq, provider: Provider, cache: ScoreCache | None = None) -> ScoredSeq:
    """Score every token of ``tokens`` conditioned on the tokens before it.

    Positions are scored concurrently when the provider advertises
    ``max_in_flight > 1``; conditioning is unchanged. Any provider failure
    raises :class:`ScoringError` carrying the first failing position.
    Completed positions stay in the cache so a retry resumes cheaply.
    """
    if len(tokens) == 0:
        raise ValueError("cannot score an empty token sequence")
    ids = tokens.ids
    workers = getattr(provider, "max_in_flight", 1)
    results: list[ScoreResult] = []
    if workers <= 1:
        for i in range(len(ids)):
            try:
                results.append(_score_position(provider, cache, ids, i))
            except ProviderError as exc:
                raise ScoringError(f"scoring failed at token {i}: {exc}", i, exc.retryable) from exc
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_score_position, provider, cache, ids, i) for i in range(len(ids))]
            for i, fut in enumerate(futures):
                try:
                    results.append(fut.result())
                except ProviderError as exc:
                    for f in futures[i + 1 :]:
                        f.cancel()
                    raise ScoringError(f"scoring failed at token {i}: {exc}", i, exc.retryable) from exc
    scored = tuple(
        ScoredToken(ids[i], tokens.texts[i], r.logprob, r.rank, r.alternatives) for i, r in enumerate(results)
    )
    return ScoredSeq(scored, provider.provider_id)
