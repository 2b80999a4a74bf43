from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

K_ALTERNATIVES = 10
FLOOR_PROB = 1e-10
FLOOR_LOGPROB = math.log(FLOOR_PROB)


class ScoringError(RuntimeError):
    """Scoring failed at ``position``; nothing from the sequence is returned."""

    def __init__(self, message: str, position: int | None = None, retryable: bool = True):
        super().__init__(message)
        self.position = position
        self.retryable = retryable


class ProviderError(RuntimeError):
    retryable = True


class AuthError(ProviderError):
    retryable = False


class RateLimitError(ProviderError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class ContextOverflowError(ProviderError):
    """The prompt exceeded the provider's context; the caller must truncate."""

    retryable = False


Alternative = tuple[str, float]


@dataclass(frozen=True)
class ScoreResult:
    logprob: float
    rank: int
    alternatives: tuple[Alternative, ...]

    def to_json(self) -> dict:
        return {
            "logprob": self.logprob,
            "rank": self.rank,
            "alternatives": [[t, lp] for t, lp in self.alternatives],
        }

    @classmethod
    def from_json(cls, obj: dict) -> ScoreResult:
        return cls(
            float(obj["logprob"]),
            int(obj["rank"]),
            tuple((str(t), float(lp)) for t, lp in obj["alternatives"]),
        )


@dataclass(frozen=True)
class ScoredToken:
    id: int
    text: str
    logprob: float
    rank: int
    alternatives: tuple[Alternative, ...] = ()


@dataclass(frozen=True)
class ScoredSeq:
    tokens: tuple[ScoredToken, ...]
    provider_id: str

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def logprobs(self) -> list[float]:
        return [t.logprob for t in self.tokens]

    @property
    def ranks(self) -> list[int]:
        return [t.rank for t in self.tokens]

    @property
    def ids(self) -> list[int]:
        return [t.id for t in self.tokens]

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


class Provider(Protocol):
    provider_id: str
    context_limit: int | None

    def score(self, prefix: Sequence[int], next_id: int) -> ScoreResult: ...


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    corrupt: int = 0
    writes: int = 0
