"""Per-token log-probability scoring with pluggable providers."""
from .cache import CorruptEntryError, ScoreCache, cache_key
from .oracle import OracleProvider, oracle_score
from .remote import RemoteProvider, RemoteSettings, TokenBucket, remote_score
from .sequence import score_sequence
from .types import (
    FLOOR_LOGPROB,
    K_ALTERNATIVES,
    AuthError,
    ContextOverflowError,
    ProviderError,
    RateLimitError,
    ScoredSeq,
    ScoredToken,
    ScoreResult,
    ScoringError,
)

__all__ = [
    "FLOOR_LOGPROB",
    "K_ALTERNATIVES",
    "AuthError",
    "ContextOverflowError",
    "CorruptEntryError",
    "OracleProvider",
    "ProviderError",
    "RateLimitError",
    "RemoteProvider",
    "RemoteSettings",
    "ScoreCache",
    "ScoreResult",
    "ScoredSeq",
    "ScoredToken",
    "ScoringError",
    "TokenBucket",
    "cache_key",
    "oracle_score",
    "remote_score",
    "score_sequence",
]
