"""Completion-endpoint client (OpenAI legacy ``/v1/completions`` wire format).

For each position the prompt is the decoded prefix, one token is requested
with ``logprobs=k`` and the actual next token is looked up among the
returned top-k candidates. Tokens missing from that list get the floor
log probability and rank ``k + 1``.
"""
from __future__ import annotations

import ast
import json
import os
import threading
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import httpx

from ..tokenizer import Tokenizer, get_tokenizer
from .types import (
    FLOOR_LOGPROB,
    K_ALTERNATIVES,
    AuthError,
    ContextOverflowError,
    ProviderError,
    RateLimitError,
    ScoreResult,
)

API_KEY_ENV = "CODELENS_API_KEY"
_OVERFLOW_MARKERS = ("context_length_exceeded", "maximum context length", "context length")


@dataclass
class RemoteSettings:
    endpoint: str = "https://api.openai.com/v1/completions"
    model: str = "gpt-3.5-turbo-instruct"
    api_key_env: str = API_KEY_ENV
    top_k: int = K_ALTERNATIVES
    context_limit: int = 4096
    max_in_flight: int = 4
    requests_per_second: float = 5.0
    burst: int = 5
    max_retries: int = 4
    timeout: float = 30.0

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> RemoteSettings:
        """Read settings from a JSON object; unknown keys are rejected."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{path}: unknown provider settings {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"no credential: set the {self.api_key_env} environment variable")
        return key

    def to_dict(self) -> dict:
        return asdict(self)


class TokenBucket:
    """Thread-safe token bucket; ``acquire`` blocks until a token is free."""

    def __init__(self, rate: float, burst: int, clock: Callable[[], float] = time.monotonic, sleep=time.sleep):
        if rate <= 0 or burst < 1:
            raise ValueError("rate must be positive and burst at least 1")
        self.rate = rate
        self.capacity = float(burst)
        self.tokens = float(burst)
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
                self._last = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self._sleep(wait)


def candidate_bytes(text: str) -> bytes:
    """Bytes of a candidate token as reported by the endpoint.

    Tokens that are not valid UTF-8 on their own are reported as
    ``"bytes:\\xe2\\x80"``.
    """
    if text.startswith("bytes:"):
        try:
            return ast.literal_eval("b'" + text[len("bytes:") :].replace("'", "\\'") + "'")
        except (ValueError, SyntaxError):
            pass
    return text.encode("utf-8")


def parse_top_logprobs(top: dict[str, float], actual: bytes, k: int) -> ScoreResult:
    alts = sorted(((t, min(float(lp), 0.0)) for t, lp in top.items()), key=lambda a: -a[1])[:k]
    for i, (text, lp) in enumerate(alts):
        if candidate_bytes(text) == actual:
            return ScoreResult(lp, i + 1, tuple(alts))
    return ScoreResult(FLOOR_LOGPROB, k + 1, tuple(alts))


class RemoteProvider:
    def __init__(
        self,
        settings: RemoteSettings | None = None,
        transport: httpx.BaseTransport | None = None,
        tokenizer: Tokenizer | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.settings = settings or RemoteSettings()
        s = self.settings
        self.provider_id = f"remote:{s.endpoint}:{s.model}:k={s.top_k}:temperature=0:top_p=1:bos=empty"
        self.context_limit = s.context_limit
        self.max_in_flight = max(1, s.max_in_flight)
        self.tokenizer = tokenizer or get_tokenizer()
        self._client = httpx.Client(transport=transport, timeout=s.timeout)
        self._bucket = TokenBucket(s.requests_per_second, s.burst, sleep=sleep)
        self._sleep = sleep
        self.calls = 0
        self._calls_lock = threading.Lock()

    def close(self) -> None:
        self._client.close()

    def _request(self, prompt: str) -> dict:
        s = self.settings
        body = {
            "model": s.model,
            "prompt": prompt,
            "max_tokens": 1,
            "temperature": 0,
            "top_p": 1,
            "logprobs": s.top_k,
        }
        headers = {"Authorization": f"Bearer {s.api_key()}"}
        self._bucket.acquire()
        with self._calls_lock:
            self.calls += 1
        try:
            resp = self._client.post(s.endpoint, json=body, headers=headers)
        except httpx.TransportError as exc:
            raise ProviderError(f"network error contacting {s.endpoint}: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"endpoint rejected the credential in {s.api_key_env} (HTTP {resp.status_code})")
        if resp.status_code == 429:
            retry = resp.headers.get("retry-after")
            try:
                retry_after = float(retry) if retry is not None else None
            except ValueError:
                retry_after = None
            raise RateLimitError("rate limited by endpoint", retry_after)
        if resp.status_code in (400, 413) and any(m in resp.text.lower() for m in _OVERFLOW_MARKERS):
            raise ContextOverflowError(f"prompt exceeds the context of {s.model}")
        if resp.status_code >= 400:
            err = ProviderError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
            err.retryable = resp.status_code >= 500
            raise err
        try:
            return resp.json()
        except ValueError as exc:
            raise ProviderError(f"endpoint returned malformed JSON: {exc}") from exc

    def score(self, prefix: Sequence[int], next_id: int) -> ScoreResult:
        prompt = self.tokenizer.decode(list(prefix))
        actual = self.tokenizer.token_bytes(int(next_id))
        attempt = 0
        while True:
            try:
                data = self._request(prompt)
                break
            except RateLimitError as exc:
                if attempt >= self.settings.max_retries:
                    raise
                self._sleep(exc.retry_after if exc.retry_after is not None else 0.5 * 2**attempt)
            except ProviderError as exc:
                if not exc.retryable or attempt >= self.settings.max_retries:
                    raise
                self._sleep(0.5 * 2**attempt)
            attempt += 1
        try:
            top = data["choices"][0]["logprobs"]["top_logprobs"][0]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"response lacks top_logprobs: {exc}") from exc
        return parse_top_logprobs(top, actual, self.settings.top_k)


def remote_score(prefix, next_id: int, settings: RemoteSettings, transport: httpx.BaseTransport | None = None) -> ScoreResult:
    ids = prefix.ids if hasattr(prefix, "ids") else prefix
    provider = RemoteProvider(settings, transport)
    try:
        return provider.score(ids, next_id)
    finally:
        provider.close()
