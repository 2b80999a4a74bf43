"""Content-addressed on-disk cache of per-token scores.

Each entry is one JSON file named by the SHA-256 of the canonical JSON
encoding of ``[provider_id, prefix_ids, next_id]`` and stored under a
two-character fan-out directory::

    <root>/ab/ab12...ef.json
    {"key": [provider_id, prefix_ids, next_id],
     "logprob": -1.25, "rank": 2, "alternatives": [["foo", -0.4], ...]}

Entries are written once through a temporary file and an atomic rename, so
concurrent readers never observe partial files. The cache is append-only:
a put on an existing key keeps the original entry.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Sequence

from .types import CacheStats, ScoreResult

log = logging.getLogger(__name__)


class CorruptEntryError(ValueError):
    pass


def cache_key(provider_id: str, prefix: Sequence[int], next_id: int) -> str:
    material = json.dumps([provider_id, [int(t) for t in prefix], int(next_id)], separators=(",", ":"))
    return hashlib.sha256(material.encode()).hexdigest()


class ScoreCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.stats = CacheStats()
        self._write_lock = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def read_entry(self, key: str) -> ScoreResult | None:
        path = self.path_for(key)
        try:
            raw = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        try:
            return ScoreResult.from_json(json.loads(raw))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptEntryError(f"corrupt cache entry {path}: {exc}") from exc

    def get(self, provider_id: str, prefix: Sequence[int], next_id: int) -> ScoreResult | None:
        """Cached result, or None on a miss. Corrupt entries count as misses."""
        key = cache_key(provider_id, prefix, next_id)
        try:
            entry = self.read_entry(key)
        except CorruptEntryError as exc:
            log.warning("%s; recomputing", exc)
            self.stats.corrupt += 1
            entry = None
        if entry is None:
            self.stats.misses += 1
        else:
            self.stats.hits += 1
        return entry

    def put(self, provider_id: str, prefix: Sequence[int], next_id: int, result: ScoreResult) -> None:
        key = cache_key(provider_id, prefix, next_id)
        path = self.path_for(key)
        body = result.to_json()
        body["key"] = [provider_id, [int(t) for t in prefix], int(next_id)]
        data = json.dumps(body, sort_keys=True)
        with self._write_lock:
            if path.exists():
                try:
                    self.read_entry(key)
                    return
                except CorruptEntryError:
                    pass  # replace the damaged entry
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(data)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            self.stats.writes += 1
