"""Dataset records and their JSONL representation.

One JSON object per line::

    {"id": str, "source": str, "language": str, "label": 0 | 1,
     "generator": str?,                       # what produced the sample
     "scored": {"provider_id": str, "ids": [int],
                "logprobs": [float], "ranks": [int],
                "alternatives": [[[text, logprob], ...], ...]}?,
     "grid": {"n": int, "m": int, "pad_value": float,
              "values": [[float]], "tokens": [[str]]}?,
     "seq": [float]?,
     "provenance": {...}?}                    # set on derived copies

Floats are written with Python's shortest round-trip repr, so writing the
same samples twice yields byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..grid import LogProbGrid, SeqVector, build_grid, to_seq_vector
from ..scorer.types import ScoredSeq, ScoredToken
from ..tokenizer import get_tokenizer

LANGUAGES = ("c", "cpp", "go", "java", "python", "ruby", "synthetic")


class SchemaError(ValueError):
    """Raised for malformed dataset records; lists every offending line."""


@dataclass
class CodeSample:
    id: str
    source: str
    language: str
    label: int
    generator: str | None = None
    scored: ScoredSeq | None = None
    grid: LogProbGrid | None = None
    seq: SeqVector | None = None
    provenance: dict = field(default_factory=dict)

    def with_scores(self, scored: ScoredSeq) -> CodeSample:
        return CodeSample(
            self.id, self.source, self.language, self.label, self.generator,
            scored, build_grid(scored), to_seq_vector(scored), dict(self.provenance),
        )

    @property
    def n_tokens(self) -> int:
        if self.scored is not None:
            return len(self.scored)
        if self.seq is not None:
            return len(self.seq)
        return len(get_tokenizer().encode(self.source))


def scored_to_json(scored: ScoredSeq) -> dict:
    return {
        "provider_id": scored.provider_id,
        "ids": scored.ids,
        "logprobs": scored.logprobs,
        "ranks": scored.ranks,
        "alternatives": [[[t, lp] for t, lp in tok.alternatives] for tok in scored.tokens],
    }


def scored_from_json(obj: dict, source: str) -> ScoredSeq:
    lps = obj["logprobs"]
    ranks = obj.get("ranks") or [0] * len(lps)
    alts = obj.get("alternatives") or [[] for _ in lps]
    tok = get_tokenizer()
    seq = tok.from_ids(obj["ids"]) if "ids" in obj else tok.encode(source)
    if not (len(seq) == len(lps) == len(ranks) == len(alts)):
        raise ValueError("scored arrays disagree in length with the token sequence")
    tokens = tuple(
        ScoredToken(i, t, float(lp), int(r), tuple((str(a), float(v)) for a, v in alt))
        for i, t, lp, r, alt in zip(seq.ids, seq.texts, lps, ranks, alts)
    )
    return ScoredSeq(tokens, str(obj.get("provider_id", "unknown")))


def sample_to_json(s: CodeSample) -> dict:
    rec: dict = {"id": s.id, "source": s.source, "language": s.language, "label": s.label}
    if s.generator is not None:
        rec["generator"] = s.generator
    if s.scored is not None:
        rec["scored"] = scored_to_json(s.scored)
    if s.grid is not None:
        rec["grid"] = s.grid.to_json()
    if s.seq is not None:
        rec["seq"] = [float(v) for v in s.seq.values]
    if s.provenance:
        rec["provenance"] = s.provenance
    return rec


def _check_record(rec) -> str | None:
    if not isinstance(rec, dict):
        return "record is not a JSON object"
    for key, typ in (("id", str), ("source", str), ("language", str)):
        if not isinstance(rec.get(key), typ):
            return f"field {key!r} missing or not a {typ.__name__}"
    if rec["language"] not in LANGUAGES:
        return f"language {rec['language']!r} not in {LANGUAGES}"
    label = rec.get("label")
    if isinstance(label, bool) or label not in (0, 1):
        return f"label must be 0 or 1, got {label!r}"
    if "generator" in rec and rec["generator"] is not None and not isinstance(rec["generator"], str):
        return "generator must be a string"
    scored = rec.get("scored")
    if scored is not None:
        if not isinstance(scored, dict) or not isinstance(scored.get("logprobs"), list):
            return "scored.logprobs must be a list"
        if any(not isinstance(v, (int, float)) or v > 0 for v in scored["logprobs"]):
            return "scored.logprobs must be numbers <= 0"
    grid = rec.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or not {"n", "m", "values"} <= set(grid):
            return "grid needs n, m and values"
        vals = grid["values"]
        if not isinstance(vals, list) or len(vals) != grid["n"] or any(len(r) != grid["m"] for r in vals):
            return "grid.values shape disagrees with n x m"
    seq = rec.get("seq")
    if seq is not None and (not isinstance(seq, list) or any(not isinstance(v, (int, float)) for v in seq)):
        return "seq must be a list of numbers"
    return None


def sample_from_json(rec: dict) -> CodeSample:
    scored = scored_from_json(rec["scored"], rec["source"]) if rec.get("scored") is not None else None
    grid = LogProbGrid.from_json(rec["grid"]) if rec.get("grid") is not None else None
    seq = SeqVector(np.asarray(rec["seq"], dtype=np.float64)) if rec.get("seq") is not None else None
    return CodeSample(
        rec["id"], rec["source"], rec["language"], int(rec["label"]), rec.get("generator"),
        scored, grid, seq, dict(rec.get("provenance") or {}),
    )


def ingest(path: str | Path) -> list[CodeSample]:
    """Load and validate a JSONL dataset; any malformed line aborts the load."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise SchemaError(f"{path}: no such file") from None
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not UTF-8 ({exc})") from exc
    samples, problems = [], []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"{path}:{lineno}: invalid JSON ({exc.msg})")
            continue
        err = _check_record(rec)
        if err is None and rec["id"] in seen:
            err = f"duplicate id {rec['id']!r}"
        if err is None:
            try:
                samples.append(sample_from_json(rec))
                seen.add(rec["id"])
            except (ValueError, KeyError, TypeError) as exc:
                err = str(exc)
        if err is not None:
            problems.append(f"{path}:{lineno}: {err}")
    if problems:
        raise SchemaError("\n".join(problems))
    return samples


def dumps_sample(s: CodeSample) -> str:
    return json.dumps(sample_to_json(s), ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def write_jsonl(samples: Iterable[CodeSample], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            fh.write(dumps_sample(s) + "\n")
