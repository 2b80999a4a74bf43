"""Zero-shot statistics, model-backed detectors and thresholded verdicts.

Every detector returns a :class:`DetectorScore` whose ``score`` is oriented
so that higher means more likely LLM-generated:

    logp      score = mean log probability
    entropy   score = -(mean entropy of the renormalized top-k distribution)
    rank      score = -(mean rank)
    logrank   score = -(mean log rank)
    lrr       score = |sum log p| / sum log rank
    vit, resnet, seq
              score = softmax probability of the LLM class
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import CLAMP_LO, LogProbGrid, SeqVector, build_grid, to_canvas, to_seq_vector
from .nn import no_grad
from .nn.checkpoint import Checkpoint
from .scorer.types import ScoredSeq

ZERO_SHOT_IDS = ("logp", "entropy", "rank", "logrank", "lrr")
MODEL_IDS = ("vit", "resnet", "seq")
DETECTOR_IDS = ZERO_SHOT_IDS + MODEL_IDS

# Youden thresholds of the training split of the bundled synthetic benchmark
# at full separability; model detectors threshold their class probability.
DEFAULT_THRESHOLDS = {
    "logp": -2.12,
    "entropy": -1.35,
    "rank": -7.24,
    "logrank": -0.905,
    "lrr": 2.26,
    "vit": 0.5,
    "resnet": 0.5,
    "seq": 0.5,
}


class DetectError(ValueError):
    pass


class EmptySequenceError(DetectError):
    pass


class MissingAlternativesError(DetectError):
    pass


class DegenerateStatisticError(DetectError):
    pass


class UnknownDetectorError(DetectError):
    pass


@dataclass(frozen=True)
class DetectorScore:
    score: float
    raw: float
    detector_id: str


@dataclass(frozen=True)
class Verdict:
    label: str
    score: DetectorScore
    threshold: float


def _logprobs(x: ScoredSeq | SeqVector | LogProbGrid | Sequence[float]) -> np.ndarray:
    if isinstance(x, ScoredSeq):
        vals = np.asarray(x.logprobs, dtype=np.float64)
    elif isinstance(x, SeqVector):
        vals = np.asarray(x.values, dtype=np.float64)
    elif isinstance(x, LogProbGrid):
        vals = x.cells()
    else:
        vals = np.asarray(x, dtype=np.float64)
    if vals.size == 0:
        raise EmptySequenceError("statistic undefined for an empty sequence")
    return vals


def _ranks(scored: ScoredSeq) -> np.ndarray:
    if len(scored) == 0:
        raise EmptySequenceError("statistic undefined for an empty sequence")
    return np.asarray(scored.ranks, dtype=np.float64)


def mean_logp(scored) -> DetectorScore:
    raw = float(np.mean(_logprobs(scored)))
    return DetectorScore(raw, raw, "logp")


def token_entropy(alternatives) -> float:
    if not alternatives:
        raise MissingAlternativesError("token has no alternatives to compute entropy over")
    lp = np.array([a[1] for a in alternatives], dtype=np.float64)
    q = np.exp(lp - lp.max())
    q /= q.sum()
    nz = q[q > 0]
    return float(-(nz * np.log(nz)).sum())


def mean_entropy(scored: ScoredSeq) -> DetectorScore:
    if len(scored) == 0:
        raise EmptySequenceError("statistic undefined for an empty sequence")
    raw = float(np.mean([token_entropy(t.alternatives) for t in scored.tokens]))
    return DetectorScore(-raw, raw, "entropy")


def mean_rank(scored: ScoredSeq) -> DetectorScore:
    raw = float(np.mean(_ranks(scored)))
    return DetectorScore(-raw, raw, "rank")


def mean_log_rank(scored: ScoredSeq) -> DetectorScore:
    raw = float(np.mean(np.log(_ranks(scored))))
    return DetectorScore(-raw, raw, "logrank")


def lrr(scored: ScoredSeq) -> DetectorScore:
    """Log-likelihood to log-rank ratio, |sum log p| / sum ln r."""
    denom = float(np.sum(np.log(_ranks(scored))))
    if denom == 0.0:
        raise DegenerateStatisticError("LRR undefined: every token has rank 1")
    raw = abs(float(np.sum(_logprobs(scored)))) / denom
    return DetectorScore(raw, raw, "lrr")


ZERO_SHOT: dict[str, Callable[[ScoredSeq], DetectorScore]] = {
    "logp": mean_logp,
    "entropy": mean_entropy,
    "rank": mean_rank,
    "logrank": mean_log_rank,
    "lrr": lrr,
}


def classify(score: DetectorScore, threshold: float) -> Verdict:
    return Verdict("llm" if score.score >= threshold else "human", score, float(threshold))


def softmax_llm(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    p = np.exp(z)
    return p[:, 1] / p.sum(axis=1)


def model_features(kind: str, config, item, clamp_lo: float = CLAMP_LO) -> np.ndarray:
    """Model input for one sample: canvas pixels (vision) or log probs (seq).

    A two-channel vision config gets the pad mask as its second channel.
    """
    if isinstance(item, ScoredSeq):
        item = to_seq_vector(item) if kind == "seq" else build_grid(item)
    if kind == "seq":
        if not isinstance(item, SeqVector):
            raise DetectError("sequence detector needs a SeqVector or ScoredSeq")
        return item.values
    if not isinstance(item, LogProbGrid):
        raise DetectError(f"{kind} detector needs a LogProbGrid or ScoredSeq")
    h, w = config.image_size
    canvas = to_canvas(item, h, w, clamp_lo)
    if config.channels == 2:
        return np.stack([canvas.pixels, canvas.mask.astype(canvas.pixels.dtype)], axis=-1)
    return canvas.pixels


class ModelDetector:
    """Wraps a trained checkpoint; inputs are grids (vision) or vectors (seq)."""

    def __init__(self, ckpt: Checkpoint, clamp_lo: float = CLAMP_LO, batch_size: int = 64):
        self.kind = ckpt.kind
        self.model = ckpt.build()
        self.clamp_lo = clamp_lo
        self.batch_size = batch_size

    @property
    def detector_id(self) -> str:
        return self.kind

    def features(self, item):
        return model_features(self.kind, self.model.config, item, self.clamp_lo)

    def logits(self, features: list) -> np.ndarray:
        self.model.eval()
        out = []
        with no_grad():
            for i in range(0, len(features), self.batch_size):
                batch = features[i : i + self.batch_size]
                x = batch if self.kind == "seq" else np.stack(batch)
                out.append(np.asarray(self.model(x).data, dtype=np.float64))
        return np.concatenate(out) if out else np.zeros((0, 2))

    def score_many(self, items) -> list[DetectorScore]:
        logits = self.logits([self.features(it) for it in items])
        probs = softmax_llm(logits) if len(logits) else np.zeros(0)
        return [DetectorScore(float(p), float(l[1] - l[0]), self.kind) for p, l in zip(probs, logits)]

    def score(self, item) -> DetectorScore:
        return self.score_many([item])[0]


def zero_shot(detector_id: str) -> Callable[[ScoredSeq], DetectorScore]:
    try:
        return ZERO_SHOT[detector_id]
    except KeyError:
        if detector_id in MODEL_IDS:
            raise UnknownDetectorError(f"{detector_id} is a trained detector and needs a checkpoint") from None
        raise UnknownDetectorError(f"unknown detector {detector_id!r}; expected one of {', '.join(DETECTOR_IDS)}") from None


def safe_score(detector_id: str, scored: ScoredSeq) -> DetectorScore:
    """Zero-shot score that maps a degenerate statistic to its limit.

    Used in bulk evaluation where one all-rank-1 sample must not abort a
    run: LRR with zero log rank is reported as +inf (maximally LLM-like).
    """
    try:
        return zero_shot(detector_id)(scored)
    except DegenerateStatisticError:
        return DetectorScore(math.inf, math.inf, detector_id)
