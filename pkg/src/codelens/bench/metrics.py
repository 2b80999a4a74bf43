from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..detect import DetectorScore, classify


class SingleClassError(ValueError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass
class EvalReport:
    detector_id: str
    auc: float
    fpr: float
    fnr: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    flops: int | None = None
    latency: float | None = None
    split: str = "test"
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, allow_nan=True)


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1D and of equal length")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if y.min(initial=1) == y.max(initial=0) or len(y) == 0:
        raise SingleClassError("both classes must be present")
    return s, y.astype(int)


def _average_ranks(s: np.ndarray) -> np.ndarray:
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    # tied runs share the mean of the 1-based ranks they span
    starts = np.r_[0, np.flatnonzero(sorted_s[1:] != sorted_s[:-1]) + 1]
    ends = np.r_[starts[1:], len(s)]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(len(s))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(pos > neg) + P(tie) / 2."""
    s, y = _check(scores, labels)
    ranks = _average_ranks(s)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def fpr_fnr(scores: Sequence[float], labels: Sequence[int], threshold: float) -> tuple[float, float, Confusion]:
    s, y = _check(scores, labels)
    flagged = np.array([classify(DetectorScore(v, v, ""), threshold).label == "llm" for v in s], dtype=bool)
    tp = int(np.sum(flagged & (y == 1)))
    fp = int(np.sum(flagged & (y == 0)))
    tn = int(np.sum(~flagged & (y == 0)))
    fn = int(np.sum(~flagged & (y == 1)))
    return fp / (fp + tn), fn / (fn + tp), Confusion(tp, fp, tn, fn)


def youden_threshold(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Threshold maximizing TPR - FPR over the observed scores.

    Ties go to the largest threshold, i.e. the most conservative one.
    """
    s, y = _check(scores, labels)
    cands = np.unique(s)
    pos, neg = y == 1, y == 0
    best, best_j = cands[-1], -np.inf
    for t in cands:
        flagged = s >= t
        j = flagged[pos].mean() - flagged[neg].mean()
        if j >= best_j:
            best, best_j = t, j
    return float(best)


def evaluate_scores(
    detector_id: str,
    test_scores,
    test_labels,
    threshold: float,
    split: str = "test",
    flops: int | None = None,
    latency: float | None = None,
    config: dict | None = None,
) -> EvalReport:
    fpr, fnr, c = fpr_fnr(test_scores, test_labels, threshold)
    return EvalReport(
        detector_id, auc(test_scores, test_labels), fpr, fnr, float(threshold),
        c.tp, c.fp, c.tn, c.fn, flops, latency, split, dict(config or {}),
    )
