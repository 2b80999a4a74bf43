from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import CodeSample

DEFAULT_RATIOS = (0.8, 0.1, 0.1)
MIN_SAMPLES = 10


class SplitError(ValueError):
    pass


@dataclass
class DatasetSplit:
    train: list[str]
    validation: list[str]
    test: list[str]
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seed: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["ratios"] = list(self.ratios)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> DatasetSplit:
        return cls(list(obj["train"]), list(obj["validation"]), list(obj["test"]), tuple(obj["ratios"]), int(obj["seed"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> DatasetSplit:
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def select(self, samples: Sequence[CodeSample], part: str) -> list[CodeSample]:
        by_id = {s.id: s for s in samples}
        try:
            return [by_id[i] for i in getattr(self, part)]
        except KeyError as exc:
            raise SplitError(f"split references sample {exc.args[0]!r} missing from the dataset") from None


def split(samples: Sequence[CodeSample], ratios: tuple[float, float, float] = DEFAULT_RATIOS, seed: int = 0) -> DatasetSplit:
    """Stratified split: each label is shuffled and cut by ``ratios`` separately."""
    if len(samples) < MIN_SAMPLES:
        raise SplitError(f"need at least {MIN_SAMPLES} samples to split, got {len(samples)}")
    if len(ratios) != 3 or min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    parts: tuple[list[str], list[str], list[str]] = ([], [], [])
    for label in (0, 1):
        ids = sorted(s.id for s in samples if s.label == label)
        ids = [ids[i] for i in rng.permutation(len(ids))]
        n_train = int(round(ratios[0] * len(ids)))
        n_val = int(round(ratios[1] * len(ids)))
        parts[0].extend(ids[:n_train])
        parts[1].extend(ids[n_train : n_train + n_val])
        parts[2].extend(ids[n_train + n_val :])
    # interleave classes deterministically so batches are mixed
    shuffled = tuple([p[i] for i in rng.permutation(len(p))] for p in parts)
    return DatasetSplit(*shuffled, ratios=tuple(ratios), seed=seed)
