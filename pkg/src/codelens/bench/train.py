"""Mini-batch training with early stopping on validation AUC."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..detect import DetectError, ModelDetector, model_features
from ..grid import CLAMP_LO
from ..nn import Adam, build_model, cross_entropy
from ..nn.checkpoint import Checkpoint, snapshot
from ..nn.models import config_to_dict
from .data import CodeSample
from .metrics import auc
from .split import DatasetSplit

LEARNING_RATE = 1e-4
BATCH_SIZE = 32
PATIENCE = 5
MAX_EPOCHS = 100


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lr: float = LEARNING_RATE
    batch_size: int = BATCH_SIZE
    patience: int = PATIENCE
    max_epochs: int = MAX_EPOCHS
    seed: int = 0
    clamp_lo: float = CLAMP_LO


@dataclass
class EpochLog:
    epoch: int
    loss: float
    val_auc: float


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list[EpochLog] = field(default_factory=list)

    @property
    def best_val_auc(self) -> float | None:
        return self.checkpoint.metadata.get("best_val_auc")


def _features(kind: str, config, samples: Sequence[CodeSample], clamp_lo: float) -> list[np.ndarray]:
    out = []
    for s in samples:
        item = s.seq if kind == "seq" else s.grid
        if item is None:
            item = s.scored
        if item is None:
            raise DetectError(f"sample {s.id} has no scores; run the scorer first")
        out.append(model_features(kind, config, item, clamp_lo))
    return out


def _batch(kind: str, feats: list[np.ndarray], idx) -> object:
    chosen = [feats[i] for i in idx]
    return chosen if kind == "seq" else np.stack(chosen)


def _val_auc(kind: str, ckpt: Checkpoint, feats, labels, clamp_lo: float) -> float:
    det = ModelDetector(ckpt, clamp_lo)
    logits = det.logits(feats)
    return auc(logits[:, 1] - logits[:, 0], labels)


def train(
    kind: str,
    model_config,
    split: DatasetSplit,
    data: Sequence[CodeSample],
    config: TrainConfig | None = None,
    log: Callable[[EpochLog], None] | None = None,
) -> TrainResult:
    """Train ``kind`` on ``split.train`` and keep the best-validation weights.

    Training stops after ``patience`` epochs without a strict improvement of
    validation AUC, or at ``max_epochs``. With ``max_epochs == 0`` the
    initialization checkpoint is returned.
    """
    cfg = config or TrainConfig()
    model = build_model(kind, model_config, seed=cfg.seed)
    order = [name for name, _ in model.named_parameters()]
    train_s = split.select(data, "train")
    val_s = split.select(data, "validation")
    x_train = _features(kind, model.config, train_s, cfg.clamp_lo)
    y_train = np.array([s.label for s in train_s], dtype=np.int64)
    x_val = _features(kind, model.config, val_s, cfg.clamp_lo)
    y_val = [s.label for s in val_s]
    opt = Adam(model.parameters(), lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)

    meta = {
        "param_order": order,
        "seed": cfg.seed,
        "lr": cfg.lr,
        "batch_size": cfg.batch_size,
        "patience": cfg.patience,
        "max_epochs": cfg.max_epochs,
        "clamp_lo": cfg.clamp_lo,
        "model_config": config_to_dict(model.config),
        "n_train": len(train_s),
        "n_validation": len(val_s),
        "best_epoch": 0,
        "best_val_auc": None,
        "epochs_run": 0,
    }
    best = snapshot(kind, model, None, meta)
    history: list[EpochLog] = []
    best_auc = -math.inf
    stale = 0
    for epoch in range(1, cfg.max_epochs + 1):
        model.train()
        perm = rng.permutation(len(x_train))
        losses = []
        for start in range(0, len(perm), cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            loss = cross_entropy(model(_batch(kind, x_train, idx)), y_train[idx])
            value = float(loss.item())
            if not math.isfinite(value):
                raise TrainingDivergedError(f"non-finite loss {value} at epoch {epoch}, batch starting {start}")
            model.zero_grad()
            loss.backward()
            opt.step()
            losses.append(value * len(idx))
        current = snapshot(kind, model, opt, meta)
        val = _val_auc(kind, current, x_val, y_val, cfg.clamp_lo)
        entry = EpochLog(epoch, float(np.sum(losses) / len(perm)), val)
        history.append(entry)
        if log is not None:
            log(entry)
        if val > best_auc:
            best_auc, stale = val, 0
            best = current
            best.metadata = dict(meta, best_epoch=epoch, best_val_auc=val)
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    best.metadata["epochs_run"] = len(history)
    best.metadata["history"] = [[h.epoch, h.loss, h.val_auc] for h in history]
    return TrainResult(best, history)
