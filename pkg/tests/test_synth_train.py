import math

import numpy as np
import pytest

from codelens.bench import TrainConfig, TrainingDivergedError, auc, split, synthesize_dataset, train
from codelens.bench.data import dumps_sample
from codelens.bench.synth import separability_rates
from codelens.detect import ZERO_SHOT_IDS, safe_score
from codelens.nn import ResNetConfig, SeqConfig, ViTConfig, build_model
from conftest import synthetic


def detector_auc(data, det):
    return auc([safe_score(det, s.scored).score for s in data], [s.label for s in data])


def test_deterministic():
    a = synthesize_dataset(6, 0.7, seed=4)
    b = synthesize_dataset(6, 0.7, seed=4)
    assert [dumps_sample(s) for s in a] == [dumps_sample(s) for s in b]
    c = synthesize_dataset(6, 0.7, seed=5)
    assert [s.source for s in a] != [s.source for s in c]


def test_labels_and_records():
    data = synthesize_dataset(6, 1.0, seed=0)
    assert [s.label for s in data] == [0, 1, 0, 1, 0, 1]
    for s in data:
        assert s.language == "python"
        assert s.grid.n == len([1 for row in s.grid.tokens if row])
        compile(s.source, s.id, "exec")


def test_rate_endpoints():
    assert separability_rates(0.0) == (0.0, 0.0)
    assert separability_rates(1.0) == (1.0, 1.0)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        synthesize_dataset(1, 0.5)
    with pytest.raises(ValueError):
        synthesize_dataset(10, 1.5)


@pytest.mark.slow
@pytest.mark.parametrize("det", ZERO_SHOT_IDS)
def test_zero_separability_is_chance(det):
    assert abs(detector_auc(synthetic(2000, 0.0), det) - 0.5) <= 0.05


@pytest.mark.slow
def test_full_separability_logp():
    assert detector_auc(synthetic(2000, 1.0), "logp") > 0.95


@pytest.mark.slow
@pytest.mark.parametrize("det", ZERO_SHOT_IDS)
def test_orientation_coherence(det):
    assert detector_auc(synthetic(2000, 1.0), det) >= 0.5


TINY = ResNetConfig((16, 16), base_channels=2, blocks_per_stage=1)


@pytest.fixture(scope="module")
def tiny():
    data = synthesize_dataset(40, 1.0, seed=3)
    return data, split(data, seed=0)


def test_zero_epochs_returns_init(tiny):
    data, sp = tiny
    result = train("resnet", TINY, sp, data, TrainConfig(max_epochs=0, seed=2))
    init = build_model("resnet", TINY, seed=2).state_dict()
    for k, v in init.items():
        np.testing.assert_array_equal(result.checkpoint.state[k], v)
    assert result.history == [] and result.checkpoint.metadata["epochs_run"] == 0


@pytest.mark.parametrize(
    "kind,cfg",
    [("resnet", TINY), ("vit", ViTConfig((16, 16), 8, 8, 1, 2, 8)), ("seq", SeqConfig(8, 1, 2, 8, 20, 20))],
)
def test_training_deterministic(tiny, kind, cfg):
    data, sp = tiny
    tc = TrainConfig(max_epochs=2, seed=1, batch_size=8)
    a = train(kind, cfg, sp, data, tc)
    b = train(kind, cfg, sp, data, tc)
    assert [(h.loss, h.val_auc) for h in a.history] == [(h.loss, h.val_auc) for h in b.history]
    for k in a.checkpoint.state:
        np.testing.assert_array_equal(a.checkpoint.state[k], b.checkpoint.state[k])


def test_best_checkpoint_kept(tiny):
    data, sp = tiny
    result = train("resnet", TINY, sp, data, TrainConfig(max_epochs=4, patience=2, seed=0, batch_size=8))
    meta = result.checkpoint.metadata
    best = max(h.val_auc for h in result.history)
    assert meta["best_val_auc"] == best == result.best_val_auc
    first_best = next(h.epoch for h in result.history if h.val_auc == best)
    assert meta["best_epoch"] == first_best


def test_divergence_detected(tiny):
    data, sp = tiny
    poisoned = [s for s in data]
    victim = sp.train[0]
    for s in poisoned:
        if s.id == victim:
            s.grid.values[0, 0] = math.nan
    try:
        with pytest.raises(TrainingDivergedError):
            train("resnet", TINY, sp, poisoned, TrainConfig(max_epochs=1, batch_size=64))
    finally:
        for s in poisoned:
            if s.id == victim:
                s.grid.values[0, 0] = s.scored.tokens[0].logprob
