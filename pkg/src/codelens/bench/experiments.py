"""Evaluation and experiment orchestration: baselines, scaling, length, attacks, timing."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..detect import MODEL_IDS, ZERO_SHOT_IDS, ModelDetector, safe_score
from ..nn import ResNetConfig, ViTConfig, count_flops
from ..nn.checkpoint import Checkpoint
from ..nn.models import config_to_dict
from ..scorer import score_sequence
from ..tokenizer import get_tokenizer
from .data import CodeSample
from .metrics import EvalReport, evaluate_scores, fpr_fnr, youden_threshold
from .split import DatasetSplit
from .train import TrainConfig, train

SMALL_CANVAS = (64, 16)
LENGTH_BUCKETS = ((0, 100), (100, 200), (200, 400), (400, None))
LATENCY_SAMPLES = 50


def small_config(kind: str, canvas: tuple[int, int] = SMALL_CANVAS):
    """The desk-scale models used by the benchmark runs."""
    if kind == "resnet":
        return ResNetConfig(image_size=canvas, base_channels=8, blocks_per_stage=1)
    if kind == "vit":
        return ViTConfig(image_size=canvas, patch_size=8, dim=64, depth=2, heads=4, mlp_dim=128)
    raise ValueError(f"no small config for {kind!r}")


def scaling_ladder(kind: str, canvas: tuple[int, int] = SMALL_CANVAS) -> list:
    """Four sizes per architecture, smallest first, FLOPs strictly increasing."""
    if kind == "resnet":
        return [ResNetConfig(canvas, c, b) for c, b in ((4, 1), (8, 1), (8, 2), (16, 1))]
    if kind == "vit":
        return [ViTConfig(canvas, 8, d, depth, 4, 2 * d) for d, depth in ((32, 1), (64, 2), (96, 2), (128, 3))]
    raise ValueError(f"no scaling ladder for {kind!r}")


Scorer = Callable[[Sequence[CodeSample]], np.ndarray]


def zero_shot_scorer(detector_id: str) -> Scorer:
    def run(samples):
        return np.array([safe_score(detector_id, s.scored).score for s in samples])

    return run


def model_scorer(det: ModelDetector) -> Scorer:
    def run(samples):
        items = [s.seq if det.kind == "seq" else s.grid for s in samples]
        return np.array([d.score for d in det.score_many(items)])

    return run


def _labels(samples: Sequence[CodeSample]) -> list[int]:
    return [s.label for s in samples]


def measure_latency(det: ModelDetector, samples: Sequence[CodeSample], limit: int = LATENCY_SAMPLES) -> float:
    """Mean seconds per sample for one-at-a-time model inference, scoring excluded."""
    chosen = list(samples)[:limit]
    items = [s.seq if det.kind == "seq" else s.grid for s in chosen]
    det.score(items[0])  # warm caches outside the timed loop
    start = time.perf_counter()
    for it in items:
        det.score(it)
    return (time.perf_counter() - start) / len(items)


def evaluate(
    detector_id: str,
    scorer: Scorer,
    validation: Sequence[CodeSample],
    test: Sequence[CodeSample],
    flops: int | None = None,
    latency: float | None = None,
    config: dict | None = None,
    split_name: str = "test",
) -> EvalReport:
    """Threshold by Youden's J on validation, then measure on test.

    Model detectors also record FPR/FNR at class probability 0.5.
    """
    threshold = youden_threshold(scorer(validation), _labels(validation))
    scores = scorer(test)
    config = dict(config or {})
    if detector_id in MODEL_IDS:
        fpr, fnr, _ = fpr_fnr(scores, _labels(test), 0.5)
        config["at_probability_0.5"] = {"fpr": fpr, "fnr": fnr}
    return evaluate_scores(detector_id, scores, _labels(test), threshold, split_name, flops, latency, config)


def evaluate_zero_shot(validation, test, ids: Sequence[str] = ZERO_SHOT_IDS, config: dict | None = None) -> list[EvalReport]:
    return [evaluate(d, zero_shot_scorer(d), validation, test, config=config) for d in ids]


def evaluate_model(ckpt: Checkpoint, validation, test, latency: bool = True, config: dict | None = None) -> EvalReport:
    det = ModelDetector(ckpt)
    lat = measure_latency(det, test) if latency else None
    cfg = {"model_config": config_to_dict(ckpt.config), **(config or {})}
    flops = count_flops(ckpt.config) if ckpt.kind != "seq" else None
    return evaluate(ckpt.kind, model_scorer(det), validation, test, flops, lat, cfg)


def scaling_experiment(
    data: Sequence[CodeSample],
    split: DatasetSplit,
    kind: str,
    ladder: Sequence | None = None,
    train_config: TrainConfig | None = None,
) -> list[EvalReport]:
    val, test = split.select(data, "validation"), split.select(data, "test")
    reports = []
    for size, cfg in enumerate(ladder or scaling_ladder(kind)):
        result = train(kind, cfg, split, data, train_config)
        ckpt = result.checkpoint
        extra = {"experiment": "scaling", "size_index": size, "params": _num_params(ckpt), "best_epoch": ckpt.metadata["best_epoch"]}
        reports.append(evaluate_model(ckpt, val, test, latency=False, config=extra))
    return reports


def _num_params(ckpt: Checkpoint) -> int:
    order = set(ckpt.metadata.get("param_order", ckpt.state))
    return int(sum(v.size for k, v in ckpt.state.items() if k in order))


def bucket_label(lo: int, hi: int | None) -> str:
    return f"({lo}-{hi}]" if hi is not None else f"({lo}+)"


def in_bucket(n_tokens: int, lo: int, hi: int | None) -> bool:
    return n_tokens > lo and (hi is None or n_tokens <= hi)


def length_experiment(
    detectors: dict[str, Scorer],
    validation: Sequence[CodeSample],
    test: Sequence[CodeSample],
    buckets: Sequence[tuple[int, int | None]] = LENGTH_BUCKETS,
) -> list[EvalReport]:
    """Per-bucket test metrics; thresholds come from the whole validation set.

    Buckets holding a single class are skipped (AUC is undefined there).
    """
    reports = []
    for det_id, scorer in detectors.items():
        threshold = youden_threshold(scorer(validation), _labels(validation))
        for lo, hi in buckets:
            part = [s for s in test if in_bucket(s.n_tokens, lo, hi)]
            if len({s.label for s in part}) < 2:
                continue
            cfg = {"experiment": "length", "bucket": bucket_label(lo, hi), "n": len(part)}
            reports.append(evaluate_scores(det_id, scorer(part), _labels(part), threshold, "test", config=cfg))
    return reports


def rescore(samples: Sequence[CodeSample], provider, cache=None) -> list[CodeSample]:
    tok = get_tokenizer()
    return [s if s.scored is not None else s.with_scores(score_sequence(tok.encode(s.source), provider, cache)) for s in samples]


def attack_experiment(
    detectors: dict[str, Scorer],
    validation: Sequence[CodeSample],
    test: Sequence[CodeSample],
    specs: Sequence,
    provider,
    donors: Sequence[CodeSample] = (),
    cache=None,
) -> list[EvalReport]:
    """Clean and attacked test metrics at the clean-validation threshold.

    Only LLM-class test samples are attacked; human samples are unchanged.
    """
    from ..attacks import attack_samples

    thresholds = {d: youden_threshold(f(validation), _labels(validation)) for d, f in detectors.items()}
    reports = []
    for d, f in detectors.items():
        reports.append(evaluate_scores(d, f(test), _labels(test), thresholds[d], "test", config={"experiment": "attack", "attack": "clean"}))
    for spec in specs:
        attacked = rescore(attack_samples(test, spec, donors), provider, cache)
        for d, f in detectors.items():
            cfg = {"experiment": "attack", "attack": spec.name, "spec": spec.to_json()}
            reports.append(evaluate_scores(d, f(attacked), _labels(attacked), thresholds[d], "test", config=cfg))
    return reports


def timing_experiment(checkpoints: Sequence[Checkpoint], samples: Sequence[CodeSample], limit: int = LATENCY_SAMPLES) -> dict[str, float]:
    return {c.kind: measure_latency(ModelDetector(c), samples, limit) for c in checkpoints}


@dataclass
class ExperimentSpec:
    """File-driven experiment description, as read from JSON."""

    kind: str
    dataset: str
    split: str
    output: str | None = None
    models: list[str] = field(default_factory=lambda: ["resnet", "vit"])
    checkpoints: dict[str, str] = field(default_factory=dict)
    canvas: tuple[int, int] = SMALL_CANVAS
    attacks: list[dict] = field(default_factory=list)
    buckets: list[list] = field(default_factory=lambda: [list(b) for b in LENGTH_BUCKETS])
    oracle_seed: int = 0
    train: dict = field(default_factory=dict)

    KINDS = ("baselines", "scaling", "length", "attack", "timing")

    @classmethod
    def from_json(cls, obj: dict) -> ExperimentSpec:
        obj = dict(obj)
        if "canvas" in obj:
            obj["canvas"] = tuple(obj["canvas"])
        spec = cls(**obj)
        if spec.kind not in cls.KINDS:
            raise ValueError(f"unknown experiment kind {spec.kind!r}; expected one of {cls.KINDS}")
        return spec


class MissingArtifactError(FileNotFoundError):
    pass


def _require(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise MissingArtifactError(f"missing artifact: {p}")
    return p


def run_experiment(spec: ExperimentSpec | dict) -> list[EvalReport]:
    from ..attacks import AttackSpec
    from ..bench.synth import default_oracle
    from ..nn import checkpoint as ckpt_io
    from .data import ingest

    if isinstance(spec, dict):
        spec = ExperimentSpec.from_json(spec)
    data = ingest(_require(spec.dataset))
    sp = DatasetSplit.load(_require(spec.split))
    val, test = sp.select(data, "validation"), sp.select(data, "test")
    tcfg = TrainConfig(**spec.train) if spec.train else None

    def checkpoints() -> list[Checkpoint]:
        out = []
        for kind in spec.models:
            if kind in spec.checkpoints:
                out.append(ckpt_io.load(_require(spec.checkpoints[kind])))
            else:
                out.append(train(kind, small_config(kind, spec.canvas), sp, data, tcfg).checkpoint)
        return out

    provenance = {"spec": _spec_json(spec)}
    if spec.kind == "baselines":
        reports = evaluate_zero_shot(val, test)
        reports += [evaluate_model(c, val, test) for c in checkpoints()]
    elif spec.kind == "scaling":
        reports = []
        for kind in spec.models:
            reports += scaling_experiment(data, sp, kind, scaling_ladder(kind, spec.canvas), tcfg)
    elif spec.kind == "length":
        dets = {d: zero_shot_scorer(d) for d in ZERO_SHOT_IDS}
        dets.update({c.kind: model_scorer(ModelDetector(c)) for c in checkpoints()})
        reports = length_experiment(dets, val, test, [(b[0], b[1]) for b in spec.buckets])
    elif spec.kind == "attack":
        dets = {c.kind: model_scorer(ModelDetector(c)) for c in checkpoints()}
        specs = [AttackSpec(**a) for a in spec.attacks]
        donors = [s for s in sp.select(data, "train") if s.label == 0]
        reports = attack_experiment(dets, val, test, specs, default_oracle(spec.oracle_seed), donors)
    else:
        reports = [evaluate_model(c, val, test) for c in checkpoints()]
    for r in reports:
        r.config = {**r.config, **provenance}
    if spec.output:
        write_reports(reports, spec.output)
    return reports


def _spec_json(spec: ExperimentSpec) -> dict:
    d = dict(vars(spec))
    d["canvas"] = list(spec.canvas)
    return d


def write_reports(reports: Sequence[EvalReport], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for r in reports:
            fh.write(r.dumps() + "\n")


def read_reports(path: str | Path) -> list[EvalReport]:
    return [EvalReport(**json.loads(line)) for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


def format_table(reports: Sequence[EvalReport]) -> str:
    header = f"{'detector':<10} {'auc':>7} {'fpr':>7} {'fnr':>7} {'thresh':>10} {'flops':>12} {'ms/sample':>10}  note"
    rows = [header, "-" * len(header)]
    for r in reports:
        note = r.config.get("attack") or r.config.get("bucket") or (
            f"size {r.config['size_index']}" if "size_index" in r.config else ""
        )
        flops = f"{r.flops:,}" if r.flops is not None else "-"
        lat = f"{r.latency * 1000:.2f}" if r.latency is not None else "-"
        thr = f"{r.threshold:.4g}" if math.isfinite(r.threshold) else str(r.threshold)
        rows.append(f"{r.detector_id:<10} {r.auc:>7.4f} {r.fpr:>7.4f} {r.fnr:>7.4f} {thr:>10} {flops:>12} {lat:>10}  {note}")
    return "\n".join(rows)

