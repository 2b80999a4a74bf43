"""Command-line entry point: ``codelens <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 provider error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attacks import ATTACK_KINDS, AttackError, AttackSpec, apply_attack, attack_samples
from .bench.data import CodeSample, SchemaError, dumps_sample, ingest, write_jsonl
from .bench.experiments import (
    ExperimentSpec,
    evaluate,
    format_table,
    measure_latency,
    model_scorer,
    rescore,
    run_experiment,
    small_config,
    write_reports,
    zero_shot_scorer,
)
from .bench.split import DEFAULT_RATIOS, DatasetSplit, SplitError, split
from .bench.synth import default_oracle, synthesize_dataset
from .bench.train import EpochLog, TrainConfig, TrainingDivergedError, train
from .detect import DEFAULT_THRESHOLDS, DETECTOR_IDS, MODEL_IDS, ZERO_SHOT_IDS, DetectError, ModelDetector, classify, safe_score
from .grid import CANVAS_SIZE
from .nn import ResNetConfig, SeqConfig, ViTConfig, count_flops
from .nn import checkpoint as ckpt_io
from .nn.checkpoint import CheckpointError
from .scorer import ProviderError, RemoteProvider, RemoteSettings, ScoreCache, ScoringError, score_sequence
from .tokenizer import TokenizerError, get_tokenizer

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PROVIDER = 0, 1, 2, 3

EXTENSIONS = {".py": "python", ".c": "c", ".h": "c", ".cpp": "cpp", ".cc": "cpp", ".hpp": "cpp", ".go": "go", ".java": "java", ".rb": "ruby"}
SMALL_SEQ = SeqConfig(dim=32, depth=1, heads=2, mlp_dim=64, segment_len=50, mem_len=50)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def canvas_size(text: str) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"canvas must look like HxW, got {text!r}") from None
    if h <= 0 or w <= 0:
        raise argparse.ArgumentTypeError("canvas sides must be positive")
    return h, w


def ratios_arg(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must have three parts")
    return parts


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--provider", choices=("oracle", "remote"), default="oracle", help="log-probability source (default: oracle)")
    g.add_argument("--endpoint", help="remote completions endpoint URL")
    g.add_argument("--model", help="remote model name")
    g.add_argument("--remote-config", help="JSON file of remote provider settings")
    g.add_argument("--cache-dir", help="directory for the on-disk score cache")
    g.add_argument("--oracle-seed", type=int, default=0, help="seed of the oracle provider (default: 0)")
    g.add_argument("--canvas", type=canvas_size, default=None, help="model canvas HxW for training (default: 64x16)")
    g.add_argument("--seed", type=int, default=0, help="seed for all randomness (default: 0)")
    g.add_argument("--format", choices=("json", "table"), default="table", help="output format (default: table)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="codelens", description="Detect LLM-generated code from per-token log-probability grids.")
    parser.add_argument("--version", action="version", version=f"codelens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", parents=[common], help="score code into dataset records")
    p.add_argument("input", help="code file, JSONL dataset, or - for stdin")
    p.add_argument("-o", "--output", help="write JSONL here instead of stdout")
    p.add_argument("--language", help="language of a code-file input (default: from extension)")
    p.add_argument("--label", type=int, choices=(0, 1), default=0, help="label for code-file input (default: 0)")
    p.add_argument("--id", dest="sample_id", help="record id for code-file input")

    p = sub.add_parser("detect", parents=[common], help="print a verdict per sample")
    p.add_argument("input", help="code file, JSONL dataset, or - for stdin")
    p.add_argument("--detector", required=True, choices=DETECTOR_IDS)
    p.add_argument("--checkpoint", help="checkpoint for vit, resnet or seq")
    p.add_argument("--threshold", type=float, help="decision threshold (default: per-detector)")

    p = sub.add_parser("train", parents=[common], help="train a model detector")
    p.add_argument("--data", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--arch", required=True, choices=MODEL_IDS)
    p.add_argument("--size", choices=("small", "full"), default="small", help="small desk config or the full-size one")
    p.add_argument("--epochs", type=int, default=TrainConfig.max_epochs, help="maximum epochs")
    p.add_argument("--patience", type=int, default=TrainConfig.patience)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("-o", "--output", required=True, help="checkpoint path")

    p = sub.add_parser("eval", parents=[common], help="evaluate detectors on a split")
    p.add_argument("--data", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--detector", default="all", help="'all' or comma-separated detector ids")
    p.add_argument("--checkpoint", action="append", default=[], metavar="KIND=PATH", help="model checkpoint (repeatable)")
    p.add_argument("--part", choices=("test", "validation", "train"), default="test")
    p.add_argument("--timing", action="store_true", help="also measure per-sample model latency")
    p.add_argument("-o", "--output", help="write reports as JSONL")

    p = sub.add_parser("attack", parents=[common], help="apply an evasion attack")
    p.add_argument("input", help="JSONL dataset or a Python file")
    p.add_argument("--kind", required=True, choices=ATTACK_KINDS)
    p.add_argument("--ratio", type=float, help="mix ratio")
    p.add_argument("--split", help="split file restricting the attacked samples")
    p.add_argument("--part", choices=("test", "validation", "train"), default="test")
    p.add_argument("--donor", help="human code file for mixing a single file")
    p.add_argument("--no-rescore", action="store_true", help="leave attacked records unscored")
    p.add_argument("-o", "--output", help="output path (default: stdout)")

    p = sub.add_parser("dataset", help="synthesize or split datasets")
    dsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = dsub.add_parser("synthesize", parents=[common], help="generate the oracle-scored synthetic dataset")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--separability", type=float, default=1.0)
    q.add_argument("-o", "--output", required=True)
    q = dsub.add_parser("split", parents=[common], help="stratified train/validation/test split")
    q.add_argument("--data", required=True)
    q.add_argument("--ratios", type=ratios_arg, default=DEFAULT_RATIOS)
    q.add_argument("-o", "--output", required=True)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment described in JSON")
    p.add_argument("spec", help="experiment JSON file")
    return parser


def _provider(args, transport=None):
    if args.provider == "oracle":
        return default_oracle(args.oracle_seed)
    overrides = {"endpoint": args.endpoint, "model": args.model}
    if args.remote_config:
        settings = RemoteSettings.from_file(args.remote_config, **overrides)
    else:
        settings = RemoteSettings(**{k: v for k, v in overrides.items() if v is not None})
    return RemoteProvider(settings, transport=transport)


def _cache(args) -> ScoreCache | None:
    return ScoreCache(args.cache_dir) if args.cache_dir else None


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"cannot read {path}: no such file") from None
    except (IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        raise OSError(f"cannot read {path}: {exc}") from None


def _load_input(args) -> list[CodeSample]:
    """Samples from a JSONL dataset, or one sample from a code file."""
    if args.input != "-" and args.input.endswith(".jsonl"):
        return ingest(args.input)
    source = _read_text(args.input)
    ext = Path(args.input).suffix.lower() if args.input != "-" else ""
    language = getattr(args, "language", None) or EXTENSIONS.get(ext, "python")
    sample_id = getattr(args, "sample_id", None) or (Path(args.input).stem if args.input != "-" else "stdin")
    return [CodeSample(sample_id, source, language, getattr(args, "label", 0), "input")]


def _emit(lines, args) -> None:
    out = getattr(args, "output", None)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            print(line)


def _score_all(samples, args, transport=None, force: bool = False) -> list[CodeSample]:
    provider = _provider(args, transport)
    try:
        tok = get_tokenizer()
        cache = _cache(args)
        out = []
        for s in samples:
            if force or s.scored is None:
                s = s.with_scores(score_sequence(tok.encode(s.source), provider, cache))
            out.append(s)
        return out
    finally:
        if hasattr(provider, "close"):
            provider.close()


def cmd_score(args, transport=None) -> int:
    samples = _score_all(_load_input(args), args, transport, force=True)
    if args.format == "json" or args.output:
        _emit([dumps_sample(s) for s in samples], args)
    if args.format == "table":
        print(f"{'id':<24} {'tokens':>7} {'rows':>5} {'cols':>5} {'mean logp':>10}")
        for s in samples:
            print(f"{s.id:<24} {len(s.scored):>7} {s.grid.n:>5} {s.grid.m:>5} {np.mean(s.scored.logprobs):>10.4f}")
    return EXIT_OK


def cmd_detect(args, transport=None) -> int:
    if args.detector in MODEL_IDS and not args.checkpoint:
        raise UsageError(f"detector {args.detector!r} needs --checkpoint")
    samples = _score_all(_load_input(args), args, transport)
    threshold = DEFAULT_THRESHOLDS[args.detector] if args.threshold is None else args.threshold
    if args.detector in MODEL_IDS:
        ckpt = ckpt_io.load(args.checkpoint)
        if ckpt.kind != args.detector:
            raise DetectError(f"checkpoint holds a {ckpt.kind} model, not {args.detector}")
        scores = ModelDetector(ckpt).score_many([s.scored for s in samples])
    else:
        scores = [safe_score(args.detector, s.scored) for s in samples]
    lines = []
    for s, sc in zip(samples, scores):
        v = classify(sc, threshold)
        if args.format == "json":
            lines.append(json.dumps({"id": s.id, "score": sc.score, "verdict": v.label, "detector": args.detector, "threshold": threshold}))
        else:
            lines.append(f"{s.id}\t{sc.score:.6g}\t{v.label}\t{args.detector}")
    _emit(lines, argparse.Namespace(output=None))
    return EXIT_OK


def _model_config(kind: str, size: str, canvas):
    if kind == "seq":
        return SMALL_SEQ if size == "small" else SeqConfig()
    if size == "small":
        return small_config(kind, canvas or (64, 16))
    cls = ViTConfig if kind == "vit" else ResNetConfig
    return cls(image_size=canvas or CANVAS_SIZE)


def cmd_train(args, transport=None) -> int:
    data = ingest(args.data)
    sp = DatasetSplit.load(args.split)
    cfg = TrainConfig(lr=args.lr, batch_size=args.batch_size, patience=args.patience, max_epochs=args.epochs, seed=args.seed)

    def log(e: EpochLog) -> None:
        print(f"epoch {e.epoch:3d}  loss {e.loss:.4f}  val auc {e.val_auc:.4f}", file=sys.stderr)

    result = train(args.arch, _model_config(args.arch, args.size, args.canvas), sp, data, cfg, log)
    ckpt_io.save(result.checkpoint, args.output)
    meta = result.checkpoint.metadata
    summary = {"checkpoint": args.output, "kind": args.arch, "best_epoch": meta["best_epoch"], "best_val_auc": meta["best_val_auc"], "epochs_run": meta["epochs_run"]}
    if args.format == "json":
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"saved {args.arch} checkpoint to {args.output}: best epoch {meta['best_epoch']} of {meta['epochs_run']}, val auc {meta['best_val_auc']}")
    return EXIT_OK


def _checkpoints(specs: list[str]) -> dict:
    out = {}
    for item in specs:
        kind, sep, path = item.partition("=")
        if not sep or kind not in MODEL_IDS:
            raise UsageError(f"--checkpoint expects KIND=PATH with KIND in {MODEL_IDS}, got {item!r}")
        ckpt = ckpt_io.load(path)
        if ckpt.kind != kind:
            raise DetectError(f"{path} holds a {ckpt.kind} model, not {kind}")
        out[kind] = ckpt
    return out


def cmd_eval(args, transport=None) -> int:
    data = ingest(args.data)
    sp = DatasetSplit.load(args.split)
    ckpts = _checkpoints(args.checkpoint)
    if args.detector == "all":
        ids = list(ZERO_SHOT_IDS) + [k for k in MODEL_IDS if k in ckpts]
        skipped = [k for k in MODEL_IDS if k not in ckpts]
        if skipped:
            print(f"note: no checkpoint for {', '.join(skipped)}; skipped", file=sys.stderr)
    else:
        ids = [d.strip() for d in args.detector.split(",") if d.strip()]
        unknown = [d for d in ids if d not in DETECTOR_IDS]
        if unknown:
            raise UsageError(f"unknown detector(s) {unknown}; expected ids from {DETECTOR_IDS}")
        missing = [d for d in ids if d in MODEL_IDS and d not in ckpts]
        if missing:
            raise UsageError(f"detector(s) {missing} need --checkpoint KIND=PATH")
    data = _score_all(data, args, transport)
    val, part = sp.select(data, "validation"), sp.select(data, args.part)
    reports = []
    for d in ids:
        conf = {"dataset": args.data, "split": args.split, "seed": sp.seed}
        if d in ZERO_SHOT_IDS:
            reports.append(evaluate(d, zero_shot_scorer(d), val, part, config=conf, split_name=args.part))
            continue
        det = ModelDetector(ckpts[d])
        lat = measure_latency(det, part) if args.timing else None
        flops = count_flops(ckpts[d].config) if d != "seq" else None
        reports.append(evaluate(d, model_scorer(det), val, part, flops, lat, conf, args.part))
    if args.output:
        write_reports(reports, args.output)
    if args.format == "json":
        for r in reports:
            print(r.dumps())
    else:
        print(format_table(reports))
    return EXIT_OK


def cmd_attack(args, transport=None) -> int:
    spec = AttackSpec(args.kind, args.ratio, args.seed)
    if not args.input.endswith(".jsonl"):
        donor = _read_text(args.donor) if args.donor else None
        out = apply_attack(spec, _read_text(args.input), donor)
        if args.output:
            Path(args.output).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
        return EXIT_OK
    data = ingest(args.input)
    donors = []
    if args.split:
        sp = DatasetSplit.load(args.split)
        donors = [s for s in sp.select(data, "train") if s.label == 0]
        data = sp.select(data, args.part)
    attacked = attack_samples(data, spec, donors)
    if not args.no_rescore:
        provider = _provider(args, transport)
        attacked = rescore(attacked, provider, _cache(args))
    lines = [dumps_sample(s) for s in attacked]
    if args.output:
        _emit(lines, args)
        if args.format == "table":
            n = sum(1 for s in attacked if s.provenance)
            print(f"attacked {n} of {len(attacked)} samples with {spec.name}; wrote {args.output}")
    else:
        _emit(lines, args)
    return EXIT_OK


def cmd_dataset(args, transport=None) -> int:
    if args.action == "synthesize":
        if args.n < 2:
            raise UsageError("--n must be at least 2")
        samples = synthesize_dataset(args.n, args.separability, seed=args.seed, oracle_seed=args.oracle_seed)
        write_jsonl(samples, args.output)
        msg = {"output": args.output, "n": len(samples), "separability": args.separability, "seed": args.seed}
    else:
        sp = split(ingest(args.data), args.ratios, args.seed)
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        sp.save(args.output)
        msg = {"output": args.output, "train": len(sp.train), "validation": len(sp.validation), "test": len(sp.test), "seed": args.seed}
    if args.format == "json":
        print(json.dumps(msg, sort_keys=True))
    else:
        print(", ".join(f"{k} {v}" for k, v in msg.items()))
    return EXIT_OK


def cmd_experiment(args, transport=None) -> int:
    try:
        spec = ExperimentSpec.from_json(json.loads(_read_text(args.spec)))
    except (json.JSONDecodeError, TypeError) as exc:
        raise SchemaError(f"{args.spec}: invalid experiment spec ({exc})") from None
    reports = run_experiment(spec)
    if args.format == "json":
        for r in reports:
            print(r.dumps())
    else:
        print(format_table(reports))
    return EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "detect": cmd_detect,
    "train": cmd_train,
    "eval": cmd_eval,
    "attack": cmd_attack,
    "dataset": cmd_dataset,
    "experiment": cmd_experiment,
}

DATA_ERRORS = (
    SchemaError, SplitError, CheckpointError, DetectError, AttackError, TokenizerError,
    TrainingDivergedError, OSError, ValueError,
)


def main(argv: list[str] | None = None, *, transport=None) -> int:
    """Run the CLI; ``transport`` replaces the HTTP transport of the remote provider."""
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, transport)
    except UsageError as exc:
        print(f"codelens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProviderError, ScoringError) as exc:
        print(f"codelens: provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except DATA_ERRORS as exc:
        print(f"codelens: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
