"""Evasion attacks applied to source code before scoring."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..bench.data import CodeSample
from .execution import ExecResult, run_python, strip_marker
from .transforms import (
    SUPPORTED_LANGUAGES,
    AttackError,
    AttackSyntaxError,
    InsufficientDonorError,
    UnsupportedLanguageError,
    check_syntax,
    insert_dead_code,
    insert_print,
    mix_code,
    print_marker,
    rename_identifiers,
    wrap_try_catch,
)

ATTACK_KINDS = ("mix", "rename", "dead_code", "insert_print", "wrap_try_catch")
MIX_RATIOS = (0.1, 0.3, 0.5)

_SINGLE = {
    "rename": rename_identifiers,
    "dead_code": insert_dead_code,
    "insert_print": insert_print,
    "wrap_try_catch": wrap_try_catch,
}


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    ratio: float | None = None
    seed: int = 0
    language: str = "python"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise AttackError(f"unknown attack {self.kind!r}; expected one of {', '.join(ATTACK_KINDS)}")
        if self.kind == "mix":
            if self.ratio is None or not 0.0 < self.ratio < 1.0:
                raise AttackError(f"mix needs a ratio in (0, 1), got {self.ratio}")
        elif self.ratio is not None:
            raise AttackError(f"{self.kind} takes no ratio")

    @property
    def name(self) -> str:
        return f"mix{int(round(self.ratio * 100))}" if self.kind == "mix" else self.kind

    def to_json(self) -> dict:
        return {"kind": self.kind, "ratio": self.ratio, "seed": self.seed, "language": self.language}


def apply_attack(spec: AttackSpec, source: str, donor: str | None = None, seed: int | None = None) -> str:
    seed = spec.seed if seed is None else seed
    if spec.kind == "mix":
        if donor is None:
            raise AttackError("mix needs human donor code")
        return mix_code(source, donor, spec.ratio, seed)
    return _SINGLE[spec.kind](source, spec.language, seed)


def _sample_seed(spec_seed: int, sample_id: str) -> int:
    digest = np.frombuffer(sample_id.encode("utf-8"), dtype=np.uint8)
    return int(np.random.SeedSequence([spec_seed, *digest.tolist()]).generate_state(1)[0])


def attack_samples(samples: Sequence[CodeSample], spec: AttackSpec, donors: Sequence[CodeSample] = ()) -> list[CodeSample]:
    """Attacked copies of the LLM-class samples; human samples pass through.

    Each copy drops its scores (the source changed) and records provenance.
    Mix donors are human-class samples drawn with a per-sample seed from
    those long enough to supply the block.
    """
    pool = [d for d in donors if d.label == 0] or [s for s in samples if s.label == 0]
    out = []
    for s in samples:
        if s.label != 1:
            out.append(s)
            continue
        seed = _sample_seed(spec.seed, s.id)
        donor = None
        prov = {"parent_id": s.id, "attack": spec.to_json(), "sample_seed": seed}
        if spec.kind == "mix":
            need = int(np.ceil(spec.ratio * len(s.source.splitlines()) - 1e-9))
            fit = [d for d in pool if len(d.source.splitlines()) >= need and d.id != s.id]
            if not fit:
                raise InsufficientDonorError(f"no human donor with {need} lines for {s.id}")
            pick = fit[int(np.random.default_rng(seed).integers(len(fit)))]
            donor = pick.source
            prov["donor_id"] = pick.id
        source = apply_attack(spec, s.source, donor, seed)
        out.append(CodeSample(f"{s.id}~{spec.name}", source, s.language, s.label, s.generator, provenance=prov))
    return out


__all__ = [
    "ATTACK_KINDS",
    "AttackError",
    "AttackSpec",
    "AttackSyntaxError",
    "ExecResult",
    "InsufficientDonorError",
    "MIX_RATIOS",
    "SUPPORTED_LANGUAGES",
    "UnsupportedLanguageError",
    "apply_attack",
    "attack_samples",
    "check_syntax",
    "insert_dead_code",
    "insert_print",
    "mix_code",
    "print_marker",
    "rename_identifiers",
    "run_python",
    "strip_marker",
    "wrap_try_catch",
]
