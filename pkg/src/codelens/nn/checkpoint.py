"""Single-file model checkpoints.

Layout (numpy ``.npz``):

    __header__          JSON: {"format": "codelens-checkpoint", "version": 1,
                               "kind", "config", "metadata"}
    param/<name>        parameter and buffer arrays, row-major
    optim/step          Adam step counter (optional)
    optim/m/<name>      Adam first moments (optional)
    optim/v/<name>      Adam second moments (optional)
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .layers import Module
from .models import build_model, config_from_dict, config_to_dict
from .optim import Adam, AdamState

FORMAT = "codelens-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    kind: str
    config: object
    state: dict[str, np.ndarray]
    optim: AdamState | None = None
    metadata: dict = field(default_factory=dict)

    def build(self) -> Module:
        model = build_model(self.kind, self.config)
        model.load_state_dict(self.state)
        return model.eval()


def snapshot(kind: str, model: Module, optimizer: Adam | None = None, metadata: dict | None = None) -> Checkpoint:
    state = {k: np.array(v, copy=True) for k, v in model.state_dict().items()}
    optim = None
    if optimizer is not None and optimizer.state.m:
        optim = AdamState(
            step=optimizer.state.step,
            m=[m.copy() for m in optimizer.state.m],
            v=[v.copy() for v in optimizer.state.v],
        )
    return Checkpoint(kind, model.config, state, optim, dict(metadata or {}))


def save(ckpt: Checkpoint, path: str | Path) -> None:
    header = {
        "format": FORMAT,
        "version": VERSION,
        "kind": ckpt.kind,
        "config": config_to_dict(ckpt.config),
        "metadata": ckpt.metadata,
    }
    arrays = {"__header__": np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)}
    names = sorted(ckpt.state)
    for name in names:
        arrays[f"param/{name}"] = ckpt.state[name]
    if ckpt.optim is not None:
        arrays["optim/step"] = np.array(ckpt.optim.step)
        # moments follow parameter registration order, recorded by name
        order = ckpt.metadata.get("param_order", [])
        for name, m, v in zip(order, ckpt.optim.m, ckpt.optim.v):
            arrays[f"optim/m/{name}"] = m
            arrays[f"optim/v/{name}"] = v
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    Path(path).write_bytes(buf.getvalue())


def load(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        data = np.load(path, allow_pickle=False)
        header = json.loads(bytes(data["__header__"]).decode())
    except (OSError, KeyError, ValueError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if header.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a {FORMAT} file")
    if header.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {header.get('version')}")
    kind = header["kind"]
    state = {k[len("param/") :]: data[k] for k in data.files if k.startswith("param/")}
    optim = None
    if "optim/step" in data.files:
        order = header["metadata"].get("param_order", [])
        optim = AdamState(
            step=int(data["optim/step"]),
            m=[data[f"optim/m/{n}"] for n in order],
            v=[data[f"optim/v/{n}"] for n in order],
        )
    return Checkpoint(kind, config_from_dict(kind, header["config"]), state, optim, header["metadata"])
