"""ViT, modified ResNet and the segment-recurrent sequence baseline.

Vision models take a batch of canvases shaped (B, H, W) (or (B, H, W, 2)
when the pad mask is fed as a second channel) and return (B, 2) logits,
index 1 being the LLM-generated class.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import functional as F
from .layers import BatchNorm, Conv2d, EncoderBlock, LayerNorm, Linear, MLP, Module, trunc_normal
from .tensor import Tensor, parameter


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ViTConfig:
    image_size: tuple[int, int] = (64, 64)
    patch_size: int = 8
    dim: int = 128
    depth: int = 3
    heads: int = 4
    mlp_dim: int = 256
    channels: int = 1

    @property
    def num_patches(self) -> int:
        h, w = self.image_size
        return (h // self.patch_size) * (w // self.patch_size)


@dataclass(frozen=True)
class ResNetConfig:
    image_size: tuple[int, int] = (64, 64)
    base_channels: int = 16
    blocks_per_stage: int = 9
    channels: int = 1


@dataclass(frozen=True)
class SeqConfig:
    dim: int = 512
    depth: int = 6
    heads: int = 8
    mlp_dim: int = 2048
    segment_len: int = 50
    mem_len: int = 50
    clamp_lo: float = -20.0


def _as_input(x, channels: int, dtype) -> np.ndarray:
    x = np.asarray(x.data if isinstance(x, Tensor) else x, dtype=dtype)
    if x.ndim == 3:
        x = x[..., None]
    if x.shape[-1] != channels:
        raise ShapeError(f"input: expected {channels} channel(s), got {x.shape[-1]}")
    return x


class ViT(Module):
    def __init__(self, config: ViTConfig, seed: int = 0, dtype=np.float32):
        h, w = config.image_size
        p = config.patch_size
        if h % p or w % p:
            raise ShapeError(f"patch_embed: image {h}x{w} not divisible by patch size {p}")
        rng = np.random.default_rng(seed)
        self.config = config
        self.dtype = dtype
        # patch projection E and position embedding E_pos; no bias on E
        self.patch_embed = parameter(trunc_normal(rng, (p * p * config.channels, config.dim), dtype=dtype))
        self.pos_embed = parameter(trunc_normal(rng, (config.num_patches, config.dim), dtype=dtype))
        self.blocks = [EncoderBlock(config.dim, config.heads, config.mlp_dim, rng, dtype) for _ in range(config.depth)]
        self.head = MLP(config.dim, config.mlp_dim, 2, rng, dtype)

    def patchify(self, x: np.ndarray) -> np.ndarray:
        b, h, w, c = x.shape
        if (h, w) != tuple(self.config.image_size):
            raise ShapeError(f"patch_embed: expected {self.config.image_size}, got {(h, w)}")
        p = self.config.patch_size
        x = x.reshape(b, h // p, p, w // p, p, c).transpose(0, 1, 3, 2, 4, 5)
        return x.reshape(b, (h // p) * (w // p), p * p * c)

    def forward(self, x) -> Tensor:
        patches = Tensor(self.patchify(_as_input(x, self.config.channels, self.dtype)))
        z = patches @ self.patch_embed + self.pos_embed
        for blk in self.blocks:
            z = blk(z)
        return self.head(z.mean(axis=1))


class BasicBlock(Module):
    """x_{l+1} = ReLU(shortcut(x_l) + BN(Conv(ReLU(BN(Conv(x_l))))))."""

    def __init__(self, c_in: int, c_out: int, stride: int, rng: np.random.Generator, dtype=np.float32):
        self.conv1 = Conv2d(c_in, c_out, rng, stride=stride, dtype=dtype)
        self.bn1 = BatchNorm(c_out, dtype)
        self.conv2 = Conv2d(c_out, c_out, rng, dtype=dtype)
        self.bn2 = BatchNorm(c_out, dtype, zero_init=True)
        if stride != 1 or c_in != c_out:
            self.proj = Conv2d(c_in, c_out, rng, kernel=1, stride=stride, padding=0, dtype=dtype)
            self.proj_bn = BatchNorm(c_out, dtype)
        else:
            self.proj = None

    def residual(self, x: Tensor) -> Tensor:
        return self.bn2(self.conv2(self.bn1(self.conv1(x)).relu()))

    def forward(self, x: Tensor) -> Tensor:
        shortcut = self.proj_bn(self.proj(x)) if self.proj is not None else x
        return (shortcut + self.residual(x)).relu()


class ResNet(Module):
    def __init__(self, config: ResNetConfig, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.config = config
        self.dtype = dtype
        c = config.base_channels
        self.stem = Conv2d(config.channels, c, rng, dtype=dtype)
        self.stem_bn = BatchNorm(c, dtype)
        blocks = []
        c_in = c
        for stage, width in enumerate((c, 2 * c, 4 * c)):
            for i in range(config.blocks_per_stage):
                stride = 2 if stage > 0 and i == 0 else 1
                blocks.append(BasicBlock(c_in, width, stride, rng, dtype))
                c_in = width
        self.blocks = blocks
        self.fc = Linear(4 * c, 2, rng, dtype=dtype)

    def forward(self, x) -> Tensor:
        x = _as_input(x, self.config.channels, self.dtype)
        if x.shape[1:3] != tuple(self.config.image_size):
            raise ShapeError(f"stem: expected {self.config.image_size}, got {x.shape[1:3]}")
        h = self.stem_bn(self.stem(Tensor(x))).relu()
        for blk in self.blocks:
            h = blk(h)
        return self.fc(F.global_avg_pool(h))


def sinusoidal_positions(n: int, dim: int, offset: int = 0) -> np.ndarray:
    pos = np.arange(offset, offset + n, dtype=np.float64)[:, None]
    i = np.arange(dim // 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2 * i / dim)
    out = np.zeros((n, dim))
    out[:, 0::2] = np.sin(angle)
    out[:, 1::2] = np.cos(angle)[:, : dim - dim // 2]
    return out


class SeqClassifier(Module):
    """Segment-recurrent transformer over a 1D log-probability vector.

    The sequence is cut into segments of ``segment_len``; each layer attends
    over its cached, gradient-stopped states from the previous segment (up to
    ``mem_len`` positions) plus causally over the current segment. Positions
    are absolute sinusoidal. Final states are mean-pooled over valid
    positions and mapped to two logits.
    """

    def __init__(self, config: SeqConfig, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.config = config
        self.dtype = dtype
        self.embed = Linear(1, config.dim, rng, dtype=dtype)
        self.blocks = [EncoderBlock(config.dim, config.heads, config.mlp_dim, rng, dtype) for _ in range(config.depth)]
        self.norm = LayerNorm(config.dim, dtype)
        self.head = Linear(config.dim, 2, rng, dtype=dtype)

    def _pad(self, vectors) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(vectors, np.ndarray) and vectors.ndim == 1:
            vectors = [vectors]
        lens = [len(v) for v in vectors]
        if min(lens) == 0:
            raise ShapeError("seq_embed: empty sequence")
        lo = self.config.clamp_lo
        x = np.zeros((len(vectors), max(lens)), dtype=self.dtype)
        valid = np.zeros((len(vectors), max(lens)), dtype=bool)
        for i, v in enumerate(vectors):
            v = np.clip(np.asarray(v, dtype=np.float64), lo, 0.0)
            x[i, : len(v)] = (v - lo) / -lo
            valid[i, : len(v)] = True
        return x, valid

    def forward(self, vectors) -> Tensor:
        cfg = self.config
        x, valid = self._pad(vectors)
        b, total = x.shape
        mems: list[Tensor | None] = [None] * cfg.depth
        mem_valid = np.zeros((b, 0), dtype=bool)
        pooled = None
        for start in range(0, total, cfg.segment_len):
            seg = x[:, start : start + cfg.segment_len]
            seg_valid = valid[:, start : start + cfg.segment_len]
            n = seg.shape[1]
            pos = sinusoidal_positions(n, cfg.dim, offset=start).astype(self.dtype)
            h = self.embed(Tensor(seg[..., None])) + pos
            m = mem_valid.shape[1]
            causal = np.tril(np.ones((n, n), dtype=bool))
            keys_valid = np.concatenate([mem_valid, seg_valid], axis=1)
            mask = np.concatenate([np.ones((n, m), dtype=bool), causal], axis=1)[None, None]
            mask = mask & keys_valid[:, None, None, :]
            new_mems = []
            for layer, blk in enumerate(self.blocks):
                new_mems.append(h)
                h = blk(h, mems[layer], mask)
            out = self.norm(h) * Tensor(seg_valid[..., None].astype(self.dtype))
            seg_sum = out.sum(axis=1)
            pooled = seg_sum if pooled is None else pooled + seg_sum
            if cfg.mem_len > 0:
                mems = [
                    Tensor((nm.data if mems[i] is None else np.concatenate([mems[i].data, nm.data], axis=1))[:, -cfg.mem_len :])
                    for i, nm in enumerate(new_mems)
                ]
                mem_valid = np.concatenate([mem_valid, seg_valid], axis=1)[:, -cfg.mem_len :]
        counts = valid.sum(axis=1, keepdims=True).astype(self.dtype)
        return self.head(pooled / Tensor(counts))


MODEL_KINDS = {"vit": (ViT, ViTConfig), "resnet": (ResNet, ResNetConfig), "seq": (SeqClassifier, SeqConfig)}


def build_model(kind: str, config, seed: int = 0, dtype=np.float32) -> Module:
    try:
        cls, cfg_cls = MODEL_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {sorted(MODEL_KINDS)}") from None
    if isinstance(config, dict):
        config = config_from_dict(kind, config)
    if not isinstance(config, cfg_cls):
        raise TypeError(f"{kind} needs a {cfg_cls.__name__}")
    return cls(config, seed=seed, dtype=dtype)


def config_from_dict(kind: str, d: dict):
    cfg_cls = MODEL_KINDS[kind][1]
    d = dict(d)
    if "image_size" in d:
        d["image_size"] = tuple(d["image_size"])
    return cfg_cls(**d)


def config_to_dict(config) -> dict:
    d = asdict(config)
    if "image_size" in d:
        d["image_size"] = list(d["image_size"])
    return d


__all__ = [
    "MODEL_KINDS",
    "ResNet",
    "ResNetConfig",
    "SeqClassifier",
    "SeqConfig",
    "ShapeError",
    "ViT",
    "ViTConfig",
    "build_model",
    "config_from_dict",
    "config_to_dict",
]
