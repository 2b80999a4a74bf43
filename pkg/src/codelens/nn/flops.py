"""Analytic forward-pass FLOP counts.

Every multiply-accumulate counts as two operations. Counted: convolutions,
linear layers (bias adds count one per output), and the two attention
matmuls (scores and weighted values). Not counted: normalization,
activations, softmax, pooling and residual additions.
"""
from __future__ import annotations

from .models import ResNetConfig, SeqConfig, ViTConfig


def linear_flops(d_in: int, d_out: int, bias: bool = True, tokens: int = 1) -> int:
    return tokens * (2 * d_in * d_out + (d_out if bias else 0))


def conv_flops(kernel: int, c_in: int, c_out: int, h_out: int, w_out: int) -> int:
    return 2 * kernel * kernel * c_in * c_out * h_out * w_out


def attention_flops(queries: int, keys: int, dim: int) -> int:
    return 2 * queries * keys * dim * 2


def _encoder_layer(n: int, keys: int, dim: int, mlp_dim: int) -> int:
    total = linear_flops(dim, dim, tokens=n)  # query
    total += linear_flops(dim, 2 * dim, tokens=keys)  # key/value
    total += attention_flops(n, keys, dim)
    total += linear_flops(dim, dim, tokens=n)  # output projection
    total += linear_flops(dim, mlp_dim, tokens=n) + linear_flops(mlp_dim, dim, tokens=n)
    return total


def vit_flops(cfg: ViTConfig) -> int:
    n = cfg.num_patches
    p2c = cfg.patch_size**2 * cfg.channels
    total = linear_flops(p2c, cfg.dim, bias=False, tokens=n)
    total += cfg.depth * _encoder_layer(n, n, cfg.dim, cfg.mlp_dim)
    total += linear_flops(cfg.dim, cfg.mlp_dim) + linear_flops(cfg.mlp_dim, 2)
    return total


def resnet_flops(cfg: ResNetConfig) -> int:
    h, w = cfg.image_size
    c = cfg.base_channels
    total = conv_flops(3, cfg.channels, c, h, w)
    c_in = c
    for stage, width in enumerate((c, 2 * c, 4 * c)):
        for i in range(cfg.blocks_per_stage):
            stride = 2 if stage > 0 and i == 0 else 1
            h_out, w_out = (h + 2 - 3) // stride + 1, (w + 2 - 3) // stride + 1
            total += conv_flops(3, c_in, width, h_out, w_out)
            total += conv_flops(3, width, width, h_out, w_out)
            if stride != 1 or c_in != width:
                total += conv_flops(1, c_in, width, h_out, w_out)
            h, w, c_in = h_out, w_out, width
    return total + linear_flops(4 * c, 2)


def seq_flops(cfg: SeqConfig, length: int | None = None) -> int:
    length = cfg.segment_len if length is None else length
    total = linear_flops(1, cfg.dim, tokens=length)
    mem = 0
    for start in range(0, length, cfg.segment_len):
        n = min(cfg.segment_len, length - start)
        total += cfg.depth * _encoder_layer(n, mem + n, cfg.dim, cfg.mlp_dim)
        mem = min(cfg.mem_len, mem + n)
    return total + linear_flops(cfg.dim, 2)


def count_flops(config, length: int | None = None) -> int:
    if isinstance(config, ViTConfig):
        return vit_flops(config)
    if isinstance(config, ResNetConfig):
        return resnet_flops(config)
    if isinstance(config, SeqConfig):
        return seq_flops(config, length)
    raise TypeError(f"no FLOP model for {type(config).__name__}")
