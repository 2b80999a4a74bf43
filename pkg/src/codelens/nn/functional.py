"""Fused differentiable ops used by the layers.

Images are channels-last throughout: (batch, height, width, channels).
Convolution weights are laid out (kh, kw, c_in, c_out).
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int) -> tuple[np.ndarray, int, int]:
    win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    b, ho, wo, c = win.shape[:4]
    cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(b * ho * wo, kh * kw * c)
    return cols, ho, wo


def conv2d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 1) -> Tensor:
    kh, kw, cin, cout = w.shape
    if x.shape[-1] != cin:
        raise ValueError(f"conv2d expects {cin} input channels, got {x.shape[-1]}")
    xd = x.data
    if padding:
        xp = np.pad(xd, ((0, 0), (padding, padding), (padding, padding), (0, 0)))
    else:
        xp = xd
    cols, ho, wo = _im2col(xp, kh, kw, stride)
    w2 = w.data.reshape(kh * kw * cin, cout)
    b = xd.shape[0]
    out = (cols @ w2).reshape(b, ho, wo, cout)

    def back(g):
        g2 = g.reshape(-1, cout)
        gw = (cols.T @ g2).reshape(w.shape)
        gxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                part = (g2 @ w.data[i, j].T).reshape(b, ho, wo, cin)
                gxp[:, i : i + stride * ho : stride, j : j + stride * wo : stride, :] += part
        if padding:
            gxp = gxp[:, padding:-padding, padding:-padding, :]
        return gxp, gw

    return Tensor._make(out, (x, w), back)


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Normalize over every axis but the last (channels).

    In training mode the batch statistics are used and the running buffers are
    updated in place; in evaluation mode the running buffers are used.
    """
    xd = x.data
    shape = xd.shape
    c = shape[-1]
    x2 = xd.reshape(-1, c)
    n = x2.shape[0]
    if training:
        mu = x2.mean(axis=0)
        xc = x2 - mu
        var = np.einsum("ij,ij->j", xc, xc) / n
        running_mean *= 1 - momentum
        running_mean += momentum * mu
        running_var *= 1 - momentum
        running_var += momentum * var * (n / max(n - 1, 1))
        inv = (1.0 / np.sqrt(var + eps)).astype(xd.dtype)
        xhat = xc * inv
        out = (gamma.data * xhat + beta.data).reshape(shape)

        def back(g):
            g2 = g.reshape(-1, c)
            gg = g2.sum(axis=0)
            gx_hat = np.einsum("ij,ij->j", g2, xhat)
            gx = (gamma.data * inv / n) * (n * g2 - gg - xhat * gx_hat)
            return gx.reshape(shape), gx_hat, gg

        return Tensor._make(out, (x, gamma, beta), back)

    inv = (1.0 / np.sqrt(running_var + eps)).astype(xd.dtype)
    xhat = (x2 - running_mean) * inv
    out = (gamma.data * xhat + beta.data).reshape(shape)

    def back_eval(g):
        g2 = g.reshape(-1, c)
        return (g2 * (gamma.data * inv)).reshape(shape), np.einsum("ij,ij->j", g2, xhat), g2.sum(axis=0)

    return Tensor._make(out, (x, gamma, beta), back_eval)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    xd = x.data
    d = xd.shape[-1]
    mu = xd.mean(axis=-1, keepdims=True)
    var = xd.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mu) * inv
    out = gamma.data * xhat + beta.data
    lead = tuple(range(xd.ndim - 1))

    def back(g):
        gxh = g * gamma.data
        gx = (inv / d) * (d * gxh - gxh.sum(axis=-1, keepdims=True) - xhat * (gxh * xhat).sum(axis=-1, keepdims=True))
        return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return Tensor._make(out, (x, gamma, beta), back)


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over spatial axes of a (B, H, W, C) map, giving (B, C)."""
    return x.mean(axis=(1, 2))


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean binary cross-entropy of two-way logits.

    With the class-1 probability taken as the softmax of the logits this is
    exactly -mean(y log p + (1 - y) log(1 - p)), evaluated through
    log-softmax for numerical stability.
    """
    labels = np.asarray(labels, dtype=np.int64)
    logp = logits.log_softmax(axis=-1)
    picked = logp[np.arange(len(labels)), labels]
    return -picked.mean()


def attention_mask_fill(scores: Tensor, mask: np.ndarray, fill: float = -1e9) -> Tensor:
    """Replace masked-out attention scores with a large negative constant."""
    keep = mask.astype(scores.dtype)
    out = scores.data * keep + (1 - keep) * fill
    return Tensor._make(out, (scores,), lambda g: (g * keep,))
