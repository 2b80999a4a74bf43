"""Central finite-difference gradient checking."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def numeric_grad(f: Callable[[], float], arr: np.ndarray, h: float = 1e-4) -> np.ndarray:
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + h
        up = f()
        arr[idx] = orig - h
        down = f()
        arr[idx] = orig
        grad[idx] = (up - down) / (2 * h)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """max |a - n| / max(|a| + |n|, floor) elementwise."""
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def check_gradients(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    h: float = 1e-4,
    seed: int = 0,
) -> float:
    """Compare backward() against central differences for a scalar projection.

    ``fn(*inputs)`` may return any shape; it is reduced to a scalar by a fixed
    random projection so every output element contributes. Returns the worst
    relative error over all inputs that require grad.
    """
    out = fn(*inputs)
    proj = np.random.default_rng(seed).normal(size=out.shape)

    for t in inputs:
        t.grad = None
    loss = (out * Tensor(proj.astype(out.dtype))).sum()
    loss.backward()

    def scalar() -> float:
        return float((fn(*inputs).data * proj).sum())

    worst = 0.0
    for t in inputs:
        if not t.requires_grad:
            continue
        num = numeric_grad(scalar, t.data, h)
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        worst = max(worst, max_relative_error(analytic, num))
    return worst
