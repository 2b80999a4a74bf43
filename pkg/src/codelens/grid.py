"""Layout-preserving log-probability matrices and fixed-size canvases."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scorer.types import ScoredSeq

PAD_VALUE = -100.0
CANVAS_SIZE = (64, 64)
CLAMP_LO = -20.0


@dataclass
class LogProbGrid:
    """``values[r, c]`` is the log probability of token ``c`` on line ``r``.

    Lines end at (and include) the first token whose text contains a
    newline. Empty cells hold ``pad_value`` in ``values`` and None in ``tokens``.
    """

    values: np.ndarray
    tokens: list[list[str | None]]
    pad_value: float = PAD_VALUE

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def mask(self) -> np.ndarray:
        return grid_mask(self)

    def row_lengths(self) -> list[int]:
        return [sum(1 for t in row if t is not None) for row in self.tokens]

    def cells(self) -> np.ndarray:
        """Non-pad cells in row-major order."""
        return self.values[grid_mask(self)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "pad_value": self.pad_value,
            "values": self.values.tolist(),
            "tokens": [[t for t in row if t is not None] for row in self.tokens],
        }

    @classmethod
    def from_json(cls, obj: dict) -> LogProbGrid:
        """Inverse of :meth:`to_json`.

        ``tokens`` (ragged, real cells only) fixes each row's length; without
        it a cell is real when its value differs from the pad sentinel.
        """
        n, m = int(obj["n"]), int(obj["m"])
        pad = float(obj.get("pad_value", PAD_VALUE))
        values = np.asarray(obj["values"], dtype=np.float64).reshape(n, m)
        raw = obj.get("tokens")
        tokens: list[list[str | None]] = []
        for r in range(n):
            row = list(raw[r]) if raw is not None else [""] * int(np.count_nonzero(values[r] != pad))
            tokens.append(row + [None] * (m - len(row)))
        return cls(values, tokens, pad)


@dataclass
class SeqVector:
    values: np.ndarray

    @property
    def length(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class Canvas:
    pixels: np.ndarray
    mask: np.ndarray

    @property
    def H(self) -> int:
        return self.pixels.shape[0]

    @property
    def W(self) -> int:
        return self.pixels.shape[1]


def build_grid(scored: ScoredSeq, pad_value: float = PAD_VALUE) -> LogProbGrid:
    rows: list[list[tuple[float, str]]] = []
    current: list[tuple[float, str]] = []
    for tok in scored.tokens:
        current.append((tok.logprob, tok.text))
        if "\n" in tok.text:
            rows.append(current)
            current = []
    if current:
        rows.append(current)
    n = len(rows)
    m = max((len(r) for r in rows), default=0)
    values = np.full((n, m), pad_value, dtype=np.float64)
    tokens: list[list[str | None]] = []
    for r, row in enumerate(rows):
        values[r, : len(row)] = [lp for lp, _ in row]
        tokens.append([t for _, t in row] + [None] * (m - len(row)))
    return LogProbGrid(values, tokens, pad_value)


def to_seq_vector(scored: ScoredSeq) -> SeqVector:
    return SeqVector(np.array(scored.logprobs, dtype=np.float64))


def grid_mask(grid: LogProbGrid) -> np.ndarray:
    mask = np.zeros((grid.n, grid.m), dtype=bool)
    for r, k in enumerate(grid.row_lengths()):
        mask[r, :k] = True
    return mask


def to_canvas(grid: LogProbGrid, H: int = CANVAS_SIZE[0], W: int = CANVAS_SIZE[1], clamp_lo: float = CLAMP_LO) -> Canvas:
    """Crop ``grid`` into an HxW canvas anchored at the top-left.

    Real cells are clamped to [clamp_lo, 0] and mapped affinely onto [0, 1];
    pad cells and the area outside the grid are 0 with mask False.
    """
    if H < 1 or W < 1:
        raise ValueError("canvas dimensions must be positive")
    if not clamp_lo < 0:
        raise ValueError("clamp_lo must be negative")
    pixels = np.zeros((H, W), dtype=np.float64)
    mask = np.zeros((H, W), dtype=bool)
    h, w = min(H, grid.n), min(W, grid.m)
    if h and w:
        real = grid_mask(grid)[:h, :w]
        vals = np.clip(grid.values[:h, :w], clamp_lo, 0.0)
        pixels[:h, :w] = np.where(real, (vals - clamp_lo) / (-clamp_lo), 0.0)
        mask[:h, :w] = real
    return Canvas(pixels, mask)
