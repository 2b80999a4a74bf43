"""Shared builders for hand-made scored sequences."""
from codelens.scorer import ScoredSeq, ScoredToken


def scored(texts, logprobs, ranks=None, alternatives=None) -> ScoredSeq:
    ranks = ranks or [1] * len(texts)
    alternatives = alternatives or [(("x", 0.0),)] * len(texts)
    toks = tuple(
        ScoredToken(i, t, float(lp), int(r), tuple(a))
        for i, (t, lp, r, a) in enumerate(zip(texts, logprobs, ranks, alternatives))
    )
    return ScoredSeq(toks, "test")


def grid_fidelity_errors(source: str, provider) -> list[str]:
    """Mismatches between a source's scored grid and its token stream."""
    import numpy as np

    from codelens.grid import PAD_VALUE, build_grid
    from codelens.scorer import score_sequence
    from codelens.tokenizer import encode

    seq = score_sequence(encode(source), provider)
    grid = build_grid(seq)
    texts = seq.texts
    # newline-token rule: a row ends at every token holding a newline
    rows = sum("\n" in t for t in texts) + (bool(texts) and "\n" not in texts[-1])
    errors = []
    if grid.n != rows:
        errors.append(f"rows {grid.n} != {rows}")
    if grid.n > source.count("\n") + 1:
        errors.append(f"rows {grid.n} exceed physical lines")
    real = np.zeros(grid.values.shape, dtype=bool)
    start = 0
    for r in range(grid.n):
        end = start
        while end < len(texts) and "\n" not in texts[end]:
            end += 1
        end = min(end + 1, len(texts))
        real[r, : end - start] = True
        if [t for t in grid.tokens[r] if t is not None] != texts[start:end]:
            errors.append(f"row {r} tokens differ")
        start = end
    if not np.array_equal(grid.values[real], np.array(seq.logprobs)):
        errors.append("real cells do not flatten to the sequence")
    if not np.all(grid.values[~real] == PAD_VALUE):
        errors.append("pad cell differs from the pad value")
    return errors
