"""Detect LLM-generated source code from grids of per-token log probabilities."""
__version__ = "0.1.0"

from .grid import LogProbGrid, SeqVector, build_grid, to_canvas, to_seq_vector
from .tokenizer import Tokenizer, TokenSeq, get_tokenizer

__all__ = [
    "LogProbGrid",
    "SeqVector",
    "TokenSeq",
    "Tokenizer",
    "__version__",
    "build_grid",
    "get_tokenizer",
    "to_canvas",
    "to_seq_vector",
]
