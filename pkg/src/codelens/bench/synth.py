"""Seeded synthetic dataset of small Python programs.

Programs are assembled from statement templates containing slots
(identifiers, literals, operators, builtins). Two habits separate the
classes:

* slot choice: a human-class sample fills every slot uniformly at random;
  an LLM-class sample fills each slot, with probability equal to the
  greedy rate, by the option with the highest mean oracle log probability
  over the slot text plus the fixed text that follows it;
* layout: human-class lines independently pick up informal habits (inline
  comments, compact operator spacing, stray blank lines, two statements
  joined by a semicolon); an LLM-class line is written canonically with
  probability equal to the canonical rate and otherwise behaves like a
  human line.

Every program is then scored end to end by the same oracle, so the class
difference reaches the grids only through the scorer. The oracle sees
three tokens of context, so layout consistency is mostly visible in the
arrangement of the grid rather than in any single token's score.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..scorer import OracleProvider, score_sequence
from ..scorer.oracle import NGramPrior
from ..tokenizer import get_tokenizer
from .data import CodeSample

VARS = (
    "x", "y", "n", "i", "j", "k", "total", "count", "value", "result", "items", "data", "acc",
    "idx", "num", "size", "left", "right", "buf", "temp", "node", "key", "val", "res", "out",
    "s", "t", "a", "b", "step", "cur", "prev", "best", "score", "limit", "chunk",
)
FUNCS = (
    "solve", "main_loop", "compute", "process", "helper", "update", "merge", "parse", "build",
    "count_items", "find_max", "check", "transform", "run", "evaluate", "collect", "walk",
    "reduce_all", "scan", "apply",
)
CLASSES = ("Solver", "Node", "Graph", "Counter", "Stack", "Buffer", "Parser", "Tracker", "Queue", "Matrix")
NUMBERS = ("0", "1", "2", "3", "5", "7", "10", "16", "42", "100", "255", "1000", "-1", "8", "64")
STRINGS = ('"ok"', '"done"', '"result"', '"value:"', '"error"', '"start"', "'x'", '"n ="', '""', '"total"', '"%d"', '"sum"')
BINOPS = (" + ", " - ", " * ", " // ", " % ")
AUGOPS = (" += ", " -= ", " *= ", " |= ", " ^= ")
COMMENTS = ("fix later", "hack", "why?", "see above", "old", "tmp", "check this", "off by one?", "works", "xxx")
CMPOPS = (" < ", " > ", " <= ", " >= ", " == ", " != ")
BUILTINS = ("len", "abs", "sum", "max", "min", "sorted", "list", "int", "str", "bool")
CONSTS = tuple(v.upper() for v in VARS if len(v) > 1)
DOCSTRINGS = ("Compute the result.", "Helper.", "Process the input.", "Return a value.", "Update state.")
IMPORTS = (
    "import os\n", "import sys\n", "import math\n", "from collections import defaultdict\n",
    "import itertools\n", "from functools import reduce\n", "import re\n", "import heapq\n",
)

LOOKAHEAD_CHARS = 16
TAIL_CHARS = 48


@dataclass(eq=False)
class Slot:
    options: tuple[str, ...]
    distinct_from: tuple[Slot, ...] = ()
    value: str | None = None

    def allowed(self) -> tuple[str, ...]:
        taken = {s.value for s in self.distinct_from}
        return tuple(o for o in self.options if o not in taken) or self.options


@dataclass
class Ref:
    slot: Slot


# per-line chance of each informal layout habit in human-style lines
COMPACT_RATE = 0.35
COMMENT_RATE = 0.25
BLANK_RATE = 0.15
COMPOUND_RATE = 0.15


@dataclass(frozen=True)
class LineStyle:
    compact: bool = False
    comment: bool = False
    blank: bool = False
    compound: bool = False

    def op(self, text: str) -> str:
        return text.strip() if self.compact else text


@dataclass
class _Skeleton:
    pieces: list = field(default_factory=list)
    canon_rate: float = 0.0

    def line_style(self, rng: np.random.Generator) -> LineStyle:
        """Canonical with probability ``canon_rate``, else sampled habits."""
        u = rng.random(5)
        if u[0] < self.canon_rate:
            return LineStyle()
        return LineStyle(u[1] < COMPACT_RATE, u[2] < COMMENT_RATE, u[3] < BLANK_RATE, u[4] < COMPOUND_RATE)

    def end_line(self, style: LineStyle) -> None:
        if style.comment:
            self.add("  # ")
            self.slot(COMMENTS)
        self.add("\n")

    def add(self, *items) -> None:
        self.pieces.extend(items)

    def slot(self, options, distinct_from=()) -> Slot:
        s = Slot(tuple(options), tuple(distinct_from))
        self.pieces.append(s)
        return s


def _pick(rng: np.random.Generator, names: list[Slot]) -> Ref:
    return Ref(names[int(rng.integers(len(names)))])


def _expr(sk: _Skeleton, rng: np.random.Generator, names: list[Slot], style: LineStyle = LineStyle()) -> None:
    kind = int(rng.integers(4))
    if kind == 0 or not names:
        sk.slot(NUMBERS)
    elif kind == 1:
        sk.add(_pick(rng, names))
    elif kind == 2:
        sk.add(_pick(rng, names))
        sk.slot(tuple(style.op(o) for o in BINOPS))
        sk.slot(NUMBERS)
    else:
        sk.slot(BUILTINS)
        sk.add("(", _pick(rng, names), ")")


def _body(sk: _Skeleton, rng: np.random.Generator, indent: str, names: list[Slot], depth: int) -> None:
    n_stmts = int(rng.integers(2, 7 if depth == 0 else 4))
    for _ in range(n_stmts):
        kind = int(rng.integers(7 if depth < 2 else 4))
        st = sk.line_style(rng)
        if st.blank:
            sk.add("\n")
        if kind in (0, 1) or not names:
            sk.add(indent)
            v = sk.slot(VARS, names)
            sk.add(st.op(" = "))
            _expr(sk, rng, names, st)
            names.append(v)
            if st.compound:
                sk.add("; ")
                w = sk.slot(VARS, names)
                sk.add(st.op(" = "))
                _expr(sk, rng, names, st)
                names.append(w)
            sk.end_line(st)
        elif kind == 2:
            sk.add(indent, _pick(rng, names))
            sk.slot(tuple(st.op(o) for o in AUGOPS))
            _expr(sk, rng, names, st)
            sk.end_line(st)
        elif kind == 3:
            sk.add(indent, "print(")
            sk.slot(STRINGS)
            sk.add("," if st.compact else ", ", _pick(rng, names), ")")
            sk.end_line(st)
        elif kind == 4:
            sk.add(indent, "for ")
            v = sk.slot(VARS, names)
            sk.add(" in range(")
            _expr(sk, rng, names, st)
            sk.add("):")
            sk.end_line(st)
            _body(sk, rng, indent + "    ", names + [v], depth + 1)
        elif kind == 5:
            sk.add(indent, "if ", _pick(rng, names))
            sk.slot(tuple(st.op(o) for o in CMPOPS))
            sk.slot(NUMBERS)
            sk.add(":")
            sk.end_line(st)
            _body(sk, rng, indent + "    ", list(names), depth + 1)
            if rng.random() < 0.5:
                sk.add(indent, "else:\n")
                _body(sk, rng, indent + "    ", list(names), depth + 1)
        else:
            sk.add(indent)
            acc = sk.slot(VARS, names)
            sk.add(st.op(" = ") + "[]\n", indent, "for ")
            w = sk.slot(VARS, names + [acc])
            sk.add(" in range(")
            sk.slot(NUMBERS)
            sk.add("):\n", indent, "    ", Ref(acc), ".append(", Ref(w))
            sk.slot(tuple(st.op(o) for o in BINOPS))
            sk.slot(NUMBERS)
            sk.add(")")
            sk.end_line(st)
            names.append(acc)


def _function(
    sk: _Skeleton, rng: np.random.Generator, indent: str = "", method: bool = False, taken: tuple[Slot, ...] = ()
) -> tuple[Slot, int]:
    sk.add(indent, "def ")
    fname = sk.slot(FUNCS, taken)
    sk.add("(")
    params: list[Slot] = []
    if method:
        sk.add("self")
    for p in range(int(rng.integers(0 if method else 1, 3))):
        if p or method:
            sk.add(", ")
        params.append(sk.slot(VARS, params))
    sk.add("):\n")
    inner = indent + "    "
    if rng.random() < 0.3:
        sk.add(inner, '"""')
        sk.slot(DOCSTRINGS)
        sk.add('"""\n')
    names = list(params)
    _body(sk, rng, inner, names, 0)
    sk.add(inner, "return ")
    if names:
        sk.add(_pick(rng, names))
    else:
        sk.slot(NUMBERS)
    sk.add("\n")
    return fname, len(params)


def skeleton(rng: np.random.Generator, canon_rate: float = 0.0) -> _Skeleton:
    sk = _Skeleton(canon_rate=canon_rate)
    for imp in sorted(rng.choice(len(IMPORTS), size=int(rng.integers(0, 3)), replace=False)):
        sk.add(IMPORTS[int(imp)])
    consts: list[Slot] = []
    for _ in range(int(rng.integers(0, 3))):
        consts.append(sk.slot(CONSTS, consts))
        sk.add(" = ")
        sk.slot(NUMBERS)
        sk.add("\n")
    funcs: list[tuple[Slot, int]] = []
    for _ in range(int(rng.integers(1, 4))):
        if sk.pieces:
            sk.add("\n\n")
        if rng.random() < 0.2:
            sk.add("class ")
            sk.slot(CLASSES)
            sk.add(":\n")
            first, _ = _function(sk, rng, "    ", method=True)
            sk.add("\n")
            _function(sk, rng, "    ", method=True, taken=(first,))
        else:
            funcs.append(_function(sk, rng, taken=tuple(f for f, _ in funcs)))
    if funcs and rng.random() < 0.6:
        fname, arity = funcs[-1]
        sk.add("\n\n", 'if __name__ == "__main__":\n', "    print(", Ref(fname), "(")
        for a in range(arity):
            if a:
                sk.add(", ")
            sk.slot(NUMBERS)
        sk.add("))\n")
    return sk


class _Filler:
    def __init__(self, provider: OracleProvider | None, rng: np.random.Generator, greedy_rate: float):
        self.provider = provider
        self.rng = rng
        self.greedy_rate = greedy_rate
        self.tok = get_tokenizer()

    def _after(self, pieces: list, idx: int) -> str:
        out = ""
        for p in pieces[idx + 1 :]:
            if isinstance(p, Slot) or (isinstance(p, Ref) and p.slot.value is None) or len(out) >= LOOKAHEAD_CHARS:
                break
            out += p.slot.value if isinstance(p, Ref) else p
        return out[:LOOKAHEAD_CHARS]

    def option_score(self, text: str, option: str, after: str) -> float:
        """Mean oracle log probability of ``option + after`` following ``text``."""
        tail = text[-TAIL_CHARS:]
        base = self.tok.encode(tail).ids
        full = self.tok.encode(tail + option + after).ids
        k = 0
        while k < min(len(base), len(full)) and base[k] == full[k]:
            k += 1
        if k == len(full):
            return 0.0
        lps = [self.provider.score(full[:j], full[j]).logprob for j in range(k, len(full))]
        return float(np.mean(lps))

    def fill(self, sk: _Skeleton, llm: bool) -> str:
        text = ""
        for idx, p in enumerate(sk.pieces):
            if isinstance(p, str):
                text += p
            elif isinstance(p, Ref):
                text += p.slot.value
            else:
                opts = p.allowed()
                if llm and self.rng.random() < self.greedy_rate:
                    after = self._after(sk.pieces, idx)
                    scores = [self.option_score(text, o, after) for o in opts]
                    p.value = opts[int(np.argmax(scores))]
                else:
                    p.value = opts[int(self.rng.integers(len(opts)))]
                text += p.value
        return text


def generate_program(
    seed: int, label: int, greedy_rate: float, provider: OracleProvider, canon_rate: float = 0.0
) -> str:
    rng = np.random.default_rng(seed)
    sk = skeleton(rng, canon_rate if label else 0.0)
    return _Filler(provider, rng, greedy_rate).fill(sk, llm=bool(label))


PRIOR_CORPUS_SIZE = 400
PRIOR_CORPUS_SEED = 7919
_PRIOR: NGramPrior | None = None


def code_prior() -> NGramPrior:
    """N-gram prior fitted on human-class programs from a reserved seed.

    This is the oracle's knowledge of the template language, playing the
    part of the code an LLM was trained on. Built once per process.
    """
    global _PRIOR
    if _PRIOR is None:
        tok = get_tokenizer()
        corpus = []
        for i in range(PRIOR_CORPUS_SIZE):
            rng = np.random.default_rng([PRIOR_CORPUS_SEED, i])
            corpus.append(tok.encode(_Filler(None, rng, 0.0).fill(skeleton(rng), llm=False)).ids)
        _PRIOR = NGramPrior(corpus, f"synth-ngram-{PRIOR_CORPUS_SIZE}x{PRIOR_CORPUS_SEED}")
    return _PRIOR


def default_oracle(seed: int = 0) -> OracleProvider:
    return OracleProvider(seed, prior=code_prior())


# likelihood preference grows slower than layout discipline, so mid-range
# separability leaves most of the class signal in the layout
GREEDY_POWER = 3.0
CANON_POWER = 0.5


def separability_rates(separability: float) -> tuple[float, float]:
    """(greedy slot rate, canonical line rate) of the LLM class."""
    return separability**GREEDY_POWER, separability**CANON_POWER


def synthesize_dataset(n: int, separability: float, seed: int = 0, oracle_seed: int = 0) -> list[CodeSample]:
    """``n`` oracle-scored programs, labels alternating 0/1.

    ``separability`` sets both LLM-class rates through
    :func:`separability_rates`: 0 makes the classes identically distributed,
    1 fills every slot greedily and writes every line canonically.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if not 0.0 <= separability <= 1.0:
        raise ValueError("separability must lie in [0, 1]")
    provider = default_oracle(oracle_seed)
    tok = get_tokenizer()
    greedy, canon = separability_rates(separability)
    samples = []
    for i in range(n):
        label = i % 2
        sample_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        source = generate_program(sample_seed, label, greedy, provider, canon)
        gen = f"synthetic:{'llm' if label else 'human'}:sep={separability:g}:seed={seed}"
        sample = CodeSample(f"syn{seed}-{i:05d}", source, "python", label, gen)
        samples.append(sample.with_scores(score_sequence(tok.encode(source), provider)))
    return samples
