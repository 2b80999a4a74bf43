"""Source-level evasion transformations for Python code."""
from __future__ import annotations

import ast
import builtins
import io
import keyword
import math
import token
import tokenize

import numpy as np

SUPPORTED_LANGUAGES = ("python", "synthetic")


class AttackError(ValueError):
    pass


class UnsupportedLanguageError(AttackError):
    pass


class InsufficientDonorError(AttackError):
    pass


class AttackSyntaxError(AttackError):
    """The input is not valid source for the language."""


def _check_language(language: str) -> None:
    if language not in SUPPORTED_LANGUAGES:
        raise UnsupportedLanguageError(f"attacks support {SUPPORTED_LANGUAGES}, not {language!r}")


def _parse(source: str) -> ast.Module:
    try:
        return ast.parse(source)
    except SyntaxError as exc:
        raise AttackSyntaxError(f"cannot parse input: {exc.msg} (line {exc.lineno})") from None


def check_syntax(source: str, language: str = "python") -> bool:
    _check_language(language)
    try:
        compile(source, "<attacked>", "exec")
    except (SyntaxError, ValueError):
        return False
    return True


def _lines(source: str) -> list[str]:
    return source.splitlines(keepends=True)


def _block_size(ratio: float, n_lines: int) -> int:
    # guard against 0.3 * 10 == 3.0000000000000004
    return int(math.ceil(ratio * n_lines - 1e-9))


def mix_code(generated: str, human: str, ratio: float, seed: int = 0) -> str:
    """Replace a contiguous block of ``ratio`` of the lines with human lines."""
    if not 0.0 < ratio < 1.0:
        raise AttackError(f"mix ratio must lie in (0, 1), got {ratio}")
    if not generated or not human:
        raise AttackError("mix_code needs non-empty generated and human sources")
    gen, donor = _lines(generated), _lines(human)
    block = _block_size(ratio, len(gen))
    if block == 0:
        return generated
    if len(donor) < block:
        raise InsufficientDonorError(f"donor has {len(donor)} lines, block needs {block}")
    rng = np.random.default_rng(seed)
    g0 = int(rng.integers(len(gen) - block + 1))
    h0 = int(rng.integers(len(donor) - block + 1))
    out = list(gen)
    for i in range(block):
        old = gen[g0 + i]
        ending = old[len(old.rstrip("\r\n")) :]
        out[g0 + i] = donor[h0 + i].rstrip("\r\n") + ending
    return "".join(out)


def _fstring_names(tok_string: str) -> set[str]:
    try:
        tree = ast.parse(tok_string, mode="eval")
    except SyntaxError:
        return set()
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}


# reading these makes definition names observable at run time
_NAME_REFLECTION = ("__name__", "__qualname__")
# these expose whole namespaces, so no binding can be renamed safely
_NAMESPACE_REFLECTION = ("globals", "locals", "vars")


def _user_names(tree: ast.Module) -> set[str]:
    """Names the program binds itself, minus those reachable as attributes.

    Programs that read ``__name__``/``__qualname__`` keep their function and
    class names; programs that call ``globals``/``locals``/``vars`` keep
    every name.
    """
    bound: set[str] = set()
    protected: set[str] = set()
    definitions: set[str] = set()
    reflects_names = False
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _NAMESPACE_REFLECTION:
            return set()
        if isinstance(node, ast.Attribute) and node.attr in _NAME_REFLECTION:
            reflects_names = True
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            definitions.add(node.name)
    if reflects_names:
        protected |= definitions
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            bound.add(node.id)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            bound.add(node.name)
        elif isinstance(node, ast.arg):
            bound.add(node.arg)
        elif isinstance(node, ast.ExceptHandler) and node.name:
            bound.add(node.name)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                protected.add((alias.asname or alias.name).split(".")[0])
                protected.add(alias.name.split(".")[0])
        elif isinstance(node, ast.Attribute):
            protected.add(node.attr)
        elif isinstance(node, (ast.Global, ast.Nonlocal)):
            bound.update(node.names)
    # members of class bodies are looked up as attributes
    for node in ast.walk(tree):
        if isinstance(node, ast.ClassDef):
            for stmt in node.body:
                if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                    protected.add(stmt.name)
                for sub in ast.walk(stmt) if isinstance(stmt, (ast.Assign, ast.AnnAssign, ast.AugAssign)) else ():
                    if isinstance(sub, ast.Name) and isinstance(sub.ctx, ast.Store):
                        protected.add(sub.id)
    # keyword arguments to callables the program did not define
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            own = isinstance(node.func, ast.Name) and node.func.id in bound
            if not own:
                protected.update(k.arg for k in node.keywords if k.arg)
    names = bound - protected
    return {
        n for n in names
        if not keyword.iskeyword(n) and not hasattr(builtins, n) and not (n.startswith("__") and n.endswith("__"))
    }


def _tokens(source: str) -> list[tokenize.TokenInfo]:
    try:
        return list(tokenize.generate_tokens(io.StringIO(source).readline))
    except (tokenize.TokenError, IndentationError) as exc:
        raise AttackSyntaxError(f"cannot tokenize input: {exc}") from None


def _offsets(source: str) -> list[int]:
    starts, pos = [0], 0
    for line in _lines(source):
        pos += len(line)
        starts.append(pos)
    return starts


def rename_identifiers(source: str, language: str = "python", seed: int = 0) -> str:
    """Consistently rename user-defined identifiers to fresh ``v<k>`` names."""
    _check_language(language)
    tree = _parse(source)
    toks = _tokens(source)
    names = _user_names(tree)
    for t in toks:
        if t.type == token.STRING and t.string.lstrip("rRbBuU").lower().startswith("f"):
            names -= _fstring_names(t.string)
    order: list[str] = []
    existing: set[str] = set()
    prev = None
    for t in toks:
        if t.type == token.NAME:
            existing.add(t.string)
            if t.string in names and t.string not in order and not (prev is not None and prev.string == "."):
                order.append(t.string)
        if t.type not in (token.NL, token.NEWLINE, token.COMMENT, token.INDENT, token.DEDENT):
            prev = t
    if not order:
        return source
    rng = np.random.default_rng(seed)
    fresh, k = [], 0
    while len(fresh) < len(order):
        cand = f"v{k}"
        if cand not in existing:
            fresh.append(cand)
        k += 1
    perm = rng.permutation(len(order))
    mapping = {name: fresh[int(j)] for name, j in zip(order, perm)}
    starts = _offsets(source)
    edits = []
    prev = None
    for t in toks:
        if t.type == token.NAME and t.string in mapping and not (prev is not None and prev.string == "."):
            a = starts[t.start[0] - 1] + t.start[1]
            edits.append((a, a + len(t.string), mapping[t.string]))
        if t.type not in (token.NL, token.NEWLINE, token.COMMENT, token.INDENT, token.DEDENT):
            prev = t
    out = source
    for a, b, new in reversed(edits):
        out = out[:a] + new + out[b:]
    return out


def _string_continuation_lines(source: str) -> set[int]:
    """1-based lines that sit inside a multi-line string literal."""
    inside: set[int] = set()
    for t in _tokens(source):
        if t.type == token.STRING and t.end[0] > t.start[0]:
            inside.update(range(t.start[0] + 1, t.end[0] + 1))
    return inside


def _insertion_points(source: str, tree: ast.Module) -> list[tuple[int, str]]:
    """(1-based line, indentation) where a statement may be inserted before."""
    lines = _lines(source)
    future_end = 0
    for stmt in tree.body:
        if isinstance(stmt, ast.ImportFrom) and stmt.module == "__future__":
            future_end = stmt.end_lineno
    points = set()
    for node in ast.walk(tree):
        for field in ("body", "orelse", "finalbody"):
            body = getattr(node, field, None)
            if not isinstance(body, list):
                continue
            for i, stmt in enumerate(body):
                if not isinstance(stmt, ast.stmt):
                    continue
                if i == 0 and isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant) and isinstance(stmt.value.value, str):
                    continue
                line = min([stmt.lineno] + [d.lineno for d in getattr(stmt, "decorator_list", [])])
                if line <= future_end:
                    continue
                text = lines[line - 1]
                indent = text[: len(text) - len(text.lstrip(" \t"))]
                if len(indent) != stmt.col_offset and not getattr(stmt, "decorator_list", None):
                    continue
                if text.lstrip(" \t").startswith(("elif", "else", "except", "finally")):
                    continue
                points.add((line, indent))
    return sorted(points)


def _insert(source: str, seed: int, make) -> str:
    tree = _parse(source)
    points = _insertion_points(source, tree)
    if not points:
        return source
    rng = np.random.default_rng(seed)
    n = min(len(points), int(rng.integers(1, 4)))
    chosen = sorted((points[int(i)] for i in rng.choice(len(points), size=n, replace=False)), reverse=True)
    lines = _lines(source)
    if lines and not lines[-1].endswith("\n"):
        lines[-1] += "\n"
    for k, (line, indent) in enumerate(chosen):
        stmt = make(rng, indent, k)
        lines.insert(line - 1, stmt)
    return "".join(lines)


def _fresh_name(source: str, rng: np.random.Generator, stem: str) -> str:
    while True:
        name = f"{stem}_{int(rng.integers(1000, 10000))}"
        if name not in source:
            return name


def insert_dead_code(source: str, language: str = "python", seed: int = 0) -> str:
    """Insert one to three statements that never affect behavior."""
    _check_language(language)

    def make(rng: np.random.Generator, indent: str, k: int) -> str:
        name = _fresh_name(source, rng, "unused")
        value = int(rng.integers(0, 100))
        kind = int(rng.integers(3))
        if kind == 0:
            return f"{indent}{name} = {value}\n"
        if kind == 1:
            return f"{indent}if False:\n{indent}    {name} = {value}\n"
        return f"{indent}{name} = [{value}] * 0\n"

    return _insert(source, seed, make)


def print_marker(seed: int) -> str:
    return f"trace-{np.random.default_rng([seed, 0x5052]).integers(1 << 32):08x}"


def insert_print(source: str, language: str = "python", seed: int = 0) -> str:
    """Insert one to three prints of the seeded :func:`print_marker`."""
    _check_language(language)
    marker = print_marker(seed)
    return _insert(source, seed, lambda rng, indent, k: f'{indent}print("{marker}")\n')


def _indent_unit(source: str) -> str:
    return "\t" if any(line.startswith("\t") for line in _lines(source)) else "    "


def _wrap_lines(lines: list[str], first: int, last: int, indent: str, unit: str, skip: set[int]) -> list[str]:
    """Wrap 1-based lines ``first..last`` in a try block that re-raises."""
    body = []
    for no in range(first, last + 1):
        text = lines[no - 1]
        if no in skip or not text.strip():
            body.append(text)
        else:
            body.append(unit + text)
    if body and not body[-1].endswith("\n"):
        body[-1] += "\n"
    head = [f"{indent}try:\n"]
    tail = [f"{indent}except Exception:\n", f"{indent}{unit}raise\n"]
    return lines[: first - 1] + head + body + tail + lines[last:]


def wrap_try_catch(source: str, language: str = "python", seed: int = 0) -> str:
    """Wrap the module body, or each top-level function body, in try/except-raise."""
    _check_language(language)
    tree = _parse(source)
    lines = _lines(source)
    unit = _indent_unit(source)
    skip = _string_continuation_lines(source)
    funcs = []
    for stmt in tree.body:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            body = stmt.body
            if isinstance(body[0], ast.Expr) and isinstance(body[0].value, ast.Constant) and isinstance(body[0].value.value, str):
                body = body[1:]
            if body and body[0].lineno > stmt.lineno and body[0].col_offset > stmt.col_offset:
                # a decorated first statement starts at its first decorator
                first = min([body[0].lineno] + [d.lineno for d in getattr(body[0], "decorator_list", [])])
                text = lines[first - 1]
                funcs.append((first, body[-1].end_lineno, text[: len(text) - len(text.lstrip(" \t"))]))
    rng = np.random.default_rng(seed)
    if funcs and rng.random() < 0.5:
        for first, last, indent in sorted(funcs, reverse=True):
            lines = _wrap_lines(lines, first, last, indent, unit, skip)
        return "".join(lines)
    body = list(tree.body)
    while body and isinstance(body[0], ast.ImportFrom) and body[0].module == "__future__":
        body.pop(0)
    if body and isinstance(body[0], ast.Expr) and isinstance(body[0].value, ast.Constant) and isinstance(body[0].value.value, str):
        body.pop(0)
    if not body:
        return source
    first = min([body[0].lineno] + [d.lineno for d in getattr(body[0], "decorator_list", [])])
    return "".join(_wrap_lines(lines, first, body[-1].end_lineno, "", unit, skip))
