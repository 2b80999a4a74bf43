from collections import Counter
from pathlib import Path

import pytest

from codelens.scorer import OracleProvider
from helpers import grid_fidelity_errors

CODE = sorted((Path(__file__).parent / "fixtures" / "code").iterdir())
LANG = {".c": "c", ".h": "c", ".cpp": "cpp", ".hpp": "cpp", ".go": "go", ".java": "java", ".py": "python", ".rb": "ruby"}
PROVIDER = OracleProvider(0)


def test_corpus_size_and_languages():
    langs = Counter(LANG[p.suffix] for p in CODE)
    assert len(CODE) >= 50
    assert set(langs) == {"c", "cpp", "go", "java", "python", "ruby"}


@pytest.mark.parametrize("path", CODE, ids=lambda p: p.name)
def test_grid_matches_token_stream(path):
    assert grid_fidelity_errors(path.read_text(encoding="utf-8"), PROVIDER) == []
