import os

os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


_DATASETS: dict = {}
GENERATION_SECONDS: dict = {}
ACCEPTANCE: list[str] = []


def synthetic(n: int, separability: float, seed: int = 1):
    """Synthetic dataset shared across the session (generation is the slow part)."""
    import time

    from codelens.bench import synthesize_dataset

    key = (n, separability, seed)
    if key not in _DATASETS:
        start = time.perf_counter()
        _DATASETS[key] = synthesize_dataset(n, separability, seed=seed)
        GENERATION_SECONDS[key] = time.perf_counter() - start
    return _DATASETS[key]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
