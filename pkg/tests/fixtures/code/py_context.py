import contextlib
import time


@contextlib.contextmanager
def timed(label):
    start = time.perf_counter()
    try:
        yield
    finally:
        print(f"{label}: {time.perf_counter() - start:.3f}s")


with timed("sum"):
    total = sum(i * i for i in range(100_000))
