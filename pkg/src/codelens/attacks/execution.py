"""Run Python snippets in a child interpreter and compare what they print."""
from __future__ import annotations

import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

DEFAULT_TIMEOUT = 10.0


@dataclass(frozen=True)
class ExecResult:
    stdout: str
    stderr: str
    returncode: int
    timed_out: bool = False

    @property
    def exception(self) -> str | None:
        """Exception type name from an uncaught traceback, if any."""
        if self.returncode == 0 or "Traceback" not in self.stderr:
            return None
        last = self.stderr.strip().splitlines()[-1]
        return last.split(":", 1)[0].strip().rsplit(".", 1)[-1]


def run_python(source: str, timeout: float = DEFAULT_TIMEOUT, stdin: str = "") -> ExecResult:
    """Execute ``source`` in an isolated interpreter inside a scratch directory."""
    with tempfile.TemporaryDirectory(prefix="codelens-exec-") as tmp:
        path = Path(tmp) / "main.py"
        path.write_text(source, encoding="utf-8")
        try:
            proc = subprocess.run(
                [sys.executable, "-I", "-S", str(path)],
                cwd=tmp,
                input=stdin,
                capture_output=True,
                text=True,
                timeout=timeout,
                env={"PYTHONHASHSEED": "0", "PYTHONIOENCODING": "utf-8"},
            )
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else exc.stdout or ""
            return ExecResult(out, "", -1, timed_out=True)
    return ExecResult(proc.stdout, proc.stderr, proc.returncode)


def strip_marker(stdout: str, marker: str) -> str:
    """Remove every ``marker`` line written by an inserted print."""
    return stdout.replace(marker + "\n", "")
