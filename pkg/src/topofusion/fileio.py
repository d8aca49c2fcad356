"""Small file helpers shared by the on-disk formats.

All writers go through :func:`atomic_write_text` / :func:`atomic_write_bytes`
(write to a temp file in the target directory, then rename) so a crashed
process never leaves a half-written artifact behind. Floats are rendered
with 17 significant digits, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path


def fmt(x: float) -> str:
    """Render a float with 17 significant digits (lossless for float64)."""
    return "%.17g" % float(x)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
