"""EMB1 binary writer.

Layout, bit-exact: magic ``EMB1`` (4 ASCII bytes), uint32 little-endian row
count, uint32 little-endian dimension, then rows*dim float32 little-endian
values, row-major.  No padding, no footer.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


def write_emb1(matrix: np.ndarray, path) -> None:
    """Write a 2-D float matrix as EMB1, atomically."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
    if matrix.size and not np.isfinite(matrix).all():
        raise ValueError("embedding matrix contains non-finite values")
    path = Path(path)
    rows, dim = matrix.shape
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, rows, dim))
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
