"""Sentence embedding matrices and the EMB1 binary file format.

EMB1 layout, bit-exact: magic ``EMB1`` (4 ASCII bytes), uint32 little-endian
row count, uint32 little-endian dimension, then rows*dim float32
little-endian values in row-major order.  No padding, no footer.

Embeddings are an input artifact produced by an external encoder; for tests
and offline runs, ``fallback_embed`` provides a deterministic substitute
based on hashed character trigrams.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import fnv1a64, mix64

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


class EmbeddingFormatError(ValueError):
    """Corrupt or malformed EMB1 file."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray  # N x dim, float32

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {v.shape}")
        if v.dtype != np.float32:
            raise ValueError(f"embedding matrix must be float32, got {v.dtype}")
        if v.size and not np.isfinite(v).all():
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def subset(self, indices) -> "EmbeddingMatrix":
        return EmbeddingMatrix(np.ascontiguousarray(self.values[np.asarray(indices, dtype=np.int64)]))


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Write an EMB1 file atomically (temp file + rename)."""
    path = Path(path)
    payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    header = _HEADER.pack(MAGIC, matrix.rows, matrix.dim)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".emb1.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_embeddings(path) -> EmbeddingMatrix:
    """Load an EMB1 file, validating magic, size, and finiteness."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise EmbeddingFormatError(f"{path}: truncated header")
    magic, rows, dim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + rows * dim * 4
    if len(blob) < expected:
        raise EmbeddingFormatError(
            f"{path}: truncated payload (expected {expected} bytes, got {len(blob)})"
        )
    if len(blob) > expected:
        raise EmbeddingFormatError(
            f"{path}: {len(blob) - expected} trailing bytes after payload"
        )
    flat = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    values = flat.reshape(rows, dim).astype(np.float32, copy=True)
    if values.size and not np.isfinite(values).all():
        raise EmbeddingFormatError(f"{path}: payload contains non-finite values")
    return EmbeddingMatrix(values)


def _text_trigrams(text: str):
    padded = "\x02" + text + "\x03"
    for i in range(len(padded) - 2):
        yield padded[i : i + 3]


def fallback_embed(texts, dim: int = 512, seed: int = 0) -> EmbeddingMatrix:
    """Deterministic stand-in embedder: signed hashed character trigrams.

    Each text's trigrams (with begin/end sentinels, so any nonempty text has
    at least one) are hashed into dim buckets with a +/-1 sign bit, then the
    row is L2-normalized.  Identical texts always map to identical rows;
    empty texts map to the zero row.
    """
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    salt = mix64(seed)
    out = np.zeros((len(texts), dim), dtype=np.float64)
    cache: dict[str, np.ndarray] = {}
    for row, text in enumerate(texts):
        if text == "":
            continue
        cached = cache.get(text)
        if cached is None:
            vec = np.zeros(dim, dtype=np.float64)
            for gram in _text_trigrams(text):
                h = mix64(fnv1a64(gram.encode("utf-8")) ^ salt)
                sign = 1.0 if h & 1 else -1.0
                vec[(h >> 1) % dim] += sign
            norm = float(np.sqrt(np.sum(vec * vec)))
            if norm > 0.0:
                vec /= norm
            cached = cache[text] = vec
        out[row] = cached
    return EmbeddingMatrix(out.astype(np.float32))
