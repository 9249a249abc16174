"""Run one export job: read corpus, encode in batches, write EMB1 + sidecar."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .emb1 import write_emb1
from .encoders import load_encoder


class ExportError(ValueError):
    """Unreadable input or encoder output that violates the job contract."""


@dataclass(frozen=True)
class ExportJob:
    input_path: str
    output_path: str
    format: str = "jsonl"  # or "csv"
    encoder: str = "use"
    batch_size: int = 64
    expect_dim: int | None = None


def read_texts(path, format: str) -> list[str]:
    path = Path(path)
    if not path.exists():
        raise ExportError(f"input file not found: {path}")
    if format == "jsonl":
        texts = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ExportError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
                if not isinstance(obj, dict) or "text" not in obj:
                    raise ExportError(f"{path}:{lineno}: expected object with a text field")
                texts.append(str(obj["text"]))
        return texts
    if format == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ExportError(f"{path}: empty input")
            try:
                text_col = [h.strip().lower() for h in header].index("text")
            except ValueError:
                raise ExportError(f"{path}:1: no 'text' column in header {header!r}") from None
            return [row[text_col] for row in reader if row]
    raise ExportError(f"unknown input format {format!r}")


def export(job: ExportJob) -> dict:
    """Encode the corpus and write the EMB1 file plus ``<output>.meta.json``.

    Returns the sidecar dict.  Row i of the output is the embedding of
    record i.
    """
    texts = read_texts(job.input_path, job.format)
    if not texts:
        raise ExportError(f"{job.input_path}: no records to encode")
    if job.batch_size < 1:
        raise ExportError("batch_size must be positive")

    encoder = load_encoder(job.encoder)
    if job.expect_dim is not None and encoder.dim != job.expect_dim:
        raise ExportError(
            f"encoder {job.encoder!r} produces dim {encoder.dim}, expected {job.expect_dim}"
        )

    batches = []
    for start in range(0, len(texts), job.batch_size):
        block = encoder.encode(texts[start : start + job.batch_size])
        block = np.asarray(block, dtype=np.float32)
        if block.ndim != 2 or block.shape[0] != len(texts[start : start + job.batch_size]):
            raise ExportError(f"encoder returned shape {block.shape} for a batch")
        if block.shape[1] != encoder.dim:
            raise ExportError(
                f"encoder dim drifted: declared {encoder.dim}, got {block.shape[1]}"
            )
        batches.append(block)
    matrix = np.vstack(batches)

    write_emb1(matrix, job.output_path)
    digest = hashlib.sha256(Path(job.output_path).read_bytes()).hexdigest()
    sidecar = {
        "encoder": job.encoder,
        "version": encoder.version,
        "dim": int(matrix.shape[1]),
        "rows": int(matrix.shape[0]),
        "sha256": digest,
    }
    sidecar_path = Path(f"{job.output_path}.meta.json")
    fd, tmp = tempfile.mkstemp(dir=sidecar_path.parent, suffix=".meta.tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, sort_keys=True, indent=2)
            fh.write("\n")
        os.replace(tmp, sidecar_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return sidecar
