"""Labeled text corpora and train/val/test triplet sampling.

A corpus is an ordered list of (text, label) records with a declared class
count.  Triplets are drawn by first fixing one test set of size k per corpus,
then repeatedly picking a corpus uniformly at random and drawing 9k train +
k val records disjoint from that test set and from each other.  Train/val
sets of *different* triplets may overlap; disjointness is only required
within a triplet.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import derive_seed, random_ints_below, sample_without_replacement


class CorpusError(ValueError):
    """Malformed corpus file or inconsistent labels."""


@dataclass(frozen=True)
class TextRecord:
    text: str
    label: int


@dataclass(frozen=True)
class Corpus:
    id: str
    records: tuple[TextRecord, ...]
    total_classes: int

    def __post_init__(self):
        if not self.records:
            raise CorpusError(f"corpus {self.id!r}: empty corpus")
        if self.total_classes < 2:
            raise CorpusError(
                f"corpus {self.id!r}: total_classes must be >= 2, got {self.total_classes}"
            )
        for i, rec in enumerate(self.records):
            if not rec.text.strip():
                raise CorpusError(f"corpus {self.id!r}: record {i}: empty text")
            if not 0 <= rec.label < self.total_classes:
                raise CorpusError(
                    f"corpus {self.id!r}: record {i}: label {rec.label} outside "
                    f"[0, {self.total_classes})"
                )

    def __len__(self) -> int:
        return len(self.records)

    def take(self, indices) -> list[TextRecord]:
        return [self.records[int(i)] for i in indices]


@dataclass(frozen=True)
class DatasetTriplet:
    """One (train, val, test) draw, stored as record indices into its corpus."""

    triplet_id: str
    corpus_id: str
    train_indices: tuple[int, ...]
    val_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int

    def __post_init__(self):
        tr, va, te = (
            set(self.train_indices),
            set(self.val_indices),
            set(self.test_indices),
        )
        if tr & va or tr & te or va & te:
            raise ValueError(f"triplet {self.triplet_id}: index sets overlap")
        if len(self.train_indices) != 9 * len(self.val_indices) or len(
            self.val_indices
        ) != len(self.test_indices):
            raise ValueError(f"triplet {self.triplet_id}: sizes are not 9:1:1")

    def train_records(self, corpus: Corpus) -> list[TextRecord]:
        return corpus.take(self.train_indices)

    def val_records(self, corpus: Corpus) -> list[TextRecord]:
        return corpus.take(self.val_indices)

    def test_records(self, corpus: Corpus) -> list[TextRecord]:
        return corpus.take(self.test_indices)


def _parse_label(raw, where: str) -> int:
    if isinstance(raw, bool):
        raise CorpusError(f"{where}: label must be an integer, got boolean")
    if isinstance(raw, int):
        label = raw
    elif isinstance(raw, str):
        try:
            label = int(raw.strip())
        except ValueError:
            raise CorpusError(f"{where}: label {raw!r} is not an integer") from None
    elif isinstance(raw, float) and raw.is_integer():
        label = int(raw)
    else:
        raise CorpusError(f"{where}: label {raw!r} is not an integer")
    if label < 0:
        raise CorpusError(f"{where}: label {label} is negative")
    return label


def load_corpus(
    path, format: str, total_classes: int | None = None, corpus_id: str | None = None
) -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    JSONL: one object per line with keys "text" and "label".  CSV: header
    ``text,label`` with RFC-4180 quoting.  When total_classes is omitted it
    is set to max observed label + 1.
    """
    path = Path(path)
    if corpus_id is None:
        corpus_id = path.stem
    if format not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format {format!r}")
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")

    raw: list[tuple[str, int]] = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                where = f"{path}:{lineno}"
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from None
                if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
                    raise CorpusError(f"{where}: expected object with text and label")
                raw.append((str(obj["text"]), _parse_label(obj["label"], where)))
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise CorpusError(f"{path}: empty corpus")
            if [h.strip().lower() for h in header] != ["text", "label"]:
                raise CorpusError(f"{path}:1: expected header 'text,label', got {header!r}")
            for rowno, row in enumerate(reader, start=2):
                if not row:
                    continue
                where = f"{path}:{rowno}"
                if len(row) != 2:
                    raise CorpusError(f"{where}: expected 2 columns, got {len(row)}")
                raw.append((row[0], _parse_label(row[1], where)))

    if not raw:
        raise CorpusError(f"{path}: empty corpus")

    max_label = max(label for _, label in raw)
    if total_classes is None:
        total_classes = max_label + 1
    else:
        for i, (_, label) in enumerate(raw):
            if label >= total_classes:
                raise CorpusError(
                    f"{path}: record {i}: label {label} >= declared "
                    f"total_classes {total_classes}"
                )
    records = tuple(TextRecord(text, label) for text, label in raw)
    return Corpus(id=corpus_id, records=records, total_classes=total_classes)


def remap_labels(corpus: Corpus, target_classes: int, group_size: int) -> Corpus:
    """Coarsen the label space: label l maps to l // group_size.

    Records whose label is >= group_size * target_classes (the residual
    labels that do not fill a whole group) are discarded.
    """
    if target_classes < 1 or group_size < 1:
        raise CorpusError("target_classes and group_size must be positive")
    if group_size * target_classes > corpus.total_classes:
        raise CorpusError(
            f"corpus {corpus.id!r}: group_size*target_classes = "
            f"{group_size * target_classes} exceeds total_classes {corpus.total_classes}"
        )
    limit = group_size * target_classes
    kept = tuple(
        TextRecord(rec.text, rec.label // group_size)
        for rec in corpus.records
        if rec.label < limit
    )
    if not kept:
        raise CorpusError(f"corpus {corpus.id!r}: remapping discarded every record")
    return Corpus(id=corpus.id, records=kept, total_classes=target_classes)


def sample_triplets(
    corpora: list[Corpus], n_triplets: int = 500, k: int = 100, seed: int = 0
) -> list[DatasetTriplet]:
    """Draw n_triplets (train, val, test) instances across the given corpora.

    One test set of size k is fixed per corpus up front; every triplet from
    that corpus reuses it.  Each triplet then samples 9k train + k val
    records from the remaining indices, without replacement within the
    triplet.  Fully deterministic in (corpora order, n_triplets, k, seed).
    """
    if n_triplets < 1:
        raise ValueError("n_triplets must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    if not corpora:
        raise ValueError("need at least one corpus")
    ids = [c.id for c in corpora]
    if len(set(ids)) != len(ids):
        raise ValueError("corpus ids must be unique")
    for corpus in corpora:
        if len(corpus) < 11 * k:
            raise ValueError(
                f"corpus {corpus.id!r} has {len(corpus)} records; "
                f"needs at least {11 * k} for k={k}"
            )

    test_sets: dict[str, np.ndarray] = {}
    candidates: dict[str, np.ndarray] = {}
    for corpus in corpora:
        test_idx = sample_without_replacement(
            derive_seed(seed, "test-set", corpus.id), len(corpus), k
        )
        test_sets[corpus.id] = test_idx
        mask = np.ones(len(corpus), dtype=bool)
        mask[test_idx] = False
        candidates[corpus.id] = np.flatnonzero(mask)

    picks = random_ints_below(derive_seed(seed, "corpus-pick"), n_triplets, len(corpora))
    width = max(5, len(str(n_triplets - 1)))
    triplets = []
    for i in range(n_triplets):
        corpus = corpora[picks[i]]
        pool = candidates[corpus.id]
        chosen = pool[
            sample_without_replacement(derive_seed(seed, "draw", i), len(pool), 10 * k)
        ]
        triplets.append(
            DatasetTriplet(
                triplet_id=f"t{i:0{width}d}",
                corpus_id=corpus.id,
                train_indices=tuple(int(v) for v in chosen[: 9 * k]),
                val_indices=tuple(int(v) for v in chosen[9 * k :]),
                test_indices=tuple(int(v) for v in test_sets[corpus.id]),
                seed=seed,
            )
        )
    return triplets


def triplets_to_manifest(triplets: list[DatasetTriplet]) -> str:
    """Serialize triplets as a canonical JSON manifest (byte-stable)."""
    entries = [
        {
            "triplet_id": t.triplet_id,
            "corpus_id": t.corpus_id,
            "seed": t.seed,
            "train_indices": list(t.train_indices),
            "val_indices": list(t.val_indices),
            "test_indices": list(t.test_indices),
        }
        for t in triplets
    ]
    return json.dumps(entries, sort_keys=True, separators=(",", ":")) + "\n"


def triplets_from_manifest(text: str) -> list[DatasetTriplet]:
    entries = json.loads(text)
    return [
        DatasetTriplet(
            triplet_id=e["triplet_id"],
            corpus_id=e["corpus_id"],
            train_indices=tuple(e["train_indices"]),
            val_indices=tuple(e["val_indices"]),
            test_indices=tuple(e["test_indices"]),
            seed=e["seed"],
        )
        for e in entries
    ]
