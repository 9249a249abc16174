"""Feature tables, label files, and the synthetic label generator.

Feature tables are CSV with columns triplet_id, corpus_id, then the 13
features; float values carry 9 significant digits.  Label files are CSV
``triplet_id,asr`` with asr in [0, 1].
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .features import FEATURE_NAMES, FeatureVector
from .regressors import RegressionDataset
from .rng import derive_seed, random_gaussians
from .util import fmt_sig

_INT_FEATURES = {"n_clusters", "n_classes", "min_tokens", "max_tokens", "n_unique_tokens"}

TABLE_COLUMNS = ("triplet_id", "corpus_id") + FEATURE_NAMES


class TableError(ValueError):
    """Malformed feature table or label file."""


def feature_table_to_csv(rows: list[tuple[str, str, FeatureVector]]) -> str:
    """rows: (triplet_id, corpus_id, features), already in output order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for triplet_id, corpus_id, fv in rows:
        record = [triplet_id, corpus_id]
        for name in FEATURE_NAMES:
            value = getattr(fv, name)
            record.append(str(int(value)) if name in _INT_FEATURES else fmt_sig(float(value)))
        writer.writerow(record)
    return buf.getvalue()


def feature_table_from_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Returns (triplet_ids, corpus_ids, X) with X ordered like FEATURE_NAMES."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != TABLE_COLUMNS:
        raise TableError(f"feature table header mismatch: {header!r}")
    triplet_ids: list[str] = []
    corpus_ids: list[str] = []
    values: list[list[float]] = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(TABLE_COLUMNS):
            raise TableError(f"feature table row {rowno}: expected {len(TABLE_COLUMNS)} columns")
        triplet_ids.append(row[0])
        corpus_ids.append(row[1])
        try:
            values.append([float(v) for v in row[2:]])
        except ValueError:
            raise TableError(f"feature table row {rowno}: non-numeric value") from None
    if not values:
        raise TableError("feature table has no rows")
    return triplet_ids, corpus_ids, np.asarray(values, dtype=np.float64)


def label_file_to_csv(pairs: list[tuple[str, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["triplet_id", "asr"])
    for triplet_id, asr in pairs:
        writer.writerow([triplet_id, fmt_sig(float(asr))])
    return buf.getvalue()


def label_file_from_csv(text: str) -> dict[str, float]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header] != ["triplet_id", "asr"]:
        raise TableError(f"label file header mismatch: {header!r}")
    labels: dict[str, float] = {}
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise TableError(f"label file row {rowno}: expected 2 columns")
        triplet_id = row[0]
        if triplet_id in labels:
            raise TableError(f"label file row {rowno}: duplicate triplet_id {triplet_id!r}")
        try:
            asr = float(row[1])
        except ValueError:
            raise TableError(f"label file row {rowno}: non-numeric asr") from None
        if not 0.0 <= asr <= 1.0:
            raise TableError(f"label file row {rowno}: asr {asr} outside [0, 1]")
        labels[triplet_id] = asr
    if not labels:
        raise TableError("label file has no rows")
    return labels


def join_dataset(
    triplet_ids: list[str],
    corpus_ids: list[str],
    X: np.ndarray,
    labels: dict[str, float],
) -> RegressionDataset:
    """Join a feature table with a label file; the join must be exact."""
    missing = [t for t in triplet_ids if t not in labels]
    extra = [t for t in labels if t not in set(triplet_ids)]
    if missing or extra:
        problems = []
        if missing:
            problems.append(f"unlabeled triplets: {', '.join(missing[:10])}")
        if extra:
            problems.append(f"labels without features: {', '.join(extra[:10])}")
        raise TableError("; ".join(problems))
    y = np.asarray([labels[t] for t in triplet_ids], dtype=np.float64)
    return RegressionDataset(
        X=X, y=y, triplet_ids=tuple(triplet_ids), corpus_ids=tuple(corpus_ids)
    )


def synth_labels(
    triplet_ids: list[str],
    X: np.ndarray,
    terms: dict[str, float],
    noise: float = 0.02,
    seed: int = 0,
    transform: str = "zscore",
) -> list[tuple[str, float]]:
    """Deterministic synthetic labels: logistic of normalized feature terms.

    label_i = sigmoid(sum_f coef_f * norm(X[:, f])_i) + N(0, noise), clipped
    to [0, 1].  norm is a z-score by default; transform="rank" maps each
    feature to its centered rank instead (still monotone, but insensitive to
    heavy tails).  Lets the full pipeline run end to end with labels whose
    dependence on named features is known exactly.
    """
    if not terms:
        raise TableError("synthetic label generator needs at least one term")
    if transform not in ("zscore", "rank"):
        raise TableError(f"unknown label transform {transform!r}")
    signal = np.zeros(len(X))
    for name, coef in terms.items():
        if name not in FEATURE_NAMES:
            raise TableError(f"unknown feature {name!r} in synthetic label terms")
        col = X[:, FEATURE_NAMES.index(name)]
        std = float(np.std(col))
        if std == 0.0:
            raise TableError(f"feature {name!r} is constant; cannot normalize")
        if transform == "rank":
            order = np.argsort(np.argsort(col, kind="stable"), kind="stable")
            normalized = (order + 0.5) / len(col) * 2.0 - 1.0
        else:
            normalized = (col - float(np.mean(col))) / std
        signal += coef * normalized
    values = 1.0 / (1.0 + np.exp(-signal))
    if noise > 0.0:
        values = values + noise * random_gaussians(derive_seed(seed, "label-noise"), len(X))
    values = np.clip(values, 0.0, 1.0)
    return [(tid, float(v)) for tid, v in zip(triplet_ids, values)]
