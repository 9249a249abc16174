"""Cheap character-level surrogate classifier behind the MCR feature.

The misclassification-rate feature needs a weak learner that sees
character-level structure.  The reference surrogate hashes character
n-grams (n = 1..3) into a fixed bucket space and trains a multinomial
logistic classifier by full-batch gradient descent.  Any object with the
same ``fit``/``predict`` surface can be substituted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .corpus import TextRecord
from .rng import fnv1a64, mix64


@dataclass(frozen=True)
class SurrogateConfig:
    max_ngram: int = 3
    n_buckets: int = 1 << 16
    epochs: int = 50
    learning_rate: float = 0.5
    seed: int = 0


@dataclass
class SurrogateModel:
    weights: np.ndarray  # n_buckets x n_classes
    bias: np.ndarray  # n_classes
    n_classes: int
    config: SurrogateConfig

    def decision(self, texts: list[str]) -> np.ndarray:
        x = hash_ngram_features(texts, self.config)
        return x @ self.weights + self.bias

    def predict(self, texts: list[str]) -> np.ndarray:
        return np.argmax(self.decision(texts), axis=1)


def hash_ngram_features(texts: list[str], config: SurrogateConfig) -> sparse.csr_matrix:
    """Row-normalized hashed n-gram count matrix (CSR)."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        counts: dict[int, float] = {}
        for n in range(1, config.max_ngram + 1):
            salt = mix64(n)
            for i in range(len(text) - n + 1):
                h = mix64(fnv1a64(text[i : i + n].encode("utf-8")) ^ salt)
                bucket = h % config.n_buckets
                counts[bucket] = counts.get(bucket, 0.0) + 1.0
        norm = np.sqrt(sum(v * v for v in counts.values()))
        for bucket in sorted(counts):
            indices.append(bucket)
            data.append(counts[bucket] / norm if norm > 0 else 0.0)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), config.n_buckets),
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_surrogate(
    train: list[TextRecord], n_classes: int, config: SurrogateConfig = SurrogateConfig()
) -> SurrogateModel:
    """Fit the multinomial logistic surrogate on (text, label) records."""
    if not train:
        raise ValueError("surrogate training set is empty")
    texts = [rec.text for rec in train]
    labels = np.asarray([rec.label for rec in train], dtype=np.int64)
    if labels.max() >= n_classes:
        raise ValueError("training label outside declared class count")
    x = hash_ngram_features(texts, config)
    n = len(texts)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), labels] = 1.0

    weights = np.zeros((config.n_buckets, n_classes))
    bias = np.zeros(n_classes)
    for _ in range(config.epochs):
        probs = _softmax(x @ weights + bias)
        grad = (probs - onehot) / n
        weights -= config.learning_rate * (x.T @ grad)
        bias -= config.learning_rate * grad.sum(axis=0)
    return SurrogateModel(weights=weights, bias=bias, n_classes=n_classes, config=config)


def surrogate_mcr(
    train: list[TextRecord],
    eval: list[TextRecord],
    n_classes: int,
    config: SurrogateConfig = SurrogateConfig(),
) -> float:
    """Misclassified fraction of ``eval`` after training on ``train``."""
    if not eval:
        raise ValueError("surrogate eval set is empty")
    model = train_surrogate(train, n_classes, config)
    predictions = model.predict([rec.text for rec in eval])
    truth = np.asarray([rec.label for rec in eval], dtype=np.int64)
    return float(np.mean(predictions != truth))
