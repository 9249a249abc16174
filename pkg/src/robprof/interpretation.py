"""Model interpretation: permutation importance, accumulated local effects,
and error attribution.

Permutation importance shuffles one feature column at a time and measures
the metric degradation; a feature is flagged influential when its mean
importance exceeds twice its standard deviation.  ALE accumulates local
prediction differences across quantile bins and centers the curve by bin
counts.  Error attribution labels high-error rows as outliers and ranks
features by the absolute weights of a regularized logistic model separating
outliers from the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FEATURE_NAMES
from .regressors import Model, predict
from .rng import derive_seed, random_permutation


class InterpretationError(ValueError):
    """Degenerate inputs for an interpretation routine."""


@dataclass(frozen=True)
class FeatureImportance:
    name: str
    mean: float
    std: float
    passes_filter: bool


@dataclass(frozen=True)
class ImportanceReport:
    features: tuple[FeatureImportance, ...]
    metric: str
    n_repeats: int

    def ranked(self) -> list[FeatureImportance]:
        return sorted(self.features, key=lambda f: -f.mean)

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "n_repeats": self.n_repeats,
            "features": [
                {
                    "name": f.name,
                    "mean": f.mean,
                    "std": f.std,
                    "passes_filter": f.passes_filter,
                }
                for f in self.features
            ],
        }


@dataclass(frozen=True)
class ALECurve:
    feature: str
    edges: np.ndarray  # m + 1 strictly increasing bin edges
    effects: np.ndarray  # m accumulated centered effects, at upper edges
    counts: np.ndarray  # m rows per bin

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature,
            "edges": [float(e) for e in self.edges],
            "effects": [float(e) for e in self.effects],
            "counts": [int(c) for c in self.counts],
        }

    def to_csv(self) -> str:
        lines = ["bin_center,effect,count"]
        for i in range(len(self.effects)):
            center = (self.edges[i] + self.edges[i + 1]) / 2.0
            lines.append(f"{center!r},{self.effects[i]!r},{int(self.counts[i])}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ErrorAnalysisReport:
    weights: dict[str, float]  # absolute standardized logistic weights
    top_features: tuple[str, ...]
    percentile: float
    threshold: float
    n_outliers: int

    def to_json_dict(self) -> dict:
        return {
            "weights": self.weights,
            "top_features": list(self.top_features),
            "percentile": self.percentile,
            "threshold": self.threshold,
            "n_outliers": self.n_outliers,
        }


def _feature_names(p: int, names=None) -> list[str]:
    if names is not None:
        if len(names) != p:
            raise ValueError("feature name count mismatch")
        return list(names)
    if p == len(FEATURE_NAMES):
        return list(FEATURE_NAMES)
    return [f"f{j}" for j in range(p)]


def _rmse(y, yhat) -> float:
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def _r2(y, yhat) -> float:
    var = float(np.mean((y - np.mean(y)) ** 2))
    if var == 0.0:
        raise InterpretationError("target variance is zero; r2 undefined")
    return 1.0 - float(np.mean((y - yhat) ** 2)) / var


def permutation_importance(
    model: Model,
    X: np.ndarray,
    y: np.ndarray,
    metric: str = "rmse_increase",
    n_repeats: int = 10,
    seed: int = 0,
    names=None,
) -> ImportanceReport:
    """Per-feature metric degradation under seeded column shuffles.

    metric "rmse_increase" reports rmse(shuffled) - rmse(baseline);
    "r2_drop" reports r2(baseline) - r2(shuffled).
    """
    if metric not in ("rmse_increase", "r2_drop"):
        raise InterpretationError(f"unknown importance metric {metric!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) < 10:
        raise InterpretationError("permutation importance needs at least 10 rows")
    baseline_pred = predict(model, X)
    baseline = _rmse(y, baseline_pred) if metric == "rmse_increase" else _r2(y, baseline_pred)
    n, p = X.shape
    labels = _feature_names(p, names)
    features = []
    for j in range(p):
        scores = np.empty(n_repeats)
        for r in range(n_repeats):
            perm = random_permutation(derive_seed(seed, "pfi", j, r), n)
            shuffled = X.copy()
            shuffled[:, j] = X[perm, j]
            pred = predict(model, shuffled)
            if metric == "rmse_increase":
                scores[r] = _rmse(y, pred) - baseline
            else:
                scores[r] = baseline - _r2(y, pred)
        mean = float(np.mean(scores))
        std = float(np.std(scores))
        features.append(
            FeatureImportance(
                name=labels[j], mean=mean, std=std, passes_filter=mean > 2.0 * std
            )
        )
    return ImportanceReport(features=tuple(features), metric=metric, n_repeats=n_repeats)


def ale(model: Model, X: np.ndarray, feature: int | str, n_bins: int = 20, names=None) -> ALECurve:
    """Accumulated local effects of one feature over quantile bins.

    Each bin's local effect is the mean prediction difference when the
    feature is set to the bin's upper vs lower edge for the rows in the bin;
    cumulative sums are centered so the count-weighted mean is zero.  A
    constant column yields a single degenerate bin with a flat curve.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    labels = _feature_names(p, names)
    j = labels.index(feature) if isinstance(feature, str) else int(feature)
    if not 0 <= j < p:
        raise InterpretationError(f"feature index {j} out of range")
    col = X[:, j]
    edges = np.unique(np.quantile(col, np.linspace(0.0, 1.0, n_bins + 1)))
    if len(edges) < 2:
        return ALECurve(
            feature=labels[j],
            edges=np.asarray([edges[0], edges[0]]),
            effects=np.zeros(1),
            counts=np.asarray([n], dtype=np.int64),
        )
    m = len(edges) - 1
    bins = np.clip(np.searchsorted(edges, col, side="left") - 1, 0, m - 1)
    local = np.zeros(m)
    counts = np.zeros(m, dtype=np.int64)
    for b in range(m):
        rows = np.flatnonzero(bins == b)
        counts[b] = len(rows)
        if len(rows) == 0:
            continue
        upper = X[rows].copy()
        upper[:, j] = edges[b + 1]
        lower = X[rows].copy()
        lower[:, j] = edges[b]
        local[b] = float(np.mean(predict(model, upper) - predict(model, lower)))
    accumulated = np.cumsum(local)
    center = float(np.sum(counts * accumulated) / np.sum(counts))
    return ALECurve(feature=labels[j], edges=edges, effects=accumulated - center, counts=counts)


def error_analysis(
    model: Model,
    X: np.ndarray,
    y: np.ndarray,
    percentile: float = 70.0,
    l2: float = 1e-2,
    seed: int = 0,
    iterations: int = 500,
    step: float = 0.1,
    names=None,
) -> ErrorAnalysisReport:
    """Which features drive large prediction errors.

    Rows whose absolute error strictly exceeds the percentile threshold
    (order statistic: the floor(n * q / 100)-th smallest error) are labeled
    outliers; with distinct errors exactly ceil(n * (1 - q/100)) rows
    qualify.  Features are standardized and a logistic model separates
    outliers from the rest; feature influence is the absolute weight.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n < 20:
        raise InterpretationError("error analysis needs at least 20 rows")
    if not 0.0 < percentile < 100.0:
        raise InterpretationError("percentile must be in (0, 100)")
    errors = np.abs(predict(model, X) - y)
    if np.all(errors == errors[0]):
        raise InterpretationError("all errors identical; percentile split is degenerate")
    order_stat = max(int(np.floor(n * percentile / 100.0)), 1)
    threshold = float(np.sort(errors)[order_stat - 1])
    outlier = errors > threshold

    mean = X.mean(axis=0)
    std = np.sqrt(np.mean((X - mean) ** 2, axis=0))
    std[std == 0.0] = 1.0
    Z = (X - mean) / std
    target = outlier.astype(np.float64)

    w = np.zeros(p)
    b = 0.0
    for _ in range(iterations):
        logits = Z @ w + b
        probs = 1.0 / (1.0 + np.exp(-logits))
        grad_common = (probs - target) / n
        grad_w = Z.T @ grad_common + l2 * w
        grad_b = float(np.sum(grad_common))
        w -= step * grad_w
        b -= step * grad_b

    labels = _feature_names(p, names)
    magnitude = {labels[j]: float(abs(w[j])) for j in range(p)}
    ranked = sorted(magnitude, key=lambda k: -magnitude[k])
    return ErrorAnalysisReport(
        weights=magnitude,
        top_features=tuple(ranked[:3]),
        percentile=percentile,
        threshold=threshold,
        n_outliers=int(outlier.sum()),
    )
