"""Regression predictors: ordinary least squares, random forest, gradient
boosting.  All written against the same small tree kernels, deterministic
under a seed, and serializable to JSON with exact prediction round-trips.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._tree import grow_cart, grow_hist_tree, predict_tree
from .features import FEATURE_NAMES
from .rng import derive_seed, random_ints_below

N_FEATURES = len(FEATURE_NAMES)

PREDICTOR_KINDS = ("linear", "random_forest", "gradient_boosting")


class RegressorError(ValueError):
    """Unusable training data or malformed model files."""


@dataclass(frozen=True)
class RegressionDataset:
    """Feature rows joined with their robustness labels."""

    X: np.ndarray  # n x 13 float64
    y: np.ndarray  # n, in [0, 1]
    triplet_ids: tuple[str, ...]
    corpus_ids: tuple[str, ...]

    def __post_init__(self):
        x = self.X
        if x.ndim != 2 or x.shape[1] != N_FEATURES:
            raise RegressorError(f"feature matrix must be n x {N_FEATURES}, got {x.shape}")
        if len(self.y) != len(x) or len(self.triplet_ids) != len(x) or len(self.corpus_ids) != len(x):
            raise RegressorError("dataset columns disagree on row count")
        if x.size and not np.isfinite(x).all():
            raise RegressorError("feature matrix contains non-finite values")
        if len(self.y) and (self.y.min() < 0.0 or self.y.max() > 1.0):
            raise RegressorError("labels must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, indices) -> "RegressionDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return RegressionDataset(
            X=self.X[idx],
            y=self.y[idx],
            triplet_ids=tuple(self.triplet_ids[i] for i in idx),
            corpus_ids=tuple(self.corpus_ids[i] for i in idx),
        )


@dataclass(frozen=True)
class RandomForestParams:
    n_trees: int = 500
    max_depth: int | None = None
    min_leaf: int = 2
    features_per_split: int | None = None  # default ceil(n_features / 3)
    bootstrap: bool = True


@dataclass(frozen=True)
class GradientBoostingParams:
    learning_rate: float = 0.05
    max_bins: int = 400
    n_estimators: int = 5000
    max_depth: int = 3
    min_leaf: int = 1
    early_stopping: bool = False
    patience: int = 50


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_tree(self.feature, self.threshold, self.left, self.right, self.value, X)

    def used_features(self) -> set[int]:
        return {int(f) for f in self.feature if f >= 0}

    def to_nested(self) -> dict:
        """Nested {feature, threshold, left, right, value} records."""
        nodes: list[dict | None] = [None] * len(self.feature)
        # children have larger ids than parents, so build bottom-up
        for i in range(len(self.feature) - 1, -1, -1):
            if self.feature[i] < 0:
                nodes[i] = {
                    "feature": None,
                    "threshold": None,
                    "left": None,
                    "right": None,
                    "value": float(self.value[i]),
                }
            else:
                nodes[i] = {
                    "feature": int(self.feature[i]),
                    "threshold": float(self.threshold[i]),
                    "left": nodes[int(self.left[i])],
                    "right": nodes[int(self.right[i])],
                    "value": float(self.value[i]),
                }
        return nodes[0]

    @classmethod
    def from_nested(cls, record: dict) -> "Tree":
        # iterative preorder flattening; no recursion limits on deep trees
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        value: list[float] = []
        stack: list[tuple[dict, int, int]] = [(record, -1, 0)]
        while stack:
            node, parent, side = stack.pop()
            i = len(feature)
            feature.append(-1 if node["feature"] is None else int(node["feature"]))
            threshold.append(0.0 if node["threshold"] is None else float(node["threshold"]))
            left.append(-1)
            right.append(-1)
            value.append(float(node["value"]))
            if parent >= 0:
                if side == 0:
                    left[parent] = i
                else:
                    right[parent] = i
            if node["feature"] is not None:
                stack.append((node["right"], i, 1))
                stack.append((node["left"], i, 0))
        return cls(
            feature=np.asarray(feature, dtype=np.int64),
            threshold=np.asarray(threshold, dtype=np.float64),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            value=np.asarray(value, dtype=np.float64),
        )


@dataclass
class LinearModel:
    kind = "linear"
    intercept: float
    coefficients: np.ndarray
    seed: int = 0
    jitter: float = 1e-10

    @property
    def n_features(self) -> int:
        return len(self.coefficients)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coefficients + self.intercept

    def used_features(self) -> set[int]:
        return {int(i) for i in np.flatnonzero(self.coefficients != 0.0)}

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": {"jitter": self.jitter},
            "seed": self.seed,
            "coefficients": {
                "intercept": self.intercept,
                "weights": [float(c) for c in self.coefficients],
            },
        }


@dataclass
class RandomForestModel:
    kind = "random_forest"
    params: RandomForestParams
    seed: int
    trees: list[Tree]
    n_features: int = N_FEATURES

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_per_tree(X).mean(axis=0)

    def predict_per_tree(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return np.stack([t.predict(X) for t in self.trees])

    def used_features(self) -> set[int]:
        used: set[int] = set()
        for t in self.trees:
            used |= t.used_features()
        return used

    def to_json_dict(self) -> dict:
        params = asdict(self.params)
        return {
            "kind": self.kind,
            "params": params,
            "seed": self.seed,
            "n_features": self.n_features,
            "trees": [t.to_nested() for t in self.trees],
        }


@dataclass
class GradientBoostingModel:
    kind = "gradient_boosting"
    params: GradientBoostingParams
    seed: int
    base_score: float
    trees: list[Tree]
    n_features: int = N_FEATURES
    train_losses: list[float] = field(default_factory=list)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.full(len(X), self.base_score)
        for t in self.trees:
            out += self.params.learning_rate * t.predict(X)
        return out

    def used_features(self) -> set[int]:
        used: set[int] = set()
        for t in self.trees:
            used |= t.used_features()
        return used

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": asdict(self.params),
            "seed": self.seed,
            "n_features": self.n_features,
            "base_score": self.base_score,
            "trees": [t.to_nested() for t in self.trees],
        }


Model = LinearModel | RandomForestModel | GradientBoostingModel


def fit_linear(data: RegressionDataset, jitter: float = 1e-10, seed: int = 0) -> LinearModel:
    """Least squares via normal equations with a small ridge term.

    With jitter disabled (0), at least n_features + 1 rows are required and
    a singular design matrix is an error.
    """
    n = len(data)
    if n < 2:
        raise RegressorError("linear fit needs at least 2 rows")
    if jitter == 0.0 and n < data.X.shape[1] + 1:
        raise RegressorError(
            f"linear fit without jitter needs at least {data.X.shape[1] + 1} rows, got {n}"
        )
    a = np.hstack([np.ones((n, 1)), data.X])
    gram = a.T @ a
    if jitter:
        gram = gram + jitter * np.eye(gram.shape[0])
    try:
        beta = np.linalg.solve(gram, a.T @ data.y)
    except np.linalg.LinAlgError:
        raise RegressorError("singular design matrix; enable jitter or add rows") from None
    return LinearModel(intercept=float(beta[0]), coefficients=beta[1:], seed=seed, jitter=jitter)


def fit_random_forest(
    data: RegressionDataset,
    params: RandomForestParams = RandomForestParams(),
    seed: int = 0,
) -> RandomForestModel:
    """Bagged CART trees with per-node feature subsampling.

    Per-tree RNG streams are derived from (seed, tree index), so trees can
    be fit in any order without changing the model.
    """
    n = len(data)
    if n == 0:
        raise RegressorError("cannot fit a forest on empty data")
    if n < 2 * params.min_leaf:
        raise RegressorError(f"need at least {2 * params.min_leaf} rows, got {n}")
    if params.n_trees < 1:
        raise RegressorError("n_trees must be positive")
    p = data.X.shape[1]
    mtry = params.features_per_split or math.ceil(p / 3)
    max_depth = -1 if params.max_depth is None else params.max_depth
    X = np.ascontiguousarray(data.X, dtype=np.float64)
    y = np.ascontiguousarray(data.y, dtype=np.float64)

    trees = []
    for t in range(params.n_trees):
        tree_seed = derive_seed(seed, "tree", t)
        if params.bootstrap:
            rows = random_ints_below(derive_seed(tree_seed, "bootstrap"), n, n)
        else:
            rows = np.arange(n, dtype=np.int64)
        arrays = grow_cart(
            X,
            y,
            rows,
            max_depth,
            params.min_leaf,
            mtry,
            np.uint64(derive_seed(tree_seed, "features")),
        )
        trees.append(Tree(*arrays))
    return RandomForestModel(params=params, seed=seed, trees=trees, n_features=p)


def _quantile_bin_edges(col: np.ndarray, max_bins: int) -> np.ndarray:
    """Inner bin edges: empirical quantiles with duplicate edges collapsed."""
    if max_bins < 2:
        return np.empty(0)
    qs = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
    return np.unique(np.quantile(col, qs))


def fit_gradient_boosting(
    data: RegressionDataset,
    params: GradientBoostingParams = GradientBoostingParams(),
    seed: int = 0,
    val: RegressionDataset | None = None,
) -> GradientBoostingModel:
    """Stagewise least-squares boosting on quantile-binned features.

    With early_stopping and a validation set, fitting stops once the
    validation loss has not improved for ``patience`` stages and the model
    is truncated to its best stage.
    """
    n = len(data)
    if n == 0:
        raise RegressorError("cannot fit gradient boosting on empty data")
    if n < 2:
        raise RegressorError("need at least 2 rows")
    if params.n_estimators < 1:
        raise RegressorError("n_estimators must be positive")
    p = data.X.shape[1]
    X = np.ascontiguousarray(data.X, dtype=np.float64)
    y = np.ascontiguousarray(data.y, dtype=np.float64)

    edges = [_quantile_bin_edges(X[:, f], params.max_bins) for f in range(p)]
    codes = np.empty((n, p), dtype=np.uint16)
    for f in range(p):
        codes[:, f] = np.searchsorted(edges[f], X[:, f], side="left").astype(np.uint16)
    n_bins = np.asarray([len(e) + 1 for e in edges], dtype=np.int64)

    base = float(np.mean(y))
    current = np.full(n, base)
    trees: list[Tree] = []
    losses: list[float] = []

    use_val = params.early_stopping and val is not None and len(val) > 0
    if use_val:
        val_X = np.ascontiguousarray(val.X, dtype=np.float64)
        val_pred = np.full(len(val), base)
        best_val = float(np.mean((val.y - val_pred) ** 2))
        best_stage = 0
        stall = 0

    for _ in range(params.n_estimators):
        residual = y - current
        feature, thr_bin, left, right, value = grow_hist_tree(
            codes, residual, params.max_depth, params.min_leaf, n_bins
        )
        threshold = np.zeros(len(feature))
        for i in range(len(feature)):
            if feature[i] >= 0:
                threshold[i] = edges[feature[i]][thr_bin[i]]
        tree = Tree(feature=feature, threshold=threshold, left=left, right=right, value=value)
        trees.append(tree)
        current += params.learning_rate * tree.predict(X)
        losses.append(float(np.mean((y - current) ** 2)))
        if use_val:
            val_pred += params.learning_rate * tree.predict(val_X)
            val_loss = float(np.mean((val.y - val_pred) ** 2))
            if val_loss < best_val:
                best_val = val_loss
                best_stage = len(trees)
                stall = 0
            else:
                stall += 1
                if stall >= params.patience:
                    trees = trees[:best_stage]
                    losses = losses[:best_stage]
                    break

    return GradientBoostingModel(
        params=params,
        seed=seed,
        base_score=base,
        trees=trees,
        n_features=p,
        train_losses=losses,
    )


def fit_predictor(
    data: RegressionDataset,
    kind: str,
    params: RandomForestParams | GradientBoostingParams | None = None,
    seed: int = 0,
    val: RegressionDataset | None = None,
) -> Model:
    if kind == "linear":
        return fit_linear(data, seed=seed)
    if kind == "random_forest":
        return fit_random_forest(data, params or RandomForestParams(), seed=seed)
    if kind == "gradient_boosting":
        return fit_gradient_boosting(data, params or GradientBoostingParams(), seed=seed, val=val)
    raise RegressorError(f"unknown predictor kind {kind!r}")


def predict(model: Model, features: np.ndarray, clamp: bool = False) -> np.ndarray:
    """Predict labels for feature rows; clamps to [0, 1] only when asked."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise RegressorError(
            f"feature matrix must be n x {model.n_features}, got {X.shape}"
        )
    out = model.predict(X)
    if not np.isfinite(out).all():
        raise RegressorError("model produced non-finite predictions")
    return np.clip(out, 0.0, 1.0) if clamp else out


def model_to_json(model: Model) -> str:
    return json.dumps(model.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def model_from_json(text: str) -> Model:
    obj = json.loads(text)
    kind = obj.get("kind")
    if kind == "linear":
        coef = obj["coefficients"]
        return LinearModel(
            intercept=float(coef["intercept"]),
            coefficients=np.asarray(coef["weights"], dtype=np.float64),
            seed=obj.get("seed", 0),
            jitter=obj["params"].get("jitter", 1e-10),
        )
    if kind == "random_forest":
        return RandomForestModel(
            params=RandomForestParams(**obj["params"]),
            seed=obj["seed"],
            trees=[Tree.from_nested(rec) for rec in obj["trees"]],
            n_features=obj["n_features"],
        )
    if kind == "gradient_boosting":
        return GradientBoostingModel(
            params=GradientBoostingParams(**obj["params"]),
            seed=obj["seed"],
            base_score=obj["base_score"],
            trees=[Tree.from_nested(rec) for rec in obj["trees"]],
            n_features=obj["n_features"],
        )
    raise RegressorError(f"unknown model kind {kind!r}")
