"""Split protocols and regression metrics, reported as mean +/- std.

Interpolation runs k seeded random train/test resamples (repeated holdout);
extrapolation holds out whole corpora: rows are assigned to train/val/test
groups by corpus id, the model is fit on the train group and scored on the
test group.  All variances are population variances, so a single repeat
reports std = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regressors import (
    GradientBoostingParams,
    RandomForestParams,
    RegressionDataset,
    fit_predictor,
    predict,
)
from .rng import derive_seed, random_permutation


class EvaluationError(ValueError):
    """Invalid metric inputs or split plans."""


@dataclass(frozen=True)
class MetricValue:
    mean: float
    std: float


@dataclass(frozen=True)
class MetricReport:
    rmse: MetricValue
    r2: MetricValue
    mae: MetricValue
    evs: MetricValue
    mape: MetricValue | None
    n_repeats: int
    mape_zero_rows: int = 0
    per_repeat: tuple[dict, ...] = ()

    def to_json_dict(self) -> dict:
        out = {
            "n_repeats": self.n_repeats,
            "metrics": {
                "rmse": {"mean": self.rmse.mean, "std": self.rmse.std},
                "r2": {"mean": self.r2.mean, "std": self.r2.std},
                "mae": {"mean": self.mae.mean, "std": self.mae.std},
                "evs": {"mean": self.evs.mean, "std": self.evs.std},
                "mape": None
                if self.mape is None
                else {"mean": self.mape.mean, "std": self.mape.std},
            },
            "mape_zero_rows": self.mape_zero_rows,
        }
        if self.per_repeat:
            out["per_repeat"] = list(self.per_repeat)
        return out


@dataclass(frozen=True)
class SplitPlan:
    mode: str  # "interpolation" or "extrapolation"
    repeats: int = 200
    train_fraction: float = 0.8
    groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in ("interpolation", "extrapolation"):
            raise EvaluationError(f"unknown split mode {self.mode!r}")
        if self.mode == "interpolation":
            if not 0.0 < self.train_fraction < 1.0:
                raise EvaluationError("train_fraction must be in (0, 1)")
            if self.repeats < 1:
                raise EvaluationError("repeats must be positive")
        else:
            for key in ("train", "val", "test"):
                if key not in self.groups:
                    raise EvaluationError(f"extrapolation plan missing {key!r} group")
            seen: set[str] = set()
            for key in ("train", "val", "test"):
                ids = set(self.groups[key])
                if ids & seen:
                    raise EvaluationError("extrapolation groups must be disjoint")
                seen |= ids


def _single_metrics(y: np.ndarray, yhat: np.ndarray, mape_skip_zeros: bool) -> dict:
    err = y - yhat
    rmse = float(np.sqrt(np.mean(err**2)))
    mae = float(np.mean(np.abs(err)))
    var_y = float(np.mean((y - np.mean(y)) ** 2))
    if var_y == 0.0:
        raise EvaluationError("target variance is zero; r2 and evs undefined")
    r2 = 1.0 - float(np.mean(err**2)) / var_y
    var_resid = float(np.mean((err - np.mean(err)) ** 2))
    evs = 1.0 - var_resid / var_y
    zero = y == 0.0
    zero_rows = int(zero.sum())
    if zero_rows == 0:
        mape = float(np.mean(np.abs(err / y)))
    elif mape_skip_zeros and zero_rows < len(y):
        mape = float(np.mean(np.abs(err[~zero] / y[~zero])))
    else:
        mape = None
    return {"rmse": rmse, "mae": mae, "r2": r2, "evs": evs, "mape": mape, "zero_rows": zero_rows}


def _aggregate(repeats: list[dict], keep_per_repeat: bool) -> MetricReport:
    def stat(name: str) -> MetricValue:
        vals = np.asarray([r[name] for r in repeats], dtype=np.float64)
        return MetricValue(mean=float(np.mean(vals)), std=float(np.std(vals)))

    mapes = [r["mape"] for r in repeats]
    if any(m is None for m in mapes):
        mape = None
    else:
        arr = np.asarray(mapes, dtype=np.float64)
        mape = MetricValue(mean=float(np.mean(arr)), std=float(np.std(arr)))
    return MetricReport(
        rmse=stat("rmse"),
        r2=stat("r2"),
        mae=stat("mae"),
        evs=stat("evs"),
        mape=mape,
        n_repeats=len(repeats),
        mape_zero_rows=sum(r["zero_rows"] for r in repeats),
        per_repeat=tuple(repeats) if keep_per_repeat else (),
    )


def compute_metrics(y, yhat, mape_skip_zeros: bool = False) -> MetricReport:
    """rmse, mae, r2, evs, mape of one prediction vector.

    Zero targets leave mape undefined; with mape_skip_zeros the offending
    rows are dropped from mape (and counted in the report) instead.
    """
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise EvaluationError(f"shape mismatch: y {y.shape} vs yhat {yhat.shape}")
    if len(y) == 0:
        raise EvaluationError("cannot score empty vectors")
    return _aggregate([_single_metrics(y, yhat, mape_skip_zeros)], keep_per_repeat=False)


def interpolation_eval(
    dataset: RegressionDataset,
    kind: str,
    params: RandomForestParams | GradientBoostingParams | None = None,
    repeats: int = 200,
    train_fraction: float = 0.8,
    seed: int = 0,
    clamp: bool = False,
    mape_skip_zeros: bool = False,
    keep_per_repeat: bool = False,
) -> MetricReport:
    """Repeated random holdout: fit on train_fraction, score on the rest."""
    n = len(dataset)
    if n < 10:
        raise EvaluationError(f"interpolation needs at least 10 rows, got {n}")
    n_train = int(n * train_fraction)
    n_train = min(max(n_train, 1), n - 1)
    results = []
    for r in range(repeats):
        perm = random_permutation(derive_seed(seed, "split", r), n)
        train = dataset.subset(perm[:n_train])
        test = dataset.subset(perm[n_train:])
        model = fit_predictor(train, kind, params, seed=derive_seed(seed, "fit", r))
        yhat = predict(model, test.X, clamp=clamp)
        results.append(_single_metrics(test.y, yhat, mape_skip_zeros))
    return _aggregate(results, keep_per_repeat)


def extrapolation_eval(
    dataset: RegressionDataset,
    kind: str,
    params: RandomForestParams | GradientBoostingParams | None = None,
    groups: dict[str, tuple[str, ...]] | None = None,
    seeds: tuple[int, ...] = (0,),
    clamp: bool = False,
    mape_skip_zeros: bool = False,
    keep_per_repeat: bool = False,
) -> MetricReport:
    """Fit on train-group corpora, score on held-out test-group corpora.

    The val group feeds gradient-boosting early stopping when enabled;
    multiple seeds aggregate into mean +/- std.
    """
    if not groups:
        raise EvaluationError("extrapolation requires corpus groups")
    plan = SplitPlan(mode="extrapolation", groups={k: tuple(v) for k, v in groups.items()})
    cid = np.asarray(dataset.corpus_ids)
    masks = {
        key: np.isin(cid, np.asarray(plan.groups[key], dtype=cid.dtype))
        for key in ("train", "val", "test")
    }
    for key in ("train", "test"):
        if not masks[key].any():
            raise EvaluationError(f"{key} group matched no rows")
    train = dataset.subset(np.flatnonzero(masks["train"]))
    test = dataset.subset(np.flatnonzero(masks["test"]))
    val = dataset.subset(np.flatnonzero(masks["val"])) if masks["val"].any() else None

    results = []
    for s in seeds:
        model = fit_predictor(train, kind, params, seed=s, val=val)
        yhat = predict(model, test.X, clamp=clamp)
        results.append(_single_metrics(test.y, yhat, mape_skip_zeros))
    return _aggregate(results, keep_per_repeat)
