import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robprof.evaluation import (
    EvaluationError,
    SplitPlan,
    compute_metrics,
    extrapolation_eval,
    interpolation_eval,
)
from robprof.regressors import RandomForestParams, RegressionDataset

N_FEATURES = 13


def dataset(X, y, corpus_ids=None):
    n = len(y)
    if corpus_ids is None:
        corpus_ids = tuple(f"c{i % 9}" for i in range(n))
    return RegressionDataset(
        X=np.asarray(X, dtype=np.float64),
        y=np.asarray(y, dtype=np.float64),
        triplet_ids=tuple(f"t{i:04d}" for i in range(n)),
        corpus_ids=tuple(corpus_ids),
    )


def brute_force_metrics(y, yhat):
    """Independent plain-python re-derivation of all five metrics."""
    n = len(y)
    se = [(a - b) ** 2 for a, b in zip(y, yhat)]
    rmse = (sum(se) / n) ** 0.5
    mae = sum(abs(a - b) for a, b in zip(y, yhat)) / n
    ybar = sum(y) / n
    var_y = sum((a - ybar) ** 2 for a in y) / n
    r2 = 1.0 - (sum(se) / n) / var_y
    resid = [a - b for a, b in zip(y, yhat)]
    rbar = sum(resid) / n
    var_r = sum((r - rbar) ** 2 for r in resid) / n
    evs = 1.0 - var_r / var_y
    mape = sum(abs((a - b) / a) for a, b in zip(y, yhat)) / n
    return rmse, mae, r2, evs, mape


def test_hand_anchor_two_points():
    report = compute_metrics([0.2, 0.4], [0.3, 0.3])
    assert report.rmse.mean == pytest.approx(0.1, abs=1e-12)
    assert report.mae.mean == pytest.approx(0.1, abs=1e-12)
    assert report.mape.mean == pytest.approx(0.375, abs=1e-12)
    assert report.r2.mean == pytest.approx(0.0, abs=1e-12)
    assert report.evs.mean == pytest.approx(0.0, abs=1e-12)
    assert report.n_repeats == 1
    assert report.rmse.std == 0.0


def test_perfect_prediction():
    y = [0.1, 0.5, 0.9, 0.3]
    report = compute_metrics(y, y)
    assert report.rmse.mean == 0.0 and report.mae.mean == 0.0 and report.mape.mean == 0.0
    assert report.r2.mean == 1.0 and report.evs.mean == 1.0


def test_constant_shift_gives_evs_one_r2_below():
    y = np.array([0.2, 0.4, 0.6])
    report = compute_metrics(y, y + 0.1)
    assert report.evs.mean == pytest.approx(1.0, abs=1e-12)
    assert report.r2.mean < 1.0


def test_matches_brute_force_oracle():
    rng = np.random.RandomState(0)
    for _ in range(100):
        n = rng.randint(2, 30)
        y = rng.uniform(0.05, 1.0, n)
        yhat = y + rng.uniform(-0.2, 0.2, n)
        report = compute_metrics(y, yhat)
        rmse, mae, r2, evs, mape = brute_force_metrics(y.tolist(), yhat.tolist())
        assert report.rmse.mean == pytest.approx(rmse, rel=1e-12, abs=1e-15)
        assert report.mae.mean == pytest.approx(mae, rel=1e-12, abs=1e-15)
        assert report.r2.mean == pytest.approx(r2, rel=1e-12, abs=1e-15)
        assert report.evs.mean == pytest.approx(evs, rel=1e-12, abs=1e-15)
        assert report.mape.mean == pytest.approx(mape, rel=1e-12, abs=1e-15)


def test_length_mismatch():
    with pytest.raises(EvaluationError, match="shape"):
        compute_metrics([0.1, 0.2], [0.1])


def test_zero_variance_target():
    with pytest.raises(EvaluationError, match="variance"):
        compute_metrics([0.5, 0.5], [0.4, 0.6])


def test_mape_zero_target_omitted():
    report = compute_metrics([0.0, 0.5], [0.1, 0.5])
    assert report.mape is None
    assert report.mape_zero_rows == 1


def test_mape_skip_zeros_flag():
    report = compute_metrics([0.0, 0.5, 0.4], [0.1, 0.4, 0.5], mape_skip_zeros=True)
    assert report.mape.mean == pytest.approx((0.1 / 0.5 + 0.1 / 0.4) / 2, rel=1e-12)
    assert report.mape_zero_rows == 1


@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.0, 1.0)), min_size=2, max_size=40))
@settings(max_examples=50, deadline=None)
def test_rmse_dominates_mae_and_evs_dominates_r2(pairs):
    y = np.asarray([a for a, _ in pairs])
    yhat = np.asarray([b for _, b in pairs])
    if np.var(y) == 0.0:
        return
    report = compute_metrics(y, yhat)
    assert report.rmse.mean >= report.mae.mean - 1e-12
    assert report.evs.mean >= report.r2.mean - 1e-12


# --- interpolation ----------------------------------------------------------


def exact_linear_dataset(n=60, seed=0):
    rng = np.random.RandomState(seed)
    X = rng.uniform(0, 1, (n, N_FEATURES))
    y = np.clip(0.2 + 0.4 * X[:, 0] + 0.2 * X[:, 3], 0, 1)
    return dataset(X, y)


def test_interpolation_defaults_match_contract():
    import inspect

    sig = inspect.signature(interpolation_eval)
    assert sig.parameters["repeats"].default == 200
    assert sig.parameters["train_fraction"].default == 0.8


def test_interpolation_single_repeat_zero_std():
    report = interpolation_eval(exact_linear_dataset(), "linear", repeats=1, seed=0)
    assert report.n_repeats == 1
    for metric in (report.rmse, report.mae, report.r2, report.evs):
        assert metric.std == 0.0


def test_interpolation_exact_linear_near_zero_rmse():
    report = interpolation_eval(exact_linear_dataset(), "linear", repeats=10, seed=1)
    assert report.rmse.mean <= 1e-6


def test_interpolation_reproducible():
    ds = exact_linear_dataset(seed=3)
    a = interpolation_eval(ds, "random_forest", RandomForestParams(n_trees=10), repeats=3, seed=5)
    b = interpolation_eval(ds, "random_forest", RandomForestParams(n_trees=10), repeats=3, seed=5)
    assert a == b


def test_interpolation_needs_rows():
    with pytest.raises(EvaluationError, match="at least 10"):
        interpolation_eval(exact_linear_dataset(n=8), "linear", repeats=1, seed=0)


# --- extrapolation ----------------------------------------------------------


def grouped_dataset(shift=0.0, seed=0):
    """9 corpora; optionally shift the feature distribution of the last two."""
    rng = np.random.RandomState(seed)
    n_per, corpora = 30, 9
    X, y, cids = [], [], []
    for c in range(corpora):
        Xc = rng.uniform(0, 1, (n_per, N_FEATURES))
        if shift and c >= 7:
            Xc[:, 0] += shift
        X.append(Xc)
        y.append(np.clip(0.2 + 0.5 * np.minimum(Xc[:, 0], 1.0) + 0.02 * rng.randn(n_per), 0, 1))
        cids += [f"c{c}"] * n_per
    return dataset(np.vstack(X), np.concatenate(y), corpus_ids=cids)


GROUPS = {
    "train": tuple(f"c{i}" for i in range(5)),
    "val": ("c5", "c6"),
    "test": ("c7", "c8"),
}


def test_extrapolation_group_partition_honored():
    ds = grouped_dataset()
    plan = SplitPlan(mode="extrapolation", groups=GROUPS)
    train_ids = set(GROUPS["train"])
    test_ids = set(GROUPS["test"])
    assert not (train_ids & test_ids)
    report = extrapolation_eval(ds, "linear", groups=GROUPS, seeds=(0,))
    assert report.n_repeats == 1


def test_extrapolation_overlapping_groups_rejected():
    ds = grouped_dataset()
    bad = {"train": ("c0", "c1"), "val": ("c1",), "test": ("c2",)}
    with pytest.raises(EvaluationError, match="disjoint"):
        extrapolation_eval(ds, "linear", groups=bad)


def test_extrapolation_comparable_when_same_distribution():
    ds = grouped_dataset(shift=0.0, seed=4)
    params = RandomForestParams(n_trees=50)
    extra = extrapolation_eval(ds, "random_forest", params, groups=GROUPS, seeds=(0,))
    interp = interpolation_eval(ds, "random_forest", params, repeats=10, seed=0)
    assert abs(extra.mae.mean - interp.mae.mean) < 0.05


def test_extrapolation_shifted_test_group_degrades_r2():
    ds = grouped_dataset(shift=1.5, seed=5)
    params = RandomForestParams(n_trees=50)
    extra = extrapolation_eval(ds, "random_forest", params, groups=GROUPS, seeds=(0,))
    interp = interpolation_eval(ds, "random_forest", params, repeats=10, seed=0)
    assert extra.r2.mean < interp.r2.mean


def test_extrapolation_multi_seed_aggregation():
    ds = grouped_dataset(seed=6)
    report = extrapolation_eval(
        ds, "random_forest", RandomForestParams(n_trees=10), groups=GROUPS, seeds=(0, 1, 2)
    )
    assert report.n_repeats == 3
    assert report.rmse.std >= 0.0


def test_extrapolation_empty_test_group():
    ds = grouped_dataset()
    with pytest.raises(EvaluationError, match="test group"):
        extrapolation_eval(ds, "linear", groups={"train": ("c0",), "val": (), "test": ("zz",)})


def test_split_plan_validation():
    with pytest.raises(EvaluationError, match="train_fraction"):
        SplitPlan(mode="interpolation", train_fraction=1.5)
    with pytest.raises(EvaluationError, match="missing"):
        SplitPlan(mode="extrapolation", groups={"train": ()})
