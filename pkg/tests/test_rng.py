import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from robprof.rng import (
    bulk_u64,
    derive_seed,
    mix64,
    random_floats,
    random_gaussians,
    random_ints_below,
    random_permutation,
    sample_without_replacement,
)


def test_known_splitmix_outputs():
    # finalizer applied to k * golden-ratio increments, seed 0
    assert bulk_u64(0, 3).tolist() == [
        16294208416658607535,
        7960286522194355700,
        487617019471545679,
    ]


def test_bulk_matches_offset_continuation():
    whole = bulk_u64(123, 10)
    assert np.array_equal(whole[4:], bulk_u64(123, 6, offset=4))


def test_derive_seed_separates_streams():
    a = bulk_u64(derive_seed(5, "x"), 4)
    b = bulk_u64(derive_seed(5, "y"), 4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, bulk_u64(derive_seed(5, "x"), 4))


def test_mix64_wraps_and_is_pure():
    assert mix64(2**64 + 1) == mix64(1)


@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
@settings(max_examples=30, deadline=None)
def test_ints_below_in_range(seed, bound):
    vals = random_ints_below(seed, 50, bound)
    assert vals.min() >= 0 and vals.max() < bound


def test_ints_below_power_of_two_bound():
    vals = random_ints_below(9, 100, 16)
    assert vals.min() >= 0 and vals.max() < 16


def test_floats_in_unit_interval():
    f = random_floats(3, 1000)
    assert f.min() >= 0.0 and f.max() < 1.0


def test_gaussians_moments():
    g = random_gaussians(11, 200_000)
    assert abs(g.mean()) < 0.01
    assert abs(g.std() - 1.0) < 0.01


def test_permutation_is_permutation():
    p = random_permutation(17, 500)
    assert sorted(p.tolist()) == list(range(500))


def test_sample_without_replacement_distinct():
    s = sample_without_replacement(23, 100, 40)
    assert len(set(s.tolist())) == 40
    assert s.min() >= 0 and s.max() < 100
