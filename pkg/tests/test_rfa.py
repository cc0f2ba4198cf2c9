import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formlang.errors import DimensionMismatch
from formlang.rfa import (
    RandomFeatureMap,
    check,
    estimator_errors,
    kernel_estimate,
    kernel_exact,
    phi,
    sample_pairs,
)

coords = st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4)


@settings(max_examples=50)
@given(coords, st.integers(0, 1000))
def test_feature_norm_is_one(x, seed):
    fmap = RandomFeatureMap(64, 4, 1.0, seed)
    assert float(phi(fmap, x) @ phi(fmap, x)) == pytest.approx(1.0, abs=1e-12)


def test_zero_input():
    fmap = RandomFeatureMap(8, 4, 1.0, 0)
    v = phi(fmap, np.zeros(4))
    assert np.all(v[:8] == 0)
    assert np.allclose(v[8:], 1 / np.sqrt(8))


def test_dimension_mismatch():
    fmap = RandomFeatureMap(8, 4, 1.0, 0)
    with pytest.raises(DimensionMismatch):
        phi(fmap, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        kernel_exact([1.0], [1.0, 2.0], 1.0)


@settings(max_examples=50)
@given(coords, coords)
def test_symmetry_and_identity(x, y):
    fmap = RandomFeatureMap(32, 4, 1.0, 7)
    assert kernel_estimate(fmap, x, y) == pytest.approx(kernel_estimate(fmap, y, x), abs=1e-12)
    assert kernel_estimate(fmap, x, x) == pytest.approx(1.0, abs=1e-12)
    assert kernel_exact(x, x, 1.0) == 1.0


@settings(max_examples=30)
@given(coords, coords, coords)
def test_estimate_is_translation_invariant(x, y, t):
    fmap = RandomFeatureMap(32, 4, 2.0, 3)
    shifted = kernel_estimate(fmap, np.add(x, t), np.add(y, t))
    assert shifted == pytest.approx(kernel_estimate(fmap, x, y), abs=1e-9)


def test_same_seed_same_map():
    a, b = RandomFeatureMap(16, 4, 1.0, 5), RandomFeatureMap(16, 4, 1.0, 5)
    assert np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, RandomFeatureMap(16, 4, 1.0, 6).weights)
    with pytest.raises(ValueError):
        a.weights[0, 0] = 1.0


def test_estimator_accuracy():
    report = check(4, 2048, 1.0, 100, seed=0)
    assert report.mean_error <= 0.05
    assert report.max_norm_deviation <= 1e-12


@pytest.mark.parametrize("sigma2", [0.5, 1.0, 4.0])
def test_unbiased_on_average(sigma2):
    # averaging 400 independent maps (standard error near 0.002) drives the estimate to the exact kernel
    pairs = sample_pairs(4, 5, seed=1)
    for x, y in pairs:
        mean = np.mean([kernel_estimate(RandomFeatureMap(256, 4, sigma2, s), x, y) for s in range(400)])
        assert mean == pytest.approx(kernel_exact(x, y, sigma2), abs=0.01)


def test_more_features_smaller_error():
    pairs = sample_pairs(4, 100, seed=1)
    small = estimator_errors(RandomFeatureMap(256, 4, 1.0, 0), pairs)
    large = estimator_errors(RandomFeatureMap(4096, 4, 1.0, 0), pairs)
    assert large.mean_error <= small.mean_error
