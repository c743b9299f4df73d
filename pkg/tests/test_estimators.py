import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mimix import (
    EstimatorConfig,
    NoiseConfig,
    ParameterError,
    PartitionConfig,
    estimate_adaptive_partition,
    estimate_fixed_partition,
    estimate_ksg,
    estimate_mixed,
    estimate_noisy_ksg,
    get_estimator,
    validate_dataset,
)
from mimix.estimators import plugin_mi
from mimix.synthgen import child_seed, exp2_mi, gen_exp2, gen_exp3

EULER = 0.57721566490153286061


def test_three_identical_points_mixed():
    ds = validate_dataset(np.ones(3), np.ones(3))
    est = estimate_mixed(ds, EstimatorConfig(k=1))
    expected = (1 - EULER) - math.log(3)
    assert est.value == pytest.approx(expected, abs=1e-15)
    assert abs(est.value - -0.6759) < 1e-4
    assert np.allclose(est.per_sample, expected, rtol=0, atol=1e-15)


def test_three_identical_points_ksg():
    ds = validate_dataset(np.ones(3), np.ones(3))
    est = estimate_ksg(ds, EstimatorConfig(k=1))
    assert est.value == pytest.approx(-EULER - math.log(3), abs=1e-15)
    assert abs(est.value - -1.6759) < 1e-4


def test_continuous_equals_ksg_bitwise(rng):
    ds = validate_dataset(rng.normal(size=(500, 2)), rng.normal(size=500))
    assert estimate_mixed(ds).value == estimate_ksg(ds).value


def test_estimate_carries_config():
    ds = validate_dataset(np.arange(10.0), np.arange(10.0) ** 2)
    est = estimate_mixed(ds, EstimatorConfig(k=3))
    assert est.estimator_name == "mixed"
    assert est.config["k"] == 3
    assert est.per_sample.shape == (10,)


def test_k_too_large():
    with pytest.raises(ParameterError):
        estimate_mixed(validate_dataset([0.0, 1.0], [0.0, 1.0]))


@pytest.mark.slow
def test_exp2_mean_over_seeds():
    vals = [estimate_mixed(gen_exp2(10_000, 5, child_seed(1, s))).value for s in range(50)]
    assert abs(np.mean(vals) - exp2_mi(5)) <= 0.05


def test_exp2_digamma_marginals_over_seeds():
    cfg = EstimatorConfig(marginal_term="digamma")
    vals = [estimate_mixed(gen_exp2(4000, 5, child_seed(1, s)), cfg).value for s in range(20)]
    assert abs(np.mean(vals) - exp2_mi(5)) <= 0.05


def test_ksg_null():
    vals = []
    for s in range(50):
        r = np.random.default_rng(child_seed(2, s))
        vals.append(estimate_ksg(validate_dataset(r.uniform(size=4000), r.uniform(size=4000))).value)
    assert abs(np.mean(vals)) <= 0.05


class TestNoisyKsg:
    def test_deterministic(self):
        ds = gen_exp2(500, 5, 3)
        noise = NoiseConfig(0.1, seed=9)
        assert estimate_noisy_ksg(ds, None, noise).value == estimate_noisy_ksg(ds, None, noise).value

    def test_sigma_sensitivity(self):
        ds = gen_exp3(4000, 5, 2, 3)
        a = estimate_noisy_ksg(ds, None, NoiseConfig(0.5, 1)).value
        b = estimate_noisy_ksg(ds, None, NoiseConfig(0.7, 1)).value
        assert abs(a - b) > 0.1

    def test_tiny_sigma_is_continuous(self, rng):
        ds = validate_dataset(rng.normal(size=2000), rng.normal(size=2000))
        clean = estimate_ksg(ds).value
        assert abs(estimate_noisy_ksg(ds, None, NoiseConfig(1e-9, 4)).value - clean) <= 0.01

    def test_requires_noise(self):
        with pytest.raises(ParameterError):
            estimate_noisy_ksg(gen_exp2(50, 5, 0))
        with pytest.raises(ParameterError):
            NoiseConfig(0.0)
        with pytest.raises(ParameterError):
            get_estimator("noisy_ksg")


class TestFixedPartition:
    def test_hand_table(self):
        assert plugin_mi(np.array([0, 0, 1, 1]), np.array([0, 0, 1, 1])) == pytest.approx(math.log(2), abs=1e-15)

    def test_binary_copy(self, rng):
        x = rng.integers(0, 2, size=1000).astype(float)
        p = x.mean()
        entropy = -(p * math.log(p) + (1 - p) * math.log(1 - p))
        for bins in (2, 5, 8):
            est = estimate_fixed_partition(validate_dataset(x, x), PartitionConfig(bins_per_dim=bins))
            assert est.value == pytest.approx(entropy, abs=1e-12)
        assert abs(entropy - math.log(2)) < 0.01

    def test_independent_large_n(self, rng):
        ds = validate_dataset(rng.integers(0, 4, 200_000), rng.integers(0, 4, 200_000))
        v = estimate_fixed_partition(ds).value
        assert 0 <= v < 1e-3

    def test_bad_bins(self):
        with pytest.raises(ParameterError):
            PartitionConfig(bins_per_dim=1)


class TestAdaptivePartition:
    def test_independent(self, rng):
        ds = validate_dataset(rng.uniform(size=4000), rng.uniform(size=4000))
        assert abs(estimate_adaptive_partition(ds).value) <= 0.05

    def test_copy_diverges(self, rng):
        x = rng.uniform(size=4000)
        assert estimate_adaptive_partition(validate_dataset(x, x)).value >= 2.0

    def test_too_few_points(self, rng):
        x = rng.uniform(size=15)
        assert estimate_adaptive_partition(validate_dataset(x, x)).value == 0.0

    def test_one_dimensional_only(self, rng):
        with pytest.raises(ParameterError, match="one-dimensional"):
            estimate_adaptive_partition(validate_dataset(rng.normal(size=(50, 2)), rng.normal(size=50)))

    def test_tied_values_terminate(self):
        x = np.repeat([0.0, 1.0], 500)
        est = estimate_adaptive_partition(validate_dataset(x, x))
        assert est.value == pytest.approx(math.log(2), abs=1e-12)


def test_registry_names():
    for name in ("mixed", "ksg", "fixed_partition", "adaptive_partition"):
        assert get_estimator(name).name == name
    assert get_estimator("noisy_ksg", sigma=0.1).params["sigma"] == 0.1
    with pytest.raises(ParameterError):
        get_estimator("3h")


# property checks on small mixed tables

cell = st.sampled_from([0.0, 1.0, 2.0, 0.5, -1.25])
rows = st.integers(min_value=4, max_value=40).flatmap(
    lambda n: st.tuples(
        st.lists(st.one_of(cell, st.floats(-5, 5, allow_nan=False, width=32)), min_size=n, max_size=n),
        st.lists(st.one_of(cell, st.floats(-5, 5, allow_nan=False, width=32)), min_size=n, max_size=n),
        st.permutations(list(range(n))),
    )
)


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(rows, st.integers(1, 3))
def test_properties(data, k):
    x, y, perm = data
    ds = validate_dataset(x, y)
    cfg = EstimatorConfig(k=k)
    base = estimate_mixed(ds, cfg)
    assert math.isfinite(base.value)
    assert estimate_mixed(ds.take(perm), cfg).value == base.value
    assert estimate_mixed(validate_dataset(y, x), cfg).value == base.value
    # no atom reaches k coincident samples -> the atom branch never fires
    _, counts = np.unique(ds.joint, axis=0, return_counts=True)
    if counts.max() <= k:
        assert base.value == estimate_ksg(ds, cfg).value
