import numpy as np
import pytest
from scipy import stats

from snowsca.countermeasures import Variant
from snowsca.errors import DegenerateStatisticWarning, InconsistentInputError, InsufficientTracesError
from snowsca.leakage import LeakageModel
from snowsca.stats import pearson_columns, prefix_sizes
from snowsca.tvla import TVLA_THRESHOLD, fixed_vs_random, tvla_incremental, welch_t


def test_welch_t_matches_scipy(rng):
    a = rng.normal(0.0, 1.0, size=(40, 5))
    b = rng.normal(0.3, 2.0, size=(55, 5))
    expected = stats.ttest_ind(a, b, equal_var=False).statistic
    assert np.allclose(welch_t(a, b).t_values, expected)


def test_identical_groups_give_zero(rng):
    a = rng.normal(size=(20, 4))
    res = welch_t(a, a.copy())
    assert res.max_abs_t == 0.0
    assert res.crossing_count == 0


def test_zero_variance_is_degenerate():
    a = np.ones((5, 3))
    b = np.ones((5, 3))
    b[:, 2] = [1, 2, 3, 4, 5]
    with pytest.warns(DegenerateStatisticWarning):
        res = welch_t(a, b)
    assert res.degenerate == (0, 1)
    assert res.t_values[0] == 0.0


def test_crossings_and_names():
    a = np.array([[0.0, 0.0], [0.1, 1.0], [0.0, 2.0]])
    b = np.array([[10.0, 0.0], [10.1, 1.0], [10.0, 2.0]])
    res = welch_t(a, b)
    assert res.crossing_count == 1
    assert res.leaking(['x', 'y']) == ['x']
    assert res.to_dict(['x', 'y'])['leaking'] == ['x']


def test_welch_t_input_checks(rng):
    with pytest.raises(InsufficientTracesError):
        welch_t(rng.normal(size=(1, 3)), rng.normal(size=(5, 3)))
    with pytest.raises(InconsistentInputError):
        welch_t(rng.normal(size=(4, 3)), rng.normal(size=(4, 2)))


def test_prefix_sizes():
    assert prefix_sizes(10) == list(range(2, 11))
    sizes = prefix_sizes(1000)
    assert sizes[0] == 2
    assert sizes[-1] == 1000
    assert sizes == sorted(set(sizes))
    assert prefix_sizes(1) == []


def test_pearson_columns(rng):
    h = rng.normal(size=(50, 3))
    x = np.column_stack([2 * h[:, 0] + 1, -h[:, 1], rng.normal(size=50)])
    corr = pearson_columns(h, x)
    assert corr.shape == (3, 3)
    assert corr[0, 0] == pytest.approx(1.0)
    assert corr[1, 1] == pytest.approx(-1.0)
    assert np.allclose(corr[:, 2], [np.corrcoef(h[:, i], x[:, 2])[0, 1] for i in range(3)])


def test_pearson_constant_column(rng):
    with pytest.warns(DegenerateStatisticWarning):
        corr = pearson_columns(rng.normal(size=(10, 2)), np.ones((10, 1)))
    assert np.all(corr == 0.0)


def test_incremental_on_identical_sets(attack_set):
    curve = tvla_incremental(attack_set, attack_set)
    assert curve.sizes[0] == 2
    assert curve.max_abs_t == [0.0] * len(curve.sizes)
    assert curve.first_crossing is None


def test_unprotected_leaks_quickly(key):
    ts_fixed, ts_random = fixed_vs_random(key, 10, master_seed=1)
    curve = tvla_incremental(ts_fixed, ts_random)
    assert curve.first_crossing is not None
    assert curve.first_crossing <= 10


def test_unprotected_leaks_clearly(key):
    ts_fixed, ts_random = fixed_vs_random(key, 100, master_seed=2)
    res = welch_t(ts_fixed.samples, ts_random.samples)
    leaking = res.leaking(ts_fixed.names)
    assert res.max_abs_t > TVLA_THRESHOLD
    # key-only samples do not separate fixed from random inputs
    assert not any('.bA' in name or '.bB' in name for name in leaking)


def test_masked_stays_below_bound(key):
    ts_fixed, ts_random = fixed_vs_random(key, 1000, variant=Variant.MASKED, master_seed=3)
    assert welch_t(ts_fixed.samples, ts_random.samples).max_abs_t < 10


@pytest.mark.slow
def test_unprotected_crossing_rate(key):
    hits = 0
    for seed in range(100):
        ts_fixed, ts_random = fixed_vs_random(key, 10, master_seed=seed)
        crossing = tvla_incremental(ts_fixed, ts_random).first_crossing
        hits += crossing is not None and crossing <= 10
    assert hits >= 95


@pytest.mark.slow
def test_masked_rate(key):
    model = LeakageModel()
    below = 0
    for seed in range(100):
        ts_fixed, ts_random = fixed_vs_random(key, 1000, model, Variant.MASKED, seed)
        below += welch_t(ts_fixed.samples, ts_random.samples, warn=False).max_abs_t < 10
    assert below >= 95


def test_welch_t_swapped_groups_negate(rng):
    a = rng.normal(0.0, 1.0, size=(30, 6))
    b = rng.normal(0.5, 1.5, size=(45, 6))
    assert np.array_equal(welch_t(b, a).t_values, -welch_t(a, b).t_values)
