import numpy as np
import pytest

from snowsca.countermeasures import Variant
from snowsca.errors import InconsistentInputError, InvalidModelError
from snowsca.leakage import (RANDOM, Granularity, LeakageModel, simulate_trace,
        simulate_trace_set)
from snowsca.snowv import MUL_X_A, MUL_X_INV_A, Iv128, Key256, keystream, mul_x, mul_x_inv

ZERO_IV = Iv128((0,) * 8)


def _key(k0: int) -> Key256:
    return Key256((k0,) + (0,) * 15)


def test_single_cell_u0_sample():
    model = LeakageModel(hw_scale=2.0, noise_sigma=0.0, branch_delta=0.0,
            granularity=Granularity.WORD)
    row = simulate_trace(_key(0x0016), ZERO_IV, model, Variant.REFERENCE, 0)
    # u_0 = mul_x_inv(0x0016) = 0x000B
    assert row.samples[row.names.index('r1.u0')] == pytest.approx(6.0)


def test_sliced_sample_map(key, iv, noiseless):
    row = simulate_trace(key, iv, noiseless, Variant.REFERENCE, 0)
    assert len(row.names) == 64
    assert row.names[:6] == ('r1.bA0', 'r1.u0.lo', 'r1.u0.hi', 'r1.u0.top', 'r1.bB0', 'r1.v0.lo')


def test_slices_add_up_to_word(key, iv, noiseless, word_model):
    sliced = simulate_trace(key, iv, noiseless, Variant.REFERENCE, 0)
    word = simulate_trace(key, iv, word_model, Variant.REFERENCE, 0)
    for i in range(8):
        total = sum(sliced.samples[sliced.names.index(f'r1.u{i}.{s}')] for s in ('lo', 'hi', 'top'))
        assert total == pytest.approx(word.samples[word.names.index(f'r1.u{i}')])


@pytest.mark.parametrize('k0, expected', [(0x0001, 10.0), (0x0002, 0.0)])
def test_branch_sample(k0, expected):
    model = LeakageModel(noise_sigma=0.0)
    row = simulate_trace(_key(k0), ZERO_IV, model, Variant.REFERENCE, 0)
    assert row.samples[row.names.index('r1.bA0')] == pytest.approx(expected)


@pytest.mark.parametrize('k0, expected', [(0x0001, 8.0), (0x0002, 0.0)])
def test_constant_time_branch_sample(k0, expected):
    # HW(0xCC87) = 8
    model = LeakageModel(noise_sigma=0.0)
    row = simulate_trace(_key(k0), ZERO_IV, model, Variant.CONSTANT_TIME, 0)
    assert row.samples[row.names.index('r1.bA0')] == pytest.approx(expected)


def test_masked_sample_names(key, iv, noiseless):
    row = simulate_trace(key, iv, noiseless, Variant.MASKED, 5)
    assert 'r1.m0.lo' in row.names
    assert 'r1.u0^m.lo' in row.names
    assert 'r1.v7^m.top' in row.names
    assert not any(name.startswith('r1.u0.') for name in row.names)


def test_shuffled_records_order(key, iv, noiseless):
    row = simulate_trace(key, iv, noiseless, Variant.SHUFFLED, 5)
    assert 'r1.s0.u.lo' in row.names
    assert len(row.meta.order) == 1
    assert sorted(row.meta.order[0]) == list(range(8))
    assert row.meta.order[0][5:] == (5, 6, 7)


def test_point_selection(key, iv, noiseless):
    model = LeakageModel(noise_sigma=0.0, points=('u0.*',))
    row = simulate_trace(key, iv, model, Variant.REFERENCE, 0)
    assert row.names == ('r1.u0.lo', 'r1.u0.hi', 'r1.u0.top')


def test_point_selection_empty(key, iv):
    model = LeakageModel(points=('nothing',))
    with pytest.raises(InvalidModelError):
        simulate_trace(key, iv, model, Variant.REFERENCE, 0)


def test_more_rounds(key, iv):
    row = simulate_trace(key, iv, LeakageModel(rounds=2), Variant.REFERENCE, 0)
    assert len(row.names) == 128
    assert 'r2.u0.lo' in row.names


@pytest.mark.parametrize('kwargs', [{'noise_sigma': -1.0}, {'rounds': 0}, {'rounds': 17},
        {'granularity': 'bits'}, {'hw_scale': float('nan')}])
def test_invalid_model(kwargs):
    with pytest.raises(InvalidModelError):
        LeakageModel(**kwargs)


def test_model_dict_round_trip():
    model = LeakageModel(noise_sigma=0.5, granularity=Granularity.WORD, points=('u*',))
    assert LeakageModel.from_dict(model.to_dict()) == model


def test_keep_keystream(key, iv, noiseless):
    row = simulate_trace(key, iv, noiseless, Variant.MASKED, 3, keep_keystream=True)
    assert row.meta.keystream == keystream(key, iv, 1)[0]


def test_store_key_flag(key, iv):
    ts = simulate_trace_set(key, iv, 3, store_key=False)
    assert ts.keys == [None] * 3


def test_trace_set_is_reproducible(key):
    first = simulate_trace_set(key, RANDOM, 20, master_seed=4)
    second = simulate_trace_set(key, RANDOM, 20, master_seed=4)
    assert first == second
    assert first != simulate_trace_set(key, RANDOM, 20, master_seed=5)


def test_workers_do_not_change_result(key):
    serial = simulate_trace_set(key, RANDOM, 12, variant=Variant.MASKED, master_seed=9)
    parallel = simulate_trace_set(key, RANDOM, 12, variant=Variant.MASKED, master_seed=9,
            workers=2)
    assert serial == parallel


def test_policies(key, iv):
    ivs = [iv, Iv128((1,) * 8)]
    ts = simulate_trace_set([key, key], ivs, 2)
    assert [m.iv for m in ts.metadata] == ivs
    with pytest.raises(InconsistentInputError):
        simulate_trace_set(key, ivs, 3)
    with pytest.raises(InconsistentInputError):
        simulate_trace_set('fixed', iv, 2)


def test_random_keys_differ():
    ts = simulate_trace_set(RANDOM, RANDOM, 5, master_seed=1)
    assert len(set(ts.keys)) == 5
    assert len({m.iv for m in ts.metadata}) == 5


def test_model_stored_with_variant(key, iv):
    ts = simulate_trace_set(key, iv, 2, variant=Variant.CONSTANT_TIME)
    assert ts.model['variant'] == 'constant_time'
    assert ts.model['branch_delta'] == LeakageModel.DEFAULT_BRANCH_DELTA


def test_noise_level(key, iv):
    ts = simulate_trace_set(key, iv, 400, master_seed=2)
    spread = ts.samples.astype(np.float64).std(axis=0, ddof=1)
    assert np.all(spread > 0.8)
    assert np.all(spread < 1.2)


def test_u0_variance_over_iv_low_byte(key, word_model):
    ivs = [Iv128((low,) + (0,) * 7) for low in range(256)]
    ts = simulate_trace_set(key, ivs, 256, word_model)
    # u_0 = mul_x(a_0) ^ a_1 ^ mul_x_inv(a_8) ^ b_0 with a_0 = low, a_1 = b_0 = 0
    base = mul_x_inv(key.words[0], MUL_X_INV_A)
    expected = np.array([bin(mul_x(low, MUL_X_A) ^ base).count('1') for low in range(256)])
    column = ts.column('r1.u0').astype(np.float64)
    assert np.array_equal(column, expected)
    assert column.var() == pytest.approx(expected.var())
