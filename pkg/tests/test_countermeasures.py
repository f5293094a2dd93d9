import numpy as np
import pytest
from scipy import stats

from snowsca.countermeasures import (MaskedWord16, ShuffleOrder, Variant,
        constant_time_lfsr_update, mask_stream, masked_lfsr_update, mul_x_inv_ct,
        shuffled_lfsr_update, variant_step)
from snowsca.errors import (InconsistentInputError, InvalidShuffleOrderError,
        RandomnessExhaustedError)
from snowsca.leakage import random_iv
from snowsca.snowv import (MUL_X_INV_A, MUL_X_INV_B, LfsrState, initialize, keystream_output,
        lfsr_update, load_state, mul_x_inv)
from snowsca.utils import HW16


def _random_state(rng) -> LfsrState:
    words = [int(w) for w in rng.integers(0, 1 << 16, size=32)]
    return LfsrState(tuple(words[:16]), tuple(words[16:]))


@pytest.mark.parametrize('v, expected', [(0x0000, 0x0000), (0x0001, 0xCC87)])
def test_mul_x_inv_ct_examples(v, expected):
    assert mul_x_inv_ct(v, MUL_X_INV_A) == expected


@pytest.mark.parametrize('d', [MUL_X_INV_A, MUL_X_INV_B])
def test_mul_x_inv_ct_matches_branching_form(d):
    for v in range(1 << 16):
        assert mul_x_inv_ct(v, d) == mul_x_inv(v, d)


def test_mul_x_inv_ct_runs_same_operations():
    even, odd = [], []
    mul_x_inv_ct(0x0016, MUL_X_INV_A, even)
    mul_x_inv_ct(0x0017, MUL_X_INV_A, odd)
    assert [op for op, _ in even] == [op for op, _ in odd] == ['shr', 'neg', 'and', 'xor']
    branching_even, branching_odd = [], []
    mul_x_inv(0x0016, MUL_X_INV_A, branching_even)
    mul_x_inv(0x0017, MUL_X_INV_A, branching_odd)
    assert len(branching_even) != len(branching_odd)


def test_constant_time_update_matches_reference(rng):
    for _ in range(100):
        state = _random_state(rng)
        assert constant_time_lfsr_update(state) == lfsr_update(state)


def test_masked_word():
    word = MaskedWord16.mask(0x1234, 0xBEEF)
    assert word.share1 == 0x1234 ^ 0xBEEF
    assert word.value == 0x1234


def test_masked_update_matches_reference(rng):
    masks = mask_stream(rng)
    for _ in range(100):
        state = _random_state(rng)
        record = []
        assert masked_lfsr_update(state, masks, record) == lfsr_update(state)
        plain = []
        lfsr_update(state, plain)
        for rec, ref in zip(record, plain):
            assert rec.u_masked ^ rec.mask == ref.u
            assert rec.v_masked ^ rec.mask == ref.v
            assert (rec.a_lsb, rec.b_lsb) == (ref.a_lsb, ref.b_lsb)


def test_masked_update_exhausted_randomness(rng):
    with pytest.raises(RandomnessExhaustedError) as info:
        masked_lfsr_update(_random_state(rng), [1, 2, 3])
    assert info.value.iteration == 3


def test_masked_share_uncorrelated(key):
    """HW of a masked share does not correlate with HW of the unmasked value."""
    n = 10000
    rng = np.random.default_rng(7)
    masks = mask_stream(rng)
    shares, values = [], []
    for _ in range(n):
        state = load_state(key, random_iv(rng)).lfsr
        record = []
        masked_lfsr_update(state, masks, record)
        shares.append(record[0].u_masked)
        values.append(record[0].u_masked ^ record[0].mask)
    rho = np.corrcoef(HW16[np.array(shares)], HW16[np.array(values)])[0, 1]
    assert abs(rho) < 4 / np.sqrt(n)


def test_os_entropy_masks():
    masks = mask_stream()
    drawn = [next(masks) for _ in range(16)]
    assert all(0 <= m < 1 << 16 for m in drawn)


def test_all_shuffle_orders_match_reference():
    orders = ShuffleOrder.all_orders()
    assert len(orders) == 120
    assert len(set(orders)) == 120
    rng = np.random.default_rng(3)
    for _ in range(100):
        state = _random_state(rng)
        expected = lfsr_update(state)
        for order in orders:
            assert shuffled_lfsr_update(state, order) == expected


def test_shuffled_record_keeps_original_index(rng):
    record = []
    shuffled_lfsr_update(_random_state(rng), (4, 3, 2, 1, 0), record)
    assert [r.index for r in record] == [4, 3, 2, 1, 0, 5, 6, 7]


@pytest.mark.parametrize('order', [(0, 1, 2, 3), (0, 1, 2, 3, 3), (0, 1, 2, 3, 4, 6, 5, 7),
        (0, 1, 2, 3, 5)])
def test_invalid_shuffle_order(order):
    with pytest.raises(InvalidShuffleOrderError):
        ShuffleOrder.from_sequence(order)


def test_random_shuffle_order(rng):
    order = ShuffleOrder.random(rng)
    assert sorted(order.head) == [0, 1, 2, 3, 4]
    assert order.indices[5:] == (5, 6, 7)


@pytest.mark.parametrize('variant', list(Variant))
def test_variants_initialize_like_reference(variant, key, iv, rng):
    expected = keystream_output(initialize(key, iv))
    assert keystream_output(initialize(key, iv, variant_step(variant, rng))) == expected


def test_variant_parse():
    assert Variant.parse('masked') == Variant.MASKED
    assert Variant.parse('CONSTANT_TIME') == Variant.CONSTANT_TIME
    assert str(Variant.SHUFFLED) == 'shuffled'
    with pytest.raises(InconsistentInputError):
        Variant.parse('hardened')


def test_masked_share_is_uniform(key, iv):
    """u_0 ^ r over fresh masks on one fixed state passes a chi-squared test per byte."""
    state = load_state(key, iv).lfsr
    masks = mask_stream(np.random.default_rng(17))
    shares = []
    for _ in range(10000):
        record = []
        masked_lfsr_update(state, masks, record)
        shares.append(record[0].u_masked)
    shares = np.array(shares)
    for byte in (shares & 0xFF, shares >> 8):
        counts = np.bincount(byte, minlength=256)
        assert stats.chisquare(counts).pvalue > 1e-3
