import numpy as np
import pytest

from snowsca.errors import InconsistentInputError, InsufficientTracesWarning, SingleClassError
from snowsca.lda import (lda_accuracy_curve, lda_predict, lda_train, lsb_labels,
        select_window)
from snowsca.leakage import RANDOM, simulate_trace_set
from snowsca.traceset import TraceSet


def _two_classes(rng, n=60, shift=10.0):
    x = rng.normal(size=(2 * n, 3))
    labels = np.array([0] * n + [1] * n)
    x[n:, 1] += shift
    return x, labels


def test_train_on_separated_classes(rng):
    x, labels = _two_classes(rng)
    model = lda_train(x, labels, (0, 3))
    assert model.training_accuracy == 1.0
    assert model.n_train == 120
    assert model.class_means[0] < model.threshold < model.class_means[1]
    assert abs(model.projection[1]) > abs(model.projection[0])
    assert lda_predict(model, x[0]) == 0
    assert lda_predict(model, x[-1]) == 1


def test_model_dict(rng):
    x, labels = _two_classes(rng)
    doc = lda_train(x, labels, (1, 2)).to_dict()
    assert doc['poi_window'] == [1, 2]
    assert len(doc['projection']) == 1


def test_single_class(rng):
    with pytest.raises(SingleClassError) as info:
        lda_train(rng.normal(size=(10, 2)), [1] * 10, (0, 2))
    assert info.value.label == 1


def test_tiny_class_warns(rng):
    x, labels = _two_classes(rng, n=5)
    with pytest.warns(InsufficientTracesWarning):
        lda_train(x[:6], labels[:6], (0, 3))


def test_train_input_checks(rng):
    x, labels = _two_classes(rng)
    with pytest.raises(InconsistentInputError):
        lda_train(x, labels, (2, 5))
    with pytest.raises(InconsistentInputError):
        lda_train(x, labels[:-1], (0, 3))
    with pytest.raises(InconsistentInputError):
        lda_train(x, labels * 2, (0, 3))


def test_labels_need_keys(key):
    ts = simulate_trace_set(key, RANDOM, 4, store_key=False)
    with pytest.raises(InconsistentInputError):
        lsb_labels(ts, 'A[8]')


@pytest.mark.parametrize('word, branch', [('A[8]', 'r1.bA0'), ('B[12]', 'r1.bB4')])
def test_window_centers_on_branch(profile_set, word, branch):
    labels = lsb_labels(profile_set, word)
    start, stop = select_window(profile_set, labels)
    center = profile_set.names.index(branch)
    assert start == max(0, center - 5)
    assert stop == center + 6


@pytest.mark.parametrize('word', ['A[8]', 'B[12]'])
def test_held_out_accuracy(profile_set, test_set, word):
    labels = lsb_labels(profile_set, word)
    model = lda_train(profile_set, labels, select_window(profile_set, labels))
    expected = lsb_labels(test_set, word)
    assert np.array_equal(model.predict(test_set.samples), expected)
    assert lda_predict(model, test_set.samples[0]) == expected[0]


def test_accuracy_curve(profile_set, test_set):
    curve = lda_accuracy_curve(profile_set, test_set, 'A[8]')
    assert curve.sizes == sorted(curve.sizes)
    assert curve.sizes[-1] == profile_set.n_traces
    assert curve.held_out[-1] == 1.0
    assert curve.perfect_from is not None
    assert curve.to_dict()['word'] == 'A[8]'


def test_accuracy_curve_needs_same_points(profile_set, test_set):
    narrow = TraceSet(test_set.samples[:3, :10], test_set.names[:10], test_set.metadata[:3])
    with pytest.raises(InconsistentInputError):
        lda_accuracy_curve(profile_set, narrow, 'A[8]')


def test_predictions_are_scale_invariant(profile_set, test_set):
    labels = lsb_labels(profile_set, 'A[8]')
    window = select_window(profile_set, labels)
    model = lda_train(profile_set, labels, window)
    scaled = lda_train(profile_set.samples * 4.0, labels, window)
    assert scaled.threshold == pytest.approx(model.threshold)
    assert np.array_equal(scaled.predict(test_set.samples * 4.0), model.predict(test_set.samples))


def test_shuffled_labels_give_chance_accuracy(profile_set, test_set):
    shuffle = np.random.default_rng(9)
    labels = shuffle.permutation(lsb_labels(profile_set, 'A[8]'))
    model = lda_train(profile_set, labels, select_window(profile_set, labels))
    held_out = shuffle.permutation(lsb_labels(test_set, 'A[8]'))
    accuracy = np.mean(model.predict(test_set.samples) == held_out)
    assert 0.4 < accuracy < 0.6
