"""Fisher LDA classifier for the LSB of an attacked key byte."""
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .cpa import word_to_key_index
from .errors import (DegenerateStatisticWarning, InconsistentInputError, InsufficientTracesWarning,
        SingleClassError)
from .stats import as_matrix
from .traceset import TraceSet
from .tvla import welch_t

DEFAULT_HALF_WIDTH = 5
REGULARIZATION_SCALE = 1e-6


@dataclass(frozen=True)
class LdaModel:
    """Projection over a sample window [start, stop) and the decision threshold."""

    poi_window: Tuple[int, int]
    projection: np.ndarray
    threshold: float
    class_means: Tuple[float, float]
    regularization: float
    training_accuracy: float
    n_train: int

    def project(self, rows: np.ndarray) -> np.ndarray:
        """Projects full trace rows (or a single row) onto the discriminant."""
        rows = np.asarray(rows, dtype=np.float64)
        start, stop = self.poi_window
        return rows[..., start:stop] @ self.projection

    def predict(self, rows: np.ndarray) -> np.ndarray:
        """Predicted LSB per row."""
        return (self.project(rows) > self.threshold).astype(np.int64)

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {'poi_window': list(self.poi_window), \
                'projection': [float(w) for w in self.projection], \
                'threshold': self.threshold, 'class_means': list(self.class_means), \
                'regularization': self.regularization, \
                'training_accuracy': self.training_accuracy, 'n_train': self.n_train}


def _rows(data: Union[TraceSet, np.ndarray]) -> np.ndarray:
    return as_matrix(data.samples if isinstance(data, TraceSet) else data)


def lda_train(data: Union[TraceSet, np.ndarray], labels: Sequence[int], \
        window: Tuple[int, int]) -> LdaModel:
    """Trains the two-class Fisher discriminant on samples[:, start:stop]."""
    rows = _rows(data)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    start, stop = int(window[0]), int(window[1])
    if not 0 <= start < stop <= rows.shape[1]:
        raise InconsistentInputError('window', f'window {window} outside {rows.shape[1]} samples')
    if labels.shape[0] != rows.shape[0]:
        raise InconsistentInputError('labels', f'{labels.shape[0]} labels for {rows.shape[0]} traces')
    if not set(np.unique(labels)) <= {0, 1}:
        raise InconsistentInputError('labels', 'labels must be 0 or 1')
    x = rows[:, start:stop]
    x0, x1 = x[labels == 0], x[labels == 1]
    if not len(x0) or not len(x1):
        raise SingleClassError(int(labels[0]) if labels.size else 0)
    if min(len(x0), len(x1)) < 2:
        warnings.warn(f'LDA class sizes {len(x0)}/{len(x1)}; covariance estimate is unreliable', \
                InsufficientTracesWarning, stacklevel=2)
    mean0, mean1 = x0.mean(axis=0), x1.mean(axis=0)
    scatter = (x0 - mean0).T @ (x0 - mean0) + (x1 - mean1).T @ (x1 - mean1)
    pooled = scatter / max(len(x) - 2, 1)
    scale = float(np.mean(np.var(x, axis=0)))
    eps = REGULARIZATION_SCALE * (scale if scale > 0 else 1.0)
    projection = np.linalg.solve(pooled + eps * np.eye(x.shape[1]), mean1 - mean0)
    proj0, proj1 = float(mean0 @ projection), float(mean1 @ projection)
    if proj0 == proj1:
        warnings.warn('LDA class means coincide after projection', DegenerateStatisticWarning, \
                stacklevel=2)
    model = LdaModel((start, stop), projection, (proj0 + proj1) / 2, (proj0, proj1), eps, 0.0, \
            len(x))
    accuracy = float(np.mean(model.predict(rows) == labels))
    return LdaModel(model.poi_window, projection, model.threshold, model.class_means, eps, \
            accuracy, len(x))


def lda_predict(model: LdaModel, row: np.ndarray) -> int:
    """LSB predicted for a single trace row."""
    return int(model.predict(np.asarray(row, dtype=np.float64).reshape(-1)))


def lsb_labels(ts: TraceSet, word: str) -> np.ndarray:
    """LSB of a key word ('A[8]') per trace, from the per-trace keys."""
    index = word_to_key_index(word)
    if any(k is None for k in ts.keys):
        raise InconsistentInputError('keys', 'LDA labels need the key of every profiling trace')
    return np.array([k.words[index] & 1 for k in ts.keys], dtype=np.int64)


def select_window(data: Union[TraceSet, np.ndarray], labels: Sequence[int], \
        half_width: int = DEFAULT_HALF_WIDTH) -> Tuple[int, int]:
    """Window of +-half_width samples around the largest |t| between the label classes."""
    rows = _rows(data)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(set(labels.tolist())) < 2:
        raise SingleClassError(int(labels[0]) if labels.size else 0)
    group0, group1 = rows[labels == 0], rows[labels == 1]
    if min(len(group0), len(group1)) < 2:
        # Too few traces for a t-test: use the largest mean difference.
        score = np.abs(group1.mean(axis=0) - group0.mean(axis=0))
    else:
        score = np.abs(welch_t(group0, group1, warn=False).t_values)
    center = int(np.argmax(score))
    return max(0, center - half_width), min(rows.shape[1], center + half_width + 1)


@dataclass(frozen=True)
class AccuracyCurve:
    """LDA accuracy against the number of profiling traces."""

    word: str
    sizes: List[int]
    training: List[float]
    held_out: List[float]

    @property
    def perfect_from(self) -> Optional[int]:
        """Smallest size from which held-out accuracy stays at 100%."""
        result = None
        for size, acc in zip(reversed(self.sizes), reversed(self.held_out)):
            if acc < 1.0:
                break
            result = size
        return result

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {'word': self.word, 'sizes': list(self.sizes), 'training': list(self.training), \
                'held_out': list(self.held_out), 'perfect_from': self.perfect_from}


def lda_accuracy_curve(profile: TraceSet, test: TraceSet, word: str, \
        sizes: Optional[Sequence[int]] = None, half_width: int = DEFAULT_HALF_WIDTH) \
        -> AccuracyCurve:
    """Trains on growing prefixes of profile and scores each model on test."""
    if profile.names != test.names:
        raise InconsistentInputError('names', 'profile and test sets have different sample maps')
    labels = lsb_labels(profile, word)
    test_labels = lsb_labels(test, word)
    if sizes is None:
        sizes = sorted(set([2, 4, 8, 16, 32] + list(range(50, profile.n_traces + 1, 50)) \
                + [profile.n_traces]))
    kept, training, held_out = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', InsufficientTracesWarning)
        for size in sizes:
            size = int(size)
            if size > profile.n_traces or len(set(labels[:size].tolist())) < 2:
                continue
            rows = profile.samples[:size]
            model = lda_train(rows, labels[:size], select_window(rows, labels[:size], half_width))
            kept.append(size)
            training.append(model.training_accuracy)
            held_out.append(float(np.mean(model.predict(test.samples) == test_labels)))
    return AccuracyCurve(word, kept, training, held_out)
