"""Fixed-vs-random leakage assessment with Welch's t-test."""
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .countermeasures import Variant
from .errors import DegenerateStatisticWarning, InconsistentInputError, InsufficientTracesError
from .leakage import IV_STREAM, RANDOM, LeakageModel, random_iv, simulate_trace_set, trace_rng
from .snowv import Iv128, Key256
from .stats import as_matrix, prefix_sizes
from .traceset import TraceSet

TVLA_THRESHOLD = 4.5


@dataclass(frozen=True)
class TvlaResult:
    """Per-sample t statistics; degenerate lists samples where t was set to 0."""

    t_values: np.ndarray
    threshold: float = TVLA_THRESHOLD
    degenerate: Tuple[int, ...] = ()

    @property
    def max_abs_t(self) -> float:
        """Largest |t| over all samples."""
        return float(np.max(np.abs(self.t_values))) if self.t_values.size else 0.0

    @property
    def crossing_count(self) -> int:
        """Number of samples with |t| above the threshold."""
        return int(np.count_nonzero(np.abs(self.t_values) > self.threshold))

    def leaking(self, names: Optional[Sequence[str]] = None) -> List[Union[int, str]]:
        """Samples above the threshold, by name when names are given."""
        idx = [int(i) for i in np.flatnonzero(np.abs(self.t_values) > self.threshold)]
        return [names[i] for i in idx] if names is not None else idx

    def to_dict(self, names: Optional[Sequence[str]] = None) -> dict:
        """Returns the JSON form."""
        return {
            'threshold': self.threshold,
            'max_abs_t': self.max_abs_t,
            'crossing_count': self.crossing_count,
            't_values': [float(t) for t in self.t_values],
            'degenerate': list(self.degenerate),
            'leaking': self.leaking(names),
        }


def welch_t(group_a: np.ndarray, group_b: np.ndarray, threshold: float = TVLA_THRESHOLD, \
        warn: bool = True) -> TvlaResult:
    """Per-sample Welch t statistic of group_a against group_b (rows are traces)."""
    a = as_matrix(group_a)
    b = as_matrix(group_b)
    if min(a.shape[0], b.shape[0]) < 2:
        raise InsufficientTracesError(2, min(a.shape[0], b.shape[0]))
    if a.shape[1] != b.shape[1]:
        raise InconsistentInputError('samples', \
                f'groups have {a.shape[1]} and {b.shape[1]} samples per trace')
    mean_a, mean_b = a.mean(axis=0), b.mean(axis=0)
    var_a = ((a - mean_a) ** 2).sum(axis=0) / (a.shape[0] - 1)
    var_b = ((b - mean_b) ** 2).sum(axis=0) / (b.shape[0] - 1)
    den = np.sqrt(var_a / a.shape[0] + var_b / b.shape[0])
    flat = den == 0
    t_values = np.where(flat, 0.0, (mean_a - mean_b) / np.where(flat, 1.0, den))
    degenerate = tuple(int(i) for i in np.flatnonzero(flat))
    if degenerate and warn:
        warnings.warn(f'{len(degenerate)} sample(s) with zero variance in both groups, t set to 0', \
                DegenerateStatisticWarning, stacklevel=2)
    return TvlaResult(t_values, float(threshold), degenerate)


@dataclass(frozen=True)
class TvlaCurve:
    """max |t| against the number of traces per group."""

    sizes: List[int]
    max_abs_t: List[float]
    threshold: float = TVLA_THRESHOLD
    degenerate: List[int] = field(default_factory=list)

    @property
    def first_crossing(self) -> Optional[int]:
        """Smallest trace count whose max |t| exceeds the threshold."""
        for size, value in zip(self.sizes, self.max_abs_t):
            if value > self.threshold:
                return size
        return None

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {
            'threshold': self.threshold,
            'sizes': list(self.sizes),
            'max_abs_t': list(self.max_abs_t),
            'first_crossing': self.first_crossing,
            'degenerate': list(self.degenerate),
        }


def _samples(data: Union[TraceSet, np.ndarray]) -> np.ndarray:
    return as_matrix(data.samples if isinstance(data, TraceSet) else data)


def tvla_incremental(ts_fixed: Union[TraceSet, np.ndarray], ts_random: Union[TraceSet, np.ndarray], \
        sizes: Optional[Sequence[int]] = None, threshold: float = TVLA_THRESHOLD) -> TvlaCurve:
    """Recomputes welch_t on growing prefixes of both sets."""
    fixed = _samples(ts_fixed)
    rand = _samples(ts_random)
    n = min(fixed.shape[0], rand.shape[0])
    if n < 2:
        raise InsufficientTracesError(2, n)
    sizes = [int(s) for s in sizes if 2 <= s <= n] if sizes is not None else prefix_sizes(n)
    values, degenerate = [], []
    for size in sizes:
        res = welch_t(fixed[:size], rand[:size], threshold, warn=False)
        values.append(res.max_abs_t)
        if res.degenerate:
            degenerate.append(size)
    if degenerate:
        warnings.warn(f'zero-variance samples (t set to 0) at {len(degenerate)} prefix size(s)', \
                DegenerateStatisticWarning, stacklevel=2)
    return TvlaCurve(sizes, values, float(threshold), degenerate)


def fixed_vs_random(key: Key256, n: int, model: Optional[LeakageModel] = None, \
        variant: Variant = Variant.REFERENCE, master_seed: int = 0, \
        fixed_iv: Optional[Iv128] = None, workers: int = 1) -> Tuple[TraceSet, TraceSet]:
    """Simulates a fixed-IV and a random-IV set of n traces each under one key."""
    iv_seed, fixed_seed, random_seed = (int(s) for s in \
            np.random.SeedSequence(int(master_seed)).generate_state(3))
    if fixed_iv is None:
        fixed_iv = random_iv(trace_rng(iv_seed, IV_STREAM))
    ts_fixed = simulate_trace_set(key, fixed_iv, n, model, variant, fixed_seed, workers=workers)
    ts_random = simulate_trace_set(key, RANDOM, n, model, variant, random_seed, workers=workers)
    return ts_fixed, ts_random
