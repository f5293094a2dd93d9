"""Column statistics shared by the attacks."""
import warnings
from typing import List

import numpy as np

from .errors import DegenerateStatisticWarning, InconsistentInputError


def as_matrix(data: np.ndarray) -> np.ndarray:
    """Returns data as a 2-D float64 array (a vector becomes one column)."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise InconsistentInputError('data', f'expected 2-D data, got {data.ndim}-D')
    return data


def pearson_columns(h: np.ndarray, x: np.ndarray, warn: bool = True) -> np.ndarray:
    """Pearson correlation of every column of h against every column of x.

    Returns a (h columns, x columns) matrix. Means are removed first (two-pass);
    pairs involving a zero-variance column get 0.
    """
    h = as_matrix(h)
    x = as_matrix(x)
    if h.shape[0] != x.shape[0]:
        raise InconsistentInputError('rows', f'{h.shape[0]} hypothesis rows vs {x.shape[0]} traces')
    hc = h - h.mean(axis=0)
    xc = x - x.mean(axis=0)
    num = hc.T @ xc
    den = np.sqrt(np.outer((hc * hc).sum(axis=0), (xc * xc).sum(axis=0)))
    flat = den == 0
    if flat.any() and warn:
        warnings.warn(f'{int(flat.sum())} correlation(s) over zero-variance columns set to 0', \
                DegenerateStatisticWarning, stacklevel=2)
    with np.errstate(invalid='ignore', divide='ignore'):
        corr = np.where(flat, 0.0, num / np.where(flat, 1.0, den))
    return np.clip(corr, -1.0, 1.0)


def prefix_sizes(n: int, start: int = 2, dense: int = 50, points: int = 60) -> List[int]:
    """Trace counts for incremental curves: every count up to dense, then log-spaced to n."""
    if n < start:
        return []
    sizes = list(range(start, min(n, dense) + 1))
    if n > dense:
        sizes += [int(s) for s in np.unique(np.geomspace(dense, n, points).round().astype(int)) \
                if s > dense]
    if sizes[-1] != n:
        sizes.append(n)
    return sizes
