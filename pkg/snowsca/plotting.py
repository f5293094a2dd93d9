"""Static SVG figures and CSV curve files."""
import io
from typing import List, NamedTuple, Optional, Sequence, Tuple

import matplotlib as mpl
mpl.use('Agg')
from matplotlib.figure import Figure  # pylint: disable=wrong-import-position
import numpy as np  # pylint: disable=wrong-import-position

from .errors import ArtifactWriteError, InconsistentInputError, TraceFileError  # pylint: disable=wrong-import-position
from .utils import read_file, save_file  # pylint: disable=wrong-import-position

# Fixed element ids, so equal inputs give byte-identical files.
mpl.rcParams['svg.hashsalt'] = 'snowsca'
mpl.rcParams['svg.fonttype'] = 'none'

THRESHOLD_GID = 'threshold'


class Curve(NamedTuple):
    """One plotted series; y entries may be None (skipped)."""

    x: Sequence[float]
    y: Sequence[Optional[float]]
    label: Optional[str] = None


def emit_plot(curves: Sequence[Curve], path: str, xlabel: str = 'traces', ylabel: str = '', \
        title: Optional[str] = None, threshold: Optional[float] = None, logx: bool = False) -> str:
    """Writes a line plot as SVG; a horizontal line marks threshold when given."""
    if isinstance(curves, Curve):
        curves = [curves]
    curves = [c for c in curves if len(c.x)]
    if not curves:
        raise InconsistentInputError('curve', 'nothing to plot')
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot(1, 1, 1)
    for i, curve in enumerate(curves):
        points = [(float(x), float(y)) for x, y in zip(curve.x, curve.y) if y is not None]
        xs, ys = [p[0] for p in points], [p[1] for p in points]
        ax.plot(xs, ys, marker='o' if len(points) == 1 else None, markersize=4, \
                linewidth=1.2, label=curve.label, gid=f'curve{i}')
    if threshold is not None:
        ax.axhline(threshold, color='red', linestyle='--', linewidth=1.0, gid=THRESHOLD_GID)
    if logx:
        ax.set_xscale('log')
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any(c.label for c in curves):
        ax.legend()
    ax.grid(True, linewidth=0.3)
    buf = io.BytesIO()
    fig.savefig(buf, format='svg', bbox_inches='tight', metadata={'Date': None})
    error = save_file(buf.getvalue(), path)
    if error is not None:
        raise ArtifactWriteError(path, error)
    return path


def save_curve_csv(path: str, header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    """Writes equally long columns as CSV with a header row."""
    data = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])
    buf = io.StringIO()
    np.savetxt(buf, data, delimiter=',', fmt='%.17g', header=','.join(header), comments='')
    error = save_file(buf.getvalue().encode('utf-8'), path)
    if error is not None:
        raise ArtifactWriteError(path, error)
    return path


def load_curve_csv(path: str) -> Tuple[List[str], np.ndarray]:
    """Reads a file written by save_curve_csv: (header, (rows, columns) array)."""
    data, error = read_file(path)
    if error is not None:
        raise TraceFileError(path, error)
    lines = data.decode('utf-8').splitlines()
    header = lines[0].split(',')
    values = np.loadtxt(io.StringIO('\n'.join(lines[1:])), delimiter=',', ndmin=2)
    return header, values
