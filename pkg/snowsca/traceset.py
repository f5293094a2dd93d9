"""Trace sets: sample matrix, per-trace metadata and their on-disk format.

A trace set is stored as a file pair sharing a root name:

    <root>_meta.json    header: version, counts, sample-point map, model, per-trace metadata
    <root>_samples.bin  little-endian float32 samples, row-major, n_traces x n_samples
"""
import io
from dataclasses import dataclass
from json import loads
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (InconsistentInputError, InvalidWordError, LengthMismatchError,
        MalformedHeaderError, TraceFileError, UnsupportedVersionError)
from .snowv import Iv128, Key256
from .utils import to_json_text
from .utils_s3 import S3
from .utils_sources import Storage

FORMAT_NAME = 'snowsca-traceset'
FORMAT_VERSION = 1
SAMPLE_DTYPE = np.dtype('<f4')

SFX_SEP = '_'
META_SFX = 'meta.json'
SAMPLES_SFX = 'samples.bin'


@dataclass(frozen=True)
class TraceMeta:
    """Per-trace metadata; order lists the executed sub-iteration order per round."""

    iv: Iv128
    key: Optional[Key256] = None
    variant: str = 'reference'
    seed: int = 0
    keystream: Optional[bytes] = None
    order: Optional[Tuple[Tuple[int, ...], ...]] = None

    def to_dict(self) -> dict:
        """Returns the JSON form (hex for binary fields)."""
        return {
            'iv': self.iv.hex(),
            'key': self.key.hex() if self.key is not None else None,
            'variant': self.variant,
            'seed': f'{self.seed:x}',
            'keystream': self.keystream.hex() if self.keystream is not None else None,
            'order': [list(o) for o in self.order] if self.order is not None else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'TraceMeta':
        """Inverse of to_dict; missing optional fields default."""
        key = data.get('key')
        keystream = data.get('keystream')
        order = data.get('order')
        return cls(iv=Iv128.from_hex(data['iv']), \
                key=Key256.from_hex(key) if key else None, \
                variant=str(data.get('variant', 'reference')), \
                seed=int(str(data.get('seed', '0')), 16), \
                keystream=bytes.fromhex(keystream) if keystream else None, \
                order=tuple(tuple(int(i) for i in o) for o in order) if order else None)


class TraceSet:
    """Sample matrix with one TraceMeta per row and a name per column."""

    def __init__(self, samples: np.ndarray, names: Sequence[str], metadata: Sequence[TraceMeta], \
            model: Optional[dict] = None):
        samples = np.asarray(samples, dtype=np.float32)
        if samples.ndim != 2:
            raise InconsistentInputError('samples', f'samples must be 2-D, got {samples.ndim}-D')
        if len(metadata) != samples.shape[0]:
            raise InconsistentInputError('metadata', \
                    f'{len(metadata)} metadata records for {samples.shape[0]} traces')
        if len(names) != samples.shape[1]:
            raise InconsistentInputError('names', \
                    f'{len(names)} sample names for {samples.shape[1]} columns')
        self._samples = samples
        self._names = tuple(str(n) for n in names)
        self._index = {name: i for i, name in enumerate(self._names)}
        self._metadata = tuple(metadata)
        self._model = dict(model) if model else None

    @property
    def samples(self) -> np.ndarray:
        """Property getter for 'samples'."""
        return self._samples

    @property
    def names(self) -> Tuple[str, ...]:
        """Sample-point map: column index to intermediate name."""
        return self._names

    @property
    def metadata(self) -> Tuple[TraceMeta, ...]:
        """Property getter for 'metadata'."""
        return self._metadata

    @property
    def model(self) -> Optional[dict]:
        """Leakage model parameters the set was simulated with."""
        return self._model

    @property
    def n_traces(self) -> int:
        """Number of rows."""
        return self._samples.shape[0]

    @property
    def n_samples(self) -> int:
        """Number of columns."""
        return self._samples.shape[1]

    @property
    def ivs(self) -> np.ndarray:
        """IV words as an (n_traces, 8) integer array."""
        return np.array([m.iv.words for m in self._metadata], dtype=np.int64).reshape(-1, 8)

    @property
    def keys(self) -> List[Optional[Key256]]:
        """Per-trace keys (None where unknown)."""
        return [m.key for m in self._metadata]

    @property
    def variants(self) -> List[str]:
        """Per-trace variants."""
        return [m.variant for m in self._metadata]

    def column_index(self, name: str) -> int:
        """Returns the column of a named sample."""
        try:
            return self._index[name]
        except KeyError as ex:
            raise InconsistentInputError('names', f'no sample named {name}') from ex

    def column(self, name: str) -> np.ndarray:
        """Returns a named column."""
        return self._samples[:, self.column_index(name)]

    def columns(self, prefix: str) -> List[int]:
        """Returns the columns whose names start with prefix."""
        return [i for i, name in enumerate(self._names) if name.startswith(prefix)]

    def subset(self, rows: Union[slice, Sequence[int], np.ndarray]) -> 'TraceSet':
        """Returns a trace set of the selected rows."""
        if isinstance(rows, slice):
            indices = range(*rows.indices(self.n_traces))
        else:
            indices = [int(i) for i in np.asarray(rows).reshape(-1)]
        indices = list(indices)
        return TraceSet(self._samples[indices], self._names, \
                [self._metadata[i] for i in indices], self._model)

    def head(self, n: int) -> 'TraceSet':
        """Returns the first n traces."""
        return self.subset(slice(0, n))

    @classmethod
    def concat(cls, sets: Iterable['TraceSet']) -> 'TraceSet':
        """Stacks trace sets sharing the same sample-point map."""
        sets = list(sets)
        if not sets:
            raise InconsistentInputError('sets', 'nothing to concatenate')
        for other in sets[1:]:
            if other.names != sets[0].names:
                raise InconsistentInputError('names', 'trace sets have different sample maps')
        return cls(np.vstack([s.samples for s in sets]), sets[0].names, \
                [m for s in sets for m in s.metadata], sets[0].model)

    def header(self) -> dict:
        """Returns the metadata document."""
        return {
            'format': FORMAT_NAME,
            'version': FORMAT_VERSION,
            'n_traces': self.n_traces,
            'n_samples': self.n_samples,
            'dtype': SAMPLE_DTYPE.str,
            'points': list(self._names),
            'model': self._model,
            'traces': [m.to_dict() for m in self._metadata],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraceSet):
            return NotImplemented
        return self._names == other.names and self._metadata == other.metadata \
                and self._model == other.model \
                and self._samples.shape == other.samples.shape \
                and self._samples.tobytes() == other.samples.tobytes()

    def __repr__(self) -> str:
        return f'TraceSet(n_traces={self.n_traces}, n_samples={self.n_samples})'


def split_root(path: str) -> str:
    """Returns the root of a trace-set file pair from any of its names."""
    for sfx in (META_SFX, SAMPLES_SFX):
        if path.endswith(SFX_SEP + sfx):
            return path[:-len(SFX_SEP + sfx)]
    return path


def pair_paths(path: str) -> Tuple[str, str]:
    """Returns (metadata path, samples path)."""
    root = split_root(path)
    return f'{root}{SFX_SEP}{META_SFX}', f'{root}{SFX_SEP}{SAMPLES_SFX}'


def _require(header: dict, name: str, kind: type, path: str):
    try:
        value = header[name]
    except KeyError as ex:
        raise MalformedHeaderError(path, f'missing field {name!r}') from ex
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise MalformedHeaderError(path, f'field {name!r} has wrong type {type(value).__name__}')
    return value


def parse_header(header: object, path: str, n_traces: Optional[int] = None) \
        -> Tuple[List[str], Optional[dict], List[TraceMeta]]:
    """Validates a metadata document, returns (points, model, metadata)."""
    if not isinstance(header, dict):
        raise MalformedHeaderError(path, 'metadata is not a JSON object')
    version = header.get('version')
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(path, version)
    if n_traces is None:
        n_traces = _require(header, 'n_traces', int, path)
        if n_traces < 0:
            raise MalformedHeaderError(path, f'negative n_traces {n_traces}')
    points = _require(header, 'points', list, path)
    traces = _require(header, 'traces', list, path)
    model = header.get('model')
    if model is not None and not isinstance(model, dict):
        raise MalformedHeaderError(path, 'model must be an object')
    if len(traces) != n_traces:
        raise LengthMismatchError(path, f'{len(traces)} trace records for n_traces={n_traces}')
    try:
        metadata = [TraceMeta.from_dict(t) for t in traces]
    except (KeyError, TypeError, ValueError, AttributeError, InvalidWordError) as ex:
        raise MalformedHeaderError(path, f'bad trace record: {ex}') from ex
    return [str(p) for p in points], model, metadata


def store_trace_set(ts: TraceSet, path: str, s3: Optional[S3] = None) -> Tuple[str, str]:
    """Writes ts as a file pair, returns the two paths written."""
    meta_path, samples_path = pair_paths(path)
    storage = Storage.for_location(path, s3)
    for data, location in ((ts.samples.astype(SAMPLE_DTYPE).tobytes(), samples_path), \
            (to_json_text(ts.header()).encode('utf-8'), meta_path)):
        error = storage.write(data, location)
        if error is not None:
            raise TraceFileError(location, error)
    return meta_path, samples_path


def load_trace_set(path: str, s3: Optional[S3] = None) -> TraceSet:
    """Reads a file pair written by store_trace_set."""
    meta_path, samples_path = pair_paths(path)
    storage = Storage.for_location(path, s3)
    raw, error = storage.read(meta_path)
    if error is not None:
        raise TraceFileError(meta_path, error)
    try:
        header = loads(raw.decode('utf-8'))
    except (ValueError, UnicodeDecodeError) as ex:
        raise MalformedHeaderError(meta_path, f'invalid JSON: {ex}') from ex
    points, model, metadata = parse_header(header, meta_path)
    n_traces = len(metadata)
    n_samples = _require(header, 'n_samples', int, meta_path)
    if header.get('dtype', SAMPLE_DTYPE.str) != SAMPLE_DTYPE.str:
        raise MalformedHeaderError(meta_path, f'unsupported dtype {header.get("dtype")!r}')
    if len(points) != n_samples:
        raise LengthMismatchError(meta_path, f'{len(points)} point names for n_samples={n_samples}')
    data, error = storage.read(samples_path)
    if error is not None:
        raise TraceFileError(samples_path, error)
    expected = n_traces * n_samples * SAMPLE_DTYPE.itemsize
    if len(data) != expected:
        raise LengthMismatchError(samples_path, \
                f'{len(data)} bytes, expected {expected} for {n_traces}x{n_samples} samples')
    samples = np.frombuffer(data, dtype=SAMPLE_DTYPE).reshape(n_traces, n_samples)
    return TraceSet(samples.astype(np.float32), points, metadata, model)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def import_csv(csv_path: str, metadata: Union[str, dict], s3: Optional[S3] = None) -> TraceSet:
    """Builds a trace set from CSV samples (one row per trace, optional header row).

    metadata is a document shaped like the trace-set header, or a path to one. Point
    names come from it, else from the CSV header, else default to p0, p1, ...
    """
    if isinstance(metadata, str):
        raw, error = Storage.for_location(metadata, s3).read(metadata)
        if error is not None:
            raise TraceFileError(metadata, error)
        try:
            metadata = loads(raw.decode('utf-8'))
        except (ValueError, UnicodeDecodeError) as ex:
            raise MalformedHeaderError(str(metadata), f'invalid JSON: {ex}') from ex
    raw, error = Storage.for_location(csv_path, s3).read(csv_path)
    if error is not None:
        raise TraceFileError(csv_path, error)
    text = raw.decode('utf-8')
    lines = [line for line in text.splitlines() if line.strip()]
    header_names: Optional[List[str]] = None
    if lines and not all(_is_number(cell) for cell in lines[0].split(',')):
        header_names = [cell.strip() for cell in lines[0].split(',')]
        lines = lines[1:]
    if not lines:
        raise LengthMismatchError(csv_path, 'no sample rows')
    try:
        samples = np.loadtxt(io.StringIO('\n'.join(lines)), delimiter=',', \
                dtype=np.float64, ndmin=2)
    except ValueError as ex:
        raise MalformedHeaderError(csv_path, f'non-numeric or ragged CSV: {ex}') from ex
    doc = dict(metadata)
    doc.setdefault('version', FORMAT_VERSION)
    doc.setdefault('points', header_names or [f'p{i}' for i in range(samples.shape[1])])
    points, model, meta = parse_header(doc, csv_path, n_traces=samples.shape[0])
    if len(points) != samples.shape[1]:
        raise LengthMismatchError(csv_path, \
                f'{len(points)} point names for {samples.shape[1]} CSV columns')
    return TraceSet(samples, points, meta, model)


def export_csv(ts: TraceSet, csv_path: str, s3: Optional[S3] = None) -> Dict[str, object]:
    """Writes samples as CSV with a header row; returns the metadata document."""
    buf = io.StringIO()
    np.savetxt(buf, ts.samples, delimiter=',', fmt='%.9g', \
            header=','.join(ts.names), comments='')
    error = Storage.for_location(csv_path, s3).write(buf.getvalue().encode('utf-8'), csv_path)
    if error is not None:
        raise TraceFileError(csv_path, error)
    doc = ts.header()
    doc.pop('n_samples')
    doc.pop('dtype')
    return doc
