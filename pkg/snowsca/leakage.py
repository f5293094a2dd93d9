"""Simulated power traces of the SNOW-V initialization under a Hamming-weight model."""
import fnmatch
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum, unique
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .countermeasures import MaskedIntermediate, Variant, variant_step
from .errors import InconsistentInputError, InvalidModelError
from .snowv import (INIT_ROUNDS, MUL_X_INV_A, MUL_X_INV_B, Iv128, Key256, Phase, init_round,
        keystream_output, load_state)
from .traceset import TraceMeta, TraceSet
from .utils import hamming_weight

NOISE_STREAM = 0
IV_STREAM = 1
KEY_STREAM = 2

# Bit slices of a word in SLICED granularity: the CPA low-byte model sees bits 0..6,
# the high-byte model bits 7..14.
SLICES = (('lo', 0x007F), ('hi', 0x7F80), ('top', 0x8000))

RANDOM = 'random'


@unique
class Granularity(Enum):
    """How a 16-bit intermediate turns into samples."""

    WORD = 'word'
    SLICED = 'sliced'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LeakageModel:
    """sample = hw_scale * HW(value) + branch_delta * [branch taken] + N(0, noise_sigma).

    points optionally restricts the emitted samples to names matching any of the
    given fnmatch patterns (names without the round prefix, e.g. 'u0.*').
    """

    DEFAULT_HW_SCALE = 1.0
    DEFAULT_NOISE_SIGMA = 1.0
    DEFAULT_BRANCH_DELTA = 10.0

    hw_scale: float = DEFAULT_HW_SCALE
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    branch_delta: float = DEFAULT_BRANCH_DELTA
    granularity: Granularity = Granularity.SLICED
    rounds: int = 1
    points: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ('hw_scale', 'noise_sigma', 'branch_delta'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidModelError(name, value)
            object.__setattr__(self, name, value)
        if self.noise_sigma < 0:
            raise InvalidModelError('noise_sigma', self.noise_sigma, 'noise_sigma must be >= 0')
        if not 1 <= int(self.rounds) <= INIT_ROUNDS:
            raise InvalidModelError('rounds', self.rounds, f'rounds must be in 1..{INIT_ROUNDS}')
        object.__setattr__(self, 'rounds', int(self.rounds))
        try:
            object.__setattr__(self, 'granularity', Granularity(str(self.granularity)))
        except ValueError as ex:
            raise InvalidModelError('granularity', self.granularity) from ex
        object.__setattr__(self, 'points', tuple(str(p) for p in self.points))

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        data = asdict(self)
        data['granularity'] = self.granularity.value
        data['points'] = list(self.points)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'LeakageModel':
        """Inverse of to_dict."""
        return cls(**{k: v for k, v in data.items() \
                if k in ('hw_scale', 'noise_sigma', 'branch_delta', 'granularity', \
                'rounds', 'points')})

    def selected(self, name: str) -> bool:
        """Returns True when a sample name (without round prefix) is emitted."""
        if not self.points:
            return True
        return any(fnmatch.fnmatchcase(name, p) for p in self.points)

    def render(self, events: Sequence['LeakEvent']) -> Tuple[List[str], List[float]]:
        """Turns leak events into (names, noiseless sample values)."""
        names, values = [], []
        for event in events:
            if event.branch is not None:
                parts = [(event.name, self.hw_scale * hamming_weight(event.value) \
                        + self.branch_delta * event.branch)]
            elif self.granularity == Granularity.WORD:
                parts = [(event.name, self.hw_scale * hamming_weight(event.value))]
            else:
                parts = [(f'{event.name}.{sfx}', self.hw_scale * hamming_weight(event.value & mask)) \
                        for sfx, mask in SLICES]
            for name, value in parts:
                if self.selected(name.split('.', 1)[1]):
                    names.append(name)
                    values.append(value)
        if not names:
            raise InvalidModelError('points', self.points, 'no sample point selected')
        return names, values


class LeakEvent(NamedTuple):
    """One leaking operation; branch is None for data samples, else 0/1 for branch samples."""

    name: str
    value: int
    branch: Optional[int] = None


class TraceRow(NamedTuple):
    """One simulated trace."""

    samples: np.ndarray
    names: Tuple[str, ...]
    meta: TraceMeta


def leak_events(variant: Variant, records: Sequence, rnd: int = 1) -> List[LeakEvent]:
    """Maps the recorded intermediates of one LFSR update to leak events.

    Per sub-iteration: the mul_x_inv of LFSR-A, u, the mul_x_inv of LFSR-B, v.
    """
    pfx = f'r{rnd}.'
    events = []
    for slot, rec in enumerate(records):
        if variant == Variant.CONSTANT_TIME:
            # No branch; the masked reduction constant still leaks through its weight.
            br_a = (MUL_X_INV_A if rec.a_lsb else 0, 0)
            br_b = (MUL_X_INV_B if rec.b_lsb else 0, 0)
        else:
            br_a = (0, rec.a_lsb)
            br_b = (0, rec.b_lsb)
        if isinstance(rec, MaskedIntermediate):
            i = rec.index
            events += [LeakEvent(f'{pfx}bA{i}', *br_a), LeakEvent(f'{pfx}m{i}', rec.mask), \
                    LeakEvent(f'{pfx}u{i}^m', rec.u_masked), LeakEvent(f'{pfx}bB{i}', *br_b), \
                    LeakEvent(f'{pfx}v{i}^m', rec.v_masked)]
        elif variant == Variant.SHUFFLED:
            events += [LeakEvent(f'{pfx}s{slot}.bA', *br_a), LeakEvent(f'{pfx}s{slot}.u', rec.u), \
                    LeakEvent(f'{pfx}s{slot}.bB', *br_b), LeakEvent(f'{pfx}s{slot}.v', rec.v)]
        else:
            i = rec.index
            events += [LeakEvent(f'{pfx}bA{i}', *br_a), LeakEvent(f'{pfx}u{i}', rec.u), \
                    LeakEvent(f'{pfx}bB{i}', *br_b), LeakEvent(f'{pfx}v{i}', rec.v)]
    return events


def trace_rng(seed: int, stream: int = NOISE_STREAM) -> np.random.Generator:
    """Returns the PCG64 generator of one per-trace stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), \
            spawn_key=(stream,))))


def random_iv(rng: np.random.Generator) -> Iv128:
    """Draws a uniform IV."""
    return Iv128(tuple(int(w) for w in rng.integers(0, 1 << 16, size=8)))


def random_key(rng: np.random.Generator) -> Key256:
    """Draws a uniform key."""
    return Key256(tuple(int(w) for w in rng.integers(0, 1 << 16, size=16)))


def simulate_trace(key: Key256, iv: Iv128, model: LeakageModel, variant: Variant, \
        noise_seed: int, keep_keystream: bool = False, store_key: bool = True, \
        deterministic_masks: bool = True) -> TraceRow:
    """Simulates one trace of the first model.rounds initialization rounds.

    The seed drives, in this order, masks or shuffle orders, then the noise.
    """
    variant = Variant.parse(variant)
    rng = trace_rng(noise_seed, NOISE_STREAM)
    step = variant_step(variant, rng, deterministic_masks)
    state = load_state(key, iv)
    events: List[LeakEvent] = []
    orders = []
    for rnd in range(1, model.rounds + 1):
        record: list = []
        state = init_round(state, key, step, record)
        events += leak_events(variant, record, rnd)
        orders.append(tuple(rec.index for rec in record))
    names, clean = model.render(events)
    samples = np.asarray(clean, dtype=np.float64)
    if model.noise_sigma > 0:
        samples = samples + rng.normal(0.0, model.noise_sigma, size=samples.shape)
    z = None
    if keep_keystream:
        while state.phase == Phase.INITIALIZING:
            state = init_round(state, key, step)
        z = keystream_output(state)
    meta = TraceMeta(iv=iv, key=key if store_key else None, variant=variant.value, \
            seed=int(noise_seed), keystream=z, \
            order=tuple(orders) if variant == Variant.SHUFFLED else None)
    return TraceRow(samples.astype(np.float32), tuple(names), meta)


def _policy(value: object, n: int, what: str, seeds: Sequence[int], stream: int, draw) -> list:
    if isinstance(value, str):
        if value != RANDOM:
            raise InconsistentInputError(what, f'unknown {what} policy {value!r}')
        return [draw(trace_rng(s, stream)) for s in seeds]
    if isinstance(value, (Key256, Iv128)):
        return [value] * n
    values = list(value)
    if len(values) != n:
        raise InconsistentInputError(what, f'{len(values)} {what}s for n={n} traces')
    return values


def _simulate_job(job: tuple) -> TraceRow:
    return simulate_trace(*job)


def simulate_trace_set(key: Union[Key256, Sequence[Key256], str], \
        iv: Union[Iv128, Sequence[Iv128], str], n: int, \
        model: Optional[LeakageModel] = None, variant: Variant = Variant.REFERENCE, \
        master_seed: int = 0, keep_keystream: bool = False, store_key: bool = True, \
        deterministic_masks: bool = True, workers: int = 1) -> TraceSet:
    """Simulates n traces.

    key is a fixed key, a per-trace list or 'random'; iv is a fixed IV, a list or
    'random'. Per-trace seeds derive from master_seed, so the result does not depend
    on workers.
    """
    if int(n) < 1:
        raise InconsistentInputError('n', f'n must be >= 1, got {n}')
    n = int(n)
    model = model or LeakageModel()
    variant = Variant.parse(variant)
    seeds = [int(s) for s in np.random.SeedSequence(int(master_seed)).generate_state(n)]
    keys = _policy(key, n, 'key', seeds, KEY_STREAM, random_key)
    ivs = _policy(iv, n, 'iv', seeds, IV_STREAM, random_iv)
    jobs = [(k, v, model, variant, s, keep_keystream, store_key, deterministic_masks) \
            for k, v, s in zip(keys, ivs, seeds)]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_simulate_job, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        rows = [_simulate_job(job) for job in jobs]
    names = rows[0].names
    for row in rows:
        if row.names != names:
            raise InconsistentInputError('names', 'traces produced different sample maps')
    return TraceSet(np.vstack([r.samples for r in rows]), names, [r.meta for r in rows], \
            dict(model.to_dict(), variant=variant.value))
