"""Correlation power analysis of the u/v intermediates of the first LFSR update.

A key byte enters u (or v) only through mul_x_inv, whose shift drops the byte's LSB.
For the low byte only seven bits are observable, which produces four candidates
with |rho| = 1 (the ghost set); the LSB is then settled by LDA.
"""
import re
import warnings
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (GhostSetError, InconsistentInputError, InsufficientTracesWarning,
        MissingDependencyError)
from .snowv import (MUL_X_A, MUL_X_INV_A, MUL_X_INV_B, Iv128, Key256, load_state,
        lfsr_update, mul_x_inv)
from .stats import as_matrix, pearson_columns, prefix_sizes
from .traceset import TraceSet
from .utils import HW16

N_HYPOTHESES = 256
MIN_CPA_TRACES = 8
LOW7 = 0x7F

HYPOTHESES = np.arange(N_HYPOTHESES, dtype=np.int64)


def contribution7(k: int, d: int = MUL_X_INV_A) -> int:
    """The 7 bits of mul_x_inv(word) that a low key byte k determines."""
    return ((k >> 1) ^ (d & LOW7 if k & 1 else 0)) & LOW7


def _byte_from_contribution(c7: int, lsb: int, d: int) -> int:
    return (((c7 ^ (d & LOW7 if lsb else 0)) & LOW7) << 1) | lsb


def ghost_partner(k: int, d: int = MUL_X_INV_A) -> int:
    """The byte with the same contribution and the other LSB."""
    return _byte_from_contribution(contribution7(k, d), 1 - (k & 1), d)


def complement(k: int, d: int = MUL_X_INV_A) -> int:
    """The byte with the complemented contribution and the same LSB."""
    return _byte_from_contribution(contribution7(k, d) ^ LOW7, k & 1, d)


@dataclass(frozen=True)
class GhostSet:
    """Positive-peak pair (a, b) and negative-peak pair (c, d)."""

    a: int
    b: int
    c: int
    d: int

    @property
    def well_formed(self) -> bool:
        """True when the positive pair has different LSBs."""
        return (self.a & 1) != (self.b & 1)

    def to_dict(self) -> dict:
        """Returns the JSON form (hex bytes)."""
        return {k: f'0x{v:02x}' for k, v in (('a', self.a), ('b', self.b), ('c', self.c), ('d', self.d))}


def expected_ghost_set(k: int, d: int = MUL_X_INV_A) -> GhostSet:
    """Ghost set CPA should return for true byte k."""
    partner = ghost_partner(k, d)
    return GhostSet(k, partner, complement(k, d), complement(partner, d))


def disambiguate(ghosts: GhostSet, lsb: int) -> int:
    """Returns the positive candidate whose LSB is lsb."""
    if not ghosts.well_formed:
        raise GhostSetError(ghosts)
    return ghosts.a if (ghosts.a & 1) == (lsb & 1) else ghosts.b


class Target(NamedTuple):
    """One attacked byte: lfsr 'A' or 'B', cell 8..15, half 'lo' or 'hi'."""

    lfsr: str
    index: int
    half: str

    @classmethod
    def parse(cls, text: str) -> 'Target':
        """Parses 'A8.lo', 'A[8].lo' or 'b13.hi'."""
        match = re.fullmatch(r'\s*([AaBb])\[?(\d+)\]?\.(lo|hi)\s*', str(text))
        if not match or not 8 <= int(match.group(2)) <= 15:
            raise InconsistentInputError('target', f'{text!r} is not a target like A[8].lo')
        return cls(match.group(1).upper(), int(match.group(2)), match.group(3))

    @property
    def iteration(self) -> int:
        """Sub-iteration whose intermediate carries this byte."""
        return self.index - 8

    @property
    def intermediate(self) -> str:
        """Name of the attacked intermediate, u{i} or v{i}."""
        return f'{"u" if self.lfsr == "A" else "v"}{self.iteration}'

    @property
    def d(self) -> int:
        """mul_x_inv reduction constant of the intermediate."""
        return MUL_X_INV_A if self.lfsr == 'A' else MUL_X_INV_B

    @property
    def word(self) -> str:
        """Name of the attacked word."""
        return f'{self.lfsr}[{self.index}]'

    @property
    def name(self) -> str:
        """Name of the attacked byte."""
        return f'{self.word}.{self.half}'

    @property
    def dependencies(self) -> Tuple[str, ...]:
        """Words other than this one that must be known first."""
        i = self.iteration
        if self.lfsr == 'A':
            return ('A[8]',) if i + 1 >= 8 else ()
        return (f'B[{i + 3}]',) if i + 3 >= 8 else ()


def attack_schedule() -> List[Target]:
    """All 32 byte targets in dependency order, low half before high half."""
    targets = []
    for i in range(8):
        for lfsr in ('A', 'B'):
            targets += [Target(lfsr, 8 + i, 'lo'), Target(lfsr, 8 + i, 'hi')]
    return targets


def normalize_word(text: str) -> str:
    """Returns the canonical cell name ('A[8]') of 'A8', 'a[8]' and the like."""
    match = re.fullmatch(r'\s*([AaBb])\[?(\d+)\]?\s*', str(text))
    if not match or not 8 <= int(match.group(2)) <= 15:
        raise InconsistentInputError('word', f'{text!r} is not a key cell A[8]..B[15]')
    return f'{match.group(1).upper()}[{int(match.group(2))}]'


def word_to_key_index(word: str) -> int:
    """Key word index held by a cell after loading: A[8+j] = k_j, B[8+j] = k_{8+j}."""
    word = normalize_word(word)
    return int(word[2:-1]) - 8 + (0 if word[0] == 'A' else 8)


def true_byte(key: Key256, target: Target) -> int:
    """Byte of key attacked by target."""
    word = key.words[word_to_key_index(target.word)]
    return word & 0xFF if target.half == 'lo' else word >> 8


def _mul_x_np(v: np.ndarray, c: int) -> np.ndarray:
    return ((v << 1) & 0xFFFF) ^ np.where(v & 0x8000, c, 0)


def _known_word(known: Dict[str, int], word: str, target: Target) -> int:
    if word not in known:
        raise MissingDependencyError(target.name, (word,))
    return int(known[word]) & 0xFFFF


def base_words(ivs: np.ndarray, target: Target, known: Optional[Dict[str, int]] = None) -> np.ndarray:
    """The intermediate with the mul_x_inv term of the target removed, per trace."""
    known = known or {}
    ivs = np.asarray(ivs, dtype=np.int64).reshape(-1, 8)
    i = target.iteration
    if target.lfsr == 'A':
        # u_i = mul_x(a_i) ^ a_{i+1} ^ mul_x_inv(a_{i+8}) ^ b_i with b_i = 0 after loading
        nxt = ivs[:, i + 1] if i + 1 < 8 else _known_word(known, 'A[8]', target)
        return _mul_x_np(ivs[:, i], MUL_X_A) ^ nxt
    # v_i = mul_x(b_i) ^ b_{i+3} ^ mul_x_inv(b_{i+8}) ^ a_i with b_i = 0
    tap = _known_word(known, f'B[{i + 3}]', target) if i + 3 >= 8 else 0
    return ivs[:, i] ^ tap


def hypothesis_matrix(ivs: np.ndarray, target: Target, known: Optional[Dict[str, int]] = None) \
        -> np.ndarray:
    """Predicted Hamming weights, shape (n_traces, 256).

    Low byte: HW of u bits 0..6. High byte: HW of u bits 7..14 with the known low
    byte substituted.
    """
    known = known or {}
    base = base_words(ivs, target, known)
    d = target.d
    if target.half == 'lo':
        contrib = np.array([contribution7(int(h), d) for h in HYPOTHESES], dtype=np.int64)
        return HW16[(base[:, None] ^ contrib[None, :]) & LOW7].astype(np.float64)
    low = known.get(f'{target.word}.lo')
    if low is None and target.word in known:
        low = int(known[target.word]) & 0xFF
    if low is None:
        raise MissingDependencyError(target.name, (f'{target.word}.lo',))
    words = (HYPOTHESES << 8) | int(low)
    contrib = np.array([mul_x_inv(int(w), d) for w in words], dtype=np.int64)
    return HW16[((base[:, None] ^ contrib[None, :]) >> 7) & 0xFF].astype(np.float64)


@dataclass(frozen=True)
class KeyRanking:
    """Per-hypothesis scores and their order.

    ordering lists positive peaks by decreasing correlation, then negative peaks by
    decreasing magnitude; ties go to the smaller hypothesis.
    """

    scores: np.ndarray
    signed_peak: np.ndarray
    best_sample: np.ndarray
    ordering: np.ndarray

    @classmethod
    def from_correlations(cls, corr: np.ndarray, columns: Optional[Sequence[int]] = None) \
            -> 'KeyRanking':
        """Builds a ranking from a (256, samples) correlation matrix."""
        corr = np.asarray(corr, dtype=np.float64)
        best = np.argmax(np.abs(corr), axis=1)
        signed = corr[HYPOTHESES, best]
        scores = np.abs(signed)
        ordering = np.lexsort((HYPOTHESES, -scores, -(signed > 0).astype(np.int64)))
        cols = np.asarray(columns if columns is not None else range(corr.shape[1]))
        return cls(scores, signed, cols[best], ordering)

    def rank_of(self, hypothesis: int) -> int:
        """0-based position of a hypothesis in the ordering."""
        return int(np.flatnonzero(self.ordering == hypothesis)[0])

    @property
    def best(self) -> int:
        """Top candidate."""
        return int(self.ordering[0])

    def negative_order(self) -> np.ndarray:
        """Hypotheses from most negative peak up, ties to the smaller hypothesis."""
        return np.lexsort((HYPOTHESES, self.signed_peak))

    def ghost_set(self) -> GhostSet:
        """Top-2 positive peaks and the two most negative ones, matched by LSB."""
        a, b = (int(h) for h in self.ordering[:2])
        neg = [int(h) for h in self.negative_order()[:2]]
        c = next((h for h in neg if (h & 1) == (a & 1)), neg[0])
        d = neg[1] if c == neg[0] else neg[0]
        return GhostSet(a, b, c, d)

    def to_dict(self, top: int = 8, names: Optional[Sequence[str]] = None) -> dict:
        """Returns the JSON form of the leading candidates."""
        rows = []
        for h in self.ordering[:top]:
            h = int(h)
            col = int(self.best_sample[h])
            rows.append({'hypothesis': f'0x{h:02x}', 'peak': float(self.signed_peak[h]), \
                    'sample': names[col] if names is not None else col})
        return {'top': rows, 'scores': [float(s) for s in self.scores]}


class CpaResult(NamedTuple):
    """Ranking of one byte; ghosts is None for high bytes (all bits observable)."""

    target: Target
    ranking: KeyRanking
    ghosts: Optional[GhostSet]
    n_traces: int

    def to_dict(self, names: Optional[Sequence[str]] = None) -> dict:
        """Returns the JSON form."""
        return {'target': self.target.name, 'n_traces': self.n_traces, \
                'ranking': self.ranking.to_dict(names=names), \
                'ghosts': self.ghosts.to_dict() if self.ghosts is not None else None}


def _columns(ts: TraceSet, poi: Optional[Sequence[int]]) -> List[int]:
    cols = list(range(ts.n_samples)) if poi is None else [int(c) for c in poi]
    if not cols or min(cols) < 0 or max(cols) >= ts.n_samples:
        raise InconsistentInputError('poi', f'sample selection {cols[:4]}... outside the trace')
    return cols


def cpa_byte(ts: TraceSet, target: Union[Target, str], known: Optional[Dict[str, int]] = None, \
        poi: Optional[Sequence[int]] = None) -> CpaResult:
    """Ranks the 256 values of one key byte.

    known maps recovered words ('A[8]') or low bytes ('A[8].lo') to values; poi
    restricts the correlated samples (default: all).
    """
    target = Target.parse(target) if isinstance(target, str) else target
    if ts.n_traces < MIN_CPA_TRACES:
        warnings.warn(f'CPA on {ts.n_traces} traces is unstable (< {MIN_CPA_TRACES})', \
                InsufficientTracesWarning, stacklevel=2)
    cols = _columns(ts, poi)
    hyp = hypothesis_matrix(ts.ivs, target, known)
    corr = pearson_columns(hyp, ts.samples[:, cols])
    ranking = KeyRanking.from_correlations(corr, cols)
    ghosts = ranking.ghost_set() if target.half == 'lo' else None
    return CpaResult(target, ranking, ghosts, ts.n_traces)


def locked(ranking: KeyRanking, target: Target, true_value: int) -> bool:
    """True when the true byte (and its ghost partner for low bytes) lead the ranking."""
    if target.half == 'hi':
        return ranking.best == true_value and ranking.signed_peak[true_value] > 0
    pair = {true_value, ghost_partner(true_value, target.d)}
    top = {int(h) for h in ranking.ordering[:2]}
    return top == pair and all(ranking.signed_peak[h] > 0 for h in pair)


@dataclass(frozen=True)
class MtdCurve:
    """Rank evolution of the true byte over growing trace prefixes."""

    target: str
    true_value: int
    sizes: List[int]
    locked: List[bool]
    true_rank: List[int]
    true_peak: List[float]
    best_wrong_peak: List[float]

    @property
    def mtd(self) -> Optional[int]:
        """Smallest size after which every larger prefix stays locked."""
        result = None
        for size, ok in zip(reversed(self.sizes), reversed(self.locked)):
            if not ok:
                break
            result = size
        return result

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {'target': self.target, 'true_value': f'0x{self.true_value:02x}', 'mtd': self.mtd, \
                'sizes': list(self.sizes), 'locked': list(self.locked), \
                'true_rank': list(self.true_rank), 'true_peak': list(self.true_peak), \
                'best_wrong_peak': list(self.best_wrong_peak)}


def mtd_curve(ts: TraceSet, target: Union[Target, str], true_value: int, \
        known: Optional[Dict[str, int]] = None, sizes: Optional[Sequence[int]] = None, \
        poi: Optional[Sequence[int]] = None) -> MtdCurve:
    """Reruns the CPA on growing prefixes and records whether the true byte is locked in."""
    target = Target.parse(target) if isinstance(target, str) else target
    cols = _columns(ts, poi)
    sizes = [int(s) for s in sizes if 2 <= s <= ts.n_traces] if sizes is not None \
            else prefix_sizes(ts.n_traces)
    hyp = hypothesis_matrix(ts.ivs, target, known)
    x = ts.samples[:, cols]
    friends = {true_value, ghost_partner(true_value, target.d)} if target.half == 'lo' \
            else {true_value}
    wrong = np.array([h not in friends for h in range(N_HYPOTHESES)])
    locks, ranks, peaks, wrongs = [], [], [], []
    for size in sizes:
        ranking = KeyRanking.from_correlations(pearson_columns(hyp[:size], x[:size], warn=False), cols)
        locks.append(bool(locked(ranking, target, true_value)))
        ranks.append(ranking.rank_of(true_value))
        peaks.append(float(ranking.signed_peak[true_value]))
        wrongs.append(float(ranking.signed_peak[wrong].max()))
    return MtdCurve(target.name, int(true_value), sizes, locks, ranks, peaks, wrongs)


def true_intermediates(key: Key256, ivs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """u_0..u_7 and v_0..v_7 of the first LFSR update, each (n_traces, 8)."""
    us, vs = [], []
    for row in np.asarray(ivs).reshape(-1, 8):
        record: list = []
        lfsr_update(load_state(key, Iv128(tuple(int(w) for w in row))).lfsr, record)
        us.append([r.u for r in record])
        vs.append([r.v for r in record])
    return np.array(us, dtype=np.int64).reshape(-1, 8), np.array(vs, dtype=np.int64).reshape(-1, 8)


@dataclass(frozen=True)
class KkcResult:
    """Known-key correlation per sample; poi is the argmax of |rho|."""

    intermediate: str
    model_bits: int
    correlation: np.ndarray

    @property
    def poi(self) -> int:
        """Sample with the strongest correlation."""
        return int(np.argmax(np.abs(self.correlation)))

    @property
    def peak(self) -> float:
        """Correlation at the POI."""
        return float(self.correlation[self.poi])

    def to_dict(self, names: Optional[Sequence[str]] = None) -> dict:
        """Returns the JSON form."""
        return {'intermediate': self.intermediate, 'model_bits': self.model_bits, \
                'poi': names[self.poi] if names is not None else self.poi, 'peak': self.peak, \
                'correlation': [float(c) for c in self.correlation]}


def kkc(ts: TraceSet, known_key: Key256, intermediate: str = 'u0', model_bits: int = 16) \
        -> KkcResult:
    """Correlates every sample with HW of the low model_bits bits of a true intermediate."""
    match = re.fullmatch(r'([uv])([0-7])', intermediate)
    if not match:
        raise InconsistentInputError('intermediate', f'{intermediate!r} is not u0..u7 or v0..v7')
    if not 1 <= model_bits <= 16:
        raise InconsistentInputError('model_bits', f'model_bits must be in 1..16, got {model_bits}')
    us, vs = true_intermediates(known_key, ts.ivs)
    values = (us if match.group(1) == 'u' else vs)[:, int(match.group(2))]
    hyp = HW16[values & ((1 << model_bits) - 1)].astype(np.float64)
    corr = pearson_columns(as_matrix(hyp), ts.samples)[0]
    return KkcResult(intermediate, model_bits, corr)


def model_comparison(ts: TraceSet, key: Key256, widths: Sequence[int] = (4, 6, 8, 16), \
        intermediate: str = 'u0') -> Dict[int, float]:
    """Peak |rho| of the known-key correlation for each model width."""
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        return {int(w): abs(kkc(ts, key, intermediate, int(w)).peak) for w in widths}
