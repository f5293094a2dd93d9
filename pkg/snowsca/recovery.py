"""Incremental recovery of the 256-bit key from the first LFSR update.

Bytes are attacked in schedule order. Low bytes go through CPA, which leaves a
ghost pair, and the pair is split by the LDA-predicted LSB. High bytes go through
CPA with the low byte substituted. Words recovered earlier feed the hypotheses of
later sub-iterations (B[13] via B[8], B[14] via B[9], A[15] via A[8], B[15] via B[10]).
"""
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cpa import (Target, attack_schedule, cpa_byte, disambiguate, mtd_curve, normalize_word,
        true_byte, word_to_key_index)
from .errors import (AttackIncompleteError, InconsistentInputError, InsufficientTracesWarning,
        SnowScaError)
from .lda import DEFAULT_HALF_WIDTH, LdaModel, lda_train, lsb_labels, select_window
from .snowv import Key256, initialize, keystream_output
from .traceset import TraceSet

KEY_WORDS = tuple([f'A[{8 + j}]' for j in range(8)] + [f'B[{8 + j}]' for j in range(8)])


@dataclass
class ByteRecovery:
    """Outcome for one attacked byte."""

    target: str
    value: Optional[int] = None
    peak: float = 0.0
    sample: Optional[str] = None
    ghosts: Optional[dict] = None
    lda_bit: Optional[int] = None
    lda_agreement: Optional[float] = None
    lda_window: Optional[Tuple[int, int]] = None
    ghost_consistent: bool = True
    dependencies: Tuple[str, ...] = ()
    mtd: Optional[int] = None
    correct: Optional[bool] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {'target': self.target, \
                'value': f'0x{self.value:02x}' if self.value is not None else None, \
                'peak': self.peak, 'sample': self.sample, 'ghosts': self.ghosts, \
                'lda_bit': self.lda_bit, 'lda_agreement': self.lda_agreement, \
                'lda_window': list(self.lda_window) if self.lda_window else None, \
                'ghost_consistent': self.ghost_consistent, \
                'dependencies': list(self.dependencies), 'mtd': self.mtd, \
                'correct': self.correct, 'error': self.error}


@dataclass
class AttackReport:
    """Recovered words a_8..a_15, b_8..b_15 and per-byte outcomes."""

    words: Dict[str, int] = field(default_factory=dict)
    bytes: List[ByteRecovery] = field(default_factory=list)
    n_traces: int = 0
    n_profile: int = 0
    seeded: Tuple[str, ...] = ()

    @property
    def complete(self) -> bool:
        """True once all 16 words are resolved."""
        return all(w in self.words for w in KEY_WORDS)

    def dependencies(self, word: str) -> Tuple[str, ...]:
        """Words the recovery of word relied on."""
        deps = []
        for rec in self.bytes:
            if rec.target.startswith(word + '.'):
                deps += [d for d in rec.dependencies if d not in deps]
        return tuple(deps)

    def key(self) -> Key256:
        """The recovered key."""
        if not self.complete:
            missing = [w for w in KEY_WORDS if w not in self.words]
            raise AttackIncompleteError(self, f'unresolved words {", ".join(missing)}')
        words = [0] * 16
        for word in KEY_WORDS:
            words[word_to_key_index(word)] = self.words[word]
        return Key256(tuple(words))

    def verify(self, key: Key256) -> Dict[str, Tuple[str, ...]]:
        """Words that differ from key, each with the words its recovery depended on."""
        return {w: self.dependencies(w) for w in KEY_WORDS \
                if w in self.words and self.words[w] != key.words[word_to_key_index(w)]}

    def to_dict(self) -> dict:
        """Returns the JSON form."""
        return {'complete': self.complete, \
                'key': self.key().hex() if self.complete else None, \
                'words': {w: f'0x{self.words[w]:04x}' for w in KEY_WORDS if w in self.words}, \
                'bytes': [b.to_dict() for b in self.bytes], \
                'n_traces': self.n_traces, 'n_profile': self.n_profile, \
                'seeded': list(self.seeded)}


def evaluation_key(ts: TraceSet) -> Optional[Key256]:
    """The key shared by every trace, when the set records one."""
    keys = set(ts.keys)
    if len(keys) == 1:
        return keys.pop()
    return None


def train_word_model(profile: TraceSet, word: str, half_width: int = DEFAULT_HALF_WIDTH) -> LdaModel:
    """LDA model predicting the LSB of word from a profiling set."""
    labels = lsb_labels(profile, word)
    return lda_train(profile, labels, select_window(profile, labels, half_width))


def predict_lsb(model: LdaModel, ts: TraceSet) -> Tuple[int, float]:
    """Majority LSB over the attack traces and the fraction of traces agreeing."""
    votes = model.predict(ts.samples)
    count = Counter(int(v) for v in votes)
    bit = 1 if count[1] > count[0] else 0 if count[0] > count[1] else int(votes[0])
    return bit, count[bit] / len(votes)


def _window(center: int, half_width: int, width: int) -> List[int]:
    return list(range(max(0, center - half_width), min(width, center + half_width + 1)))


def recover_byte(ts: TraceSet, target: Target, known: Dict[str, int], \
        model: Optional[LdaModel] = None, truth: Optional[Key256] = None, \
        half_width: int = DEFAULT_HALF_WIDTH) -> ByteRecovery:
    """Recovers one byte; low bytes need the LDA model of their word."""
    rec = ByteRecovery(target.name, dependencies=tuple(target.dependencies))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        result = cpa_byte(ts, target, known)
    ranking = result.ranking
    if target.half == 'hi':
        value = ranking.best
    else:
        if model is None:
            raise InconsistentInputError('model', f'{target.name} needs an LDA model')
        rec.ghosts = result.ghosts.to_dict()
        rec.lda_bit, rec.lda_agreement = predict_lsb(model, ts)
        rec.lda_window = model.poi_window
        rec.ghost_consistent = result.ghosts.well_formed
        if rec.ghost_consistent:
            value = disambiguate(result.ghosts, rec.lda_bit)
        else:
            value = next(int(h) for h in ranking.ordering if (h & 1) == rec.lda_bit)
    rec.value = int(value)
    rec.peak = float(ranking.signed_peak[value])
    rec.sample = ts.names[int(ranking.best_sample[value])]
    if rec.peak <= 0:
        rec.error = f'no positive correlation peak for {target.name}'
    if truth is not None:
        expected = true_byte(truth, target)
        rec.correct = rec.value == expected
        poi = _window(int(ranking.best_sample[expected]), half_width, ts.n_samples)
        try:
            rec.mtd = mtd_curve(ts, target, expected, known, poi=poi).mtd
        except SnowScaError:
            rec.mtd = None
    return rec


def _verify_keystream(report: AttackReport, ts: TraceSet):
    key = report.key()
    for meta in ts.metadata:
        if meta.keystream is None:
            continue
        if keystream_output(initialize(key, meta.iv)) != meta.keystream:
            suspects = [f'{w} (via {", ".join(d)})' for w in KEY_WORDS \
                    for d in [report.dependencies(w)] if d]
            raise AttackIncompleteError(report, 'recovered key does not reproduce the ' \
                    f'recorded keystream; dependent words: {"; ".join(suspects) or "none"}')
        return


def _seeds(known: Optional[Dict[str, int]]) -> Dict[str, int]:
    """Canonical seeds: 'A[8]' holds a word, 'A[8].lo' a low byte."""
    seeds: Dict[str, int] = {}
    for name, value in (known or {}).items():
        word, _, half = str(name).partition('.')
        word = normalize_word(word)
        if half == 'lo':
            seeds[f'{word}.lo'] = int(value) & 0xFF
        elif not half:
            seeds[word] = int(value) & 0xFFFF
        else:
            raise InconsistentInputError('known', f'{name!r} is neither a word nor a low byte')
    return {k: v for k, v in seeds.items() if not (k.endswith('.lo') and k[:-3] in seeds)}


def incremental_recover(ts: TraceSet, profile: TraceSet, known: Optional[Dict[str, int]] = None, \
        half_width: int = DEFAULT_HALF_WIDTH, evaluate: bool = True) -> AttackReport:
    """Recovers all 16 key words of the first LFSR update.

    profile is a trace set with per-trace keys on the same sample map, used to train
    the LSB classifiers. Words and low bytes in known are taken as given and not
    attacked. When the attack set records a common key and evaluate is set, each
    byte also gets its MTD and a correctness flag.
    """
    if profile.names != ts.names:
        raise InconsistentInputError('names', 'attack and profiling sets have different sample maps')
    if ts.n_traces < 2:
        raise InconsistentInputError('n_traces', 'the attack needs at least 2 traces')
    if any(k is None for k in profile.keys):
        raise InconsistentInputError('keys', 'the profiling set needs the key of every trace')
    known = _seeds(known)
    truth = evaluation_key(ts) if evaluate else None
    report = AttackReport(dict((w, v) for w, v in known.items() if w in KEY_WORDS), [], \
            ts.n_traces, profile.n_traces, tuple(sorted(known)))
    models: Dict[str, LdaModel] = {}
    for target in attack_schedule():
        if target.word in report.words or target.name in known:
            continue
        try:
            if target.half == 'lo' and target.word not in models:
                with warnings.catch_warnings():
                    warnings.simplefilter('ignore', InsufficientTracesWarning)
                    models[target.word] = train_word_model(profile, target.word, half_width)
            rec = recover_byte(ts, target, known, models.get(target.word), truth, half_width)
        except SnowScaError as ex:
            report.bytes.append(ByteRecovery(target.name, dependencies=target.dependencies, \
                    error=ex.message))
            raise AttackIncompleteError(report, f'{target.name}: {ex.message}') from ex
        report.bytes.append(rec)
        if rec.error:
            raise AttackIncompleteError(report, rec.error)
        if target.half == 'lo':
            known[f'{target.word}.lo'] = rec.value
        else:
            known[target.word] = (rec.value << 8) | known.pop(f'{target.word}.lo')
            report.words[target.word] = known[target.word]
    _verify_keystream(report, ts)
    return report


def byte_mtds(report: AttackReport) -> Dict[str, Optional[int]]:
    """Per-byte MTD from an evaluated report."""
    return {b.target: b.mtd for b in report.bytes}


def recovered_fraction(report: AttackReport, key: Key256) -> float:
    """Share of correctly recovered words."""
    wrong = report.verify(key)
    got = [w for w in KEY_WORDS if w in report.words]
    return float(np.mean([w not in wrong for w in got])) if got else 0.0
