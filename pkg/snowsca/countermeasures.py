"""Protected variants of the LFSR update.

Every variant returns the same next state as snowv.lfsr_update; they differ in the
intermediates they expose to the leakage hook.
"""
import secrets
from dataclasses import dataclass
from enum import Enum, unique
from itertools import permutations
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import InconsistentInputError, InvalidShuffleOrderError, RandomnessExhaustedError
from .snowv import (MUL_X_A, MUL_X_B, MUL_X_INV_A, MUL_X_INV_B, Intermediate, LfsrState,
        LfsrStep, Word16, clock_terms, lfsr_update, mul_x, mul_x_inv, shift_in)
from .utils import WORD_MASK, check_word

SHUFFLED_HEAD = 5


@unique
class Variant(Enum):
    """Implementation variants of the attacked LFSR update."""

    REFERENCE = 'reference'
    CONSTANT_TIME = 'constant_time'
    MASKED = 'masked'
    SHUFFLED = 'shuffled'

    @classmethod
    def names(cls) -> List[str]:
        """Returns known variant values."""
        return [e.value for e in cls]

    @classmethod
    def parse(cls, value: object) -> 'Variant':
        """Accepts a Variant or its value/name."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            pass
        try:
            return cls[str(value).upper()]
        except KeyError as ex:
            raise InconsistentInputError('variant', \
                    f'unknown variant {value!r}, supported: {cls.names()}') from ex

    def __str__(self) -> str:
        return self.value


def mul_x_inv_ct(v: Word16, d: Word16, ops: Optional[List[tuple]] = None) -> Word16:
    """Branch-free multiplication by alpha^-1.

    The same four operations run for every input; only their operands differ.
    """
    shifted = v >> 1
    mask = -(v & 1) & WORD_MASK
    masked_d = d & mask
    res = shifted ^ masked_d
    if ops is not None:
        ops.extend((('shr', shifted), ('neg', mask), ('and', masked_d), ('xor', res)))
    return res


def constant_time_lfsr_update(state: LfsrState, record: Optional[list] = None) -> LfsrState:
    """lfsr_update with the branch-free mul_x_inv."""
    return lfsr_update(state, record, mul_inv=mul_x_inv_ct)


@dataclass(frozen=True)
class MaskedWord16:
    """Two-share form of a word: value = share1 ^ share2."""

    share1: Word16
    share2: Word16

    def __post_init__(self):
        check_word(self.share1)
        check_word(self.share2)

    @classmethod
    def mask(cls, value: Word16, r: Word16) -> 'MaskedWord16':
        """Splits value with mask r."""
        return cls(check_word(value) ^ check_word(r), r)

    @property
    def value(self) -> Word16:
        """Recombined value."""
        return self.share1 ^ self.share2


class MaskedIntermediate(NamedTuple):
    """Shares of one masked sub-iteration; u_masked = u ^ mask, v_masked = v ^ mask."""

    index: int
    u_masked: Word16
    v_masked: Word16
    mask: Word16
    a_lsb: int
    b_lsb: int


def mask_stream(rng: Optional[np.random.Generator] = None) -> Iterator[Word16]:
    """Yields fresh 16-bit masks from rng, or from the OS entropy source when rng is None."""
    while True:
        if rng is None:
            yield secrets.randbits(16)
        else:
            yield int(rng.integers(0, 1 << 16))


def _masked_sum(r: Word16, terms: Sequence[Word16]) -> MaskedWord16:
    # The running value always carries r; the plain sum never appears.
    acc = r
    for term in terms:
        acc ^= term
    return MaskedWord16(acc, r)


def masked_lfsr_update(state: LfsrState, randomness: Iterable[int], \
        record: Optional[list] = None) -> LfsrState:
    """lfsr_update with u_i and v_i computed in two shares.

    One fresh mask per sub-iteration is shared by u_i and v_i. Shares are recombined
    only when stored back into the register.
    """
    stream = iter(randomness)
    a, b = state.a, state.b
    us, vs = [], []
    for i in range(8):
        try:
            r = check_word(next(stream))
        except StopIteration as ex:
            raise RandomnessExhaustedError(i) from ex
        u = _masked_sum(r, (mul_x(a[i], MUL_X_A), a[i + 1], mul_x_inv(a[i + 8], MUL_X_INV_A), b[i]))
        v = _masked_sum(r, (mul_x(b[i], MUL_X_B), b[i + 3], mul_x_inv(b[i + 8], MUL_X_INV_B), a[i]))
        if record is not None:
            record.append(MaskedIntermediate(i, u.share1, v.share1, r, a[i + 8] & 1, b[i + 8] & 1))
        us.append(u.value)
        vs.append(v.value)
    return shift_in(state, us, vs)


@dataclass(frozen=True)
class ShuffleOrder:
    """Execution order: a permutation of the first five sub-iterations, then 5, 6, 7."""

    head: Tuple[int, ...] = tuple(range(SHUFFLED_HEAD))

    def __post_init__(self):
        head = tuple(int(i) for i in self.head)
        if sorted(head) != list(range(SHUFFLED_HEAD)):
            raise InvalidShuffleOrderError(head)
        object.__setattr__(self, 'head', head)

    @classmethod
    def from_sequence(cls, order: Sequence[int]) -> 'ShuffleOrder':
        """Accepts a five-element head or the full eight-element order."""
        order = tuple(int(i) for i in order)
        if len(order) == 8:
            if order[SHUFFLED_HEAD:] != (5, 6, 7):
                raise InvalidShuffleOrderError(order)
            order = order[:SHUFFLED_HEAD]
        if len(order) != SHUFFLED_HEAD:
            raise InvalidShuffleOrderError(order)
        return cls(order)

    @classmethod
    def random(cls, rng: np.random.Generator) -> 'ShuffleOrder':
        """Draws a uniform order."""
        return cls(tuple(int(i) for i in rng.permutation(SHUFFLED_HEAD)))

    @classmethod
    def all_orders(cls) -> List['ShuffleOrder']:
        """Returns all 120 orders."""
        return [cls(p) for p in permutations(range(SHUFFLED_HEAD))]

    @property
    def indices(self) -> Tuple[int, ...]:
        """Full execution order."""
        return self.head + (5, 6, 7)


def shuffled_lfsr_update(state: LfsrState, order: object, \
        record: Optional[list] = None) -> LfsrState:
    """lfsr_update running the independent sub-iterations in the given order.

    Intermediates are recorded in executed order, each tagged with its original index.
    """
    if not isinstance(order, ShuffleOrder):
        order = ShuffleOrder.from_sequence(order)
    us: List[Optional[int]] = [None] * 8
    vs: List[Optional[int]] = [None] * 8
    for i in order.indices:
        u, v = clock_terms(state, i)
        us[i], vs[i] = u, v
        if record is not None:
            record.append(Intermediate(i, u, v, state.a[i + 8] & 1, state.b[i + 8] & 1))
    return shift_in(state, us, vs)


def variant_step(variant: Variant, rng: Optional[np.random.Generator] = None, \
        deterministic_masks: bool = True) -> LfsrStep:
    """Returns the LFSR update callable for variant.

    Masks and shuffle orders are drawn from rng; masks come from the OS entropy
    source instead when deterministic_masks is False.
    """
    variant = Variant.parse(variant)
    if variant == Variant.REFERENCE:
        return lfsr_update
    if variant == Variant.CONSTANT_TIME:
        return constant_time_lfsr_update
    if variant == Variant.MASKED:
        masks = mask_stream(rng if deterministic_masks else None)

        def masked_step(state: LfsrState, record: Optional[list] = None) -> LfsrState:
            return masked_lfsr_update(state, masks, record)
        return masked_step

    rng = rng if rng is not None else np.random.default_rng()

    def shuffled_step(state: LfsrState, record: Optional[list] = None) -> LfsrState:
        return shuffled_lfsr_update(state, ShuffleOrder.random(rng), record)
    return shuffled_step
