"""Bit-exact SNOW-V: field arithmetic, LFSR and FSM updates, initialization and keystream.

All state is immutable; every update returns a new value.
"""
from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import InvalidWordError, PhaseError
from .utils import WORD_MASK, check_word, parse_hex, words_from_bytes, words_to_bytes
from .utils_aes import BLOCK_BYTES, aes_enc_round, check_block

MUL_X_A = 0x990F
MUL_X_INV_A = 0xCC87
MUL_X_B = 0xC963
MUL_X_INV_B = 0xE4B1

SIGMA = (0, 4, 8, 12, 1, 5, 9, 13, 2, 6, 10, 14, 3, 7, 11, 15)

INIT_ROUNDS = 16
ZERO_BLOCK = bytes(BLOCK_BYTES)

Word16 = int
Block128 = bytes


def mul_x(v: Word16, c: Word16) -> Word16:
    """Multiplies v by alpha in GF(2^16) with reduction constant c."""
    shifted = (v << 1) & WORD_MASK
    return shifted ^ c if v & 0x8000 else shifted


def mul_x_inv(v: Word16, d: Word16, ops: Optional[List[tuple]] = None) -> Word16:
    """Multiplies v by alpha^-1 with reduction constant d.

    This is the branching form: the XOR with d only runs when the LSB of v is set.
    When ops is given, every executed operation is appended to it.
    """
    res = v >> 1
    if ops is not None:
        ops.append(('shr', res))
    if v & 1:
        res ^= d
        if ops is not None:
            ops.append(('xor', res))
    return res


def sigma_permute(x: Block128) -> Block128:
    """Byte permutation of a block: output byte i is input byte SIGMA[i]."""
    x = check_block(x)
    return bytes(x[s] for s in SIGMA)


def add32x4(x: Block128, y: Block128) -> Block128:
    """Lane-wise addition modulo 2^32 of the four little-endian 32-bit lanes."""
    x = check_block(x)
    y = check_block(y)
    out = b''
    for lane in range(4):
        xs = int.from_bytes(x[4 * lane:4 * lane + 4], 'little')
        ys = int.from_bytes(y[4 * lane:4 * lane + 4], 'little')
        out += ((xs + ys) & 0xFFFFFFFF).to_bytes(4, 'little')
    return out


def xor_blocks(x: Block128, y: Block128) -> Block128:
    """Returns x XOR y."""
    return bytes(i ^ j for i, j in zip(check_block(x), check_block(y)))


def _checked_words(words: Sequence[int], count: int, what: str) -> Tuple[int, ...]:
    words = tuple(words)
    if len(words) != count:
        raise InvalidWordError(words, 16, f'{what} needs {count} words, got {len(words)}')
    return tuple(check_word(w) for w in words)


@dataclass(frozen=True)
class Key256:
    """256-bit key as words k_0..k_15."""

    words: Tuple[Word16, ...]

    def __post_init__(self):
        object.__setattr__(self, 'words', _checked_words(self.words, 16, 'Key256'))

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Key256':
        """Byte 2i is the low byte of k_i."""
        return cls(words_from_bytes(bytes(data), 16))

    @classmethod
    def from_hex(cls, text: str) -> 'Key256':
        """Parses 64 hex digits in byte order."""
        return cls.from_bytes(parse_hex(text, 32))

    def to_bytes(self) -> bytes:
        """Returns the little-endian byte form."""
        return words_to_bytes(self.words)

    def hex(self) -> str:
        """Returns the byte form as hex."""
        return self.to_bytes().hex()

    @property
    def low_half(self) -> Block128:
        """k_0..k_7 as a block."""
        return self.to_bytes()[:BLOCK_BYTES]

    @property
    def high_half(self) -> Block128:
        """k_8..k_15 as a block."""
        return self.to_bytes()[BLOCK_BYTES:]


@dataclass(frozen=True)
class Iv128:
    """128-bit IV as words iv_0..iv_7."""

    words: Tuple[Word16, ...]

    def __post_init__(self):
        object.__setattr__(self, 'words', _checked_words(self.words, 8, 'Iv128'))

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Iv128':
        """Byte 2i is the low byte of iv_i."""
        return cls(words_from_bytes(bytes(data), 8))

    @classmethod
    def from_hex(cls, text: str) -> 'Iv128':
        """Parses 32 hex digits in byte order."""
        return cls.from_bytes(parse_hex(text, 16))

    def to_bytes(self) -> bytes:
        """Returns the little-endian byte form."""
        return words_to_bytes(self.words)

    def hex(self) -> str:
        """Returns the byte form as hex."""
        return self.to_bytes().hex()


@dataclass(frozen=True)
class LfsrState:
    """Cells a_0..a_15 of LFSR-A and b_0..b_15 of LFSR-B."""

    a: Tuple[Word16, ...]
    b: Tuple[Word16, ...]

    def __post_init__(self):
        object.__setattr__(self, 'a', _checked_words(self.a, 16, 'LFSR-A'))
        object.__setattr__(self, 'b', _checked_words(self.b, 16, 'LFSR-B'))

    @classmethod
    def zero(cls) -> 'LfsrState':
        """Returns the all-zero state."""
        return cls((0,) * 16, (0,) * 16)

    def __xor__(self, other: 'LfsrState') -> 'LfsrState':
        return LfsrState(tuple(x ^ y for x, y in zip(self.a, other.a)), \
                tuple(x ^ y for x, y in zip(self.b, other.b)))

    @property
    def t1(self) -> Block128:
        """(b_15, .., b_8) as a block, b_8 in the lowest bytes."""
        return words_to_bytes(self.b[8:])

    @property
    def t2(self) -> Block128:
        """(a_7, .., a_0) as a block, a_0 in the lowest bytes."""
        return words_to_bytes(self.a[:8])

    def mix_into_a(self, z: Block128) -> 'LfsrState':
        """XORs the 8 words of z into a_8..a_15."""
        zw = words_from_bytes(check_block(z), 8)
        return LfsrState(self.a[:8] + tuple(x ^ y for x, y in zip(self.a[8:], zw)), self.b)


@dataclass(frozen=True)
class FsmState:
    """FSM registers R1, R2 and R3."""

    r1: Block128 = ZERO_BLOCK
    r2: Block128 = ZERO_BLOCK
    r3: Block128 = ZERO_BLOCK

    def __post_init__(self):
        for name in ('r1', 'r2', 'r3'):
            object.__setattr__(self, name, check_block(getattr(self, name)))


@unique
class Phase(Enum):
    """Cipher life-cycle."""

    UNINITIALIZED = 0
    INITIALIZING = 1
    KEYSTREAM = 2

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class CipherState:
    """Complete cipher state; round counts completed initialization rounds."""

    lfsr: LfsrState = field(default_factory=LfsrState.zero)
    fsm: FsmState = field(default_factory=FsmState)
    phase: Phase = Phase.UNINITIALIZED
    round: int = 0


class Intermediate(NamedTuple):
    """Values of one LFSR sub-iteration; a_lsb/b_lsb are the LSBs fed to mul_x_inv."""

    index: int
    u: Word16
    v: Word16
    a_lsb: int
    b_lsb: int


MulInv = Callable[..., Word16]
LfsrStep = Callable[[LfsrState, Optional[list]], LfsrState]


def clock_terms(state: LfsrState, i: int, mul_inv: MulInv = mul_x_inv) -> Tuple[Word16, Word16]:
    """Returns (u_i, v_i) of sub-iteration i; both only read the pre-update state."""
    a, b = state.a, state.b
    u = mul_x(a[i], MUL_X_A) ^ a[i + 1] ^ mul_inv(a[i + 8], MUL_X_INV_A) ^ b[i]
    v = mul_x(b[i], MUL_X_B) ^ b[i + 3] ^ mul_inv(b[i + 8], MUL_X_INV_B) ^ a[i]
    return u, v


def shift_in(state: LfsrState, us: Sequence[Word16], vs: Sequence[Word16]) -> LfsrState:
    """Shifts both registers down by 8 and stores the new words in cells 8..15."""
    return LfsrState(state.a[8:] + tuple(us), state.b[8:] + tuple(vs))


def lfsr_update(state: LfsrState, record: Optional[list] = None, \
        mul_inv: MulInv = mul_x_inv) -> LfsrState:
    """Clocks both LFSRs eight times.

    When record is given, one Intermediate per sub-iteration is appended to it.
    """
    us, vs = [], []
    for i in range(8):
        u, v = clock_terms(state, i, mul_inv)
        us.append(u)
        vs.append(v)
        if record is not None:
            record.append(Intermediate(i, u, v, state.a[i + 8] & 1, state.b[i + 8] & 1))
    return shift_in(state, us, vs)


def fsm_update(fsm: FsmState, t2: Block128) -> FsmState:
    """Returns the next FSM state given T2."""
    tmp = add32x4(fsm.r2, xor_blocks(fsm.r3, t2))
    return FsmState(r1=sigma_permute(tmp), \
            r2=aes_enc_round(fsm.r1, ZERO_BLOCK), \
            r3=aes_enc_round(fsm.r2, ZERO_BLOCK))


def keystream_output(state: CipherState) -> Block128:
    """Returns z = (R1 + T1) XOR R2 for the current state."""
    if state.phase == Phase.UNINITIALIZED:
        raise PhaseError(state.phase, 'keystream_output')
    return xor_blocks(add32x4(state.fsm.r1, state.lfsr.t1), state.fsm.r2)


def load_state(key: Key256, iv: Iv128) -> CipherState:
    """Loads key and IV into the LFSRs and clears the FSM (round 0)."""
    lfsr = LfsrState(tuple(iv.words) + tuple(key.words[:8]), \
            (0,) * 8 + tuple(key.words[8:]))
    return CipherState(lfsr, FsmState(), Phase.INITIALIZING, 0)


def init_round(state: CipherState, key: Key256, lfsr_step: Optional[LfsrStep] = None, \
        record: Optional[list] = None) -> CipherState:
    """Runs one initialization round; lfsr_step replaces the reference LFSR update."""
    if state.phase != Phase.INITIALIZING:
        raise PhaseError(state.phase, 'init_round')
    step = lfsr_step or lfsr_update
    z = keystream_output(state)
    fsm = fsm_update(state.fsm, state.lfsr.t2)
    lfsr = step(state.lfsr, record).mix_into_a(z)
    rnd = state.round + 1
    if rnd == INIT_ROUNDS - 1:
        fsm = FsmState(xor_blocks(fsm.r1, key.low_half), fsm.r2, fsm.r3)
    elif rnd == INIT_ROUNDS:
        fsm = FsmState(xor_blocks(fsm.r1, key.high_half), fsm.r2, fsm.r3)
    phase = Phase.KEYSTREAM if rnd == INIT_ROUNDS else Phase.INITIALIZING
    return CipherState(lfsr, fsm, phase, rnd)


def initialize(key: Key256, iv: Iv128, lfsr_step: Optional[LfsrStep] = None) -> CipherState:
    """Returns the state after loading and all 16 initialization rounds."""
    state = load_state(key, iv)
    while state.phase == Phase.INITIALIZING:
        state = init_round(state, key, lfsr_step)
    return state


def next_block(state: CipherState, \
        lfsr_step: Optional[LfsrStep] = None) -> Tuple[Block128, CipherState]:
    """Returns the next keystream block and the advanced state."""
    if state.phase != Phase.KEYSTREAM:
        raise PhaseError(state.phase, 'next_block')
    z = keystream_output(state)
    fsm = fsm_update(state.fsm, state.lfsr.t2)
    lfsr = (lfsr_step or lfsr_update)(state.lfsr, None)
    return z, CipherState(lfsr, fsm, Phase.KEYSTREAM, state.round)


def keystream(key: Key256, iv: Iv128, n_blocks: int) -> List[Block128]:
    """Returns the first n_blocks keystream blocks."""
    state = initialize(key, iv)
    blocks = []
    for _ in range(n_blocks):
        z, state = next_block(state)
        blocks.append(z)
    return blocks


def xor_crypt(key: Key256, iv: Iv128, message: bytes) -> bytes:
    """Encrypts or decrypts message with the keystream for (key, iv)."""
    message = bytes(message)
    n_blocks = -(-len(message) // BLOCK_BYTES)
    stream = b''.join(keystream(key, iv, n_blocks))
    return bytes(m ^ z for m, z in zip(message, stream))
