"""Helper functions for the AES round used by the SNOW-V FSM."""
from typing import List, Sequence, Tuple

from .errors import InvalidWordError

BLOCK_BYTES = 16
AES_POLY = 0x11B


def xtime(byte: int) -> int:
    """Returns byte multiplied by x in GF(2^8)."""
    byte <<= 1
    return (byte ^ AES_POLY) if byte & 0x100 else byte


def gmul(a: int, b: int) -> int:
    """Returns a * b in GF(2^8) modulo the AES polynomial."""
    prod = 0
    while b:
        if b & 1:
            prod ^= a
        a = xtime(a)
        b >>= 1
    return prod


def _rotl8(byte: int, shift: int) -> int:
    return ((byte << shift) | (byte >> (8 - shift))) & 0xFF


def _make_sbox() -> Tuple[int, ...]:
    """Builds the S-box: multiplicative inverse followed by the affine map."""
    sbox = []
    for x in range(256):
        inv = 0
        if x:
            # x^254 is the inverse in GF(2^8)
            inv, base, exp = 1, x, 254
            while exp:
                if exp & 1:
                    inv = gmul(inv, base)
                base = gmul(base, base)
                exp >>= 1
        sbox.append(inv ^ _rotl8(inv, 1) ^ _rotl8(inv, 2) ^ _rotl8(inv, 3) ^ _rotl8(inv, 4) ^ 0x63)
    return tuple(sbox)


SBOX = _make_sbox()


def check_block(block: Sequence[int]) -> bytes:
    """Returns block as bytes, rejecting anything but 16 bytes."""
    data = bytes(block)
    if len(data) != BLOCK_BYTES:
        raise InvalidWordError(block, 128, f'a block is {BLOCK_BYTES} bytes, got {len(data)}')
    return data


def sub_bytes(state: Sequence[int]) -> List[int]:
    """SubBytes."""
    return [SBOX[b] for b in state]


def shift_rows(state: Sequence[int]) -> List[int]:
    """ShiftRows; byte i sits at row i % 4 of column i // 4."""
    return [state[(i + 4 * (i % 4)) % BLOCK_BYTES] for i in range(BLOCK_BYTES)]


def mix_columns(state: Sequence[int]) -> List[int]:
    """MixColumns."""
    out = []
    for col in range(4):
        a = state[4 * col:4 * col + 4]
        for row in range(4):
            out.append(xtime(a[row]) ^ xtime(a[(row + 1) % 4]) ^ a[(row + 1) % 4] \
                    ^ a[(row + 2) % 4] ^ a[(row + 3) % 4])
    return out


def aes_enc_round(state: Sequence[int], round_key: Sequence[int]) -> bytes:
    """Returns one AES encryption round of state under round_key."""
    state = check_block(state)
    round_key = check_block(round_key)
    mixed = mix_columns(shift_rows(sub_bytes(state)))
    return bytes(m ^ k for m, k in zip(mixed, round_key))
