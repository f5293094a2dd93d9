"""Helper functions for snowsca."""
import os
from json import dumps
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidWordError

WORD_MASK = 0xFFFF

# Hamming weight of every 16-bit value.
HW16 = np.array([bin(i).count('1') for i in range(1 << 16)], dtype=np.uint8)

OUTPUT_DIR_ENV = 'SNOWSCA_OUTPUT_DIR'


def hamming_weight(value: int) -> int:
    """Returns the number of set bits of a non-negative integer."""
    return bin(value).count('1')


def check_word(value: object, width: int = 16) -> int:
    """Returns value if it is an unsigned integer of the given width."""
    if isinstance(value, (bool, np.bool_)) \
            or not isinstance(value, (int, np.integer)) \
            or not 0 <= int(value) < (1 << width):
        raise InvalidWordError(value, width)
    return int(value)


def parse_hex(text: str, n_bytes: int) -> bytes:
    """Parses a hex string of exactly n_bytes bytes (optional 0x prefix)."""
    if not isinstance(text, str):
        raise InvalidWordError(text, 8 * n_bytes, f'expected hex text, got {type(text).__name__}')
    clean = text.strip().lower()
    if clean.startswith('0x'):
        clean = clean[2:]
    if len(clean) != 2 * n_bytes:
        raise InvalidWordError(text, 8 * n_bytes, \
                f'expected {2 * n_bytes} hex digits, got {len(clean)}')
    try:
        return bytes.fromhex(clean)
    except ValueError as ex:
        raise InvalidWordError(text, 8 * n_bytes, f'invalid hex: {ex}') from ex


def words_from_bytes(data: bytes, n_words: int) -> Tuple[int, ...]:
    """Splits little-endian bytes into 16-bit words (byte 2i is the low byte of word i)."""
    if len(data) != 2 * n_words:
        raise InvalidWordError(data, 16 * n_words, \
                f'expected {2 * n_words} bytes, got {len(data)}')
    return tuple(data[2 * i] | (data[2 * i + 1] << 8) for i in range(n_words))


def words_to_bytes(words: Sequence[int]) -> bytes:
    """Inverse of words_from_bytes."""
    return b''.join(int(w).to_bytes(2, 'little') for w in words)


def output_dir(path: Optional[str] = None) -> str:
    """Returns the output directory: explicit path, then SNOWSCA_OUTPUT_DIR, then cwd."""
    return path or os.environ.get(OUTPUT_DIR_ENV) or os.curdir


def to_json_text(data: object) -> str:
    """Returns deterministic JSON text."""
    return dumps(data, indent=2, sort_keys=True) + '\n'


def read_file(filepath: str) -> Tuple[Optional[bytes], Optional[str]]:
    """ Reads requested file.
    """
    data = None
    error = None
    try:
        with open(filepath, 'rb') as fd: # pylint: disable=invalid-name
            data = fd.read()
    except IOError as ex:
        error = f"Reading file:{filepath[-100:]} error:{ex}"
    return (data, error)


def save_file(data: bytes, filepath: str) -> Union[None, str]:
    """ Writes data into specified file, creating missing directories.
    """
    error = None
    try:
        parent = os.path.dirname(filepath)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(filepath, 'wb') as fd: # pylint: disable=invalid-name
            fd.write(data)
    except (TypeError, IOError) as ex:
        error = f"Failed to write file:{filepath[-100:]}, error:{ex}"
    return error
