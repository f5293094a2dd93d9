"""Independent SNOW-V oracle for the tests.

Transcribed in the in-place, 32-bit lane style of the C reference code and sharing
nothing with the package: its own table-driven AES round, its own shifting LFSR.
"""
# pylint: disable=invalid-name

SBOX = (
    99, 124, 119, 123, 242, 107, 111, 197, 48, 1, 103, 43, 254, 215, 171, 118,
    202, 130, 201, 125, 250, 89, 71, 240, 173, 212, 162, 175, 156, 164, 114, 192,
    183, 253, 147, 38, 54, 63, 247, 204, 52, 165, 229, 241, 113, 216, 49, 21,
    4, 199, 35, 195, 24, 150, 5, 154, 7, 18, 128, 226, 235, 39, 178, 117,
    9, 131, 44, 26, 27, 110, 90, 160, 82, 59, 214, 179, 41, 227, 47, 132,
    83, 209, 0, 237, 32, 252, 177, 91, 106, 203, 190, 57, 74, 76, 88, 207,
    208, 239, 170, 251, 67, 77, 51, 133, 69, 249, 2, 127, 80, 60, 159, 168,
    81, 163, 64, 143, 146, 157, 56, 245, 188, 182, 218, 33, 16, 255, 243, 210,
    205, 12, 19, 236, 95, 151, 68, 23, 196, 167, 126, 61, 100, 93, 25, 115,
    96, 129, 79, 220, 34, 42, 144, 136, 70, 238, 184, 20, 222, 94, 11, 219,
    224, 50, 58, 10, 73, 6, 36, 92, 194, 211, 172, 98, 145, 149, 228, 121,
    231, 200, 55, 109, 141, 213, 78, 169, 108, 86, 244, 234, 101, 122, 174, 8,
    186, 120, 37, 46, 28, 166, 180, 198, 232, 221, 116, 31, 75, 189, 139, 138,
    112, 62, 181, 102, 72, 3, 246, 14, 97, 53, 87, 185, 134, 193, 29, 158,
    225, 248, 152, 17, 105, 217, 142, 148, 155, 30, 135, 233, 206, 85, 40, 223,
    140, 161, 137, 13, 191, 230, 66, 104, 65, 153, 45, 15, 176, 84, 187, 22)

SIGMA = (0, 4, 8, 12, 1, 5, 9, 13, 2, 6, 10, 14, 3, 7, 11, 15)

M32 = 0xFFFFFFFF


def u16(hi, lo):
    return ((hi & 0xFF) << 8) | (lo & 0xFF)


def u32(hi16, lo16):
    return ((hi16 & 0xFFFF) << 16) | (lo16 & 0xFFFF)


def rotl32(w, n):
    return ((w << n) | (w >> (32 - n))) & M32


def lanes(block):
    return [int.from_bytes(bytes(block[4 * i:4 * i + 4]), 'little') for i in range(4)]


def unlanes(words):
    return b''.join(w.to_bytes(4, 'little') for w in words)


def aes_round_lanes(state, round_key):
    """Table-driven AES round on four little-endian 32-bit columns."""
    def sb(index, offset):
        index %= 16
        return SBOX[(state[index // 4] >> ((index % 4) * 8)) & 0xFF] << offset

    result = []
    for j in range(4):
        w = sb(4 * j, 24) | sb(4 * j + 5, 0) | sb(4 * j + 10, 8) | sb(4 * j + 15, 16)
        t = rotl32(w, 16) ^ ((w << 1) & 0xFEFEFEFE) ^ (((w >> 7) & 0x01010101) * 0x1B)
        result.append(round_key[j] ^ w ^ t ^ rotl32(t, 8))
    return result


def aes_round(block, key):
    """Block-level wrapper of aes_round_lanes."""
    return unlanes(aes_round_lanes(lanes(block), lanes(key)))


def mul_x(v, c):
    return (((v << 1) & 0xFFFF) ^ c) if v & 0x8000 else (v << 1) & 0xFFFF


def mul_x_inv(v, d):
    return ((v >> 1) ^ d) if v & 1 else v >> 1


class SnowV:
    """Mutable SNOW-V instance."""

    def __init__(self):
        self.A = [0] * 16
        self.B = [0] * 16
        self.R1 = [0] * 4
        self.R2 = [0] * 4
        self.R3 = [0] * 4

    def lfsr_update(self):
        A, B = self.A, self.B
        for _ in range(8):
            u = mul_x(A[0], 0x990F) ^ A[1] ^ mul_x_inv(A[8], 0xCC87) ^ B[0]
            v = mul_x(B[0], 0xC963) ^ B[3] ^ mul_x_inv(B[8], 0xE4B1) ^ A[0]
            for j in range(15):
                A[j] = A[j + 1]
                B[j] = B[j + 1]
            A[15] = u
            B[15] = v

    def permute_sigma(self, state):
        tmp = [(state[SIGMA[i] >> 2] >> ((SIGMA[i] & 3) << 3)) & 0xFF for i in range(16)]
        for i in range(4):
            state[i] = u32(u16(tmp[4 * i + 3], tmp[4 * i + 2]), u16(tmp[4 * i + 1], tmp[4 * i]))

    def fsm_update(self):
        r1temp = list(self.R1)
        for i in range(4):
            t2 = u32(self.A[2 * i + 1], self.A[2 * i])
            self.R1[i] = ((t2 ^ self.R3[i]) + self.R2[i]) & M32
        self.permute_sigma(self.R1)
        self.R3 = aes_round_lanes(self.R2, [0] * 4)
        self.R2 = aes_round_lanes(r1temp, [0] * 4)

    def keystream(self):
        z = b''
        for i in range(4):
            t1 = u32(self.B[2 * i + 9], self.B[2 * i + 8])
            z += (((t1 + self.R1[i]) & M32) ^ self.R2[i]).to_bytes(4, 'little')
        self.fsm_update()
        self.lfsr_update()
        return z

    def keyiv_setup(self, key, iv):
        key = bytes(key)
        iv = bytes(iv)
        for i in range(8):
            self.A[i] = u16(iv[2 * i + 1], iv[2 * i])
            self.A[i + 8] = u16(key[2 * i + 1], key[2 * i])
            self.B[i] = 0
            self.B[i + 8] = u16(key[2 * i + 17], key[2 * i + 16])
        self.R1 = [0] * 4
        self.R2 = [0] * 4
        self.R3 = [0] * 4
        for i in range(16):
            z = self.keystream()
            for j in range(8):
                self.A[j + 8] ^= u16(z[2 * j + 1], z[2 * j])
            if i == 14:
                for j in range(4):
                    self.R1[j] ^= int.from_bytes(key[4 * j:4 * j + 4], 'little')
            if i == 15:
                for j in range(4):
                    self.R1[j] ^= int.from_bytes(key[4 * j + 16:4 * j + 20], 'little')


def reference_keystream(key, iv, n_blocks):
    """Returns n_blocks keystream blocks for byte-string key and iv."""
    cipher = SnowV()
    cipher.keyiv_setup(key, iv)
    return [cipher.keystream() for _ in range(n_blocks)]


def reference_fsm_update(r1, r2, r3, t2):
    """Returns (R1', R2', R3') for blocks; t2 is written into A[0..7]."""
    cipher = SnowV()
    cipher.R1, cipher.R2, cipher.R3 = lanes(r1), lanes(r2), lanes(r3)
    for i in range(8):
        cipher.A[i] = u16(t2[2 * i + 1], t2[2 * i])
    cipher.fsm_update()
    return unlanes(cipher.R1), unlanes(cipher.R2), unlanes(cipher.R3)


def reference_lfsr_update(a, b):
    """Returns the (a, b) word lists after one lfsr_update."""
    cipher = SnowV()
    cipher.A, cipher.B = list(a), list(b)
    cipher.lfsr_update()
    return cipher.A, cipher.B
