"""Binary arithmetic coder with 32-bit integer registers.

Carries are resolved by counting pending (straddle) bits rather than
propagating into already-written output. Probabilities enter as the
16-bit quantized probability of a zero bit, clamped to [1, 2**16 - 1].

The kernels keep their registers in small int64 arrays so that the model
loops in `ctw` and `lzdict` can drive them from inside compiled code:

    encoder state: [low, high, pending, bits_written]
    decoder state: [low, high, value, bits_read, shifts]
"""

import numba
import numpy as np

PROB_BITS = 16
PROB_ONE = 1 << PROB_BITS
P_FLOOR = 1.0 / PROB_ONE

_TOP = (1 << 32) - 1
_HALF = 1 << 31
_QUARTER = 1 << 30
_THREE_QUARTERS = 3 * _QUARTER

# renormalization emits at most 17 bits per coded symbol at the probability floor
MAX_BITS_PER_SYMBOL = 17


def output_capacity(n_symbols: int) -> int:
    return (MAX_BITS_PER_SYMBOL * n_symbols + 64) // 8 + 8


@numba.njit(cache=True, inline="always")
def quantize(p0):
    q = np.int64(p0 * PROB_ONE + 0.5)
    if q < 1:
        q = 1
    elif q > PROB_ONE - 1:
        q = PROB_ONE - 1
    return q


@numba.njit(cache=True, inline="always")
def _put_bit(state, out, bit):
    n = state[3]
    if bit:
        out[n >> 3] |= np.uint8(0x80 >> (n & 7))
    state[3] = n + 1


@numba.njit(cache=True, inline="always")
def _put_with_pending(state, out, bit):
    _put_bit(state, out, bit)
    while state[2] > 0:
        _put_bit(state, out, 1 - bit)
        state[2] -= 1


@numba.njit(cache=True)
def enc_init():
    state = np.zeros(4, dtype=np.int64)
    state[1] = _TOP
    return state


@numba.njit(cache=True)
def enc_bit(state, out, bit, q0):
    low = state[0]
    high = state[1]
    split = low + (((high - low + 1) * q0) >> PROB_BITS) - 1
    if bit == 0:
        high = split
    else:
        low = split + 1
    while True:
        if high < _HALF:
            _put_with_pending(state, out, 0)
        elif low >= _HALF:
            _put_with_pending(state, out, 1)
            low -= _HALF
            high -= _HALF
        elif low >= _QUARTER and high < _THREE_QUARTERS:
            state[2] += 1
            low -= _QUARTER
            high -= _QUARTER
        else:
            break
        low = 2 * low
        high = 2 * high + 1
    state[0] = low
    state[1] = high


@numba.njit(cache=True)
def enc_finish(state, out):
    """Flush two disambiguating bits; return the payload size in bytes."""
    state[2] += 1
    if state[0] < _QUARTER:
        _put_with_pending(state, out, 0)
    else:
        _put_with_pending(state, out, 1)
    return (state[3] + 7) >> 3


@numba.njit(cache=True, inline="always")
def _get_bit(state, payload):
    n = state[3]
    state[3] = n + 1
    if (n >> 3) < payload.shape[0]:
        return (payload[n >> 3] >> (7 - (n & 7))) & 1
    return 0


@numba.njit(cache=True)
def dec_init(payload):
    state = np.zeros(5, dtype=np.int64)
    state[1] = _TOP
    value = 0
    for _ in range(32):
        value = 2 * value + _get_bit(state, payload)
    state[2] = value
    return state


@numba.njit(cache=True)
def dec_bit(state, payload, q0):
    low = state[0]
    high = state[1]
    value = state[2]
    split = low + (((high - low + 1) * q0) >> PROB_BITS) - 1
    if value <= split:
        bit = 0
        high = split
    else:
        bit = 1
        low = split + 1
    while True:
        if high < _HALF:
            pass
        elif low >= _HALF:
            low -= _HALF
            high -= _HALF
            value -= _HALF
        elif low >= _QUARTER and high < _THREE_QUARTERS:
            low -= _QUARTER
            high -= _QUARTER
            value -= _QUARTER
        else:
            break
        low = 2 * low
        high = 2 * high + 1
        value = 2 * value + _get_bit(state, payload)
        state[4] += 1
    state[0] = low
    state[1] = high
    state[2] = value
    return bit


@numba.njit(cache=True)
def dec_consistent_end(state, n_payload):
    """True when the payload holds exactly the bits the encoder flushed."""
    needed = state[4] + 2
    return (needed + 7) >> 3 == n_payload


@numba.njit(cache=True)
def _encode_fixed(bits, q0s, out):
    state = enc_init()
    for i in range(bits.shape[0]):
        enc_bit(state, out, bits[i], q0s[i])
    return enc_finish(state, out)


@numba.njit(cache=True)
def _decode_fixed(payload, q0s, bits):
    state = dec_init(payload)
    for i in range(bits.shape[0]):
        bits[i] = dec_bit(state, payload, q0s[i])
    return dec_consistent_end(state, payload.shape[0])


def encode_bits(bits, q0s) -> bytes:
    """Code `bits` under externally supplied quantized P(0) values."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    q0s = np.ascontiguousarray(q0s, dtype=np.int64)
    if bits.shape[0] == 0:
        return b""
    out = np.zeros(output_capacity(bits.shape[0]), dtype=np.uint8)
    n = _encode_fixed(bits, q0s, out)
    return out[:n].tobytes()


def decode_bits(payload: bytes, q0s) -> tuple[np.ndarray, bool]:
    """Inverse of `encode_bits`; also reports whether the payload length checks out."""
    q0s = np.ascontiguousarray(q0s, dtype=np.int64)
    bits = np.zeros(q0s.shape[0], dtype=np.uint8)
    if q0s.shape[0] == 0:
        return bits, len(payload) == 0
    ok = _decode_fixed(np.frombuffer(payload, dtype=np.uint8), q0s, bits)
    return bits, bool(ok)
