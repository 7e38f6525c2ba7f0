"""LZ77 with a preset dictionary.

The memory's most recent `window_size` bytes are placed in front of the
input, so the parser can point into them exactly as it points into input
it has already coded. Parsing is greedy longest-match over a 3-byte hash
chain. Tokens are flattened to bits

    literal: 0, byte (8 bits)
    match:   1, offset - 1 (16 bits), length - 3 (8 bits)

and coded with the adaptive order-0 binary model (a depth-0 context tree).
"""

from __future__ import annotations

from typing import NamedTuple, Union

import numba
import numpy as np

from netmemo import arith
from netmemo.ctw import _predict, _update
from netmemo.errors import CorruptStreamError, SyncError, UsageError
from netmemo.stream import ALGO_LZ, CodedStream, fingerprint

DEFAULT_WINDOW = 32768
MIN_WINDOW = 256
MAX_WINDOW = 65536
MIN_MATCH = 3
MAX_MATCH = 258
MAX_CHAIN = 4096

LITERAL_BITS = 9
MATCH_BITS = 25

_HASH_BITS = 15


class Literal(NamedTuple):
    byte: int


class Match(NamedTuple):
    offset: int
    length: int


LzToken = Union[Literal, Match]


def check_window(window_size: int) -> int:
    if not MIN_WINDOW <= window_size <= MAX_WINDOW or window_size % 256:
        raise UsageError(
            f"window_size must be a multiple of 256 in [{MIN_WINDOW}, {MAX_WINDOW}], got {window_size}"
        )
    return int(window_size)


@numba.njit(cache=True, inline="always")
def _hash3(buf, i):
    return ((buf[i] << 10) ^ (buf[i + 1] << 5) ^ buf[i + 2]) & ((1 << _HASH_BITS) - 1)


@numba.njit(cache=True)
def _parse_kernel(buf, start, window, max_chain, kind, offs, lens):
    n = buf.shape[0]
    head = np.full(1 << _HASH_BITS, -1, dtype=np.int64)
    prev = np.full(n, -1, dtype=np.int64)
    for i in range(min(start, n - 2)):
        h = _hash3(buf, i)
        prev[i] = head[h]
        head[h] = i
    ntok = 0
    p = start
    while p < n:
        best_len = 0
        best_off = 0
        if p + MIN_MATCH <= n:
            max_len = min(MAX_MATCH, n - p)
            j = head[_hash3(buf, p)]
            probes = 0
            while j >= 0 and probes < max_chain:
                if p - j > window:
                    break
                if buf[j + best_len] == buf[p + best_len]:
                    length = 0
                    while length < max_len and buf[j + length] == buf[p + length]:
                        length += 1
                    if length > best_len:
                        best_len = length
                        best_off = p - j
                        if length == max_len:
                            break
                j = prev[j]
                probes += 1
        if best_len >= MIN_MATCH:
            kind[ntok] = 1
            offs[ntok] = best_off
            lens[ntok] = best_len
            step = best_len
        else:
            kind[ntok] = 0
            offs[ntok] = buf[p]
            step = 1
        ntok += 1
        for q in range(p, p + step):
            if q + 2 < n:
                h = _hash3(buf, q)
                prev[q] = head[h]
                head[h] = q
        p += step
    return ntok


@numba.njit(cache=True)
def _tokens_to_bits(kind, offs, lens, bits):
    n = 0
    for t in range(kind.shape[0]):
        if kind[t] == 0:
            bits[n] = 0
            n += 1
            for s in range(7, -1, -1):
                bits[n] = (offs[t] >> s) & 1
                n += 1
        else:
            bits[n] = 1
            n += 1
            off = offs[t] - 1
            for s in range(15, -1, -1):
                bits[n] = (off >> s) & 1
                n += 1
            ln = lens[t] - MIN_MATCH
            for s in range(7, -1, -1):
                bits[n] = (ln >> s) & 1
                n += 1
    return n


@numba.njit(cache=True)
def _encode_order0(bits, out):
    counts = np.zeros((2, 1), dtype=np.int64)
    beta = np.ones(1, dtype=np.float64)
    pc = np.empty(1, dtype=np.float64)
    state = arith.enc_init()
    for i in range(bits.shape[0]):
        p0 = _predict(counts, beta, 0, 0, pc)
        arith.enc_bit(state, out, bits[i], arith.quantize(p0))
        _update(counts, beta, 0, 0, pc, bits[i])
    return arith.enc_finish(state, out)


@numba.njit(cache=True, inline="always")
def _read_field(state, payload, counts, beta, pc, width):
    v = 0
    for _ in range(width):
        p0 = _predict(counts, beta, 0, 0, pc)
        bit = arith.dec_bit(state, payload, arith.quantize(p0))
        _update(counts, beta, 0, 0, pc, bit)
        v = (v << 1) | bit
    return v


@numba.njit(cache=True)
def _decode_kernel(payload, buf, start, window):
    """Rebuild buf[start:] in place. 0 ok, 1 bad offset, 2 overrun, 3 length mismatch."""
    counts = np.zeros((2, 1), dtype=np.int64)
    beta = np.ones(1, dtype=np.float64)
    pc = np.empty(1, dtype=np.float64)
    state = arith.dec_init(payload)
    n = buf.shape[0]
    p = start
    while p < n:
        flag = _read_field(state, payload, counts, beta, pc, 1)
        if flag == 0:
            buf[p] = _read_field(state, payload, counts, beta, pc, 8)
            p += 1
        else:
            off = _read_field(state, payload, counts, beta, pc, 16) + 1
            length = _read_field(state, payload, counts, beta, pc, 8) + MIN_MATCH
            if off > p or off > window:
                return 1
            if p + length > n:
                return 2
            for i in range(length):
                buf[p + i] = buf[p - off + i]
            p += length
    if not arith.dec_consistent_end(state, payload.shape[0]):
        return 3
    return 0


def _dictionary(memory: bytes, window_size: int) -> bytes:
    return bytes(memory[-window_size:]) if memory else b""


def _parse_arrays(data: bytes, memory: bytes, window_size: int, max_chain: int):
    dictionary = _dictionary(memory, window_size)
    buf = np.frombuffer(dictionary + bytes(data), dtype=np.uint8)
    n = len(data)
    kind = np.zeros(n, dtype=np.uint8)
    offs = np.zeros(n, dtype=np.int64)
    lens = np.zeros(n, dtype=np.int64)
    ntok = _parse_kernel(buf, len(dictionary), window_size, max_chain, kind, offs, lens)
    return kind[:ntok], offs[:ntok], lens[:ntok]


def lz_parse(
    data: bytes, memory: bytes = b"", window_size: int = DEFAULT_WINDOW, max_chain: int = MAX_CHAIN
) -> list[LzToken]:
    """Greedy token parse of `data` against the preset dictionary."""
    window_size = check_window(window_size)
    kind, offs, lens = _parse_arrays(data, memory, window_size, max_chain)
    return [
        Match(int(o), int(ln)) if k else Literal(int(o)) for k, o, ln in zip(kind, offs, lens)
    ]


def lz_unparse(tokens, memory: bytes = b"", window_size: int = DEFAULT_WINDOW) -> bytes:
    """Replay tokens against the dictionary; reference decoder without entropy coding."""
    buf = bytearray(_dictionary(memory, window_size))
    start = len(buf)
    for tok in tokens:
        if isinstance(tok, Literal):
            buf.append(tok.byte)
            continue
        if not 1 <= tok.offset <= min(len(buf), window_size):
            raise CorruptStreamError(f"match offset {tok.offset} beyond buffer of {len(buf)} bytes")
        if not MIN_MATCH <= tok.length <= MAX_MATCH:
            raise CorruptStreamError(f"match length {tok.length} out of range")
        for _ in range(tok.length):
            buf.append(buf[-tok.offset])
    return bytes(buf[start:])


def _code_tokens(kind, offs, lens) -> bytes:
    if kind.shape[0] == 0:
        return b""
    n_bits = int(LITERAL_BITS * (kind == 0).sum() + MATCH_BITS * (kind == 1).sum())
    bits = np.zeros(n_bits, dtype=np.uint8)
    _tokens_to_bits(kind, offs, lens, bits)
    out = np.zeros(arith.output_capacity(n_bits), dtype=np.uint8)
    n = _encode_order0(bits, out)
    return out[:n].tobytes()


def encode_tokens(tokens) -> bytes:
    """Serialize and entropy-code an explicit token list (no validity checks)."""
    kind = np.array([isinstance(t, Match) for t in tokens], dtype=np.uint8)
    offs = np.array([t.offset if isinstance(t, Match) else t.byte for t in tokens], dtype=np.int64)
    lens = np.array([t.length if isinstance(t, Match) else 0 for t in tokens], dtype=np.int64)
    return _code_tokens(kind, offs, lens)


def lz_encode(
    data: bytes,
    memory: bytes = b"",
    window_size: int = DEFAULT_WINDOW,
    *,
    max_chain: int = MAX_CHAIN,
) -> CodedStream:
    window_size = check_window(window_size)
    kind, offs, lens = _parse_arrays(data, memory, window_size, max_chain)
    payload = _code_tokens(kind, offs, lens)
    return CodedStream(ALGO_LZ, window_size // 256, len(data), fingerprint(memory), payload)


def lz_decode(
    stream: CodedStream | bytes, memory: bytes = b"", window_size: int | None = None
) -> bytes:
    if not isinstance(stream, CodedStream):
        stream = CodedStream.from_bytes(stream)
    if stream.algorithm != ALGO_LZ:
        raise CorruptStreamError("not an LZ stream")
    stream_window = stream.param * 256
    if window_size is not None and check_window(window_size) != stream_window:
        raise SyncError(f"decoder window {window_size} differs from stream window {stream_window}")
    try:
        window_size = check_window(stream_window)
    except UsageError as exc:
        raise CorruptStreamError(str(exc)) from None
    stream.check_memory(memory)
    if stream.original_length == 0:
        if stream.payload:
            raise CorruptStreamError("payload present for empty input")
        return b""
    dictionary = _dictionary(memory, window_size)
    buf = np.zeros(len(dictionary) + stream.original_length, dtype=np.uint8)
    buf[: len(dictionary)] = np.frombuffer(dictionary, dtype=np.uint8)
    status = _decode_kernel(
        np.frombuffer(stream.payload, dtype=np.uint8), buf, len(dictionary), window_size
    )
    if status == 1:
        raise CorruptStreamError("match offset beyond the reconstructed buffer")
    if status == 2:
        raise CorruptStreamError("match runs past the declared length")
    if status == 3:
        raise CorruptStreamError("payload length does not match the coded tokens")
    return buf[len(dictionary) :].tobytes()
