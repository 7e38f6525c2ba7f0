"""CodedStream container shared by both codecs.

Layout (big-endian where it matters)::

    magic    b"NMC1"            4 bytes
    version  u8 = 1
    algo     u8   1 = CTW, 2 = LZ
    param    u16  CTW depth, or LZ window_size // 256
    length   unsigned LEB128    original byte length
    memfp    u64  FNV-1a 64 of the memory bytes, 0 for empty memory
    payload  to end of data
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numba
import numpy as np

from netmemo.errors import CorruptStreamError, SyncError

MAGIC = b"NMC1"
VERSION = 1
ALGO_CTW = 1
ALGO_LZ = 2
ALGO_NAMES = {ALGO_CTW: "ctw", ALGO_LZ: "lz"}

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


@numba.njit(cache=True)
def _fnv1a64(data, h, prime):
    for b in data:
        h = (h ^ np.uint64(b)) * prime
    return h


def fingerprint(memory: bytes) -> int:
    """64-bit FNV-1a hash of `memory`; the empty memory hashes to 0."""
    if len(memory) == 0:
        return 0
    arr = np.frombuffer(memory, dtype=np.uint8)
    return int(_fnv1a64(arr, _FNV_OFFSET, _FNV_PRIME))


def encode_leb128(value: int) -> bytes:
    if value < 0:
        raise ValueError("LEB128 value must be non-negative")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_leb128(buf: bytes, pos: int) -> tuple[int, int]:
    """Return (value, next position)."""
    value = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise CorruptStreamError("truncated length field")
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise CorruptStreamError("length field too long")


@dataclass(frozen=True)
class CodedStream:
    algorithm: int
    param: int
    original_length: int
    memory_fingerprint: int
    payload: bytes

    def to_bytes(self) -> bytes:
        head = MAGIC + struct.pack(">BBH", VERSION, self.algorithm, self.param)
        head += encode_leb128(self.original_length)
        head += struct.pack(">Q", self.memory_fingerprint)
        return head + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> CodedStream:
        data = bytes(data)
        if len(data) < 8 or data[:4] != MAGIC:
            raise CorruptStreamError("bad magic")
        version, algo, param = struct.unpack(">BBH", data[4:8])
        if version != VERSION:
            raise CorruptStreamError(f"unsupported stream version {version}")
        if algo not in ALGO_NAMES:
            raise CorruptStreamError(f"unknown algorithm id {algo}")
        length, pos = decode_leb128(data, 8)
        if pos + 8 > len(data):
            raise CorruptStreamError("truncated header")
        (fp,) = struct.unpack(">Q", data[pos : pos + 8])
        return cls(algo, param, length, fp, data[pos + 8 :])

    @property
    def header_size(self) -> int:
        return len(self.to_bytes()) - len(self.payload)

    def __len__(self) -> int:
        return self.header_size + len(self.payload)

    def check_memory(self, memory: bytes) -> None:
        fp = fingerprint(memory)
        if fp != self.memory_fingerprint:
            raise SyncError(
                f"memory fingerprint mismatch: stream {self.memory_fingerprint:016x}, "
                f"decoder {fp:016x}"
            )
