"""Binary context-tree weighting with memory priming.

Bytes are split into bits most-significant first and each bit is coded
under the CTW mixture over all context trees of depth `depth`. A node at
level k is identified by the k most recent bits; in integer form the most
recent bit is the least significant one. Nodes are stored densely in heap
order (level k occupies indices ``2**k - 1 .. 2**(k+1) - 2``), so a node
nobody has visited is simply a zero-count node.

Per internal node the coder keeps the ratio ``pe / (pw_child0 * pw_child1)``,
which is all the sequential mixture needs. It is held in the linear domain
and clamped to [1e-250, 1e250]; ``log_pe`` and ``log_pw`` are recomputed
exactly from the counts on demand (`ContextTree.log_probs`).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba
import numpy as np
from scipy.special import gammaln

from netmemo import arith
from netmemo.errors import CorruptStreamError, SyncError, UsageError
from netmemo.stream import ALGO_CTW, CodedStream, fingerprint

DEFAULT_DEPTH = 16
MAX_DEPTH = 20

BETA_CLAMP = 1e250
_LOG_BETA_CLAMP = math.log(BETA_CLAMP)
_LOG_HALF = math.log(0.5)
_LGAMMA_HALF = float(gammaln(0.5))


class NodeStats(NamedTuple):
    count_zero: int
    count_one: int
    log_pe: float
    log_pw: float


def kt_log_prob(a, b):
    """Log Krichevsky-Trofimov block probability of `a` zeros and `b` ones."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return gammaln(a + 0.5) + gammaln(b + 0.5) - 2 * _LGAMMA_HALF - gammaln(a + b + 1)


@numba.njit(cache=True)
def _count_leaves(data, depth, leaf_counts):
    mask = (1 << depth) - 1
    ctx = 0
    for byte in data:
        for shift in range(7, -1, -1):
            bit = (byte >> shift) & 1
            leaf_counts[bit, ctx] += 1
            ctx = ((ctx << 1) | bit) & mask


@numba.njit(cache=True, inline="always")
def _predict(counts, beta, ctx, depth, pc):
    """Fill pc[k] with P(next=0) of the weighted model at level k; return the root value."""
    node = (1 << depth) - 1 + (ctx & ((1 << depth) - 1))
    a = counts[0, node]
    b = counts[1, node]
    p = (a + 0.5) / (a + b + 1.0)
    pc[depth] = p
    for k in range(depth - 1, -1, -1):
        node = (1 << k) - 1 + (ctx & ((1 << k) - 1))
        a = counts[0, node]
        b = counts[1, node]
        pe = (a + 0.5) / (a + b + 1.0)
        bt = beta[node]
        p = (bt * pe + p) / (bt + 1.0)
        pc[k] = p
    return p


@numba.njit(cache=True, inline="always")
def _update(counts, beta, ctx, depth, pc, bit):
    for k in range(depth + 1):
        node = (1 << k) - 1 + (ctx & ((1 << k) - 1))
        if k < depth:
            a = counts[0, node]
            b = counts[1, node]
            if bit == 0:
                ratio = (a + 0.5) / ((a + b + 1.0) * pc[k + 1])
            else:
                ratio = (b + 0.5) / ((a + b + 1.0) * (1.0 - pc[k + 1]))
            v = beta[node] * ratio
            if v > BETA_CLAMP:
                v = BETA_CLAMP
            elif v < 1.0 / BETA_CLAMP:
                v = 1.0 / BETA_CLAMP
            beta[node] = v
        counts[bit, node] += 1


@numba.njit(cache=True)
def _encode_kernel(bits, counts, beta, depth, adapt, out):
    state = arith.enc_init()
    pc = np.empty(depth + 1, dtype=np.float64)
    mask = (1 << depth) - 1
    ctx = 0
    for i in range(bits.shape[0]):
        bit = bits[i]
        p0 = _predict(counts, beta, ctx, depth, pc)
        arith.enc_bit(state, out, bit, arith.quantize(p0))
        if adapt:
            _update(counts, beta, ctx, depth, pc, bit)
        ctx = ((ctx << 1) | bit) & mask
    return arith.enc_finish(state, out)


@numba.njit(cache=True)
def _decode_kernel(payload, bits, counts, beta, depth, adapt):
    state = arith.dec_init(payload)
    pc = np.empty(depth + 1, dtype=np.float64)
    mask = (1 << depth) - 1
    ctx = 0
    for i in range(bits.shape[0]):
        p0 = _predict(counts, beta, ctx, depth, pc)
        bit = arith.dec_bit(state, payload, arith.quantize(p0))
        bits[i] = bit
        if adapt:
            _update(counts, beta, ctx, depth, pc, bit)
        ctx = ((ctx << 1) | bit) & mask
    return arith.dec_consistent_end(state, payload.shape[0])


@numba.njit(cache=True)
def _ideal_kernel(bits, counts, beta, depth):
    """Sequential -log2 probability of `bits` under the adapting mixture (no coder)."""
    pc = np.empty(depth + 1, dtype=np.float64)
    mask = (1 << depth) - 1
    ctx = 0
    total = 0.0
    for i in range(bits.shape[0]):
        bit = bits[i]
        p0 = _predict(counts, beta, ctx, depth, pc)
        total -= math.log2(p0 if bit == 0 else 1.0 - p0)
        _update(counts, beta, ctx, depth, pc, bit)
        ctx = ((ctx << 1) | bit) & mask
    return total


def _check_depth(depth: int) -> int:
    if not isinstance(depth, (int, np.integer)) or depth < 0:
        raise UsageError(f"depth must be a non-negative integer, got {depth!r}")
    if depth > MAX_DEPTH:
        raise UsageError(f"depth {depth} exceeds the supported maximum {MAX_DEPTH}")
    return int(depth)


class ContextTree:
    """Counts and mixture state of a depth-`depth` binary context tree."""

    def __init__(self, depth: int = DEFAULT_DEPTH):
        self.depth = _check_depth(depth)
        n_nodes = (1 << (self.depth + 1)) - 1
        self.counts = np.zeros((2, n_nodes), dtype=np.int64)
        self.beta = np.ones(n_nodes, dtype=np.float64)

    def copy(self) -> ContextTree:
        clone = ContextTree.__new__(ContextTree)
        clone.depth = self.depth
        clone.counts = self.counts.copy()
        clone.beta = self.beta.copy()
        return clone

    def _level(self, k: int) -> slice:
        return slice((1 << k) - 1, (1 << (k + 1)) - 1)

    def prime(self, memory: bytes) -> ContextTree:
        if len(memory) == 0:
            return self
        leaf = np.zeros((2, 1 << self.depth), dtype=np.int64)
        _count_leaves(np.frombuffer(memory, dtype=np.uint8), self.depth, leaf)
        for k in range(self.depth, -1, -1):
            self.counts[:, self._level(k)] += leaf
            half = leaf.shape[1] // 2
            if half:
                leaf = leaf[:, :half] + leaf[:, half:]
        self._refresh_beta()
        return self

    def log_probs(self) -> tuple[np.ndarray, np.ndarray]:
        """Natural-log estimated and weighted probabilities of every node."""
        log_pe = kt_log_prob(self.counts[0], self.counts[1])
        log_pw = np.empty_like(log_pe)
        deepest = self._level(self.depth)
        log_pw[deepest] = log_pe[deepest]
        for k in range(self.depth - 1, -1, -1):
            child = log_pw[self._level(k + 1)]
            half = child.shape[0] // 2
            split = child[:half] + child[half:]
            lvl = self._level(k)
            log_pw[lvl] = np.logaddexp(log_pe[lvl], split) + _LOG_HALF
        return log_pe, log_pw

    def _refresh_beta(self) -> None:
        log_pe, log_pw = self.log_probs()
        for k in range(self.depth):
            child = log_pw[self._level(k + 1)]
            half = child.shape[0] // 2
            lvl = self._level(k)
            log_ratio = log_pe[lvl] - (child[:half] + child[half:])
            self.beta[lvl] = np.exp(np.clip(log_ratio, -_LOG_BETA_CLAMP, _LOG_BETA_CLAMP))

    @property
    def log_prob(self) -> float:
        """Natural log of the weighted probability of everything seen so far."""
        return float(self.log_probs()[1][0])

    @staticmethod
    def node_index(path: str) -> int:
        """Heap index of the node whose path lists context bits most recent first."""
        c = 0
        for j, ch in enumerate(path):
            if ch not in "01":
                raise UsageError(f"bad context path {path!r}")
            c |= (ch == "1") << j
        return (1 << len(path)) - 1 + c

    def node(self, path: str) -> NodeStats:
        if len(path) > self.depth:
            raise UsageError(f"path longer than depth {self.depth}")
        idx = self.node_index(path)
        log_pe, log_pw = self.log_probs()
        return NodeStats(
            int(self.counts[0, idx]), int(self.counts[1, idx]), float(log_pe[idx]), float(log_pw[idx])
        )

    def nodes(self) -> dict[str, NodeStats]:
        """All materialized (visited) nodes keyed by path, most recent bit first."""
        log_pe, log_pw = self.log_probs()
        seen = np.flatnonzero(self.counts.sum(axis=0))
        result = {}
        for idx in seen:
            k = int(idx + 1).bit_length() - 1
            c = int(idx) - ((1 << k) - 1)
            path = "".join("1" if (c >> j) & 1 else "0" for j in range(k))
            result[path] = NodeStats(
                int(self.counts[0, idx]),
                int(self.counts[1, idx]),
                float(log_pe[idx]),
                float(log_pw[idx]),
            )
        return result

    def observe(self, bits: str, history: str = "") -> ContextTree:
        """Update the tree with a bit string, as coding it would.

        `history` gives the bits preceding `bits` (oldest first); missing
        context bits are zeros.
        """
        if any(ch not in "01" for ch in bits + history):
            raise UsageError("bits must be a string of '0'/'1'")
        mask = (1 << self.depth) - 1
        ctx = int(history, 2) & mask if history else 0
        pc = np.empty(self.depth + 1, dtype=np.float64)
        for ch in bits:
            bit = ch == "1"
            _predict(self.counts, self.beta, ctx, self.depth, pc)
            _update(self.counts, self.beta, ctx, self.depth, pc, int(bit))
            ctx = ((ctx << 1) | bit) & mask
        return self

    def predict(self, context: str) -> float:
        return ctw_predict(self, context)

    def ideal_code_length(self, data: bytes) -> float:
        """Bits an exact coder would spend on `data` from this state (tree is not modified)."""
        tree = self.copy()
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        return float(_ideal_kernel(bits, tree.counts, tree.beta, tree.depth))


def prime(tree: ContextTree, memory: bytes) -> ContextTree:
    """Feed `memory` through the tree's counts without emitting code bits."""
    return tree.prime(memory)


def ctw_predict(tree: ContextTree, context: str) -> float:
    """P(next bit = 0) given the last `tree.depth` bits, oldest first."""
    if len(context) != tree.depth or any(ch not in "01" for ch in context):
        raise UsageError(f"context must be {tree.depth} bits of '0'/'1'")
    ctx = int(context, 2) if context else 0
    pc = np.empty(tree.depth + 1, dtype=np.float64)
    return float(_predict(tree.counts, tree.beta, ctx, tree.depth, pc))


def ctw_encode(
    data: bytes,
    memory: bytes = b"",
    depth: int = DEFAULT_DEPTH,
    *,
    adapt: bool = True,
    tree: ContextTree | None = None,
) -> CodedStream:
    """Compress `data`; with nonempty `memory` the tree is primed on it first.

    `tree` may be supplied pre-primed on `memory` to skip priming; it is
    copied, never mutated.
    """
    depth = _check_depth(depth)
    if tree is None:
        tree = ContextTree(depth).prime(memory)
    elif tree.depth != depth:
        raise UsageError("supplied tree depth differs from depth")
    else:
        tree = tree.copy()
    fp = fingerprint(memory)
    if len(data) == 0:
        return CodedStream(ALGO_CTW, depth, 0, fp, b"")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    out = np.zeros(arith.output_capacity(bits.shape[0]), dtype=np.uint8)
    n = _encode_kernel(bits, tree.counts, tree.beta, depth, adapt, out)
    return CodedStream(ALGO_CTW, depth, len(data), fp, out[:n].tobytes())


def ctw_decode(
    stream: CodedStream | bytes,
    memory: bytes = b"",
    depth: int | None = None,
    *,
    adapt: bool = True,
    tree: ContextTree | None = None,
) -> bytes:
    if not isinstance(stream, CodedStream):
        stream = CodedStream.from_bytes(stream)
    if stream.algorithm != ALGO_CTW:
        raise CorruptStreamError("not a CTW stream")
    if depth is not None and _check_depth(depth) != stream.param:
        raise SyncError(f"decoder depth {depth} differs from stream depth {stream.param}")
    depth = _check_depth(stream.param)
    stream.check_memory(memory)
    if stream.original_length == 0:
        if stream.payload:
            raise CorruptStreamError("payload present for empty input")
        return b""
    if tree is None:
        tree = ContextTree(depth).prime(memory)
    else:
        tree = tree.copy()
    bits = np.zeros(8 * stream.original_length, dtype=np.uint8)
    payload = np.frombuffer(stream.payload, dtype=np.uint8)
    ok = _decode_kernel(payload, bits, tree.counts, tree.beta, depth, adapt)
    if not ok:
        raise CorruptStreamError("payload length does not match the coded symbols")
    return np.packbits(bits).tobytes()
