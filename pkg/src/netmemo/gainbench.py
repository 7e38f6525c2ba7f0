"""Memorization gain g(n, m) of the two codecs.

g(n, m) is the ratio of the mean coded length of an n-byte sequence
without memory to its mean coded length when encoder and decoder share m
earlier bytes from the same source. Code length is the payload size in
bytes; the container header is identical in both arms and left out.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

from netmemo.ctw import DEFAULT_DEPTH, ContextTree, ctw_encode
from netmemo.errors import InsufficientDataError, UsageError
from netmemo.lzdict import DEFAULT_WINDOW, lz_encode

CODECS = ("ctw", "lz")
CSV_COLUMNS = (
    "algorithm",
    "n",
    "m",
    "trials",
    "mean_len_ucomp",
    "mean_len_ucompm",
    "g",
    "stderr",
    "seed",
)

_CHUNK_BITS = 1 << 20


@dataclass(frozen=True)
class MarkovSource:
    """Binary Markov chain; `p_one[s]` is P(next bit = 1) in state s.

    The state holds the last `order` bits with the most recent one as the
    least significant bit. Generation starts from the all-zero state.
    """

    order: int
    p_one: tuple[float, ...]
    seed: int = 0

    def __post_init__(self):
        if self.order < 0:
            raise UsageError("order must be non-negative")
        if len(self.p_one) != 1 << self.order:
            raise UsageError(f"need {1 << self.order} transition probabilities, got {len(self.p_one)}")
        if any(not 0.0 <= p <= 1.0 for p in self.p_one):
            raise UsageError("transition probabilities must lie in [0, 1]")

    @classmethod
    def symmetric_order1(cls, flip: float = 0.1, seed: int = 0) -> MarkovSource:
        """P(1|0) = flip, P(1|1) = 1 - flip."""
        return cls(1, (flip, 1.0 - flip), seed)

    def entropy_rate(self) -> float:
        """Bits per bit, from the stationary distribution of the state chain."""
        k = self.order
        n_states = 1 << k
        mask = n_states - 1
        P = np.zeros((n_states, n_states))
        for s, p in enumerate(self.p_one):
            P[s, (s << 1) & mask] += 1.0 - p
            P[s, ((s << 1) | 1) & mask] += p
        vals, vecs = np.linalg.eig(P.T)
        pi = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
        pi = pi / pi.sum()
        return float(sum(w * _binary_entropy(p) for w, p in zip(pi, self.p_one)))


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


@numba.njit(cache=True)
def _markov_kernel(u, p_one, mask, state, bits):
    for i in range(u.shape[0]):
        bit = 1 if u[i] < p_one[state] else 0
        bits[i] = bit
        state = ((state << 1) | bit) & mask
    return state


def generate(source: MarkovSource, n: int, seed=None) -> bytes:
    """n bytes (8n bits, most significant first) drawn from `source`.

    `seed` overrides `source.seed`; any value accepted by
    `numpy.random.default_rng` works, including tuples of ints.
    """
    if n < 0:
        raise UsageError("n must be non-negative")
    rng = np.random.default_rng(source.seed if seed is None else seed)
    p_one = np.asarray(source.p_one, dtype=np.float64)
    mask = (1 << source.order) - 1
    bits = np.empty(8 * n, dtype=np.uint8)
    state = 0
    for lo in range(0, bits.shape[0], _CHUNK_BITS):
        hi = min(lo + _CHUNK_BITS, bits.shape[0])
        state = _markov_kernel(rng.random(hi - lo), p_one, mask, state, bits[lo:hi])
    return np.packbits(bits).tobytes()


def empirical_entropy_rate(data: bytes, order: int) -> float:
    """Plug-in conditional entropy (bits/bit) of `data` given the previous `order` bits."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8)).astype(np.int64)
    if bits.shape[0] <= order:
        return 0.0
    state = np.zeros(bits.shape[0] - order, dtype=np.int64)
    for j in range(1, order + 1):
        state |= bits[order - j : bits.shape[0] - j] << (j - 1)
    nxt = bits[order:]
    joint = np.bincount(2 * state + nxt, minlength=2 << order).reshape(-1, 2).astype(float)
    total = joint.sum()
    h = 0.0
    for row in joint:
        r = row.sum()
        if r:
            h += r / total * _binary_entropy(row[1] / r)
    return h


@dataclass(frozen=True)
class GainReport:
    algorithm: str
    n: int
    m: int
    trials: int
    mean_len_no_memory: float
    mean_len_with_memory: float
    g: float
    stderr: float
    seed: int
    lengths: tuple = field(default=(), repr=False, compare=False)

    def csv_row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "m": self.m,
            "trials": self.trials,
            "mean_len_ucomp": repr(self.mean_len_no_memory),
            "mean_len_ucompm": repr(self.mean_len_with_memory),
            "g": repr(self.g),
            "stderr": repr(self.stderr),
            "seed": self.seed,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("lengths")
        return d


def _ratio_stderr(a: np.ndarray, b: np.ndarray) -> float:
    """Delta-method standard error of mean(a) / mean(b) for paired samples."""
    k = a.shape[0]
    if k < 2 or np.array_equal(a, b):
        return 0.0
    A, B = a.mean(), b.mean()
    cov = np.cov(a, b)
    var = cov[0, 0] / B**2 + A**2 * cov[1, 1] / B**4 - 2 * A * cov[0, 1] / B**3
    return float(math.sqrt(max(var / k, 0.0)))


def _check_codec(codec: str) -> str:
    if codec not in CODECS:
        raise UsageError(f"unknown codec {codec!r}; choose from {CODECS}")
    return codec


class _Coder:
    """Payload lengths with and without a given memory, sharing priming work."""

    def __init__(self, codec: str, depth: int, window_size: int):
        self.codec = codec
        self.depth = depth
        self.window_size = window_size
        if codec == "ctw":
            self._blank = ContextTree(depth)

    def lengths(self, memory: bytes, targets: Sequence[bytes]) -> list[tuple[int, int]]:
        if self.codec == "ctw":
            primed = ContextTree(self.depth).prime(memory) if memory else self._blank
            out = []
            for x in targets:
                plain = len(ctw_encode(x, b"", self.depth, tree=self._blank).payload)
                if memory:
                    with_mem = len(ctw_encode(x, memory, self.depth, tree=primed).payload)
                else:
                    with_mem = plain
                out.append((plain, with_mem))
            return out
        out = []
        for x in targets:
            plain = len(lz_encode(x, b"", self.window_size).payload)
            with_mem = len(lz_encode(x, memory, self.window_size).payload) if memory else plain
            out.append((plain, with_mem))
        return out


def _report(codec, n, m, seed, pairs) -> GainReport:
    a = np.array([p[0] for p in pairs], dtype=float)
    b = np.array([p[1] for p in pairs], dtype=float)
    A, B = float(a.mean()), float(b.mean())
    if B <= 0:
        g = 1.0 if A <= 0 else math.inf
    else:
        g = A / B
    return GainReport(codec, n, m, len(pairs), A, B, g, _ratio_stderr(a, b), seed, tuple(pairs))


def _source_cells(source, codec, n_grid, m_grid, trials, seed, depth, window_size):
    coder = _Coder(codec, depth, window_size)
    n_max = max(n_grid)
    cells = {(n, m): [] for m in m_grid for n in n_grid}
    m_max = max(m_grid)
    for t in range(trials):
        stream = generate(source, n_max, seed=(seed, t, 1))
        targets = [stream[:n] for n in n_grid]
        history = generate(source, m_max, seed=(seed, t, 0))
        for m in m_grid:
            memory = history[m_max - m :]
            for n, pair in zip(n_grid, coder.lengths(memory, targets)):
                cells[(n, m)].append(pair)
    return cells


def _corpus_cells(corpus, codec, n_grid, m_grid, trials, depth, window_size):
    coder = _Coder(codec, depth, window_size)
    cells = {}
    for m in m_grid:
        for n in n_grid:
            if len(corpus) < m + n * trials:
                raise InsufficientDataError(
                    f"corpus of {len(corpus)} bytes cannot hold m={m} plus {trials} x n={n}"
                )
            memory = bytes(corpus[:m])
            targets = [bytes(corpus[m + t * n : m + (t + 1) * n]) for t in range(trials)]
            cells[(n, m)] = coder.lengths(memory, targets)
    return cells


def measure_gain(
    source_or_corpus,
    codec: str,
    n: int,
    m: int,
    trials: int,
    *,
    seed: int = 0,
    depth: int = DEFAULT_DEPTH,
    window_size: int = DEFAULT_WINDOW,
) -> GainReport:
    """Estimate g(n, m) for one codec.

    With a `MarkovSource`, trial t draws a history from seed (seed, t, 0)
    whose last m bytes are the memory (so memories for different m are
    nested, the larger reaching further back) and its target from seed
    (seed, t, 1). With a byte corpus, the memory is
    the corpus prefix of length m and the targets are consecutive n-byte
    slices after it.
    """
    return gain_curve(
        source_or_corpus, codec, [n], [m], trials, seed=seed, depth=depth, window_size=window_size
    )[0]


def gain_curve(
    source_or_corpus,
    codec: str,
    n_grid: Iterable[int],
    m_grid: Iterable[int],
    trials: int,
    *,
    seed: int = 0,
    depth: int = DEFAULT_DEPTH,
    window_size: int = DEFAULT_WINDOW,
) -> list[GainReport]:
    """GainReports for every (n, m) cell, ordered m-major then n."""
    _check_codec(codec)
    if trials < 1:
        raise UsageError("trials must be >= 1")
    n_grid = [int(n) for n in n_grid]
    m_grid = [int(m) for m in m_grid]
    if not n_grid or not m_grid or min(n_grid) < 0 or min(m_grid) < 0:
        raise UsageError("grids must be non-empty and non-negative")
    if isinstance(source_or_corpus, MarkovSource):
        cells = _source_cells(source_or_corpus, codec, n_grid, m_grid, trials, seed, depth, window_size)
    else:
        cells = _corpus_cells(bytes(source_or_corpus), codec, n_grid, m_grid, trials, depth, window_size)
    return [_report(codec, n, m, seed, cells[(n, m)]) for m in m_grid for n in n_grid]


def gain_csv(reports: Iterable[GainReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()
