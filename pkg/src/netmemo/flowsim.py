"""Flow accounting on graphs that host memory units.

A flow from S to D may be compressed at S and decompressed at one memory
unit mu; the S->mu leg then costs d(S, mu)/g and the rest is carried
plain. All costs are kept exact: with g = P/Q in lowest terms, a route with
`a` compressed hops and `b` plain hops has scaled cost ``Q*a + P*b``,
i.e. P times its hop cost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np

from netmemo.errors import UsageError
from netmemo.graph import Graph

UNREACHABLE = -1
_INF = np.iinfo(np.int64).max


def as_fraction(g) -> Fraction:
    if isinstance(g, Fraction):
        return g
    if isinstance(g, (int, np.integer)):
        return Fraction(int(g))
    return Fraction(str(g)).limit_denominator(10**6)


@dataclass(frozen=True)
class MemoryDeployment:
    nodes: tuple[int, ...]
    g: Fraction

    def __post_init__(self):
        nodes = tuple(int(u) for u in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise UsageError("memory nodes must be distinct")
        g = as_fraction(self.g)
        if g < 1:
            raise UsageError("gain g must be >= 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "g", g)

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=np.bool_)
        if self.nodes:
            if max(self.nodes) >= n or min(self.nodes) < 0:
                raise UsageError("memory node outside the graph")
            m[list(self.nodes)] = True
        return m


# --- plain hop distances ---------------------------------------------------


@numba.njit(cache=True)
def _bfs_row(indptr, indices, src, dist, queue):
    dist[:] = UNREACHABLE
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] == UNREACHABLE:
                dist[v] = du
                queue[tail] = v
                tail += 1


@numba.njit(cache=True, nogil=True)
def _bfs_rows(indptr, indices, sources, out):
    queue = np.empty(out.shape[1], dtype=np.int64)
    row = np.empty(out.shape[1], dtype=np.int64)
    for i in range(sources.shape[0]):
        _bfs_row(indptr, indices, sources[i], row, queue)
        out[i, :] = row


def hop_distances(graph: Graph, sources=None) -> np.ndarray:
    """Hop-count rows from each source (all nodes by default); UNREACHABLE = -1."""
    src = np.arange(graph.n) if sources is None else np.asarray(sources, dtype=np.int64).ravel()
    out = np.empty((src.shape[0], graph.n), dtype=np.int32)
    if src.shape[0]:
        _bfs_rows(graph.indptr, graph.indices, src, out)
    return out


# --- brute-force effective distance -----------------------------------------


def effective_distance_oracle(
    S: int, D: int, deployment: MemoryDeployment, distances, *, avoid_dest: bool = False, graph: Graph | None = None
):
    """Effective distance S -> D and the memory used, by direct minimization.

    Returns (Fraction, memory id or None). The memory route must be strictly
    shorter than the plain one; equal-cost memories resolve to the smallest id.
    With `avoid_dest` the compressed leg S -> mu may not pass through D
    (unless mu is D); this needs `graph`.
    """
    if S == D:
        raise UsageError("source and destination must differ")
    g = deployment.g
    d_sd = int(distances[S][D])
    if d_sd == UNREACHABLE:
        return None, None
    leg = distances[S]
    if avoid_dest:
        if graph is None:
            raise UsageError("avoid_dest needs the graph")
        leg = _distances_avoiding(graph, S, D)
        leg[D] = d_sd
    best, via = Fraction(d_sd), None
    for mu in sorted(deployment.nodes):
        a, b = int(leg[mu]), int(distances[mu][D])
        if a == UNREACHABLE or b == UNREACHABLE:
            continue
        cost = Fraction(a) / g + b
        if cost < best:
            best, via = cost, mu
    return best, via


def _distances_avoiding(graph: Graph, S: int, D: int) -> np.ndarray:
    """Hop distances from S in the graph with D removed."""
    keep = np.flatnonzero(np.arange(graph.n) != D)
    sub, nodes = graph.induced(keep)
    row = np.full(graph.n, UNREACHABLE, dtype=np.int64)
    row[nodes] = hop_distances(sub, [int(np.searchsorted(nodes, S))])[0]
    return row


def total_flow(S: int, deployment: MemoryDeployment, distances, **oracle_kw) -> tuple[Fraction, Fraction]:
    """(F_S, F0_S) for unit flows from S to every reachable destination."""
    F = Fraction(0)
    F0 = Fraction(0)
    for D in range(len(distances[S])):
        if D == S or distances[S][D] == UNREACHABLE:
            continue
        d_hat, _ = effective_distance_oracle(S, D, deployment, distances, **oracle_kw)
        F += d_hat
        F0 += int(distances[S][D])
    return F, F0


def single_path_gain(g) -> Fraction:
    """Gain 2g/(g+1) of one path carrying flows both ways past a midpoint memory."""
    g = as_fraction(g)
    if g < 1:
        raise UsageError("g must be >= 1")
    return 2 * g / (g + 1)


# --- modified Dijkstra -----------------------------------------------------


@numba.njit(cache=True, inline="always")
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] <= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        vals[parent], vals[i] = vals[i], vals[parent]
        i = parent
    return size + 1


@numba.njit(cache=True, inline="always")
def _heap_pop(keys, vals, size):
    key = keys[0]
    val = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and keys[left + 1] < keys[left]:
            child = left + 1
        if keys[i] <= keys[child]:
            break
        keys[child], keys[i] = keys[i], keys[child]
        vals[child], vals[i] = vals[i], vals[child]
        i = child
    return key, val, size


@numba.njit(cache=True)
def _effective_to(indptr, indices, is_mem, P, Q, dest, avoid, plain, marked, via, keys, vals):
    """Reverse label-setting search towards `dest` over (node, marked) states.

    plain[v]  : scaled cost of carrying the flow from v to dest uncompressed.
    marked[v] : scaled cost when v's flow is still compressed and must reach
                a memory first (marked nodes); via[v] is that memory.
    A memory u turns a marked arrival into a plain continuation at no cost.
    Heap keys are 2*cost + layer so plain states settle before marked ones
    at equal cost, which makes the smallest-id tie-break on `via` final.
    With `avoid`, compressed flow may not transit `dest`.
    """
    n = plain.shape[0]
    plain[:] = _INF
    marked[:] = _INF
    via[:] = -1
    size = 0
    plain[dest] = 0
    size = _heap_push(keys, vals, size, 0, dest)
    while size > 0:
        key, state, size = _heap_pop(keys, vals, size)
        cost = key >> 1
        if state < n:
            u = state
            if cost != plain[u]:
                continue
            if is_mem[u] and (cost < marked[u] or (cost == marked[u] and u < via[u])):
                marked[u] = cost
                via[u] = u
                size = _heap_push(keys, vals, size, 2 * cost + 1, n + u)
            nc = cost + P
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if nc < plain[v]:
                    plain[v] = nc
                    size = _heap_push(keys, vals, size, 2 * nc, v)
        else:
            u = state - n
            if cost != marked[u] or (key & 1) == 0:
                continue
            nc = cost + Q
            lab = via[u]
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if avoid and v == dest:
                    continue
                if nc < marked[v]:
                    marked[v] = nc
                    via[v] = lab
                    size = _heap_push(keys, vals, size, 2 * nc + 1, n + v)
                elif nc == marked[v] and lab < via[v]:
                    via[v] = lab
    return size


@numba.njit(cache=True)
def _finish_row(plain, marked, via, eff, used):
    for v in range(plain.shape[0]):
        if marked[v] < plain[v]:
            eff[v] = marked[v]
            used[v] = via[v]
        else:
            eff[v] = plain[v]
            used[v] = -1


@numba.njit(cache=True, nogil=True)
def _all_pairs_effective(indptr, indices, is_mem, P, Q, avoid, store, eff_out, via_out, totals):
    """Run the search for every destination; totals = [sum plain hops, sum scaled eff]."""
    n = is_mem.shape[0]
    plain = np.empty(n, dtype=np.int64)
    marked = np.empty(n, dtype=np.int64)
    via = np.empty(n, dtype=np.int64)
    eff = np.empty(n, dtype=np.int64)
    used = np.empty(n, dtype=np.int64)
    cap = 4 * indices.shape[0] + 2 * n + 8
    keys = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.int64)
    for D in range(n):
        _effective_to(indptr, indices, is_mem, P, Q, D, avoid, plain, marked, via, keys, vals)
        _finish_row(plain, marked, via, eff, used)
        for S in range(n):
            if S == D or plain[S] == _INF:
                continue
            totals[0] += plain[S] // P
            totals[1] += eff[S]
        if store:
            eff_out[:, D] = eff
            via_out[:, D] = used


@dataclass(frozen=True, eq=False)
class EffectiveDistances:
    """Effective distances from every node to one destination."""

    dest: int
    scaled: np.ndarray  # P * effective distance; -1 when unreachable
    scale: int  # P
    via: np.ndarray  # memory used, -1 for plain routing

    def __getitem__(self, v: int) -> Fraction | None:
        s = int(self.scaled[v])
        return None if s < 0 else Fraction(s, self.scale)

    def memory(self, v: int) -> int | None:
        m = int(self.via[v])
        return None if m < 0 else m


def _search_buffers(graph: Graph):
    n = graph.n
    cap = 4 * graph.indices.shape[0] + 2 * n + 8
    return (
        np.empty(n, dtype=np.int64),
        np.empty(n, dtype=np.int64),
        np.empty(n, dtype=np.int64),
        np.empty(cap, dtype=np.int64),
        np.empty(cap, dtype=np.int64),
    )


def modified_dijkstra(
    graph: Graph, D: int, deployment: MemoryDeployment, *, avoid_dest: bool = False
) -> EffectiveDistances:
    """Effective distance (and memory used) from every node to `D`.

    One label-setting pass over node states "plain" and "marked". A marked
    node still carries compressed flow and pays 1/g per hop until it reaches
    a memory; memories are where marked flow becomes plain. Without memories
    this is ordinary single-destination shortest path.
    """
    if not 0 <= D < graph.n:
        raise UsageError("destination outside the graph")
    g = deployment.g
    P, Q = g.numerator, g.denominator
    plain, marked, via, keys, vals = _search_buffers(graph)
    _effective_to(
        graph.indptr, graph.indices, deployment.mask(graph.n), P, Q, D, avoid_dest, plain, marked, via, keys, vals
    )
    eff = np.empty(graph.n, dtype=np.int64)
    used = np.empty(graph.n, dtype=np.int64)
    _finish_row(plain, marked, via, eff, used)
    eff[eff == _INF] = -1
    return EffectiveDistances(D, eff, P, used)


@dataclass(frozen=True, eq=False)
class FlowReport:
    """Per-pair effective routing and the aggregate network-wide gain.

    `effective_scaled[S, D]` is P times the effective distance of S -> D,
    `memory[S, D]` the memory used (-1 when routed plain). Unreachable
    pairs are excluded from every sum.
    """

    n: int
    g: Fraction
    distances: np.ndarray = field(repr=False)
    effective_scaled: np.ndarray = field(repr=False)
    memory: np.ndarray = field(repr=False)

    @property
    def scale(self) -> int:
        return self.g.numerator

    def _reachable(self) -> np.ndarray:
        ok = self.distances != UNREACHABLE
        np.fill_diagonal(ok, False)
        return ok

    def flows(self) -> tuple[list[Fraction], list[int]]:
        """(F_S, F0_S) per source."""
        ok = self._reachable()
        F = [Fraction(int(self.effective_scaled[s][ok[s]].sum()), self.scale) for s in range(self.n)]
        F0 = [int(self.distances[s][ok[s]].sum()) for s in range(self.n)]
        return F, F0

    @property
    def gain(self) -> Fraction:
        ok = self._reachable()
        num = int(self.distances[ok].astype(np.int64).sum())
        den = int(self.effective_scaled[ok].sum())
        if den == 0:
            return Fraction(1)
        return Fraction(num * self.scale, den)

    def pair_rows(self):
        """(source, dest, d, deff, memory_id) for every reachable ordered pair."""
        ok = self._reachable()
        for s, d in zip(*np.nonzero(ok)):
            m = int(self.memory[s, d])
            yield (
                int(s),
                int(d),
                int(self.distances[s, d]),
                Fraction(int(self.effective_scaled[s, d]), self.scale),
                "" if m < 0 else m,
            )


def _warn_disconnected(graph: Graph, distances=None) -> None:
    if graph.n and (distances is None or (distances == UNREACHABLE).any()):
        labels = graph.component_labels()
        if labels.max() > 0:
            warnings.warn("graph is disconnected; unreachable pairs are excluded", stacklevel=3)


def flow_report(graph: Graph, deployment: MemoryDeployment, *, avoid_dest: bool = False) -> FlowReport:
    g = deployment.g
    n = graph.n
    eff = np.empty((n, n), dtype=np.int64)
    via = np.empty((n, n), dtype=np.int64)
    totals = np.zeros(2, dtype=np.int64)
    _all_pairs_effective(
        graph.indptr, graph.indices, deployment.mask(n), g.numerator, g.denominator, avoid_dest, True, eff, via, totals
    )
    dist = hop_distances(graph)
    _warn_disconnected(graph, dist)
    eff[dist == UNREACHABLE] = -1
    return FlowReport(n, g, dist, eff, via)


def network_gain(graph: Graph, deployment: MemoryDeployment, *, avoid_dest: bool = False) -> Fraction:
    """Ratio of total plain flow to total effective flow over all ordered pairs."""
    g = deployment.g
    n = graph.n
    dummy = np.empty((0, 0), dtype=np.int64)
    totals = np.zeros(2, dtype=np.int64)
    if not deployment.nodes:
        return Fraction(1)
    _warn_disconnected(graph)
    _all_pairs_effective(
        graph.indptr, graph.indices, deployment.mask(n), g.numerator, g.denominator, avoid_dest, False, dummy, dummy, totals
    )
    if totals[1] == 0:
        return Fraction(1)
    return Fraction(int(totals[0]) * g.numerator, int(totals[1]))


# --- memory-oblivious routing and core coverage ---------------------------


@numba.njit(cache=True, nogil=True)
def _plain_routing_totals(dist, mem, P, Q, best, totals):
    n = dist.shape[0]
    for S in range(n):
        for D in range(n):
            d = dist[S, D]
            if S == D or d < 0:
                continue
            a = -1
            for k in range(mem.shape[0]):
                mu = mem[k]
                if mu == S:
                    continue
                x = dist[S, mu]
                y = dist[mu, D]
                if x < 0 or y < 0 or x + y != d:
                    continue
                if a < 0 or (best and x > a) or (not best and x < a):
                    a = x
            totals[0] += d
            if a < 0:
                totals[1] += P * d
            else:
                totals[1] += Q * a + P * (d - a)


def plain_routing_gain(graph: Graph, deployment: MemoryDeployment, distances=None, rule: str = "first") -> Fraction:
    """Network-wide gain when flows keep their plain shortest paths.

    A flow only benefits from a memory lying on a shortest S-D path; it is
    decompressed there and continues plain. With rule "first" that is the
    on-path memory nearest to S, the first one the flow meets (the memory
    at S itself does not count). Rule "best" takes the on-path memory
    nearest to D instead.
    """
    if rule not in ("first", "best"):
        raise UsageError("rule must be 'first' or 'best'")
    if distances is None:
        distances = hop_distances(graph)
    g = deployment.g
    mem = np.array(sorted(deployment.nodes), dtype=np.int64)
    totals = np.zeros(2, dtype=np.int64)
    _plain_routing_totals(np.asarray(distances), mem, g.numerator, g.denominator, rule == "best", totals)
    if totals[1] == 0:
        return Fraction(1)
    return Fraction(int(totals[0]) * g.numerator, int(totals[1]))


@numba.njit(cache=True, nogil=True)
def _fppc_counts(indptr, indices, core, in_core, core_dist, counts):
    n = in_core.shape[0]
    row = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for S in range(n):
        if in_core[S]:
            continue
        _bfs_row(indptr, indices, S, row, queue)
        for D in range(n):
            d = row[D]
            if D == S or in_core[D] or d < 0:
                continue
            counts[1] += 1
            for k in range(core.shape[0]):
                x = core_dist[k, S]
                y = core_dist[k, D]
                if x >= 0 and y >= 0 and x + y == d:
                    counts[0] += 1
                    break


def fppc(graph: Graph, core, distances=None) -> float:
    """Fraction of ordered pairs outside the core with a shortest path through it.

    Endpoints never count as passing through; pairs with an endpoint in the
    core are left out, and an empty set of such pairs gives 1.0.
    """
    core = np.array(sorted(int(u) for u in getattr(core, "nodes", core)), dtype=np.int64)
    in_core = np.zeros(graph.n, dtype=np.bool_)
    in_core[core] = True
    counts = np.zeros(2, dtype=np.int64)
    if distances is not None:
        dist = np.asarray(distances)
        ok = (dist >= 0) & ~in_core[:, None] & ~in_core[None, :]
        np.fill_diagonal(ok, False)
        total = int(ok.sum())
        if total == 0:
            return 1.0
        hit = np.zeros_like(ok)
        for c in core:
            dc = dist[c]
            hit |= (dc[:, None] >= 0) & (dc[None, :] >= 0) & (dc[:, None] + dc[None, :] == dist)
        return float((hit & ok).sum() / total)
    core_dist = hop_distances(graph, core).astype(np.int64)
    _fppc_counts(graph.indptr, graph.indices, core, in_core, core_dist, counts)
    if counts[1] == 0:
        return 1.0
    return float(counts[0] / counts[1])
