"""Random power-law graphs (Fan-Lu expected-degree model) and core sizing.

Node i (0-based) carries expected degree ``c * (i0' + i) ** (-1/(beta-1))``
with ``i0' = ceil(i0)``, so node 0 is the heaviest and exactly N nodes
exist. Every pair is joined independently with probability
``min(1, w_i * w_j * rho)``, ``rho = 1 / sum(w)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from netmemo.errors import UsageError
from netmemo.graph import Graph


class DegenerateCoreWarning(UserWarning):
    """The core threshold multiplier is <= 1, so every node qualifies."""


@dataclass(frozen=True, eq=False)
class ExpectedDegreeSequence:
    N: int
    beta: float
    w_bar: float
    delta: float
    c: float
    i0: float
    weights: np.ndarray = field(repr=False)

    @property
    def rho(self) -> float:
        return 1.0 / float(self.weights.sum())

    @property
    def indices(self) -> np.ndarray:
        """Real-valued index of each node in the weight formula."""
        start = max(1, math.ceil(self.i0))
        return np.arange(start, start + self.N, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class RplgGraph(Graph):
    weights: np.ndarray = field(default=None, repr=False)
    seed: int = 0
    beta: float = 0.0
    w_bar: float = 0.0
    delta: float = 0.0
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "labels", self.component_labels())

    def giant(self) -> np.ndarray:
        return giant_component(self)

    def restrict_to_giant(self) -> tuple[RplgGraph, np.ndarray]:
        """Giant component relabeled 0..k-1 in ascending original id, with the id map."""
        sub, nodes = self.induced(self.giant())
        w = None if self.weights is None else self.weights[nodes]
        return (
            RplgGraph(sub.n, sub.edges, w, self.seed, self.beta, self.w_bar, self.delta),
            nodes,
        )


@dataclass(frozen=True)
class CoreSpec:
    nodes: tuple[int, ...]
    mode: str
    l: float | None = None
    gamma: float | None = None
    w_min: float | None = None
    fraction: float | None = None

    def __len__(self) -> int:
        return len(self.nodes)


def natural_delta(N: int, beta: float, w_bar: float) -> float:
    """The largest expected degree the formula allows: c, which puts i0 at exactly 1."""
    return (beta - 2) / (beta - 1) * w_bar * N ** (1 / (beta - 1))


def build_weights(N: int, beta: float, w_bar: float, delta: float | None = None) -> ExpectedDegreeSequence:
    """Weights for N nodes; `delta=None` means no cutoff beyond the formula's own (i0 = 1)."""
    if delta is None:
        delta = max(natural_delta(N, beta, w_bar), w_bar)
    if N < 2:
        raise UsageError("N must be at least 2")
    if not 2.0 < beta < 3.0:
        raise UsageError(f"beta must lie in (2, 3), got {beta}")
    if not w_bar > 1.0:
        raise UsageError(f"w_bar must exceed 1, got {w_bar}")
    if delta < w_bar:
        raise UsageError("delta must be at least w_bar")
    c = (beta - 2) / (beta - 1) * w_bar * N ** (1 / (beta - 1))
    i0 = N * (w_bar * (beta - 2) / (delta * (beta - 1))) ** (beta - 1)
    start = max(1, math.ceil(i0))
    idx = np.arange(start, start + N, dtype=np.float64)
    weights = c * idx ** (-1 / (beta - 1))
    return ExpectedDegreeSequence(N, beta, w_bar, delta, c, i0, weights)


def sample_graph(seq: ExpectedDegreeSequence | np.ndarray, seed=0) -> RplgGraph:
    """Independent Bernoulli edge per pair with probability min(1, w_i w_j rho)."""
    if isinstance(seq, ExpectedDegreeSequence):
        w = seq.weights
        meta = (seq.beta, seq.w_bar, seq.delta)
    else:
        w = np.asarray(seq, dtype=np.float64)
        meta = (0.0, 0.0, 0.0)
    n = w.shape[0]
    total = w.sum()
    rng = np.random.default_rng(seed)
    chunks = []
    if total > 0:
        rho = 1.0 / total
        for i in range(n - 1):
            p = np.minimum(1.0, w[i] * w[i + 1 :] * rho)
            hit = np.flatnonzero(rng.random(n - i - 1) < p)
            if hit.size:
                chunks.append(np.column_stack([np.full(hit.size, i), hit + i + 1]))
    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    seed_val = seed if isinstance(seed, (int, np.integer)) else 0
    return RplgGraph(n, edges, w.copy(), int(seed_val), *meta)


def giant_component(g: Graph) -> np.ndarray:
    """Nodes of the largest component; ties go to the component with the smallest node id."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    labels = g.labels if isinstance(g, RplgGraph) else g.component_labels()
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def component_sizes(g: Graph) -> np.ndarray:
    """Component sizes, largest first."""
    labels = g.labels if isinstance(g, RplgGraph) else g.component_labels()
    return np.sort(np.bincount(labels))[::-1]


def core_gamma(beta: float) -> float:
    return (1 - 1 / (beta - 1)) ** 2 * (beta - 1) / (3 - beta)


def solve_core_threshold(beta: float, w_bar: float) -> tuple[float, float]:
    """(gamma, l) with l the root of l**(3-beta) = 1 / (w_bar * gamma)."""
    if not 2.0 < beta < 3.0:
        raise UsageError(f"beta must lie in (2, 3), got {beta}")
    if not w_bar > 0:
        raise UsageError("w_bar must be positive")
    gamma = core_gamma(beta)
    l = (1.0 / (w_bar * gamma)) ** (1.0 / (3.0 - beta))
    if l <= 1.0:
        warnings.warn(
            f"core threshold l={l:.4g} <= 1: every node is in the core", DegenerateCoreWarning, stacklevel=2
        )
    return gamma, l


def theorem_core(weights, gamma_l: tuple[float, float]) -> CoreSpec:
    """Nodes whose expected degree exceeds l * w_min."""
    if isinstance(weights, (ExpectedDegreeSequence, RplgGraph)):
        weights = weights.weights
    w = np.asarray(weights, dtype=np.float64)
    gamma, l = gamma_l
    w_min = float(w.min())
    if l <= 1.0:
        warnings.warn(
            f"core threshold l={l:.4g} <= 1: every node is in the core", DegenerateCoreWarning, stacklevel=2
        )
        nodes = np.arange(w.shape[0])
    else:
        nodes = np.flatnonzero(w > l * w_min)
    return CoreSpec(tuple(int(u) for u in nodes), "theorem", l=l, gamma=gamma, w_min=w_min)


def topk_core(g: Graph, fraction: float, by: str = "realized", n_total: int | None = None) -> CoreSpec:
    """ceil(fraction * n_total) nodes of highest degree, ties to the smaller node id.

    `n_total` defaults to the node count of `g`; pass the size of the
    generated graph to size the core against it while choosing from a
    restricted (giant-component) graph. `by` selects realized degree or
    expected degree (`weights`).
    """
    if not 0.0 < fraction <= 1.0:
        raise UsageError("fraction must lie in (0, 1]")
    total = g.n if n_total is None else int(n_total)
    k = min(g.n, math.ceil(round(fraction * total, 9)))
    if by == "realized":
        score = g.degrees().astype(np.float64)
    elif by == "expected":
        if getattr(g, "weights", None) is None:
            raise UsageError("graph carries no expected weights")
        score = np.asarray(g.weights, dtype=np.float64)
    else:
        raise UsageError(f"unknown ranking {by!r}")
    order = np.lexsort((np.arange(g.n), -score))
    return CoreSpec(tuple(sorted(int(u) for u in order[:k])), f"topk-{by}", fraction=fraction)


def induced_weights(subset_weights, total_weight: float | None = None) -> np.ndarray:
    """Expected degrees inside the induced subgraph: w * vol(U) / vol(G)."""
    w = np.asarray(subset_weights, dtype=np.float64)
    total = w.sum() if total_weight is None else float(total_weight)
    return w * (w.sum() / total)


def giant_ratio(weights) -> float:
    """sum(w**2) / sum(w); below 1 the graph almost surely has no giant component."""
    w = np.asarray(weights, dtype=np.float64)
    return float((w**2).sum() / w.sum())


def no_giant_check(subset_weights, total_weight: float | None = None) -> bool:
    """Induced-subgraph weights first, then the second-moment test."""
    if len(subset_weights) == 0:
        raise UsageError("subset must be nonempty")
    return giant_ratio(induced_weights(subset_weights, total_weight)) < 1.0


def periphery_sums(N: int, beta: float, w_bar: float, l: float) -> dict[str, float]:
    """Closed-form volumes of the low-degree set U_l and of its induced weights."""
    gamma = core_gamma(beta)
    shrink = 1 - l ** (2 - beta)
    return {
        "vol": N * w_bar * shrink,
        "vol2": N * w_bar**2 * gamma * l ** (3 - beta),
        "induced_vol": N * w_bar * shrink**2,
        "induced_vol2": N * w_bar**2 * gamma * l ** (3 - beta) * shrink**2,
    }


def periphery_ratio_analytic(N: int, beta: float, w_bar: float, l: float) -> float:
    s = periphery_sums(N, beta, w_bar, l)
    return s["induced_vol2"] / s["induced_vol"]
