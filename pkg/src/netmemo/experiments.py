"""Experiment configuration and the two sweep drivers behind the CLI.

Every output carries the full configuration and the package version, and
nothing in it depends on wall-clock time or thread count unless timing is
requested explicitly.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from netmemo import __version__
from netmemo.errors import UsageError
from netmemo.flowsim import (
    MemoryDeployment,
    as_fraction,
    fppc,
    hop_distances,
    network_gain,
    plain_routing_gain,
)
from netmemo.gainbench import CODECS, MarkovSource, gain_csv, gain_curve
from netmemo.rplg import (
    CoreSpec,
    DegenerateCoreWarning,
    build_weights,
    sample_graph,
    solve_core_threshold,
    theorem_core,
    topk_core,
)

VERSION_STRING = f"netmemo v{__version__}"

SIM_COLUMNS = (
    "beta",
    "core_fraction",
    "replicate",
    "seed",
    "n_giant",
    "core_size",
    "g",
    "G",
    "G_plain",
    "fppc",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run.

    Graph replicate r uses seed ``seed + r``. `delta = None` leaves the
    maximum expected degree at the formula's natural value (i0 = 1). In
    "topk" mode the core holds ceil(fraction * N) of the giant component's
    highest-degree nodes, N being the generated node count.
    """

    seed: int = 0
    N: int = 2000
    betas: tuple[float, ...] = (2.5,)
    w_bar: float = 1.5
    delta: float | None = None
    g: str = "3"
    core_mode: str = "topk"
    core_fractions: tuple[float, ...] = (0.025,)
    core_by: str = "realized"
    replicates: int = 5
    plain_rule: str = "first"
    avoid_dest: bool = False
    with_fppc: bool = True
    codecs: tuple[str, ...] = CODECS
    n_grid: tuple[int, ...] = (100, 1000, 10_000, 100_000)
    m_grid: tuple[int, ...] = (0, 65536, 1 << 20, 4 << 20)
    trials: int = 10
    source_order: int = 1
    source_p_one: tuple[float, ...] = (0.1, 0.9)
    depth: int = 16
    window_size: int = 32768
    threads: int = 1
    out_dir: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.core_mode not in ("topk", "theorem"):
            raise UsageError("core mode must be 'topk' or 'theorem'")
        if self.replicates < 1 or self.threads < 1:
            raise UsageError("replicates and threads must be >= 1")
        as_fraction(self.g)
        for c in self.codecs:
            if c not in CODECS:
                raise UsageError(f"unknown codec {c!r}")

    @property
    def gain(self) -> Fraction:
        return as_fraction(self.g)

    def to_dict(self) -> dict:
        """Config echo; fields that cannot change results (threads, out_dir) are left out."""
        d = asdict(self)
        for k in ("threads", "out_dir"):
            d.pop(k)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for k, v in d.items():
            if k not in known:
                raise UsageError(f"unknown config key {k!r}")
            kw[k] = tuple(v) if isinstance(v, list) else v
        return cls(**kw)


def resolve_threads(threads: int | None) -> int:
    """Explicit value first, then NETMEMO_THREADS, then 1."""
    if threads is None:
        env = os.environ.get("NETMEMO_THREADS", "")
        try:
            threads = int(env) if env else 1
        except ValueError:
            raise UsageError(f"NETMEMO_THREADS must be an integer, got {env!r}") from None
    if threads < 1:
        raise UsageError("thread count must be >= 1")
    return threads


def _map(fn, items, threads: int):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def output_header(config: ExperimentConfig) -> str:
    """Comment line put in front of every CSV."""
    return f"# {VERSION_STRING} config={json.dumps(config.to_dict(), sort_keys=True)}\n"


# --- network simulation ----------------------------------------------------


def pick_core(giant, nodes, seq, config: ExperimentConfig, fraction: float | None) -> CoreSpec:
    """Core inside the relabeled giant component `giant` (original ids `nodes`).

    The "theorem" core mode thresholds on the full weight sequence, then keeps the
    core nodes that lie in the giant component.
    """
    if config.core_mode == "theorem":
        full = theorem_core(seq, solve_core_threshold(seq.beta, seq.w_bar))
        local = np.flatnonzero(np.isin(nodes, np.asarray(full.nodes, dtype=np.int64)))
        return CoreSpec(tuple(int(u) for u in local), full.mode, full.l, full.gamma, full.w_min)
    return topk_core(giant, fraction, by=config.core_by, n_total=config.N)


def _simulate_one(config: ExperimentConfig, beta: float, replicate: int) -> list[dict]:
    seed = config.seed + replicate
    seq = build_weights(config.N, beta, config.w_bar, config.delta)
    giant, nodes = sample_graph(seq, seed=seed).restrict_to_giant()
    dist = hop_distances(giant)
    fractions = config.core_fractions if config.core_mode == "topk" else (None,)
    rows = []
    for frac in fractions:
        t0 = time.perf_counter()
        core = pick_core(giant, nodes, seq, config, frac)
        dep = MemoryDeployment(core.nodes, config.gain)
        G = network_gain(giant, dep, avoid_dest=config.avoid_dest)
        G_plain = plain_routing_gain(giant, dep, dist, rule=config.plain_rule)
        row = {
            "beta": beta,
            "core_fraction": frac if frac is not None else len(core) / config.N,
            "replicate": replicate,
            "seed": seed,
            "n_giant": giant.n,
            "core_size": len(core),
            "g": str(config.gain),
            "G": float(G),
            "G_plain": float(G_plain),
            "fppc": fppc(giant, core, dist) if config.with_fppc else None,
        }
        if config.timing:
            row["runtime_ms"] = round(1000 * (time.perf_counter() - t0), 3)
        rows.append(row)
    return rows


@dataclass
class SimulationResult:
    config: ExperimentConfig
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> list[dict]:
        """Mean over replicates for every (beta, core_fraction) cell."""
        cells: dict[tuple, list[dict]] = {}
        for r in self.rows:
            cells.setdefault((r["beta"], r["core_fraction"] if self.config.core_mode == "topk" else None), []).append(r)
        out = []
        for (beta, frac), rs in cells.items():
            entry = {
                "N": self.config.N,
                "beta": beta,
                "seed": self.config.seed,
                "replicates": len(rs),
                "core_mode": self.config.core_mode,
                "core_fraction": frac if frac is not None else float(np.mean([r["core_fraction"] for r in rs])),
                "core_size": float(np.mean([r["core_size"] for r in rs])),
                "g": str(self.config.gain),
                "G": float(np.mean([r["G"] for r in rs])),
                "G_plain": float(np.mean([r["G_plain"] for r in rs])),
                "fppc": float(np.mean([r["fppc"] for r in rs])) if self.config.with_fppc else None,
                "runtime_ms": (
                    round(float(sum(r["runtime_ms"] for r in rs)), 3) if self.config.timing else None
                ),
            }
            out.append(entry)
        return out

    def to_json(self) -> str:
        doc = {"version": VERSION_STRING, "config": self.config.to_dict(), "summary": self.summary()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(output_header(self.config))
        cols = SIM_COLUMNS + (("runtime_ms",) if self.config.timing else ())
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if r.get(k) is None else r[k]) for k in cols})
        return buf.getvalue()


def run_simulation(config: ExperimentConfig) -> SimulationResult:
    """Sample `replicates` graphs per beta, place memories, measure G, plain G and FPPC."""
    jobs = [(beta, r) for beta in config.betas for r in range(config.replicates)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateCoreWarning)
        parts = _map(lambda job: _simulate_one(config, *job), jobs, config.threads)
    for msg in dict.fromkeys(str(w.message) for w in caught if issubclass(w.category, DegenerateCoreWarning)):
        warnings.warn(msg, DegenerateCoreWarning, stacklevel=2)
    return SimulationResult(config, [row for part in parts for row in part])


# --- gain benchmark --------------------------------------------------------


def run_bench_gain(config: ExperimentConfig, corpus: bytes | None = None) -> str:
    """g(n, m) table for every configured codec, as CSV with the config echo."""
    source = corpus if corpus is not None else MarkovSource(config.source_order, tuple(config.source_p_one), config.seed)

    def one(codec):
        return gain_curve(
            source,
            codec,
            config.n_grid,
            config.m_grid,
            config.trials,
            seed=config.seed,
            depth=config.depth,
            window_size=config.window_size,
        )

    reports = [r for part in _map(one, config.codecs, config.threads) for r in part]
    return output_header(config) + gain_csv(reports)


def write_outputs(out_dir, files: dict[str, str]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths


def count_inversions(values, increasing: bool = True) -> int:
    """Number of adjacent inversions in `values` against the wanted direction."""
    v = list(values)
    bad = 0
    for a, b in zip(v, v[1:]):
        if (b < a) if increasing else (b > a):
            bad += 1
    return bad


__all__ = [
    "ExperimentConfig",
    "SimulationResult",
    "VERSION_STRING",
    "resolve_threads",
    "run_simulation",
    "run_bench_gain",
    "write_outputs",
    "count_inversions",
]
