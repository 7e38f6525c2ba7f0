"""netmemo command line: compression, gain benchmarks and network simulation.

Exit codes: 0 ok, 2 usage, 3 data or format problem, 4 memory mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

from netmemo.ctw import DEFAULT_DEPTH, ctw_decode, ctw_encode
from netmemo.errors import NetmemoError, UsageError
from netmemo.experiments import (
    VERSION_STRING,
    ExperimentConfig,
    output_header,
    pick_core,
    resolve_threads,
    run_bench_gain,
    run_simulation,
    write_outputs,
)
from netmemo.flowsim import MemoryDeployment, flow_report, fppc
from netmemo.graph import read_edgelist, read_weights, write_edgelist
from netmemo.lzdict import DEFAULT_WINDOW, lz_decode, lz_encode
from netmemo.rplg import RplgGraph, build_weights, sample_graph, topk_core
from netmemo.stream import ALGO_CTW, ALGO_NAMES, CodedStream


def _read(path) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    Path(path).write_bytes(data)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(_size(x)) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sizes, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


_UNITS = {"k": 1024, "m": 1024**2}


def _size(text: str) -> int:
    """Byte count with optional k/M suffix (binary units)."""
    t = text.strip().lower().removesuffix("b")
    if t and t[-1] in _UNITS:
        return int(float(t[:-1]) * _UNITS[t[-1]])
    return int(t)


def _report(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- compress / decompress -------------------------------------------------


def cmd_compress(args) -> int:
    data = _read(args.input)
    memory = _read(args.memory) if args.memory else b""
    if args.algo == "ctw":
        stream = ctw_encode(data, memory, args.depth, adapt=not args.frozen)
    else:
        stream = lz_encode(data, memory, args.window)
    out = args.output or (args.input + ".nmc" if args.input != "-" else "-")
    blob = stream.to_bytes()
    _write(out, blob)
    ratio = len(blob) / len(data) if data else 0.0
    _report(f"{args.algo}: original {len(data)} bytes, coded {len(blob)} bytes, ratio {ratio:.4f}")
    return 0


def cmd_decompress(args) -> int:
    blob = _read(args.input)
    memory = _read(args.memory) if args.memory else b""
    stream = CodedStream.from_bytes(blob)
    if stream.algorithm == ALGO_CTW:
        data = ctw_decode(stream, memory, args.depth, adapt=not args.frozen)
    else:
        data = lz_decode(stream, memory, args.window)
    if args.output:
        out = args.output
    elif args.input.endswith(".nmc"):
        out = args.input[: -len(".nmc")]
    else:
        out = "-"
    _write(out, data)
    ratio = len(blob) / len(data) if data else 0.0
    _report(
        f"{ALGO_NAMES[stream.algorithm]}: coded {len(blob)} bytes, original {len(data)} bytes, ratio {ratio:.4f}"
    )
    return 0


# --- experiments -----------------------------------------------------------


def _config(args, keys: dict[str, str]) -> ExperimentConfig:
    """Config file (if any) overridden by the flags the user actually set."""
    base = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load config {args.config}: {exc}") from None
        base = base.get("config", base)
    for attr, key in keys.items():
        v = getattr(args, attr, None)
        if v is not None:
            base[key] = v
    base["threads"] = resolve_threads(args.threads)
    return ExperimentConfig.from_dict({k: list(v) if isinstance(v, tuple) else v for k, v in base.items()})


def _emit(text: str, out_dir, name: str) -> None:
    if out_dir:
        for p in write_outputs(out_dir, {name: text}):
            _report(f"wrote {p}")
    else:
        sys.stdout.write(text)


def cmd_bench_gain(args) -> int:
    cfg = _config(
        args,
        {
            "seed": "seed",
            "codecs": "codecs",
            "n_grid": "n_grid",
            "m_grid": "m_grid",
            "trials": "trials",
            "depth": "depth",
            "window": "window_size",
            "out": "out_dir",
        },
    )
    corpus = _read(args.corpus) if args.corpus else None
    _emit(run_bench_gain(cfg, corpus), cfg.out_dir, "gain.csv")
    return 0


def cmd_gen_graph(args) -> int:
    seq = build_weights(args.N, args.beta, args.w_bar, args.delta)
    g = sample_graph(seq, seed=args.seed)
    weights = g.weights
    if args.giant:
        g, nodes = g.restrict_to_giant()
        weights = weights[nodes]
    write_edgelist(
        args.output,
        g,
        seed=args.seed,
        beta=args.beta,
        w_bar=args.w_bar,
        delta=seq.delta,
        weights=weights if args.weights else None,
    )
    _report(f"wrote {args.output}: {g.n} nodes, {g.m} edges")
    return 0


def _pairs_csv(report, config) -> str:
    lines = [output_header(config), "source,dest,d,deff,memory_id\n"]
    for s, d, dist, deff, mem in report.pair_rows():
        lines.append(f"{s},{d},{dist},{deff},{mem}\n")
    return "".join(lines)


def cmd_simulate(args) -> int:
    cfg = _config(
        args,
        {
            "seed": "seed",
            "N": "N",
            "betas": "betas",
            "w_bar": "w_bar",
            "delta": "delta",
            "g": "g",
            "core": "core_mode",
            "fractions": "core_fractions",
            "core_by": "core_by",
            "replicates": "replicates",
            "plain_rule": "plain_rule",
            "avoid_dest": "avoid_dest",
            "out": "out_dir",
            "timing": "timing",
        },
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = run_simulation(cfg)
    for w in caught:
        _report(f"warning: {w.message}")
    files = {"simulate.json": result.to_json(), "simulate.csv": result.to_csv()}
    if args.pairs:
        seq = build_weights(cfg.N, cfg.betas[0], cfg.w_bar, cfg.delta)
        giant, nodes = sample_graph(seq, seed=cfg.seed).restrict_to_giant()
        core = pick_core(giant, nodes, seq, cfg, cfg.core_fractions[0])
        report = flow_report(giant, MemoryDeployment(core.nodes, cfg.gain), avoid_dest=cfg.avoid_dest)
        files["pairs.csv"] = _pairs_csv(report, cfg)
    if cfg.out_dir:
        for p in write_outputs(cfg.out_dir, files):
            _report(f"wrote {p}")
    else:
        sys.stdout.write(files["simulate.json"])
    return 0


def cmd_fppc(args) -> int:
    if args.graph:
        g, meta = read_edgelist(args.graph)
        if args.by == "expected":
            weights_path = args.graph + ".weights"
            if not Path(weights_path).exists():
                raise UsageError(f"expected-degree ranking needs {weights_path}")
            g = RplgGraph(g.n, g.edges, read_weights(weights_path, g.n))
        n_total = g.n
    else:
        seq = build_weights(args.N, args.beta, args.w_bar, args.delta)
        full = sample_graph(seq, seed=args.seed)
        g, _ = full.restrict_to_giant()
        n_total = args.N
        meta = {"seed": args.seed, "beta": args.beta, "w_bar": args.w_bar, "delta": seq.delta}
    rows = []
    for frac in args.fractions:
        core = topk_core(g, frac, by=args.by, n_total=n_total)
        rows.append({"core_fraction": frac, "core_size": len(core), "fppc": fppc(g, core)})
    doc = {"version": VERSION_STRING, "graph": {"n": g.n, "m": g.m, **meta}, "by": args.by, "results": rows}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.csv:
        w = csv.DictWriter(sys.stdout, fieldnames=("core_fraction", "core_size", "fppc"), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        sys.stdout.write(text)
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netmemo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=VERSION_STRING)
    p.add_argument(
        "--threads", type=int, default=None, help="worker threads (default: $NETMEMO_THREADS or 1)"
    )
    # accepted after the subcommand too; SUPPRESS keeps a global value intact
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", parents=[common], help="encode a file, optionally against a memory file")
    c.add_argument("input", help="input file, or - for stdin")
    c.add_argument("-o", "--output", help="output file (default: INPUT.nmc, - for stdout)")
    c.add_argument("--memory", help="memory (priming) file shared with the decoder")
    c.add_argument("--algo", choices=("ctw", "lz"), default="ctw")
    c.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="CTW context depth in bits")
    c.add_argument("--window", type=_size, default=DEFAULT_WINDOW, help="LZ window size in bytes")
    c.add_argument("--frozen", action="store_true", help="CTW: do not adapt the model while coding")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", parents=[common], help="decode a .nmc file")
    d.add_argument("input")
    d.add_argument("-o", "--output", help="output file (default: INPUT without .nmc, else stdout)")
    d.add_argument("--memory")
    d.add_argument("--depth", type=int, default=None, help="check the stream's CTW depth")
    d.add_argument("--window", type=_size, default=None, help="check the stream's LZ window")
    d.add_argument("--frozen", action="store_true", help="CTW: stream was coded with a frozen model")
    d.set_defaults(func=cmd_decompress)

    b = sub.add_parser("bench-gain", parents=[common], help="g(n, m) table for the codecs")
    b.add_argument("--config", help="JSON config (a previous output's config block works)")
    b.add_argument("--seed", type=int)
    b.add_argument("--codec", dest="codecs", type=lambda s: tuple(s.split(",")), help="e.g. ctw,lz")
    b.add_argument("--n-grid", type=_int_list, help="target sizes, e.g. 100,1k,10k")
    b.add_argument("--m-grid", type=_int_list, help="memory sizes, e.g. 0,64k,1M,4M")
    b.add_argument("--trials", type=int)
    b.add_argument("--depth", type=int)
    b.add_argument("--window", type=_size)
    b.add_argument("--corpus", help="draw memory and targets from this file instead of a Markov source")
    b.add_argument("--out", help="output directory (default: CSV to stdout)")
    b.set_defaults(func=cmd_bench_gain)

    gg = sub.add_parser("gen-graph", parents=[common], help="sample a random power-law graph to an edge list")
    gg.add_argument("-o", "--output", required=True)
    gg.add_argument("--N", type=int, default=2000)
    gg.add_argument("--beta", type=float, default=2.5)
    gg.add_argument("--w-bar", type=float, default=1.5)
    gg.add_argument("--delta", type=float, default=None, help="maximum expected degree")
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--giant", action="store_true", help="keep only the giant component")
    gg.add_argument("--weights", action="store_true", help="also write OUTPUT.weights")
    gg.set_defaults(func=cmd_gen_graph)

    s = sub.add_parser("simulate", parents=[common], help="network-wide gain of memories on sampled graphs")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--beta", dest="betas", type=_float_list, help="one or more, e.g. 2.2,2.5,2.8")
    s.add_argument("--w-bar", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--g", type=str, help="compression gain, e.g. 3 or 5/2")
    s.add_argument("--core", choices=("topk", "theorem"))
    s.add_argument("--fractions", type=_float_list, help="top-k core fractions, e.g. 0.025,0.05,0.1")
    s.add_argument("--core-by", choices=("realized", "expected"))
    s.add_argument("--replicates", type=int, help="graphs per beta (default 5)")
    s.add_argument("--plain-rule", choices=("first", "best"))
    s.add_argument(
        "--avoid-dest",
        action="store_true",
        default=None,
        help="compressed legs may not pass through the destination",
    )
    s.add_argument("--pairs", action="store_true", help="also write pair-level CSV for the first cell")
    s.add_argument("--timing", action="store_true", default=None, help="record runtime_ms")
    s.add_argument("--out", help="output directory (default: JSON summary to stdout)")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fppc", parents=[common], help="fraction of shortest paths through a top-degree core")
    f.add_argument("--graph", help="edge-list file (default: sample one)")
    f.add_argument("--N", type=int, default=5000)
    f.add_argument("--beta", type=float, default=2.5)
    f.add_argument("--w-bar", type=float, default=1.5)
    f.add_argument("--delta", type=float, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--fractions", type=_float_list, default=(0.02,))
    f.add_argument("--by", choices=("realized", "expected"), default="realized")
    f.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    f.set_defaults(func=cmd_fppc)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("compress", "decompress", "gen-graph", "fppc"):
            resolve_threads(args.threads)
        return args.func(args)
    except NetmemoError as exc:
        print(f"netmemo: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
