"""Command-line entry point and benchmark harness.

Subcommands: ``heistreame``, ``freighte``, ``hash`` (partitioners),
``evaluate`` (metrics from an assignment file), ``convert`` (text to
binary), ``bench`` (grid of runs with per-k geometric means), and
``generate`` (synthetic power-law graphs).

Exit codes: 0 success, 2 usage, 3 I/O or parse failure, 4 balance
infeasibility.  Runtime in summaries includes parsing, which is also
reported separately as ``parse_ms`` so either accounting can be derived.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from edgestream.errors import BalanceInfeasibleError, EdgeStreamError, GraphFormatError
from edgestream.graph_io import convert_text_to_binary, open_graph
from edgestream.metrics import (
    MetricsReport,
    balance_report,
    hash_partition_array,
    peak_rss_bytes,
    replication_factor,
)
from edgestream.model import ModelMode
from edgestream.multilevel import AlphaPolicy
from edgestream.rmat import generate_rmat

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BALANCE = 4

_DELTA_PRESETS = {"32x": 32 * 1024, "256x": 256 * 1024}


def parse_delta(text: str) -> int:
    if text in _DELTA_PRESETS:
        value = _DELTA_PRESETS[text]
    elif text.endswith("x"):
        value = int(text[:-1]) * 1024
    else:
        value = int(text)
    if value < 1:
        raise ValueError(f"buffer size must be >= 1, got {value}")
    return value


def _int_at_least(minval: int):
    def parse(text: str) -> int:
        value = int(text)
        if value < minval:
            raise ValueError(f"must be >= {minval}, got {value}")
        return value

    return parse


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise ValueError(f"must be >= 0, got {value}")
    return value


def format_assignment(assignments: np.ndarray, compact: bool = False) -> bytes:
    """Render assignments as the text file bytes: ``u v block`` triples in
    commit order, or one block id per line in the compact variant."""
    if assignments.shape[0] == 0:
        return b""
    if compact:
        body = "\n".join(map(str, assignments[:, 2].tolist()))
    else:
        body = "\n".join(f"{u} {v} {b}" for u, v, b in assignments.tolist())
    return (body + "\n").encode("ascii")


def read_assignment(path: str | Path) -> np.ndarray:
    """Read a triples-format assignment file back into an (m, 3) array."""
    data = Path(path).read_text(encoding="ascii")
    if not data.strip():
        return np.empty((0, 3), dtype=np.int64)
    flat = np.array(data.split(), dtype=np.int64)
    if flat.size % 3:
        raise GraphFormatError(f"{path}: expected 'u v block' triples")
    return flat.reshape(-1, 3)


def summary_dict(
    algorithm: str, graph: str | Path, config, report: MetricsReport
) -> dict:
    return {
        "algorithm": algorithm,
        "graph": Path(graph).name,
        "k": config.k,
        "delta": config.delta,
        "rf": report.rf,
        "max_load": report.max_load,
        "l_max": report.l_max,
        "runtime_ms": report.runtime_ms,
        "peak_rss_bytes": report.peak_rss_bytes,
        "seed": config.seed,
        "parse_ms": report.parse_ms,
    }


def write_outputs(args, algorithm: str, config, assignments: np.ndarray, report: MetricsReport) -> dict:
    if args.output:
        Path(args.output).write_bytes(format_assignment(assignments, compact=args.compact))
    summary = summary_dict(algorithm, config.graph, config, report)
    line = json.dumps(summary)
    if args.summary:
        Path(args.summary).write_text(line + "\n", encoding="ascii")
    print(line)
    return summary


def hash_partition_stream(config) -> tuple[np.ndarray, MetricsReport]:
    """Hashing baseline: stream the graph once, assign each edge by the
    deterministic hash of its canonical endpoint pair.  No balance cap is
    enforced; quality expectations are purely statistical."""
    t0 = time.perf_counter()
    stream = open_graph(config.graph)
    n, m = stream.header.n, stream.header.m
    out = np.empty((m, 3), dtype=np.int64)
    ptr = 0
    for u in range(1, n + 1):
        row = next(stream)
        vs = row[row > u]
        cnt = int(vs.size)
        if cnt:
            out[ptr : ptr + cnt, 0] = u
            out[ptr : ptr + cnt, 1] = vs
            ptr += cnt
    if ptr != m:
        raise EdgeStreamError(f"saw {ptr} edges, header announced {m}")
    out[:, 2] = hash_partition_array(out[:, 0], out[:, 1], config.k, config.seed)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    rf, replica_total = replication_factor(out, n, config.k) if m else (0.0, 0)
    sizes = np.bincount(out[:, 2], minlength=config.k) if m else np.zeros(config.k, np.int64)
    max_load, l_max, _ = balance_report(sizes, m, config.k, config.eps)
    report = MetricsReport(
        rf=rf,
        replica_total=replica_total,
        block_sizes=sizes.astype(np.int64),
        max_load=max_load,
        l_max=l_max,
        imbalance=(max_load * config.k / m - 1.0) if m else 0.0,
        runtime_ms=runtime_ms,
        parse_ms=stream.parse_seconds * 1000.0,
        peak_rss_bytes=peak_rss_bytes(),
    )
    stream.close()
    return out, report


def _add_partition_flags(sub: argparse.ArgumentParser, with_model_flags: bool = True) -> None:
    sub.add_argument("--graph", required=True, help="input graph (METIS text or binary)")
    sub.add_argument("--k", type=_int_at_least(1), required=True, help="number of blocks")
    sub.add_argument("--delta", type=parse_delta, default=32768,
                     help="buffer size (int, or presets 32x / 256x)")
    sub.add_argument("--eps", type=_nonneg_float, default=0.03, help="allowed imbalance")
    if with_model_flags:
        sub.add_argument("--mode", type=ModelMode.parse, default=ModelMode("minimal"),
                         help="model mode: minimal | maximal | rsubset:R")
        sub.add_argument("--alpha", type=AlphaPolicy.parse, default=AlphaPolicy("batch"),
                         help="alpha policy: batch | dynamic | static:Y")
        sub.add_argument("--rounds", type=_int_at_least(1), default=3, help="label propagation rounds")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output", default=None, help="assignment file to write")
    sub.add_argument("--summary", default=None, help="single-line JSON summary file")
    sub.add_argument("--compact", action="store_true",
                     help="write one block id per line instead of 'u v block' triples")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgestream",
                                     description="streaming edge partitioning toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("heistreame", help="buffered multilevel partitioner")
    _add_partition_flags(p)
    p.add_argument("--full-net-record", action="store_true", help=argparse.SUPPRESS)

    p = subs.add_parser("freighte", help="one-pass dual-hypergraph partitioner")
    _add_partition_flags(p)
    p.add_argument("--full-net-record", action="store_true",
                   help="keep the full block set per net instead of the most recent block")

    p = subs.add_parser("hash", help="hashing baseline")
    _add_partition_flags(p, with_model_flags=False)

    p = subs.add_parser("evaluate", help="metrics from an assignment file")
    p.add_argument("--graph", required=True)
    p.add_argument("--assignment", required=True, help="triples-format assignment file")
    p.add_argument("--k", type=_int_at_least(1), required=True)
    p.add_argument("--eps", type=_nonneg_float, default=0.03)
    p.add_argument("--summary", default=None)

    p = subs.add_parser("convert", help="translate METIS text to the binary format")
    p.add_argument("--graph", required=True, help="input METIS text file")
    p.add_argument("--output", required=True, help="binary file to write")

    p = subs.add_parser("bench", help="benchmark grid with per-k geometric means")
    p.add_argument("--graphs", required=True, help="directory of input graphs")
    p.add_argument("--ks", required=True, help="comma-separated block counts")
    p.add_argument("--algos", default="heistreame,freighte,hash")
    p.add_argument("--delta", type=parse_delta, default=32768)
    p.add_argument("--eps", type=_nonneg_float, default=0.03)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="TSV file to write (default stdout)")

    p = subs.add_parser("generate", help="write a synthetic power-law graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--a", type=float, default=0.57)
    p.add_argument("--b", type=float, default=0.19)
    p.add_argument("--c", type=float, default=0.19)

    return parser


def _make_config(args, with_model_flags: bool = True):
    from edgestream.heistreame import RunConfig

    kwargs = dict(
        graph=args.graph,
        k=args.k,
        delta=args.delta,
        eps=args.eps,
        seed=args.seed,
        output=args.output,
        summary=args.summary,
    )
    if with_model_flags:
        kwargs.update(mode=args.mode, alpha=args.alpha, rounds=args.rounds)
    if getattr(args, "full_net_record", False):
        kwargs.update(freighte_full_record=True)
    return RunConfig(**kwargs)


def _cmd_heistreame(args) -> int:
    from edgestream.heistreame import partition_stream

    config = _make_config(args)
    assignments, report = partition_stream(config)
    write_outputs(args, "heistreame", config, assignments, report)
    return EXIT_OK


def _cmd_freighte(args) -> int:
    from edgestream.freighte import freighte_partition_stream

    config = _make_config(args)
    assignments, report = freighte_partition_stream(config)
    write_outputs(args, "freighte", config, assignments, report)
    return EXIT_OK


def _cmd_hash(args) -> int:
    from edgestream.heistreame import RunConfig

    config = RunConfig(graph=args.graph, k=args.k, eps=args.eps, seed=args.seed,
                       output=args.output, summary=args.summary)
    assignments, report = hash_partition_stream(config)
    write_outputs(args, "hash", config, assignments, report)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    stream = open_graph(args.graph)
    n, m = stream.header.n, stream.header.m
    stream.close()
    assignments = read_assignment(args.assignment)
    if assignments.shape[0] != m:
        raise EdgeStreamError(
            f"assignment holds {assignments.shape[0]} edges, graph has {m}"
        )
    rf, replica_total = replication_factor(assignments, n, args.k)
    sizes = (
        np.bincount(assignments[:, 2], minlength=args.k)
        if m
        else np.zeros(args.k, np.int64)
    )
    max_load, l_max, ok = balance_report(sizes, m, args.k, args.eps)
    summary = {
        "algorithm": "evaluate",
        "graph": Path(args.graph).name,
        "k": args.k,
        "rf": rf,
        "replica_total": replica_total,
        "max_load": max_load,
        "l_max": l_max,
        "balanced": bool(ok),
        "m": m,
        "n": n,
    }
    line = json.dumps(summary)
    if args.summary:
        Path(args.summary).write_text(line + "\n", encoding="ascii")
    print(line)
    return EXIT_OK


def _cmd_convert(args) -> int:
    header = convert_text_to_binary(args.graph, args.output)
    print(json.dumps({"n": header.n, "m": header.m, "output": str(args.output)}))
    return EXIT_OK


def _cmd_generate(args) -> int:
    header = generate_rmat(args.output, args.n, args.m, seed=args.seed,
                           a=args.a, b=args.b, c=args.c)
    print(json.dumps({"n": header.n, "m": header.m, "output": str(args.output)}))
    return EXIT_OK


def run_single(graph: Path, algo: str, k: int, delta: int, eps: float, seed: int,
               summary_path: Path) -> dict:
    """Run one configuration in a fresh process so peak RSS is per-run."""
    cmd = [
        sys.executable, "-m", "edgestream", algo,
        "--graph", str(graph), "--k", str(k), "--eps", str(eps),
        "--seed", str(seed), "--summary", str(summary_path),
    ]
    if algo != "hash":
        cmd += ["--delta", str(delta)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise EdgeStreamError(
            f"bench run failed ({' '.join(cmd)}): rc={proc.returncode}\n{proc.stderr}"
        )
    return json.loads(summary_path.read_text())


def geometric_mean(values) -> float:
    vals = [v for v in values if v is not None]
    if not vals:
        return 0.0
    return math.exp(sum(math.log(max(v, 1e-300)) for v in vals) / len(vals))


def _cmd_bench(args) -> int:
    graph_dir = Path(args.graphs)
    graphs = sorted(
        p for p in graph_dir.iterdir()
        if p.is_file() and p.suffix in (".metis", ".graph", ".bin", ".txt")
    )
    if not graphs:
        raise EdgeStreamError(f"no graph files in {graph_dir}")
    ks = [int(t) for t in args.ks.split(",") if t]
    algos = [t for t in args.algos.split(",") if t]
    header = "graph\tk\talgo\tseed\trf\truntime_ms\tparse_ms\tpeak_rss_bytes"
    rows = [header]
    results: list[dict] = []
    with tempfile.TemporaryDirectory() as tmp:
        for graph in graphs:
            for k in ks:
                for algo in algos:
                    summary = run_single(
                        graph, algo, k, args.delta, args.eps, args.seed,
                        Path(tmp) / "summary.json",
                    )
                    results.append(summary)
                    rows.append(
                        f"{graph.name}\t{k}\t{algo}\t{args.seed}\t{summary['rf']:.6f}"
                        f"\t{summary['runtime_ms']:.3f}\t{summary['parse_ms']:.3f}"
                        f"\t{summary['peak_rss_bytes']}"
                    )
    for k in ks:
        for algo in algos:
            sel = [r for r in results if r["k"] == k and r["algorithm"] == algo]
            rows.append(
                f"geomean\t{k}\t{algo}\t{args.seed}"
                f"\t{geometric_mean(r['rf'] for r in sel):.6f}"
                f"\t{geometric_mean(r['runtime_ms'] for r in sel):.3f}"
                f"\t{geometric_mean(r['parse_ms'] for r in sel):.3f}"
                f"\t{geometric_mean(r['peak_rss_bytes'] for r in sel):.0f}"
            )
    text = "\n".join(rows) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "heistreame": _cmd_heistreame,
    "freighte": _cmd_freighte,
    "hash": _cmd_hash,
    "evaluate": _cmd_evaluate,
    "convert": _cmd_convert,
    "bench": _cmd_bench,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        cause = getattr(exc, "cause", exc)
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, BalanceInfeasibleError):
            return EXIT_BALANCE
        if isinstance(cause, (GraphFormatError, OSError, EdgeStreamError, ValueError)):
            return EXIT_IO
        raise
