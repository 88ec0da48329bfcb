"""Command-line entry point: code generation, sweeps and threshold estimates."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .campaign import (
    DEFAULT_BLOCK,
    DEFAULT_MAX_FAILURES,
    ConfigError,
    SweepConfig,
    bracket_dict,
    rank_classical_codes,
    read_results,
    run_sweep,
    threshold_table,
    write_code_file,
)
from .graph import GraphGenerationError, TannerGraph, configuration_model, girth, improve_girth
from .hybrid import T_MAX

log = logging.getLogger("hgpdecode")

DECODERS = ("ssf", "iterbp-ssf", "heurbp", "heurbp-ssf")


def float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4g}"


def _add_campaign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("codes", nargs="+", help="code files written by 'product'")
    p.add_argument("--p-grid", type=float_list, required=True, help="comma-separated physical error rates")
    p.add_argument("--trials", type=int, default=1000, help="maximum trials per cell")
    p.add_argument("--max-failures", type=int, default=DEFAULT_MAX_FAILURES,
                   help="stop a cell once this many failures are seen; 0 disables")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", help="CSV file to append results to (a .json mirror is kept alongside)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sector", choices=("x", "z"), default="x")
    p.add_argument("--t-max", type=int, default=T_MAX, help="BP rounds bound for iterbp-ssf")
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK, help="trials per work unit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hgpdecode", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-code", help="sample a biregular Tanner graph and remove short cycles")
    g.add_argument("--n", type=int, required=True, help="variable nodes")
    g.add_argument("--m", type=int, help="check nodes (default n*dv/dc)")
    g.add_argument("--dv", type=int, required=True)
    g.add_argument("--dc", type=int, required=True)
    g.add_argument("--girth", type=int, default=6, help="target girth; 4 skips improvement")
    g.add_argument("--max-swaps", type=int, default=10_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    pr = sub.add_parser("product", help="graph file -> hypergraph product code file")
    pr.add_argument("graph")
    pr.add_argument("--id", dest="code_id", help="code id (default: output file stem)")
    pr.add_argument("--out", required=True)

    r = sub.add_parser("rank", help="rank graphs by flip-decoder block error rate")
    r.add_argument("graphs", nargs="+")
    r.add_argument("--p", type=float, required=True)
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", help="write the ranking as JSON")

    s = sub.add_parser("sweep", help="WER with exact syndromes")
    _add_campaign_flags(s)
    s.add_argument("--decoder", choices=DECODERS, default="iterbp-ssf")

    ns = sub.add_parser("noisy-sweep", help="WER after noisy syndrome rounds")
    _add_campaign_flags(ns)
    ns.add_argument("--decoder", choices=DECODERS, default="heurbp", help="decoder for the noisy rounds")
    ns.add_argument("--final-decoder", choices=DECODERS, default="heurbp-ssf", help="decoder for the exact last round")
    ns.add_argument("--rounds", type=int_list, required=True, help="comma-separated numbers of noisy rounds T")
    ns.add_argument("--p-syndrome", type=float, help="syndrome bit flip rate (default: p)")

    t = sub.add_parser("threshold", help="threshold brackets from result files")
    t.add_argument("results", nargs="+", help="CSV files written by sweep or noisy-sweep")
    t.add_argument("--decoder", help="only use rows with this decoder label")
    t.add_argument("--out", help="write brackets as JSON")
    return parser


def cmd_gen_code(args) -> int:
    if args.m is None:
        if (args.n * args.dv) % args.dc:
            raise ConfigError("n*dv must be divisible by dc when --m is omitted")
        args.m = args.n * args.dv // args.dc
    rng = np.random.default_rng(args.seed)
    graph = configuration_model(args.n, args.m, args.dv, args.dc, rng)
    if args.girth > 4:
        graph = improve_girth(graph, args.girth, args.max_swaps, rng)
    graph.save(args.out)
    print(f"wrote {args.out}: n={graph.n} m={graph.m} degrees=({graph.delta_v},{graph.delta_c}) girth={girth(graph)}")
    return 0


def cmd_product(args) -> int:
    try:
        graph = TannerGraph.load(args.graph)
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {args.graph}: {exc}") from exc
    code = write_code_file(graph, args.out, args.code_id)
    print(f"wrote {args.out}: [[{code.n_qubits},{code.k}]] id={code.code_id}")
    return 0


def cmd_rank(args) -> int:
    graphs = []
    for path in args.graphs:
        try:
            graphs.append(TannerGraph.load(path))
        except OSError as exc:
            raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    if args.trials < 1:
        raise ConfigError("trials must be at least 1")
    ranked = rank_classical_codes(graphs, args.p, args.trials, args.seed)
    rows = []
    for pos, rc in enumerate(ranked, 1):
        rows.append({"rank": pos, "graph": args.graphs[rc.index], "failures": rc.failures,
                     "trials": rc.trials, "block_error_rate": rc.block_error_rate, "girth": girth(rc.graph)})
        print(f"{pos:3d}  {args.graphs[rc.index]}  {rc.failures}/{rc.trials}  girth={girth(rc.graph)}")
    if args.out:
        for r in rows:
            r["girth"] = None if math.isinf(r["girth"]) else r["girth"]
        Path(args.out).write_text(json.dumps({"p": args.p, "seed": args.seed, "ranking": rows}, indent=1) + "\n")
    return 0


def _sweep_config(args, noisy: bool) -> SweepConfig:
    return SweepConfig(
        codes=tuple(args.codes),
        decoder=args.decoder,
        p_grid=args.p_grid,
        trials=args.trials,
        rounds=args.rounds if noisy else (),
        max_failures=args.max_failures or None,
        seed=args.seed,
        out=args.out,
        final_decoder=getattr(args, "final_decoder", "heurbp-ssf"),
        p_syndrome=getattr(args, "p_syndrome", None),
        sector=args.sector,
        t_max=args.t_max,
        block_size=args.block_size,
        workers=args.workers,
    )


def _print_estimates(estimates) -> None:
    for e in estimates:
        print(f"{e.code_id:>12} n={e.n_qubits} k={e.k} {e.decoder} p={e.p:g} T={e.T}: "
              f"{e.failures}/{e.trials} wer={e.wer:.4g} [{e.ci_low:.4g}, {e.ci_high:.4g}]")


def _print_table(table) -> None:
    for T, b in table:
        est = "-" if b.estimate is None else f"{b.estimate:.4g}"
        print(f"T={T}: threshold in [{_fmt(b.low)}, {_fmt(b.high)}] estimate {est}")


def cmd_sweep(args, noisy: bool = False) -> int:
    config = _sweep_config(args, noisy)
    estimates = run_sweep(config)
    _print_estimates(estimates)
    if len(config.codes) > 1:
        _print_table(threshold_table(estimates))
    return 0


def cmd_threshold(args) -> int:
    estimates = []
    for path in args.results:
        estimates.extend(read_results(path))
    if args.decoder:
        estimates = [e for e in estimates if e.decoder == args.decoder]
    labels = {e.decoder for e in estimates}
    if len(labels) > 1:
        raise ConfigError(f"results mix decoders {sorted(labels)}; pick one with --decoder")
    table = threshold_table(estimates)
    if not table:
        raise ConfigError("need results for at least two block sizes at a common T")
    _print_table(table)
    if args.out:
        doc = {"decoder": labels.pop(), "brackets": [bracket_dict(T, b) for T, b in table]}
        Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen-code":
            return cmd_gen_code(args)
        if args.command == "product":
            return cmd_product(args)
        if args.command == "rank":
            return cmd_rank(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "noisy-sweep":
            return cmd_sweep(args, noisy=True)
        if args.command == "threshold":
            return cmd_threshold(args)
    except (ConfigError, GraphGenerationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
