from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import List, Optional

from hierassoclib import Bench
from hierassoclib.Semiring import Semiring
from hierassoclib.helpers import BenchConfig, BenchError, ConfigurationError, cut_presets, default_config_path, _parse_int_list


def _count(text:str) -> int:
    #Accepts plain integers as well as 1e7-style counts.
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    return int(value)

def _add_common_arguments(parser:argparse.ArgumentParser):
    parser.add_argument("--scale", type=int, help="R-MAT scale: 2**scale vertices (default 22)")
    parser.add_argument("--edges", type=_count, help="Total edges per instance (default 1e7)")
    parser.add_argument("--batch", type=_count, help="Edges per batch (default 1e5)")
    parser.add_argument("--probs", help="R-MAT quadrant probabilities a,b,c,d (default 0.57,0.19,0.19,0.05)")
    parser.add_argument("--seed", type=int, help="Base seed; instance i uses seed+i (default 0)")
    parser.add_argument("--cuts", help=f"Cut values as a comma-separated list, or a preset: {', '.join(cut_presets)} (default many-narrow)")
    parser.add_argument("--layers", type=int, help="Use the default geometric cut schedule with this many layers")
    parser.add_argument("--semiring", help=f"One of {', '.join(Semiring.names())} (default plus_times)")
    parser.add_argument("--warmup", type=int, help="Batches left out of cum_rate (default 2)")
    parser.add_argument("--out", help="Directory for the CSV and JSON outputs")
    parser.add_argument("--dump-triples", dest="dump_triples", help="Also write instance 0's edge stream to this TSV file")
    parser.add_argument("--config", help=f"JSON config file. Flags win over it. Default: {default_config_path()} if it exists")
    parser.add_argument("--verify", dest="verify", action="store_true", default=None,
                        help="Check the final flush against a flat fold of the stream (runs up to 1e6 edges)")
    parser.add_argument("--no-verify", dest="verify", action="store_false", help="Skip the flat-fold check")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Streaming update benchmark for hierarchical associative arrays.")
    subparsers = parser.add_subparsers(dest="command", metavar="{single,scaling,sweep}")
    subparsers.required = True

    single = subparsers.add_parser("single", help="One instance: per-batch instantaneous and cumulative update rates")
    _add_common_arguments(single)

    scaling = subparsers.add_parser("scaling", help="P share-nothing instances in parallel processes: aggregate update rate")
    _add_common_arguments(scaling)
    scaling.add_argument("--instances", default="1",
                         help="Number of instances P, or a comma-separated list of counts to compare (default 1)")

    sweep = subparsers.add_parser("sweep", help="Compare cut presets on the identical stream")
    _add_common_arguments(sweep)
    sweep.add_argument("--presets", nargs="+", default=list(cut_presets.keys()),
                       help="Presets or comma-separated cut lists to compare (at least two; default: all presets)")
    return parser

def build_config(args:argparse.Namespace, instances:Optional[int] = None) -> BenchConfig:
    """
    Merges, from lowest to highest priority: BenchConfig defaults, the config file, the command-line flags.
    """
    overrides = dict(scale=args.scale, total_edges=args.edges, batch_size=args.batch, probs=args.probs, seed=args.seed,
                     cuts=args.cuts, layers=args.layers, semiring=args.semiring, warmup_batches=args.warmup,
                     out_dir=args.out, dump_triples=args.dump_triples, verify=args.verify, instances=instances)
    path = args.config
    if path is None and os.path.isfile(default_config_path()):
        path = default_config_path()
    if path is not None:
        logging.info(f"Using config file {path}")
        return BenchConfig.from_json(path, **overrides)
    return BenchConfig.from_dict({}, **overrides)

def _print_instance_summary(report:Bench.RunReport):
    for result in report.instances:
        slope = "n/a" if result.trend_slope is None else f"{result.trend_slope:+.3f}"
        print(f"instance {result.instance}: {result.total_edges} edges, cum_rate {result.final_cum_rate:,.0f} updates/s, "
              f"inst_rate {result.min_inst_rate:,.0f}..{result.max_inst_rate:,.0f}, trend slope {slope}, "
              f"layers {result.layer_nnz}, cascades {result.cascades}, flush nnz {result.flush_nnz}, verified {result.oracle_match}")

def _run(args:argparse.Namespace) -> List[Bench.RunReport]:
    if args.command == "single":
        report = Bench.run_single(build_config(args))
        _print_instance_summary(report)
        return [report]

    if args.command == "scaling":
        counts = _parse_int_list(args.instances)
        if not counts or any(count < 1 for count in counts):
            raise ConfigurationError(f"--instances needs positive counts, got '{args.instances}'.")
        if len(counts) == 1:
            report = Bench.run_scaling(build_config(args, counts[0]))
            _print_instance_summary(report)
            print(f"aggregate rate {report.aggregate_rate:,.0f} updates/s over {len(report.instances)} instances")
            return [report]
        reports = Bench.run_scaling_series(build_config(args, counts[0]), counts)
        for report in reports:
            print(f"P={len(report.instances)}: aggregate rate {report.aggregate_rate:,.0f} updates/s")
        return reports

    report = Bench.run_sweep(build_config(args), args.presets)
    for row in report.sweep_rows:
        print(f"{row.preset} [{row.cuts}]: cum_rate {row.final_cum_rate:,.0f} updates/s, "
              f"inst_rate {row.min_inst_rate:,.0f}..{row.max_inst_rate:,.0f}, cascades {row.cascades}, flush nnz {row.flush_nnz}")
    return [report]

def main(argv:Optional[List[str]] = None) -> int:
    """
    Entry point of the bench command.

    Returns:
        int: 0 on success, 1 on any error (including a failed flat-fold check). Usage errors exit with 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        reports = _run(args)
    except (ValueError, OSError, BenchError) as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"bench: error: {e}", file=sys.stderr)
        return 1

    if any(report.verified is False for report in reports):
        print("bench: error: the flushed array does not match the flat fold of the stream", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
